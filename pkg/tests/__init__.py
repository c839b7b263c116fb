"""Test suite for QinPredict"""
