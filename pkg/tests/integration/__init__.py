"""Integration tests for service interactions"""
