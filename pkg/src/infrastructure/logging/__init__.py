"""Run audit log storage layer"""
