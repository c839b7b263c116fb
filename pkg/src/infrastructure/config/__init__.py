"""Model configuration storage layer"""
