"""Result table storage layer"""
