"""User interface - command-line front end"""
