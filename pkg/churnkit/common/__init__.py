"""
Configuration and logging infrastructure shared by the command line tools
"""
