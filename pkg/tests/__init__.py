"""
All the unit tests go here
"""
