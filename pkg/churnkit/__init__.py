"""
ChurnKit: prediction churn metrics, churn-reducing losses and reproducible desk-scale experiments
"""

__version__ = '0.1.0'
