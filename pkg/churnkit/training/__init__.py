"""
Deterministic training of tiny models for the churn and retrieval experiments
"""
