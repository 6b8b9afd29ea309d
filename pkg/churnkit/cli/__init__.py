"""
The churnkit command line tool: loss curves, bound checks and the churn and retrieval experiments
"""
