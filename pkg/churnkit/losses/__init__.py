"""
Loss functions: the churn-reducing regularised log-losses, the reject-option losses and the batch softmax losses for
retrieval
"""
