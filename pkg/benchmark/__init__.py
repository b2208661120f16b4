"""
Monte-Carlo benchmark of FastICA nonlinearities on synthetic mixtures.
"""
