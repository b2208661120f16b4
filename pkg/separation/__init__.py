"""
Blind source separation by symmetric FastICA with either a fixed nonlinearity or one learned from projection-binned
empirical characteristic functions.
"""
