"""Fairness-adjusted ASR scoring: alignment, disparity models, leaderboard."""

__version__ = "0.1.0"
