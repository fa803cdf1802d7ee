"""Disaster-tweet sentiment analysis: corpus handling, text features, eight
classifier families, evaluation and descriptive analytics."""

__version__ = "0.1.0"
