"""LAC risk - learning with augmented classes from unlabeled data."""
__version__ = "0.1.0"
