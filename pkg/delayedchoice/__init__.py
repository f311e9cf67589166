"""
Delayed-choice simulator - quantum measurement order and eraser experiments
"""

__version__ = "1.0.0"
