"""
Bearing fault diagnosis from FFT spectrum images.
"""

__version__ = "0.1.0"
