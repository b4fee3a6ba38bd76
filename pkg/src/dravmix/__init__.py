"""Code-mixed Dravidian sentiment analysis: transliteration and translation
augmentation, desk-scale classifiers and a weighted-F1 experiment grid."""

__version__ = "0.1.0"
