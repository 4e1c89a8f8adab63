"""LSTM-GNN patient outcome prediction over diagnosis-similarity patient graphs."""

__version__ = "0.1.0"
