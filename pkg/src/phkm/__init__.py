"""k-means clustering for persistent homology."""
