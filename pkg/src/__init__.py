"""
ruinalloc - ruin probabilities, dynamic VaR and capital allocation
for multivariate Brownian and compound-Poisson risk models
"""

__version__ = "1.0.0"
__author__ = "ruinalloc developers"
