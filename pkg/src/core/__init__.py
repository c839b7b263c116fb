"""Risk engines: models, ruin probabilities, allocations and the Monte Carlo oracle"""
