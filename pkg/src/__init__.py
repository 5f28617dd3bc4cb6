"""Noisy k-means++ lab: seeding, the adversarial sampling game, oracles and experiments."""
