"""attackprints: attribute adversarial examples to the attack that produced them.

The package covers the full desk-scale pipeline: train a small victim CNN,
generate adversarial examples with five attack algorithms, extract
perturbation fingerprints with signal-processing reconstructors (JPEG
round-trip, compressed-sensing LASSO), and train/evaluate a classifier that
maps each fingerprint to an (algorithm, norm, epsilon) class.
"""

__version__ = "0.1.0"
