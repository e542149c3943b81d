"""Decision procedures and replayable certificates for orbit/subvariety
intersection questions over Q: multiplicative order spectra, power-map
trichotomies, finite-place limit refutations and elliptic order spectra."""

__version__ = "0.1.0"
