"""Dirichlet-mixture sequence measures, computed in the log domain.

The measure of a sequence depends only on its per-symbol counts
(exchangeability), and factorizes into sequential predictive
probabilities; both forms are provided.  The default prior puts
pseudo-count 1/2 on every symbol (the Krichevsky-Trofimov choice).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class DirichletPrior:
    """Positive per-symbol pseudo-counts over a finite alphabet."""

    pseudo_counts: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pseudo_counts, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("pseudo_counts must be a non-empty 1-D array")
        if not np.all(a > 0):
            raise ValueError("all pseudo-counts must be positive")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "pseudo_counts", a)

    @classmethod
    def symmetric(cls, alphabet_size: int, weight: float = 0.5) -> "DirichletPrior":
        if alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        return cls(np.full(alphabet_size, float(weight)))

    @property
    def alphabet_size(self) -> int:
        return int(self.pseudo_counts.size)


def _check_counts(counts, prior: DirichletPrior) -> np.ndarray:
    c = np.asarray(counts, dtype=float)
    if c.shape != prior.pseudo_counts.shape:
        raise ValueError(
            f"counts alphabet {c.shape} does not match prior alphabet "
            f"{prior.pseudo_counts.shape}"
        )
    if np.any(c < 0):
        raise ValueError("counts must be nonnegative")
    return c


def log_bayes_measure(counts, prior: DirichletPrior) -> float:
    """Log marginal probability (nats) of a count vector under the prior.

    Equals log[ G(sum a) / G(sum (c+a)) * prod_x G(c(x)+a(x)) / G(a(x)) ]
    with G the Gamma function, evaluated via log-gamma.  Zero for an
    all-zero count vector, strictly negative otherwise.
    """
    c = _check_counts(counts, prior)
    a = prior.pseudo_counts
    return float(gammaln(a.sum()) - gammaln((c + a).sum()) + (gammaln(c + a) - gammaln(a)).sum())


def predictive_probability(running_counts, symbol: int, prior: DirichletPrior) -> float:
    """Posterior predictive probability of the next symbol.

    Returns (c(symbol)+a(symbol)) / sum_x (c(x)+a(x)); the predictives over
    the alphabet sum to one, and their product along any sequence equals
    the sequence's Bayes measure.
    """
    c = _check_counts(running_counts, prior)
    if not 0 <= symbol < prior.alphabet_size:
        raise ValueError("symbol out of alphabet")
    a = prior.pseudo_counts
    return float((c[symbol] + a[symbol]) / (c.sum() + a.sum()))
