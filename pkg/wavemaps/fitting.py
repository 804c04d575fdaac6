# wavemaps/fitting.py
"""Power-law fits and bounded-ratio helpers shared by the audits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    constant: float
    rms: float
    points: int
    dropped: int = 0
    nonfinite: int = 0

    @property
    def usable(self):
        return self.points >= 2 and bool(np.isfinite(self.exponent))

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "constant": self.constant,
            "rms": self.rms,
            "points": self.points,
            "dropped": self.dropped,
            "nonfinite": self.nonfinite,
        }


def fit_power_law(x, y, log_power=0.0):
    """
    Least-squares fit of log|y| = log C + p log x (+ log_power·log log x).

    Zero, non-finite and x <= 0 samples are dropped and counted in `dropped`;
    `nonfinite` counts the nan/inf samples among them. Fewer than two usable
    points gives nan.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = (y > 0) & np.isfinite(y) & (x > 0)
    points = int(keep.sum())
    dropped = int(keep.size - points)
    nonfinite = int((~np.isfinite(y)).sum())
    if points < 2:
        return PowerFit(float("nan"), 0.0, float("nan"), points, dropped, nonfinite)
    lx = np.log(x[keep])
    ly = np.log(y[keep])
    if log_power:
        ly = ly - log_power * np.log(np.abs(np.log(x[keep])))
    A = np.stack([np.ones_like(lx), lx], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return PowerFit(float(coef[1]), float(np.exp(coef[0])), rms, points, dropped, nonfinite)


def sup_ratio(values, profile):
    values = np.abs(np.asarray(values, dtype=float))
    profile = np.asarray(profile, dtype=float)
    ok = profile > 0
    if not ok.any():
        return 0.0
    return float(np.max(values[ok] / profile[ok]))


def dyadic_times(t_start, t_end, per_octave=1):
    k0 = np.log2(t_start)
    k1 = np.log2(t_end)
    n = int(round((k1 - k0) * per_octave))
    return 2.0 ** np.linspace(k0, k1, n + 1)


def stable_under_doubling(times, values, tol=0.5):
    """Sup over the whole window against the sup over its first half."""
    times = np.asarray(times)
    values = np.abs(np.asarray(values))
    mid = times[len(times) // 2]
    first = float(np.max(values[times <= mid]))
    full = float(np.max(values))
    ratio = full / first if first > 0 else (1.0 if full == 0 else np.inf)
    return {"first_half_sup": first, "full_sup": full, "ratio": ratio, "stable": ratio <= 1 + tol}
