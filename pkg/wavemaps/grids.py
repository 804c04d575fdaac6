# wavemaps/grids.py
"""
Sample grids in r and ξ, the field containers that live on them, and the
smooth cutoffs used for dyadic localization.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_simpson

from .exceptions import CalculusMismatch, GridError

logger = logging.getLogger(__name__)

SPACE_TAGS = ("map", "gauge")
CALCULI = ("H", "Htilde")


# ---- finite-difference weights ----
def fornberg_weights(z, x, m):
    """
    Weights for derivatives 0..m at z from values at the points x.

    Returns an array c with c[d, j] the weight of x[j] for the d-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _stencil_matrix(nodes, order, width):
    n = len(nodes)
    if n < width + 1:
        raise GridError(f"grid too coarse for a {width}-point stencil", nodes=n)
    half = 2
    rows, cols, vals = [], [], []
    for i in range(n):
        if i < half:
            idx = np.arange(0, width)
        elif i >= n - half:
            idx = np.arange(n - width, n)
        else:
            idx = np.arange(i - half, i + half + 1)
        w = fornberg_weights(nodes[i], nodes[idx], order)[order]
        rows.extend([i] * len(idx))
        cols.extend(idx.tolist())
        vals.extend(w.tolist())
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def simpson_weights(x):
    """Composite Simpson weights on arbitrary increasing nodes (odd interval count handled)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    w = np.zeros(n)
    if n == 1:
        return w
    if n == 2:
        h = x[1] - x[0]
        return np.array([h / 2, h / 2])
    h = np.diff(x)
    last = n - 1 if (n - 1) % 2 == 0 else n - 2
    for i in range(0, last - 1, 2):
        h0, h1 = h[i], h[i + 1]
        hs = h0 + h1
        w[i] += hs / 6 * (2 - h1 / h0)
        w[i + 1] += hs ** 3 / (6 * h0 * h1)
        w[i + 2] += hs / 6 * (2 - h0 / h1)
    if last != n - 1:
        h0, h1 = h[-2], h[-1]
        w[-1] += (2 * h1 ** 2 + 3 * h0 * h1) / (6 * (h0 + h1))
        w[-2] += (h1 ** 2 + 3 * h0 * h1) / (6 * h0)
        w[-3] -= h1 ** 3 / (6 * h0 * (h0 + h1))
    return w


# ---- radial grid ----
@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    grading: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        nodes.setflags(write=False)
        if nodes.ndim != 1 or len(nodes) < 6:
            raise GridError("radial grid needs at least 6 nodes")
        if nodes[0] <= 0:
            raise GridError("first radial node must be positive", first=nodes[0])
        ratios = nodes[1:] / nodes[:-1]
        if np.any(ratios <= 1.0):
            raise GridError("radial nodes must be strictly increasing")
        if self.grading.get("kind") != "uniform" and ratios.max() > 2 ** (1 / 3) + 1e-12:
            raise GridError("fewer than 3 nodes per octave", max_ratio=float(ratios.max()))

    @classmethod
    def graded(cls, r_min=1e-3, r_max=512.0, nodes_per_octave=24, h_max=0.125):
        """Geometric nodes from r_min until the spacing reaches h_max, uniform after that up to r_max."""
        if not 0 < r_min < r_max:
            raise GridError("need 0 < r_min < r_max", r_min=r_min, r_max=r_max)
        rho = 2.0 ** (1.0 / nodes_per_octave)
        r_t = h_max / (rho - 1.0)
        if r_t >= r_max:
            n = int(np.ceil(np.log(r_max / r_min) / np.log(rho)))
            nodes = np.geomspace(r_min, r_max, n + 1)
        elif r_t <= r_min:
            n = int(np.ceil((r_max - r_min) / h_max))
            nodes = np.linspace(r_min, r_max, n + 1)
        else:
            n1 = int(np.ceil(np.log(r_t / r_min) / np.log(rho)))
            head = np.geomspace(r_min, r_t, n1 + 1)
            n2 = int(np.ceil((r_max - r_t) / h_max))
            tail = np.linspace(r_t, r_max, n2 + 1)[1:]
            nodes = np.concatenate([head, tail])
        grading = {
            "kind": "graded",
            "r_min": float(r_min),
            "r_max": float(r_max),
            "nodes_per_octave": int(nodes_per_octave),
            "h_max": float(h_max),
        }
        logger.debug(f"graded radial grid with {len(nodes)} nodes, transition at r={min(r_t, r_max):.3f}")
        return cls(nodes, grading)

    @classmethod
    def uniform(cls, h, r_max):
        n = int(round(r_max / h))
        nodes = h * np.arange(1, n + 1)
        return cls(nodes, {"kind": "uniform", "h": float(h), "r_max": float(nodes[-1])})

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def size(self):
        return len(self.nodes)

    @cached_property
    def weights(self):
        """Quadrature weights for ∫_0^{R} f dr, origin segment included for integrands vanishing at 0."""
        w = simpson_weights(self.nodes)
        w[0] += self.nodes[0] / 2
        w.setflags(write=False)
        return w

    @cached_property
    def rdr_weights(self):
        w = self.weights * self.nodes
        w.setflags(write=False)
        return w

    @cached_property
    def D1(self):
        return _stencil_matrix(self.nodes, 1, 5)

    @cached_property
    def D2(self):
        return _stencil_matrix(self.nodes, 2, 6)

    @cached_property
    def digest(self):
        h = hashlib.sha256()
        h.update(self.nodes.tobytes())
        h.update(json.dumps(self.grading, sort_keys=True).encode())
        return h.hexdigest()

    def describe(self):
        return {**self.grading, "n_nodes": self.size, "digest": self.digest}

    def integrate(self, f):
        return float(self.weights @ np.asarray(f))

    def integrate_rdr(self, f):
        return float(self.rdr_weights @ np.asarray(f))

    def _origin_piece(self, f):
        r0, r1 = self.nodes[0], self.nodes[1]
        f0, f1 = f[..., 0], f[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.log(np.abs(f1 / f0)) / np.log(r1 / r0)
        p = np.where(np.isfinite(p) & (f0 * f1 > 0) & (p > -0.9), p, 1.0)
        return f0 * r0 / (p + 1.0)

    def cumulative_from_zero(self, f):
        """∫_0^r f ds at each node; near 0 the integrand is treated as a power law."""
        f = np.asarray(f, dtype=float)
        body = cumulative_simpson(f, x=self.nodes, axis=-1, initial=0)
        return body + self._origin_piece(f)[..., None]

    def cumulative_to_edge(self, f, tail=0.0):
        """∫_r^{R_max} f ds (+ tail) at each node, accumulated from the far end."""
        f = np.asarray(f, dtype=float)
        rev = cumulative_simpson(f[..., ::-1], x=self.nodes[::-1], axis=-1, initial=0)
        out = -rev[..., ::-1]
        if np.ndim(tail):
            return out + np.asarray(tail, dtype=float)[..., None]
        return out + tail

    def derivative(self, f):
        return self.D1 @ np.asarray(f)

    def second_derivative(self, f):
        return self.D2 @ np.asarray(f)


# ---- frequency grid ----
@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    xi: np.ndarray
    weights: np.ndarray
    k_min: int
    k_max: int
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)
        if np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
            raise GridError("frequency nodes must be positive and strictly increasing")
        if self.k_min >= self.k_max:
            raise GridError("need k_min < k_max", k_min=self.k_min, k_max=self.k_max)

    @classmethod
    def dyadic(cls, k_min=-8, k_max=8, nodes_per_octave=16, max_spacing=None):
        """
        Nodes uniform in s = log ξ + ξ/β on [2^k_min, 2^k_max].

        Geometric at low frequency; once ξ exceeds β the spacing saturates at
        ``max_spacing`` so oscillating time factors e^{itξ} stay resolved.
        """
        if nodes_per_octave < 16:
            raise GridError("need at least 16 nodes per ξ-octave", nodes_per_octave=nodes_per_octave)
        ds = np.log(2.0) / nodes_per_octave
        beta = np.inf if max_spacing is None else max_spacing / ds

        def s_of(x):
            return np.log(x) + (0.0 if np.isinf(beta) else x / beta)

        s0, s1 = s_of(2.0 ** k_min), s_of(2.0 ** k_max)
        n = int(np.ceil((s1 - s0) / ds))
        n += n % 2
        s = np.linspace(s0, s1, n + 1)
        if np.isinf(beta):
            y = s.copy()
        else:
            bs = beta * s
            y = np.where(bs > 1, np.minimum(s, np.log(np.maximum(bs, 1.0))), s)
            for _ in range(60):
                e = np.exp(y) / beta
                y = y - (y + e - s) / (1.0 + e)
        xi = np.exp(y)
        xi[0], xi[-1] = 2.0 ** k_min, 2.0 ** k_max
        h = s[1] - s[0]
        ws = np.full(n + 1, 2.0)
        ws[1::2] = 4.0
        ws[0] = ws[-1] = 1.0
        ws *= h / 3
        jac = xi if np.isinf(beta) else xi * beta / (beta + xi)
        descriptor = {
            "kind": "dyadic",
            "k_min": int(k_min),
            "k_max": int(k_max),
            "nodes_per_octave": int(nodes_per_octave),
            "max_spacing": None if max_spacing is None else float(max_spacing),
        }
        return cls(xi, ws * jac, int(k_min), int(k_max), descriptor)

    @property
    def size(self):
        return len(self.xi)

    @cached_property
    def dyadic_index(self):
        return np.rint(np.log2(self.xi)).astype(int)

    @cached_property
    def digest(self):
        h = hashlib.sha256()
        h.update(self.xi.tobytes())
        h.update(json.dumps(self.descriptor, sort_keys=True).encode())
        return h.hexdigest()

    def describe(self):
        return {**self.descriptor, "n_nodes": self.size, "digest": self.digest}

    def block_range(self):
        return range(self.k_min, self.k_max + 1)

    def cutoff(self, k):
        return dyadic_cutoff(self.xi, k, self.k_min, self.k_max)


# ---- smooth cutoffs ----
def _bump_tail(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(y):
    """C^∞ step: 1 for y ≤ 0, 0 for y ≥ 1."""
    a = _bump_tail(1.0 - np.asarray(y, dtype=float))
    b = _bump_tail(np.asarray(y, dtype=float))
    return a / (a + b)


def dyadic_cutoff(xi, k, k_min=None, k_max=None):
    """χ_k(ξ) supported in [2^{k-1}, 2^{k+1}]; the end blocks absorb everything beyond them."""
    x = np.log2(np.asarray(xi, dtype=float))
    upper = smooth_step(x - k)
    lower = smooth_step(x - k + 1)
    if k_max is not None and k >= k_max:
        upper = np.ones_like(x)
    if k_min is not None and k <= k_min:
        lower = np.zeros_like(x)
    return upper - lower


def radial_cutoff(r, M):
    """χ_{≲M}(r): 1 for r ≤ M, 0 for r ≥ 2M."""
    return smooth_step(np.log2(np.asarray(r, dtype=float) / M))


# ---- fields ----
@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray
    space_tag: str = "gauge"
    topological: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.space_tag not in SPACE_TAGS:
            raise GridError(f"unknown space tag {self.space_tag!r}")
        if values.shape != self.grid.nodes.shape:
            raise GridError("field does not match its grid", values=values.shape, nodes=self.grid.nodes.shape)
        if not np.all(np.isfinite(values)):
            raise GridError("field has non-finite samples")
        if self.topological:
            if self.space_tag != "map":
                raise GridError("only map-tagged fields carry a topological flag")
            if abs(values[0]) > 0.05 or abs(values[-1] - np.pi) > 0.05:
                raise GridError(
                    "topological map must run from 0 to π",
                    first=float(values[0]), last=float(values[-1]),
                )

    @property
    def r(self):
        return self.grid.nodes

    def like(self, values, space_tag=None, topological=False):
        return RadialField(self.grid, values, space_tag or self.space_tag, topological)

    def same_grid(self, other):
        return self.grid is other.grid or self.grid.digest == other.grid.digest


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    freq_grid: FrequencyGrid
    values: np.ndarray
    calculus: str = "Htilde"

    def __post_init__(self):
        values = np.asarray(self.values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.calculus not in CALCULI:
            raise CalculusMismatch(f"unknown calculus {self.calculus!r}")
        if values.shape[-1] != self.freq_grid.size:
            raise GridError("density does not match its frequency grid")
        if not np.all(np.isfinite(values)):
            raise GridError("density has non-finite values")

    def like(self, values):
        return SpectralDensity(self.freq_grid, values, self.calculus)

    def require(self, calculus):
        if self.calculus != calculus:
            raise CalculusMismatch(f"expected {calculus} calculus, got {self.calculus}")
        return self

    def l2_norm(self):
        return float(np.sqrt(self.freq_grid.weights @ np.abs(self.values) ** 2))
