"""Density-evolution design of cyclic polar codes over the q-ary erasure channel."""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb

import numpy as np

from .gf import FieldSpec
from .gfft import TransformPlan


def psi(ell: int, j: int, eps):
    """Erasure rate of input j of a length-ell block when the first j inputs are known.

    The input is lost when fewer than ell - j of the ell outputs survive.
    Accepts an array of ``eps`` values.
    """
    if not 0 <= j < ell:
        raise IndexError(f"input index {j} out of range for block length {ell}")
    eps = np.asarray(eps, dtype=float)
    tot = np.zeros_like(eps)
    for i in range(ell - j):
        tot = tot + comb(ell, i) * (1 - eps) ** i * eps ** (ell - i)
    return tot if tot.ndim else float(tot)


def density_evolve_order(factors, eps: float) -> np.ndarray:
    """Coordinate erasure rates listed in successive-cancellation order.

    Only the distinct values of each stage are carried: after processing
    stage m there are l_m ... l_n of them.
    """
    r = np.array([float(eps)])
    for ell in reversed(list(factors)):
        nxt = np.empty((r.size, ell))
        for j in range(ell):
            nxt[:, j] = psi(ell, j, r)
        r = nxt.reshape(-1)
    return r


def density_evolve(plan: TransformPlan, eps: float) -> np.ndarray:
    """Erasure rate of every spectrum coordinate, indexed by spectrum position."""
    d = density_evolve_order(plan.factors, eps)
    out = np.empty_like(d)
    out[plan.decode_order] = d
    return out


def select_frozen(rates, delta: float) -> np.ndarray:
    """Largest greedy information set whose summed erasure rate stays within delta.

    Ties are broken by ascending index.
    """
    rates = np.asarray(rates, dtype=float)
    order = np.lexsort((np.arange(rates.size), rates))
    csum = np.cumsum(rates[order])
    k = int(np.searchsorted(csum, delta, side="right"))
    return np.sort(order[:k])


@dataclass(frozen=True, eq=False)
class PolarDesign:
    plan: TransformPlan
    design_epsilon: float
    delta: float
    info_set: np.ndarray
    coord_rates: np.ndarray
    design_channel: str = ""

    @property
    def n(self) -> int:
        return self.plan.n_len

    @property
    def k(self) -> int:
        return int(self.info_set.size)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def union_bound(self) -> float:
        return float(self.coord_rates[self.info_set].sum())

    @property
    def frozen_set(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.info_set] = False
        return np.flatnonzero(mask)

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.info_set] = False
        return mask

    def to_dict(self) -> dict:
        return {
            "field": self.plan.field.to_dict(),
            "n": self.n,
            "factors": list(self.plan.factors),
            "design_channel": self.design_channel or f"qec:{self.design_epsilon}",
            "delta": self.delta,
            "frozen_indices": self.frozen_set.tolist(),
            "info_indices": self.info_set.tolist(),
            "coord_rates": self.coord_rates.tolist(),
            "rate": self.rate,
            "union_bound": self.union_bound,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_dict(d: dict) -> "PolarDesign":
        f = FieldSpec.from_dict(d["field"])
        plan = TransformPlan.create(f, int(d["n"]), d["factors"])
        info = np.array(sorted(int(i) for i in d["info_indices"]), dtype=np.int64)
        frozen = sorted(int(i) for i in d.get("frozen_indices", []))
        if frozen and sorted(set(frozen) | set(info.tolist())) != list(range(plan.n_len)):
            raise ValueError("frozen and information indices do not partition 0..N-1")
        chan = d.get("design_channel", "")
        eps = float(chan.split(":", 1)[1]) if chan.lower().startswith(("qec:", "bec:")) else float("nan")
        return PolarDesign(plan, eps, float(d["delta"]), info,
                           np.asarray(d["coord_rates"], dtype=float), chan)


def design(plan: TransformPlan, eps: float, delta: float) -> PolarDesign:
    rates = density_evolve(plan, eps)
    return PolarDesign(plan, eps, delta, select_frozen(rates, delta), rates, f"qec:{eps}")


def design_with_info(plan: TransformPlan, info) -> PolarDesign:
    """Design with an explicitly chosen information set (rates left unknown)."""
    info = np.array(sorted(int(i) for i in info), dtype=np.int64)
    return PolarDesign(plan, float("nan"), float("nan"), info,
                       np.full(plan.n_len, np.nan), "custom")


def poly_mul(a, b, f: FieldSpec):
    """Product of coefficient arrays (lowest degree first)."""
    out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
    for i, c in enumerate(a):
        if c:
            out[i:i + len(b)] = f.add(out[i:i + len(b)], f.mul(int(c), np.asarray(b, dtype=np.int64)))
    return out


def poly_divmod(num, den, f: FieldSpec):
    num = [int(c) for c in num]
    den = [int(c) for c in den]
    while len(den) > 1 and den[-1] == 0:
        den.pop()
    inv_lead = f.inv(den[-1])
    quot = [0] * max(len(num) - len(den) + 1, 1)
    rem = num[:]
    for i in range(len(num) - len(den), -1, -1):
        c = f.mul(rem[i + len(den) - 1], inv_lead)
        quot[i] = c
        if c:
            for k, d in enumerate(den):
                rem[i + k] = f.sub(rem[i + k], f.mul(c, d))
    rem = rem[:len(den) - 1] or [0]
    return np.array(quot, dtype=np.int64), np.array(rem, dtype=np.int64)


def generator_poly(d: PolarDesign) -> np.ndarray:
    """Monic g(x) = prod over frozen i of (x - omega^i); coefficients lowest first."""
    f = d.plan.field
    g = np.array([1], dtype=np.int64)
    for i in d.frozen_set:
        root = f.pow(d.plan.omega, int(i))
        g = poly_mul(g, [f.neg(root), 1], f)
    return g


def monte_carlo_design(plan: TransformPlan, channel, trials: int, rng) -> np.ndarray:
    """Per-coordinate (p_error, p_erasure) under genie-aided hard SC decoding.

    Returns an (N, 2) array indexed by spectrum position.
    """
    from .polar_codec import genie_hard_statistics
    return genie_hard_statistics(plan, channel, trials, rng)
