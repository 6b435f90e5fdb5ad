"""Galois-field Fourier transforms of mixed-radix length.

The staged transform follows the Kronecker-factored Cooley-Tukey form

    F_N = U_n ... U_1,
    U_m = (S_{N/p_m, l_m} D_{l_m, N/p_m} (x) I_{p_{m-1}}) (F_{l_m} (x) I_{N/l_m}),

with p_m = l_1 ... l_m.  Stage 1 (factor ``factors[0]``) sits at the spectrum
side of the inverse transform, which is where the polar code's frozen symbols
live.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .gf import FieldSpec, OrderUnavailable, prime_factors


class LengthMismatch(ValueError):
    pass


def factorize(n: int) -> list[int]:
    """Prime factorization with multiplicity, ascending."""
    out = []
    for p in prime_factors(n):
        while n % p == 0:
            out.append(p)
            n //= p
    return out


def parse_factors(text: str) -> list[int]:
    """Parse ``"3,5,17"`` or the shorthand ``"2x8"``."""
    text = text.strip().lower()
    if not text:
        raise ValueError("empty factor list")
    out = []
    for part in text.split(","):
        part = part.strip()
        if "x" in part:
            base, _, count = part.partition("x")
            out.extend([int(base)] * int(count))
        else:
            out.append(int(part))
    return out


@dataclass(frozen=True)
class StageLayout:
    """Index bookkeeping for one stage of the inverse (encoder) graph.

    ``inputs[b, j]`` is the position in layer m-1 of input j of block b and
    ``outputs[b, j]`` the position in layer m of its output j.  Output j of
    block b is scaled by ``omega_stage ** (-j * tw[b])`` after the length-l
    inverse transform.
    """

    m: int
    ell: int
    inputs: np.ndarray
    outputs: np.ndarray
    tw: np.ndarray
    omega_stage: int  # omega_N ** p_{m-1}


@dataclass(frozen=True, eq=False)
class TransformPlan:
    field: FieldSpec
    n_len: int
    factors: tuple
    omega: int
    stage_roots: tuple
    partial_products: tuple

    @staticmethod
    def create(f: FieldSpec, n_len: int, factors=None) -> "TransformPlan":
        factors = tuple(int(x) for x in (factors if factors is not None else factorize(n_len)))
        if n_len == 1:
            factors = ()
        if any(x < 2 for x in factors):
            raise ValueError("every factor must be at least 2")
        if int(np.prod(factors, dtype=object)) != n_len:
            raise ValueError(f"factors {list(factors)} do not multiply to {n_len}")
        if (f.q - 1) % n_len:
            raise OrderUnavailable(f"N={n_len} does not divide q-1={f.q - 1}")
        omega = f.root_of_unity(n_len)
        roots = tuple(f.pow(omega, n_len // ell) for ell in factors)
        pp = [1]
        for ell in factors:
            pp.append(pp[-1] * ell)
        return TransformPlan(f, n_len, factors, omega, roots, tuple(pp))

    @property
    def n_stages(self) -> int:
        return len(self.factors)

    def small_dft(self, m: int, inverse: bool = False) -> np.ndarray:
        """The l_m x l_m matrix F_l (or l^{-1} F'_l when ``inverse``)."""
        return _small_dft(self, m, inverse)

    def stage(self, m: int) -> StageLayout:
        """Layout of stage m (1-based)."""
        return self._layouts[m - 1]

    @cached_property
    def _layouts(self):
        out = []
        n = self.n_len
        for m, ell in enumerate(self.factors, start=1):
            pm1 = self.partial_products[m - 1]
            hi = n // self.partial_products[m]
            r_hi, r_lo = np.divmod(np.arange(hi * pm1), pm1)
            j = np.arange(ell)
            ins = ((j[None, :] * hi + r_hi[:, None]) * pm1 + r_lo[:, None])
            outs = ((r_hi[:, None] * ell + j[None, :]) * pm1 + r_lo[:, None])
            out.append(StageLayout(m, ell, ins, outs, r_hi,
                                   self.field.pow(self.omega, pm1)))
        return tuple(out)

    @cached_property
    def producers(self) -> tuple:
        """producers[m-1][pos]: the stage-m block whose output sits at layer-m position pos."""
        out = []
        for lay in self._layouts:
            prod = np.empty(self.n_len, dtype=np.int64)
            prod[lay.outputs] = np.arange(lay.outputs.shape[0])[:, None]
            out.append(prod)
        return tuple(out)

    def children(self, m: int, blocks: np.ndarray, j: int) -> np.ndarray:
        """Stage-(m-1) blocks that produce input j of the given stage-m blocks."""
        pos = self.stage(m).inputs[blocks, j]
        return np.unique(self.producers[m - 2][pos])

    @cached_property
    def sc_tree(self) -> tuple:
        """Successive-cancellation recursion as a flat node table.

        Node k is ``(m, blocks, kids)`` where ``kids[j]`` is the node index of
        the stage-(m-1) sub-transform fed by input j (empty at stage 1).
        Node 0 is the root at stage n.
        """
        n = self.n_stages
        nodes = []

        def build(m, blocks):
            k = len(nodes)
            nodes.append(None)
            kids = ()
            if m > 1:
                kids = tuple(build(m - 1, self.children(m, blocks, j)) for j in range(self.factors[m - 1]))
            nodes[k] = (m, blocks, kids)
            return k

        if n:
            build(n, np.arange(self.stage(n).inputs.shape[0]))
        return tuple(nodes)

    @cached_property
    def decode_order(self) -> np.ndarray:
        """Spectrum indices in the order a successive-cancellation decoder decides them.

        Entry d is the spectrum index of the d-th decided symbol, which is
        also the index produced by the compressed density-evolution recursion.
        """
        n = self.n_stages
        if n == 0:
            return np.zeros(1, dtype=np.int64)
        # walk the recursion one stage at a time, keeping groups in visiting order
        groups = [np.arange(self.stage(n).inputs.shape[0])]
        for m in range(n, 1, -1):
            groups = [self.children(m, g, j) for g in groups for j in range(self.factors[m - 1])]
        first = self.stage(1).inputs
        return np.concatenate([first[g[0]] for g in groups]).astype(np.int64)

    def __repr__(self):
        return f"TransformPlan({self.field}, N={self.n_len}, factors={list(self.factors)})"


def _small_dft(plan: TransformPlan, m: int, inverse: bool) -> np.ndarray:
    f = plan.field
    ell = plan.factors[m - 1]
    w = plan.stage_roots[m - 1]
    if inverse:
        w = f.inv(w)
    e = np.outer(np.arange(ell), np.arange(ell))
    mat = np.array([[f.pow(w, int(k)) for k in row] for row in e], dtype=np.int64)
    if inverse:
        mat = f.mul(mat, f.inv(ell % f.p))
    return mat


def perfect_shuffle(a: int, b: int, x):
    """S_{a,b}: write x column-wise into an a x b matrix, read it row-wise."""
    x = np.asarray(x)
    if x.shape[0] != a * b:
        raise LengthMismatch(f"length {x.shape[0]} != {a}*{b}")
    return x.reshape((b, a) + x.shape[1:]).swapaxes(0, 1).reshape(x.shape)


def twiddle_scale(a: int, b: int, x, inverse: bool, f: FieldSpec):
    """D_{a,b} (or its inverse): element i scaled by w_{ab}^{floor(i/b)(i mod b)}."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape[0] != a * b:
        raise LengthMismatch(f"length {x.shape[0]} != {a}*{b}")
    w = f.root_of_unity(a * b)
    i = np.arange(a * b)
    e = (i // b) * (i % b)
    if inverse:
        e = -e
    scale = f.exp(e * f.log(w))
    return f.mul(scale.reshape((-1,) + (1,) * (x.ndim - 1)), x)


def _vandermonde(plan: TransformPlan, inverse: bool) -> np.ndarray:
    f = plan.field
    n = plan.n_len
    e = np.outer(np.arange(n), np.arange(n)) % n
    lw = f.log(plan.omega)
    if inverse:
        lw = -lw
    return f.exp(e * lw)


def dft_naive(x, plan: TransformPlan):
    """u_i = sum_j omega^{ij} x_j, O(N^2)."""
    x = np.asarray(x, dtype=np.int64)
    return plan.field.matvec(_vandermonde(plan, False), x)


def idft_naive(x, plan: TransformPlan):
    f = plan.field
    x = np.asarray(x, dtype=np.int64)
    y = f.matvec(_vandermonde(plan, True), x)
    return f.mul(y, f.inv(plan.n_len % f.p))


def fft_staged(x, plan: TransformPlan, inverse: bool = False, trace=None):
    """Staged transform; equals ``dft_naive`` (or ``idft_naive``).

    If ``trace`` is a list, the number of length-l sub-transforms evaluated
    at every stage is appended to it.
    """
    f = plan.field
    x = np.asarray(x, dtype=np.int64)
    if x.shape[0] != plan.n_len:
        raise LengthMismatch(f"block length {x.shape[0]} != N={plan.n_len}")
    n = plan.n_len
    batch = x.shape[1:]
    for m, ell in enumerate(plan.factors, start=1):
        pm1 = plan.partial_products[m - 1]
        hi = n // plan.partial_products[m]
        mat = plan.small_dft(m, inverse)
        # (F_l (x) I_{N/l})
        y = f.matvec(mat, x.reshape((ell, n // ell) + batch))
        if trace is not None:
            trace.append(n // ell)
        y = y.reshape((ell * hi, pm1) + batch)
        # (S D (x) I_{p_{m-1}}) acting on the leading index
        y = twiddle_scale(ell, hi, y, inverse, f)
        y = perfect_shuffle(hi, ell, y)
        x = y.reshape((n,) + batch)
    return x
