"""Random regular spatially coupled LDPC ensembles on erasure channels.

A ``(dv, dc, w, L, M)`` ensemble has ``M`` variable nodes (VNs) at each of
the spatial positions ``1..L`` and ``M*dv/dc`` check nodes (CNs) at each of
the positions ``1..L+w-1``.  Every CN offers ``dc`` sockets, so a CN position
owns ``M*dv`` sockets.  A VN at position z sends its ``dv`` edges into CN
positions ``z..z+w-1``; the per-edge offsets form the VN's constellation.

Indices are 0-based throughout: VN ``(z-1)*M + k`` is the k-th VN of
position z and CN ``(c-1)*Mc + j`` the j-th CN of position c.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from ._peel import peel_residual

FLAVORS = ("random", "poisson", "random-multiedge", "expurgated")


class SamplingStall(RuntimeError):
    """The sampler ran out of its retry budget; the parameters are too tight."""


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class EnsembleParams:
    dv: int
    dc: int
    w: int
    M: int
    L: int | None = None
    flavor: str = "random"

    def __post_init__(self):
        dv, dc, w, M = self.dv, self.dc, self.w, self.M
        if self.flavor not in FLAVORS:
            raise EnsembleError(f"unknown flavor '{self.flavor}', expected one of {FLAVORS}")
        if dv < 3:
            raise EnsembleError("dv must be at least 3")
        if w <= 1:
            raise EnsembleError("coupling width w must exceed 1")
        if dc < 2 or M < 1:
            raise EnsembleError("dc >= 2 and M >= 1 required")
        if (M * dv) % dc:
            raise EnsembleError(f"M*dv = {M * dv} is not a multiple of dc = {dc}")
        if w * M <= 2 * (dv + 1) * dc:
            raise EnsembleError(f"need w*M > 2(dv+1)dc = {2 * (dv + 1) * dc}")
        if self.L is not None and self.L < 1:
            raise EnsembleError("L must be positive")

    @property
    def mc(self) -> int:
        """CNs per spatial position."""
        return self.M * self.dv // self.dc

    @property
    def sockets_per_position(self) -> int:
        return self.M * self.dv

    def require_L(self) -> int:
        if self.L is None:
            raise EnsembleError("this operation needs the spatial length L")
        return self.L

    @property
    def n_vn(self) -> int:
        return self.require_L() * self.M

    @property
    def n_cn_positions(self) -> int:
        return self.require_L() + self.w - 1

    @property
    def n_cn(self) -> int:
        return self.n_cn_positions * self.mc

    def with_(self, **kw) -> "EnsembleParams":
        d = dict(dv=self.dv, dc=self.dc, w=self.w, M=self.M, L=self.L, flavor=self.flavor)
        d.update(kw)
        return EnsembleParams(**d)


# ---------------------------------------------------------------------------
# graphs

@dataclass(frozen=True, eq=False)
class TannerGraph:
    """An immutable sampled graph.

    ``vn_cn[v]`` lists the CNs of VN v (one entry per edge).  A graph may
    cover only the VN positions ``z_lo..z_lo+n_vn/M-1``; campaigns use such
    windows when the erased VNs all live there, since the decoder never
    looks at unerased VNs.
    """

    params: EnsembleParams
    vn_cn: np.ndarray
    z_lo: int = 1
    seed: int | None = None

    def __post_init__(self):
        self.vn_cn.setflags(write=False)

    @property
    def n_vn(self) -> int:
        return self.vn_cn.shape[0]

    @property
    def n_cn(self) -> int:
        return self.params.n_cn

    @property
    def is_full(self) -> bool:
        return self.z_lo == 1 and self.n_vn == self.params.n_vn

    @cached_property
    def vn_pos(self) -> np.ndarray:
        return self.z_lo + np.arange(self.n_vn) // self.params.M

    def cn_pos(self, c):
        return np.asarray(c) // self.params.mc + 1

    @cached_property
    def constellations(self) -> np.ndarray:
        """Per-edge offsets ``c_k - z`` in ``0..w-1``."""
        return self.cn_pos(self.vn_cn) - self.vn_pos[:, None]

    @cached_property
    def types(self) -> np.ndarray:
        """Type of every VN: how many of its edges use each offset."""
        w = self.params.w
        off = self.constellations
        return np.stack([(off == i).sum(axis=1) for i in range(w)], axis=1)

    def cn_degrees(self) -> np.ndarray:
        return np.bincount(self.vn_cn.ravel(), minlength=self.n_cn)

    def has_multi_edges(self) -> bool:
        s = np.sort(self.vn_cn, axis=1)
        return bool((s[:, 1:] == s[:, :-1]).any())

    def four_cycles(self) -> np.ndarray:
        """VN pairs (a < b) sharing at least two distinct CNs."""
        return _four_cycle_pairs(self.vn_cn, self.n_cn)

    def to_text(self) -> str:
        p = self.params
        if not self.is_full:
            raise EnsembleError("only complete graphs can be serialized")
        head = f"{p.dv} {p.dc} {p.w} {p.L} {p.M} {p.flavor} {self.seed if self.seed is not None else -1}"
        v = np.repeat(np.arange(self.n_vn), p.dv)
        body = "\n".join(f"{a} {b}" for a, b in zip(v.tolist(), self.vn_cn.ravel().tolist()))
        return head + "\n" + body + "\n"

    @staticmethod
    def from_text(text: str) -> "TannerGraph":
        lines = text.strip().splitlines()
        dv, dc, w, L, M, flavor, seed = lines[0].split()
        p = EnsembleParams(int(dv), int(dc), int(w), int(M), int(L), flavor)
        e = np.array([ln.split() for ln in lines[1:]], dtype=np.int64).reshape(-1, 2)
        if e.shape[0] != p.n_vn * p.dv:
            raise EnsembleError(f"expected {p.n_vn * p.dv} edges, found {e.shape[0]}")
        order = np.argsort(e[:, 0], kind="stable")
        vn = e[order, 0]
        if not np.array_equal(vn, np.repeat(np.arange(p.n_vn), p.dv)):
            raise EnsembleError("every VN needs exactly dv edges")
        s = int(seed)
        return TannerGraph(p, e[order, 1].reshape(p.n_vn, p.dv).copy(), 1, None if s < 0 else s)


def _four_cycle_pairs(vn_cn, n_cn) -> np.ndarray:
    n, dv = vn_cn.shape
    # distinct (vn, cn) incidences
    inc = np.unique(np.stack([np.repeat(np.arange(n), dv), vn_cn.ravel()], axis=1), axis=0)
    order = np.argsort(inc[:, 1], kind="stable")
    v = inc[order, 0]
    c = inc[order, 1]
    starts = np.flatnonzero(np.r_[True, c[1:] != c[:-1]])
    ends = np.r_[starts[1:], c.size]
    pairs = []
    for deg in np.unique(ends - starts):
        if deg < 2:
            continue
        grp = starts[(ends - starts) == deg]
        members = v[grp[:, None] + np.arange(deg)]
        a, b = np.triu_indices(deg, 1)
        pairs.append(np.stack([members[:, a].ravel(), members[:, b].ravel()], axis=1))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.sort(np.concatenate(pairs), axis=1)
    uniq, cnt = np.unique(pairs, axis=0, return_counts=True)
    return uniq[cnt >= 2]


# ---------------------------------------------------------------------------
# sampling

def sample_graph(params: EnsembleParams, rng, positions=None, seed=None,
                 budget: int = 200_000) -> TannerGraph:
    """Draw a graph from the flavor's ensemble.

    ``positions=(z_lo, z_hi)`` samples only the VNs of those spatial
    positions (inclusive); their joint law equals that of the same VNs in a
    complete sample.
    """
    L = params.require_L()
    z_lo, z_hi = positions if positions is not None else (1, L)
    if not 1 <= z_lo <= z_hi <= L:
        raise EnsembleError(f"positions {z_lo}..{z_hi} outside 1..{L}")
    if params.flavor == "poisson":
        vn_cn = _sample_poisson(params, rng, z_lo, z_hi)
    else:
        s = _SocketSampler(params, rng, z_lo, z_hi, budget)
        if params.flavor != "random-multiedge":
            s.remove_multi_edges()
        if params.flavor == "expurgated":
            s.remove_four_cycles()
        vn_cn = s.vn_cn()
    return TannerGraph(params, vn_cn, z_lo, seed)


def expurgate(graph: TannerGraph, rng, budget: int = 200_000) -> TannerGraph:
    """Return a girth-6 version of a random-flavor graph by local edge swaps."""
    p = graph.params
    s = _SocketSampler.from_graph(graph, rng, budget)
    s.remove_multi_edges()
    s.remove_four_cycles()
    return TannerGraph(p.with_(flavor="expurgated"), s.vn_cn(), graph.z_lo, graph.seed)


def _sample_poisson(p: EnsembleParams, rng, z_lo, z_hi):
    # each VN picks dv distinct CNs uniformly from its w*Mc window; loads are unbounded
    n = (z_hi - z_lo + 1) * p.M
    win = p.w * p.mc
    base = (z_lo - 1 + np.arange(n) // p.M) * p.mc
    pick = rng.integers(0, win, (n, p.dv))
    while True:
        s = np.sort(pick, axis=1)
        bad = (s[:, 1:] == s[:, :-1]).any(axis=1)
        if not bad.any():
            break
        pick[bad] = rng.integers(0, win, (int(bad.sum()), p.dv))
    return base[:, None] + pick


class _SocketSampler:
    """Socket-level sampler for the random ensemble.

    Every VN position spreads its ``M*dv`` edges evenly over the ``w`` CN
    positions of its window (a random shuffle of the offsets), so each
    interior CN position receives exactly ``M*dv`` edges.  Inside a CN
    position the edges occupy a uniformly random set of sockets.  Repairs
    swap two sockets of the same CN position, which keeps every degree and
    the locality window intact.
    """

    def __init__(self, p: EnsembleParams, rng, z_lo, z_hi, budget, sock=None):
        self.p = p
        self.rng = rng
        self.z_lo = z_lo
        self.budget = budget
        S = p.sockets_per_position
        self.S = S
        nz = z_hi - z_lo + 1
        self.n_vn = nz * p.M
        if sock is None:
            sock = self._draw(nz)
        self.sock = sock
        self.owner = np.full((p.L + p.w - 1) * S, -1, dtype=np.int64)
        self.owner[sock] = np.arange(sock.size)

    @classmethod
    def from_graph(cls, g: TannerGraph, rng, budget):
        p = g.params
        dc = p.dc
        # reconstruct a socket assignment: fill each CN's sockets in edge order
        cn = g.vn_cn.ravel()
        order = np.argsort(cn, kind="stable")
        rank = np.empty_like(order)
        starts = np.r_[0, np.cumsum(np.bincount(cn, minlength=p.n_cn))[:-1]]
        rank[order] = np.arange(cn.size) - starts[cn[order]]
        if rank.max(initial=0) >= dc:
            raise EnsembleError("graph has a CN with more than dc edges")
        sock = cn * dc + rank
        z_hi = g.z_lo + g.n_vn // p.M - 1
        return cls(p, rng, g.z_lo, z_hi, budget, sock)

    def _draw(self, nz):
        p, rng, S, w = self.p, self.rng, self.S, self.p.w
        per, extra = divmod(S, w)
        base = np.repeat(np.arange(w), per)
        offs = np.empty((nz, S), dtype=np.int64)
        for i in range(nz):
            tail = rng.choice(w, extra, replace=False) if extra else np.empty(0, dtype=np.int64)
            offs[i] = rng.permutation(np.concatenate([base, tail]))
        cpos = (self.z_lo - 1 + np.arange(nz))[:, None] + offs   # 0-based CN position
        cpos = cpos.ravel()
        sock = np.empty(cpos.size, dtype=np.int64)
        for c in np.unique(cpos):
            idx = np.flatnonzero(cpos == c)
            if idx.size > S:
                raise SamplingStall(f"CN position {c + 1} received {idx.size} > {S} edges")
            sock[idx] = c * S + rng.choice(S, idx.size, replace=False)
        return sock

    def vn_cn(self):
        return (self.sock // self.p.dc).reshape(self.n_vn, self.p.dv)

    # -- helpers -------------------------------------------------------
    def _cns(self, v):
        dv = self.p.dv
        return self.sock[v * dv:(v + 1) * dv] // self.p.dc

    def _spend(self):
        self.budget -= 1
        if self.budget < 0:
            raise SamplingStall("retry budget exhausted")

    def _swap(self, e, t):
        """Move edge e to socket t, swapping with t's occupant if any."""
        s = self.sock[e]
        e2 = self.owner[t]
        self.sock[e] = t
        self.owner[t] = e
        self.owner[s] = e2
        if e2 >= 0:
            self.sock[e2] = s
        return e2

    def _propose(self, e):
        c = self.sock[e] // self.S
        return int(c * self.S + self.rng.integers(self.S))

    def _multi(self, v) -> bool:
        c = self._cns(v)
        return np.unique(c).size < c.size

    # -- multi-edges ---------------------------------------------------
    def remove_multi_edges(self):
        dv = self.p.dv
        s = np.sort(self.vn_cn(), axis=1)
        bad = np.flatnonzero((s[:, 1:] == s[:, :-1]).any(axis=1))
        for v in bad.tolist():
            while self._multi(v):
                c = self._cns(v).tolist()
                k = next(i for i in range(dv) if c[i] in c[:i])
                e = v * dv + k
                old = int(self.sock[e])
                t = self._propose(e)
                e2 = self.owner[t]
                if e2 == e:
                    self._spend()
                    continue
                u = e2 // dv if e2 >= 0 else -1
                u_was_multi = u >= 0 and self._multi(u)
                self._swap(e, t)
                ok = np.unique(self._cns(v)).size > len(set(c))
                if ok and u >= 0 and u != v:
                    ok = u_was_multi or not self._multi(u)
                if not ok:
                    self._swap(e, old)
                self._spend()

    # -- girth ---------------------------------------------------------
    def _nbrs(self, c):
        dc = self.p.dc
        own = self.owner[c * dc:(c + 1) * dc]
        return own[own >= 0] // self.p.dv

    def _cycles(self, v) -> int:
        """Excess sharing: sum over other VNs of (CNs shared with v) - 1, where positive."""
        seen = {}
        for c in set(self._cns(v).tolist()):
            for u in set(self._nbrs(c).tolist()):
                if u != v:
                    seen[u] = seen.get(u, 0) + 1
        return sum(n - 1 for n in seen.values() if n >= 2)

    def remove_four_cycles(self):
        dv = self.p.dv
        while True:
            pairs = _four_cycle_pairs(self.vn_cn(), self.p.n_cn)
            if pairs.size == 0:
                return
            for a, b in pairs.tolist():
                v = int(self.rng.choice((a, b)))
                while self._cycles(v):
                    e = v * dv + int(self.rng.integers(dv))
                    old = int(self.sock[e])
                    t = self._propose(e)
                    e2 = self.owner[t]
                    self._spend()
                    if e2 == e:
                        continue
                    u = e2 // dv if e2 >= 0 else -1
                    before = self._cycles(v) + (self._cycles(u) if u >= 0 and u != v else 0)
                    self._swap(e, t)
                    ok = not self._multi(v) and (u < 0 or not self._multi(u))
                    if ok:
                        after = self._cycles(v) + (self._cycles(u) if u >= 0 and u != v else 0)
                        ok = after < before
                    if not ok:
                        self._swap(e, old)


# ---------------------------------------------------------------------------
# decoding and stopping sets

def peel_decode(graph: TannerGraph, erased) -> np.ndarray:
    """Peel erasures; returns the sorted residual stopping set (empty on success).

    ``erased`` is an index array or a boolean mask over the graph's VNs.
    """
    mask = np.zeros(graph.n_vn, dtype=np.uint8)
    erased = np.asarray(erased)
    if erased.dtype == bool:
        if erased.shape != (graph.n_vn,):
            raise ValueError("erasure mask has the wrong length")
        mask[erased] = 1
    else:
        mask[erased.astype(np.int64)] = 1
    return np.flatnonzero(peel_residual(graph.vn_cn, graph.n_cn, mask))


def is_stopping_set(graph: TannerGraph, vns) -> bool:
    """Every CN touching ``vns`` does so at least twice (edges counted with multiplicity)."""
    vns = np.asarray(vns, dtype=np.int64)
    if vns.size == 0:
        return True
    cnt = np.bincount(graph.vn_cn[vns].ravel(), minlength=graph.n_cn)
    return bool(np.all(cnt != 1))


def count_small_stopping_sets(graph: TannerGraph, cliques: bool = True) -> dict:
    """Census of size-2 stopping sets by type and of size-(dv+1) sets inside one position.

    Keys ``"(1,i)"`` count VN pairs with identical CN neighbourhoods whose
    positions differ by ``i-1``; key ``"size<dv+1>"`` counts the minimal
    (dv+1)-sets in which every pair of VNs shares exactly one CN; pass
    ``cliques=False`` to skip that slower search.
    """
    p = graph.params
    out = {f"(1,{i})": 0 for i in range(1, p.w + 1)}
    nb = np.sort(graph.vn_cn, axis=1)
    key, inv = np.unique(nb, axis=0, return_inverse=True)
    inv = inv.ravel()
    counts = np.bincount(inv)
    pos = graph.vn_pos
    for g in np.flatnonzero(counts >= 2).tolist():
        members = np.flatnonzero(inv == g)
        for a, b in combinations(members.tolist(), 2):
            out[f"(1,{abs(int(pos[a]) - int(pos[b])) + 1})"] += 1
    if cliques:
        out[f"size{p.dv + 1}"] = _count_clique_sets(graph)
    return out


def _count_clique_sets(graph: TannerGraph) -> int:
    p = graph.params
    dv = p.dv
    total = 0
    cn_sets = [frozenset(r) for r in graph.vn_cn.tolist()]
    for z in np.unique(graph.vn_pos).tolist():
        vns = np.flatnonzero(graph.vn_pos == z)
        sub = graph.vn_cn[vns]
        # VN pairs of this position sharing exactly one CN
        flat = sub.ravel()
        owner = np.repeat(vns, dv)
        order = np.argsort(flat, kind="stable")
        adj = {int(v): set() for v in vns}
        fs, os_ = flat[order], owner[order]
        starts = np.flatnonzero(np.r_[True, fs[1:] != fs[:-1]])
        ends = np.r_[starts[1:], fs.size]
        for s, e in zip(starts.tolist(), ends.tolist()):
            grp = sorted(set(os_[s:e].tolist()))
            for a, b in combinations(grp, 2):
                if len(cn_sets[a] & cn_sets[b]) == 1:
                    adj[a].add(b)
                    adj[b].add(a)
        target = dv * (dv + 1) // 2

        def grow(clique, cand):
            nonlocal total
            if len(clique) == dv + 1:
                union = {}
                for v in clique:
                    for c in graph.vn_cn[v].tolist():
                        union[c] = union.get(c, 0) + 1
                if len(union) == target and all(n == 2 for n in union.values()):
                    total += 1
                return
            for u in sorted(cand):
                grow(clique + [u], {x for x in cand if x > u and x in adj[u]})

        for v in vns.tolist():
            grow([v], {u for u in adj[v] if u > v})
    return total


# ---------------------------------------------------------------------------
# closed-form analysis

@dataclass
class BoundReport:
    formula: str
    inputs: dict
    value: float
    components: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"formula": self.formula, "inputs": self.inputs,
                           "value": self.value, "components": self.components})


def _params_dict(p: EnsembleParams) -> dict:
    return {"dv": p.dv, "dc": p.dc, "w": p.w, "L": p.L, "M": p.M, "flavor": p.flavor}


def p_size2(p: EnsembleParams, form: str = "exact") -> float:
    """Probability that two VNs of one position form a size-2 stopping set.

    ``exact`` evaluates T_ss / T with the full sum over how many of the
    second VN's edges land on the first VN's CNs; ``approx`` keeps only the
    dominant product; ``poisson`` is the Poisson-ensemble value
    1 / C(w*M*dv/dc, dv).
    """
    dv, dc, w, M = p.dv, p.dc, p.w, p.M
    W = w * M * dv
    if form == "exact":
        t_ss = math.factorial(dv) * (dc - 1) ** dv
        t = 0
        for i in range(dv + 1):
            rest = math.prod(W - (dv + k) * dc for k in range(dv - i))
            t += (dc - 1) ** i * math.perm(dv, i) * math.comb(dv, i) * rest
        return t_ss / t
    if form == "approx":
        return math.prod((dv - i) * (dc - 1) / (W - (dv + i) * dc) for i in range(dv))
    if form == "poisson":
        return 1.0 / math.comb(w * M * dv // dc, dv)
    raise ValueError(f"unknown form '{form}'")


def p_size2_terms(p: EnsembleParams) -> tuple[int, int]:
    """The integers (T_ss, T) behind the exact form."""
    dv, dc, w, M = p.dv, p.dc, p.w, p.M
    W = w * M * dv
    t_ss = math.factorial(dv) * (dc - 1) ** dv
    t = sum((dc - 1) ** i * math.perm(dv, i) * math.comb(dv, i)
            * math.prod(W - (dv + k) * dc for k in range(dv - i)) for i in range(dv + 1))
    return t_ss, t


def type_scale(p: EnsembleParams, i: int) -> float:
    """Fraction ((w-(i-1))/w)^dv of constellations that allow a (1,i) pair."""
    if not 1 <= i <= p.w:
        raise ValueError(f"type (1,{i}) outside 1..{p.w}")
    return ((p.w - (i - 1)) / p.w) ** p.dv


def type_probability(t, dv: int, w: int) -> float:
    """p(t): share of the w^dv constellations whose offset counts equal ``t``."""
    t = [int(x) for x in t]
    if len(t) != w or sum(t) != dv or min(t) < 0:
        raise ValueError("type must hold w non-negative counts summing to dv")
    ways = math.factorial(dv)
    for x in t:
        ways //= math.factorial(x)
    return ways / w ** dv


def p_vector(p: EnsembleParams, form: str = "exact") -> tuple[np.ndarray, np.ndarray]:
    """Per-type probabilities p_(1,i) and per-position expected counts lambda_(1,i)."""
    base = p_size2(p, form)
    pv = np.array([type_scale(p, i) * base for i in range(1, p.w + 1)])
    lam = pv * p.M ** 2
    lam[0] = math.comb(p.M, 2) * base
    return pv, lam


def p_minimal_clique(p: EnsembleParams) -> float:
    """Probability that dv+1 VNs of one position form the minimal girth-6 stopping set."""
    dv, dc, w, M = p.dv, p.dc, p.w, p.M
    num = 1.0
    for i in range(1, dv + 1):
        num *= ((dc - 1) * (dv - i + 1)) ** i * math.perm(dv, i)
    den = math.prod(float(w * M * dv - j * dc) for j in range(dv * (dv + 1) // 2, dv * (dv + 1)))
    return num / den


def spbc_bound(p: EnsembleParams, expurgated: bool = False, form: str = "approx") -> BoundReport:
    """Block erasure estimate 1 - exp(-lambda_SP) when one whole position is erased."""
    if expurgated:
        pp = p_minimal_clique(p)
        lam = math.comb(p.M, p.dv + 1) * pp
        name = "spbc-expurgated"
    else:
        pp = p_size2(p, form)
        lam = math.comb(p.M, 2) * pp
        name = f"spbc-{form}"
    return BoundReport(name, _params_dict(p), -math.expm1(-lam), {"p": pp, "lambda_sp": lam})


def burst_segments(M: int, b: int, s: int) -> list[int]:
    """Lengths of the burst inside each position it touches, left to right."""
    first = min(M - s, b)
    segs = [first]
    rest = b - first
    while rest > 0:
        segs.append(min(rest, M))
        rest -= segs[-1]
    return segs


def rbc_bound(p: EnsembleParams, b: int, form: str = "approx") -> BoundReport:
    """Block erasure estimate for a burst of length b, averaged over s = 1..M.

    Pairs inside one segment use p_(1,1); pairs in segments d positions
    apart use p_(1,d+1); segments more than w-1 apart cannot share a CN.
    """
    if b < 0:
        raise ValueError("burst length must be non-negative")
    pv, _ = p_vector(p, form)
    M = p.M
    per_s = np.zeros(M)
    for s in range(1, M + 1):
        m = burst_segments(M, b, s) if b else []
        keep = 1.0
        for k, mk in enumerate(m):
            keep *= 1 - math.comb(mk, 2) * pv[0]
            for d in range(1, p.w):
                if k + d < len(m):
                    keep *= 1 - mk * m[k + d] * pv[d]
        per_s[s - 1] = 1 - keep
    return BoundReport(f"rbc-{form}", {**_params_dict(p), "b": b}, float(per_s.mean()),
                       {"p_vector": pv.tolist()})


def n2h_mean(p: EnsembleParams, form: str = "exact") -> BoundReport:
    """Expected number of size-2 stopping sets in the whole terminated code."""
    L = p.require_L()
    w = p.w
    if L < w:
        raise EnsembleError("need L >= w")
    _, lam = p_vector(p, form)
    total = L * lam[0] + (L - w + 1) * lam[1:].sum()
    # pairs near the right end that fit fewer than L-w+1 times
    for j in range(1, w - 1):
        for i in range(j + 1, w):
            total += lam[w - i]
    return BoundReport(f"n2h-{form}", _params_dict(p), float(total),
                       {"lambda": lam.tolist(), "p_zero": math.exp(-total)})


def error_floor(p: EnsembleParams, eps: float, form: str = "exact") -> BoundReport:
    """Bit erasure floor 2*lambda*eps^2/(L*M) from size-2 stopping sets."""
    if not 0 <= eps <= 1:
        raise ValueError("eps outside [0, 1]")
    lam = n2h_mean(p, form).value
    L = p.require_L()
    return BoundReport(f"floor-{form}", {**_params_dict(p), "eps": eps},
                       2 * lam * eps ** 2 / (L * p.M), {"lambda": lam})
