"""Encoding and successive-cancellation decoding of cyclic polar codes.

Block convention: a length-l block maps inputs ``x`` to outputs
``y = l^{-1} F'_l x`` (then a per-output twiddle), so input i is recovered as
the evaluation ``x_i = y(w^i)`` of the untwiddled output polynomial.  With the
first r inputs known, the untwiddled outputs form a known coset of a
Reed-Solomon code whose parity checks sit at w^0 .. w^{r-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ERASED, symbol_posteriors
from .gf import FieldSpec
from .gfft import TransformPlan, fft_staged
from .polar_design import PolarDesign, design_with_info


class BlockFailure(Exception):
    """A small block could not be decoded; the caller passes an erasure."""


@dataclass(frozen=True)
class MessageLayout:
    design: PolarDesign
    payload: np.ndarray

    def spectrum(self) -> np.ndarray:
        d = self.design
        payload = np.asarray(self.payload, dtype=np.int64)
        if payload.shape != (d.k,):
            raise ValueError(f"payload needs {d.k} symbols, got {payload.shape}")
        if payload.size and (payload.min() < 0 or payload.max() >= d.plan.field.q):
            raise ValueError("payload symbol outside the field")
        u = np.zeros(d.n, dtype=np.int64)
        u[d.info_set] = payload
        return u


def encode(msg: MessageLayout) -> np.ndarray:
    """Codeword v = F_N^{-1} u, u zero on the frozen set."""
    return fft_staged(msg.spectrum(), msg.design.plan, inverse=True)


def extract_spectrum(v, plan: TransformPlan) -> np.ndarray:
    return fft_staged(np.asarray(v, dtype=np.int64), plan, inverse=False)


# ---------------------------------------------------------------------------
# polynomial helpers on python int lists (lowest degree first)

def _peval(f: FieldSpec, c, x):
    acc = 0
    for a in reversed(c):
        acc = f.add(f.mul(acc, x), a)
    return acc


def _pmul(f: FieldSpec, a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = f.add(out[i + j], f.mul(ai, bj))
    return out


def _pderiv(f: FieldSpec, c):
    out = []
    for k in range(1, len(c)):
        # k * c_k as a repeated sum
        kk = k % f.p
        out.append(f.mul(c[k], kk) if kk else 0)
    return out or [0]


def _syndromes(f: FieldSpec, recv, known, w):
    """S_i = recv(w^i) - u_i for i < r."""
    out = []
    for i, ui in enumerate(known):
        out.append(f.sub(_peval(f, recv, f.pow(w, i)), int(ui)))
    return out


def _forney_values(f: FieldSpec, synd, lam, positions, w):
    """Error values at ``positions`` for locator ``lam``; b = 0 syndromes."""
    r = len(synd)
    omega = _pmul(f, synd, lam)[:r]
    dlam = _pderiv(f, lam)
    vals = []
    for p in positions:
        xk = f.pow(w, p)
        xinv = f.inv(xk)
        den = _peval(f, dlam, xinv)
        if den == 0:
            raise BlockFailure("repeated locator root")
        num = f.mul(xk, _peval(f, omega, xinv))
        vals.append(f.neg(f.div(num, den)))
    return vals


def forney_erase_block(y, known, ellroot: int, f: FieldSpec) -> list:
    """Fill the erasures of an untwiddled block output from its first r inputs.

    ``y`` holds l symbols with ``ERASED`` markers; ``known`` is u_0..u_{r-1}.
    Raises :class:`BlockFailure` when more than r symbols are erased.
    """
    f = f.py
    y = [int(v) for v in y]
    known = [int(v) for v in known]
    erased = [p for p, v in enumerate(y) if v == ERASED]
    if not erased:
        return y
    if len(erased) > len(known):
        raise BlockFailure(f"{len(erased)} erasures exceed {len(known)} known inputs")
    recv = [0 if v == ERASED else v for v in y]
    synd = _syndromes(f, recv, known, ellroot)
    lam = [1]
    for p in erased:
        lam = _pmul(f, lam, [1, f.neg(f.pow(ellroot, p))])
    vals = _forney_values(f, synd, lam, erased, ellroot)
    for p, e in zip(erased, vals):
        y[p] = f.neg(e)  # received zero minus error value
    return y


def bm_decode_block(y, known, ellroot: int, f: FieldSpec) -> list:
    """Errors-and-erasures decoding of an untwiddled block output.

    Succeeds when 2t + e <= r for t errors and e erasures; returns the
    corrected output list, otherwise raises :class:`BlockFailure`.  A
    miscorrection is returned like a success.
    """
    f = f.py
    y = [int(v) for v in y]
    known = [int(v) for v in known]
    ell = len(y)
    r = len(known)
    erased = [p for p, v in enumerate(y) if v == ERASED]
    rho = len(erased)
    if rho > r:
        raise BlockFailure("too many erasures")
    recv = [0 if v == ERASED else v for v in y]
    synd = _syndromes(f, recv, known, ellroot)
    if rho == 0 and not any(synd):
        return recv
    gamma = [1]
    for p in erased:
        gamma = _pmul(f, gamma, [1, f.neg(f.pow(ellroot, p))])
    lam = gamma[:]
    bpoly = gamma[:]
    L = rho
    for k in range(rho, r):
        delta = 0
        for j, lj in enumerate(lam):
            if lj and k - j >= 0:
                delta = f.add(delta, f.mul(lj, synd[k - j]))
        shifted = [0] + bpoly
        if delta == 0:
            bpoly = shifted
            continue
        upd = lam + [0] * max(0, len(shifted) - len(lam))
        for j, bj in enumerate(shifted):
            if bj:
                upd[j] = f.sub(upd[j], f.mul(delta, bj))
        if 2 * (L - rho) <= k - rho:
            inv_d = f.inv(delta)
            bpoly = [f.mul(inv_d, c) for c in lam]
            L = (k + 1) - (L - rho)
        else:
            bpoly = shifted
        lam = upd
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    deg = len(lam) - 1
    if deg != L or 2 * (L - rho) + rho > r:
        raise BlockFailure("locator degree inconsistent")
    roots = [p for p in range(ell) if _peval(f, lam, f.inv(f.pow(ellroot, p))) == 0]
    if len(roots) != deg:
        raise BlockFailure("locator does not split over the block positions")
    vals = _forney_values(f, synd, lam, roots, ellroot)
    out = recv[:]
    for p, e in zip(roots, vals):
        out[p] = f.sub(out[p], e)
    if _syndromes(f, out, known, ellroot) != [0] * r:
        raise BlockFailure("correction does not satisfy the parity checks")
    return out


# ---------------------------------------------------------------------------
# successive-cancellation engine for erasure and hard decisions

class _StageTables:
    """Per-stage powers used to untwiddle and evaluate block outputs."""

    def __init__(self, plan: TransformPlan, m: int):
        f = plan.field
        lay = plan.stage(m)
        ell = lay.ell
        self.lay = lay
        self.w = plan.stage_roots[m - 1]
        lw = f.log(lay.omega_stage)
        jj = np.arange(ell)
        # untwiddle factor for output j of block b: omega_stage^{+j tw_b}
        self.untw = f.exp(lw * (jj[None, :] * lay.tw[:, None]))
        self.retw = f.exp(-lw * (jj[None, :] * lay.tw[:, None]))
        e = np.outer(jj, jj)
        self.eval_mat = f.exp(f.log(self.w) * e) if ell > 1 else np.ones((1, 1), dtype=np.int64)
        self.enc = plan.small_dft(m, inverse=True)


def forney_erase_batch(yp, known, positions, ellroot: int, f: FieldSpec) -> np.ndarray:
    """Vectorized Forney fill-in for many blocks sharing one erasure pattern.

    ``yp`` is (k, l) with zeros at the erased ``positions``; ``known`` is
    (k, r) with r >= len(positions).  Returns ``yp`` with the erasures filled.
    """
    g = f.py
    ell = yp.shape[1]
    r = known.shape[1]
    w = ellroot
    W = np.array([[g.pow(w, i * p) for p in range(ell)] for i in range(r)], dtype=np.int64)
    synd = f.sub(f.matvec(W, yp.T).T, known)                      # (k, r)
    lam = [1]
    for p in positions:
        lam = _pmul(g, lam, [1, g.neg(g.pow(w, p))])
    # omega = synd * lam mod x^r
    omega = np.zeros_like(synd)
    for t, lt in enumerate(lam):
        if lt and t < r:
            omega[:, t:] = f.add(omega[:, t:], f.mul(lt, synd[:, :r - t]))
    dlam = _pderiv(g, lam)
    out = yp.copy()
    for p in positions:
        xk = g.pow(w, p)
        xinv = g.inv(xk)
        scale = g.neg(g.div(xk, _peval(g, dlam, xinv)))
        pw = np.array([g.pow(xinv, i) for i in range(r)], dtype=np.int64)
        om = f.sum(f.mul(omega, pw[None, :]), axis=1)
        out[:, p] = f.neg(f.mul(scale, om))
    return out


class _HardSC:
    """SC decoder over a batch of codewords (columns of the layer arrays)."""

    def __init__(self, design: PolarDesign, mode: str):
        self.d = design
        self.plan = design.plan
        self.f = self.plan.field
        self.mode = mode
        self.frozen = design.frozen_mask
        self.truth = None
        self.tabs = [None] + [_tables(self.plan, m) for m in range(1, self.plan.n_stages + 1)]
        self.n_error = None
        self.n_erase = None

    def run(self, y):
        plan = self.plan
        n = plan.n_stages
        y = np.asarray(y, dtype=np.int64)
        single = y.ndim == 1
        if single:
            y = y[:, None]
        T = y.shape[1]
        if n == 0:
            out = y.copy()
            if self.frozen[0]:
                out[0] = 0
            return out[:, 0] if single else out
        self.T = T
        self.val = [np.full((plan.n_len, T), ERASED, dtype=np.int64) for _ in range(n)] + [y.copy()]
        if self.mode == "erasure":
            self.rec = [None] + [np.zeros((plan.stage(m).inputs.shape[0], T, plan.factors[m - 1]), dtype=np.int64)
                                 for m in range(1, n + 1)]
            self.has_rec = [None] + [np.zeros((plan.stage(m).inputs.shape[0], T), dtype=bool)
                                     for m in range(1, n + 1)]
        self.tree = plan.sc_tree
        self._sub(0)
        return self.val[0][:, 0] if single else self.val[0]

    def _sub(self, node):
        m, blocks, kids = self.tree[node]
        f = self.f
        t = self.tabs[m]
        lay = t.lay
        ell = lay.ell
        T = self.T
        nb = blocks.size
        outs_idx = lay.outputs[blocks]                        # (nb, l)
        out = self.val[m][outs_idx].transpose(0, 2, 1)          # (nb, T, l)
        er = out == ERASED
        yp = f.mul(np.where(er, 0, out), t.untw[blocks][:, None, :])
        nu = er.sum(axis=2)                                     # (nb, T)
        ins = lay.inputs[blocks]
        below = self.val[m - 1]
        prefix_ok = np.ones((nb, T), dtype=bool)
        for j in range(ell):
            known = below[ins[:, :j]].transpose(0, 2, 1)         # (nb, T, j)
            est = self._decode_input(m, blocks, j, yp, er, nu, prefix_ok, known)
            pos = ins[:, j]
            if m == 1:
                if self.truth is not None:
                    tr = self.truth[pos]
                    self.n_erase[pos] += (est == ERASED).sum(axis=1)
                    self.n_error[pos] += ((est != ERASED) & (est != tr)).sum(axis=1)
                    est = tr
                below[pos] = np.where(self.frozen[pos][:, None], 0, est)
            else:
                below[pos] = est
                self._sub(kids[j])
            prefix_ok &= below[pos] != ERASED
        if prefix_ok.any():
            bi, ti = np.nonzero(prefix_ok)
            xs = below[ins[bi], ti[:, None]]                    # (k, l)
            enc = f.matvec(t.enc, xs.T).T
            self.val[m][outs_idx[bi], ti[:, None]] = f.mul(enc, t.retw[blocks[bi]])

    def _decode_input(self, m, blocks, j, yp, er, nu, prefix_ok, known):
        f = self.f
        t = self.tabs[m]
        est = np.full(nu.shape, ERASED, dtype=np.int64)
        if self.mode == "erasure":
            ok = prefix_ok & (nu <= j)
            clean = ok & (nu == 0)
            if clean.any():
                est[clean] = f.sum(f.mul(yp[clean], t.eval_mat[j][None, :]), axis=1)
            need = ok & (nu > 0)
            if not need.any():
                return est
            rec = self.rec[m]
            has = self.has_rec[m]
            bi, ti = np.nonzero(need)
            gb = blocks[bi]
            fresh = ~has[gb, ti]
            if fresh.any():
                fb, ft, fbi = gb[fresh], ti[fresh], bi[fresh]
                masks = er[fbi, ft]
                keys = masks.dot(1 << np.arange(masks.shape[1], dtype=np.int64))
                for key in np.unique(keys):
                    sel = keys == key
                    positions = np.flatnonzero(masks[np.flatnonzero(sel)[0]])
                    rows = yp[fbi[sel], ft[sel]]
                    kn = known[fbi[sel], ft[sel]]
                    rec[fb[sel], ft[sel]] = forney_erase_batch(rows, kn, positions, t.w, f)
                has[fb, ft] = True
            est[bi, ti] = f.sum(f.mul(rec[gb, ti], t.eval_mat[j][None, :]), axis=1)
            return est
        # hard decisions: parity check first, algebraic decoding where needed
        cand = prefix_ok & (nu <= j)
        if not cand.any():
            return est
        vals = f.sum(f.mul(yp[:, :, None, :], t.eval_mat[None, None, :j + 1, :]), axis=3)
        quiet = cand & (nu == 0)
        if j:
            quiet &= ~np.any(f.sub(vals[:, :, :j], known) != 0, axis=2)
        est[quiet] = vals[quiet][:, j]
        for bi, ti in zip(*np.nonzero(cand & ~quiet)):
            row = np.where(er[bi, ti], ERASED, yp[bi, ti])
            try:
                fixed = bm_decode_block(row, known[bi, ti], t.w, f)
            except BlockFailure:
                continue
            est[bi, ti] = int(f.sum(f.mul(np.asarray(fixed, dtype=np.int64), t.eval_mat[j])))
        return est


_TABLE_CACHE: dict = {}


def _tables(plan: TransformPlan, m: int) -> _StageTables:
    key = (id(plan), m)
    hit = _TABLE_CACHE.get(key)
    if hit is None or hit[0] is not plan:
        hit = (plan, _StageTables(plan, m))
        _TABLE_CACHE[key] = hit
    return hit[1]


def sc_decode_erasure(y, design: PolarDesign) -> np.ndarray:
    """SC erasure decoding; returns the spectrum with ``ERASED`` where unrecovered.

    ``y`` may be one received word or an (N, T) batch with one word per column.
    """
    return _HardSC(design, "erasure").run(y)


def sc_decode_hard(y, design: PolarDesign) -> np.ndarray:
    """SC errors-and-erasures decoding; undecided symbols come back ``ERASED``.

    Accepts a single word or an (N, T) batch like :func:`sc_decode_erasure`.
    """
    return _HardSC(design, "hard").run(y)


def block_failed(u_hat, u, design: PolarDesign):
    """True when any information symbol is erased or wrong (per column for batches)."""
    a = design.info_set
    bad = np.asarray(u_hat)[a] != np.asarray(u)[a]
    return bool(bad.any()) if bad.ndim == 1 else bad.any(axis=0)


def genie_hard_statistics(plan: TransformPlan, channel, trials: int, rng,
                          mode: str = "hard", batch: int = 256):
    """Empirical (p_error, p_erasure) per spectrum coordinate with genie-supplied prefixes."""
    from .channels import apply_channel
    d = design_with_info(plan, np.arange(plan.n_len))
    q = plan.field.q
    dec = _HardSC(d, mode)
    dec.n_error = np.zeros(plan.n_len, dtype=np.int64)
    dec.n_erase = np.zeros(plan.n_len, dtype=np.int64)
    done = 0
    while done < trials:
        T = min(batch, trials - done)
        u = rng.integers(0, q, (plan.n_len, T))
        v = fft_staged(u, plan, inverse=True)
        y = apply_channel(channel, v.reshape(-1), rng, q=q).reshape(v.shape)
        dec.truth = u
        dec.run(y)
        done += T
    return np.stack([dec.n_error / trials, dec.n_erase / trials], axis=1)


# ---------------------------------------------------------------------------
# soft decoding for radix-2 codes over prime fields

class _SoftSC:
    def __init__(self, design: PolarDesign):
        plan = design.plan
        f = plan.field
        if f.m != 1:
            raise ValueError("soft decoding needs a prime field")
        if any(ell != 2 for ell in plan.factors):
            raise ValueError("soft decoding needs every factor equal to 2")
        self.d = design
        self.plan = plan
        self.f = f
        q = f.q
        self.q = q
        self.frozen = design.frozen_mask
        self.half = f.inv(2)
        vals = np.arange(q)
        self.stage = []
        for m in range(1, plan.n_stages + 1):
            lay = plan.stage(m)
            lw = f.log(lay.omega_stage)
            c = f.exp(-lw * lay.tw)            # output-1 twiddle per block
            cinv = f.inv(c)
            # x0 = out0 + c^{-1} out1; P of c^{-1} out1 at value z is P_out1(c z)
            idx_scaled = f.mul(c[:, None], vals[None, :])
            self.stage.append((lay, c, idx_scaled))
        self.vals = vals
        self.flagged = False

    def run(self, post):
        plan = self.plan
        n = plan.n_stages
        N = plan.n_len
        self.prob = [None] * (n + 1)
        self.prob[n] = np.asarray(post, dtype=float).copy()
        for m in range(n):
            self.prob[m] = np.zeros((N, self.q))
        self.hard = [np.zeros(N, dtype=np.int64) for _ in range(n + 1)]
        self.flagged = False
        if n == 0:
            return np.array([0 if self.frozen[0] else int(np.argmax(post[0]))])
        self.tree = plan.sc_tree
        self._sub(0)
        return self.hard[0]

    def _norm(self, p):
        s = p.sum(axis=1, keepdims=True)
        bad = s[:, 0] <= 0
        if bad.any():
            self.flagged = True
            p[bad] = 1.0 / self.q
            s[bad] = 1.0
        return p / s

    def _sub(self, node):
        m, blocks, kids = self.tree[node]
        f = self.f
        q = self.q
        lay, c, idx_scaled = self.stage[m - 1]
        outs = lay.outputs[blocks]
        ins = lay.inputs[blocks]
        p0 = self.prob[m][outs[:, 0]]
        p1 = self.prob[m][outs[:, 1]]
        # input 0 = out0 + c^{-1} out1: circular convolution
        p1s = np.take_along_axis(p1, idx_scaled[blocks], axis=1)
        px0 = np.fft.irfft(np.fft.rfft(p0, axis=1) * np.fft.rfft(p1s, axis=1), n=q, axis=1)
        px0 = self._norm(np.clip(px0, 0.0, None))
        self._descend(m, kids, 0, ins[:, 0], px0)
        x0 = self.hard[m - 1][ins[:, 0]]
        # input 1 given x0: out0 = h(x0 + x1), out1 = c h (x0 - x1)
        h = self.half
        a0 = f.mul(h, (x0[:, None] + self.vals[None, :]) % q)
        a1 = f.mul(f.mul(c[blocks], h)[:, None], (x0[:, None] - self.vals[None, :]) % q)
        px1 = self._norm(np.take_along_axis(p0, a0, axis=1) * np.take_along_axis(p1, a1, axis=1))
        self._descend(m, kids, 1, ins[:, 1], px1)
        x1 = self.hard[m - 1][ins[:, 1]]
        o0 = f.mul(h, (x0 + x1) % q)
        o1 = f.mul(f.mul(c[blocks], h), (x0 - x1) % q)
        self.hard[m][outs[:, 0]] = o0
        self.hard[m][outs[:, 1]] = o1

    def _descend(self, m, kids, j, pos, p):
        if m == 1:
            dec = np.argmax(p, axis=1)  # first maximum = lowest value on ties
            dec[self.frozen[pos]] = 0
            self.hard[0][pos] = dec
        else:
            self.prob[m - 1][pos] = p
            self._sub(kids[j])


def sc_decode_soft(y, design: PolarDesign, channel=None, return_flag: bool = False):
    """Soft SC decoding of a radix-2 prime-field code.

    ``y`` is either the received symbols (``channel`` then gives the
    transition model) or an (N, q) array of channel posteriors.
    """
    dec = _SoftSC(design)
    y = np.asarray(y)
    if y.ndim == 1:
        if channel is None:
            raise ValueError("channel model required to turn symbols into posteriors")
        post = symbol_posteriors(y, design.plan.field.q, channel)
    else:
        post = y
    u = dec.run(post)
    return (u, dec.flagged) if return_flag else u


# ---------------------------------------------------------------------------
# standard binary polar code (Arikan kernel, natural order) for comparisons

def binary_polar_rates(n: int, eps: float) -> np.ndarray:
    """BEC erasure rates of the 2^n synthetic channels of u G^{(x)n}, natural order."""
    r = np.array([float(eps)])
    for _ in range(n):
        # the newest index bit is the least significant one
        r = np.stack([2 * r - r * r, r * r], axis=1).reshape(-1)
    return r


def binary_polar_encode(u) -> np.ndarray:
    x = np.asarray(u, dtype=np.int64).copy()
    n = x.size
    step = 1
    while step < n:
        x = x.reshape(-1, 2, step)
        x[:, 0, :] ^= x[:, 1, :]
        x = x.reshape(-1)
        step *= 2
    return x


def binary_polar_decode_erasure(y, frozen_mask) -> np.ndarray:
    """SC decoding over the BEC; returns bits with ``ERASED`` where unknown."""
    y = np.asarray(y, dtype=np.int64)
    frozen_mask = np.asarray(frozen_mask, dtype=bool)

    def xor_e(a, b):
        return np.where((a == ERASED) | (b == ERASED), ERASED, a ^ b)

    def rec(yv, fr):
        if yv.size == 1:
            u = np.array([0]) if fr[0] else yv.copy()
            return u, u.copy()
        h = yv.size // 2
        y1, y2 = yv[:h], yv[h:]
        ua, a = rec(xor_e(y1, y2), fr[:h])
        # second half: y2 and y1 xor a both observe b
        alt = xor_e(y1, a)
        b_obs = np.where(y2 != ERASED, y2, alt)
        ub, b = rec(b_obs, fr[h:])
        return np.concatenate([ua, ub]), np.concatenate([xor_e(a, b), b])

    u, _ = rec(y, frozen_mask)
    return u
