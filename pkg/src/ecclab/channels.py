"""Channel models and the q-ary symmetric channel with erasures capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# out-of-alphabet erasure marker inside symbol arrays
ERASED = -1


class ParameterOutOfRange(ValueError):
    pass


class BurstOutOfRange(ValueError):
    pass


class NoSolution(ValueError):
    pass


@dataclass(frozen=True)
class QEC:
    epsilon: float
    kind = "qec"

    def __str__(self):
        return f"qec:{self.epsilon:g}"


@dataclass(frozen=True)
class QSC:
    beta: float
    kind = "qsc"

    def __str__(self):
        return f"qsc:{self.beta:g}"


@dataclass(frozen=True)
class QSCE:
    beta: float
    epsilon: float
    q: int | None = None  # only used by capacity queries
    kind = "qsce"

    def __str__(self):
        return f"qsce:beta={self.beta:g},eps={self.epsilon:g}"


@dataclass(frozen=True)
class BEC:
    epsilon: float
    kind = "bec"

    def __str__(self):
        return f"bec:{self.epsilon:g}"


@dataclass(frozen=True)
class SPBC:
    position: int | None = None  # 1-based spatial position; None = centre
    kind = "spbc"

    def __str__(self):
        return "spbc" if self.position is None else f"spbc:pos={self.position}"


@dataclass(frozen=True)
class RBC:
    b: int
    ell: int | None = None  # 1-based spatial position where the burst starts
    s: int | None = None    # offset in [1, M]; None = drawn per trial
    kind = "rbc"

    def __str__(self):
        out = f"rbc:b={self.b}"
        if self.ell is not None:
            out += f",l={self.ell}"
        if self.s is not None:
            out += f",s={self.s}"
        return out


def _check_prob(name, v):
    if not 0.0 <= v <= 1.0:
        raise ParameterOutOfRange(f"{name}={v} outside [0, 1]")


def validate(model):
    if isinstance(model, (QEC, BEC)):
        _check_prob("epsilon", model.epsilon)
    elif isinstance(model, QSC):
        _check_prob("beta", model.beta)
    elif isinstance(model, QSCE):
        _check_prob("beta", model.beta)
        _check_prob("epsilon", model.epsilon)
        if model.beta + model.epsilon > 1:
            raise ParameterOutOfRange("beta + epsilon > 1")
    elif isinstance(model, RBC):
        if model.b <= 0:
            raise ParameterOutOfRange("burst length must be positive")
    return model


def parse_channel(text: str):
    """Parse strings such as ``qec:0.5``, ``qsce:beta=0.5,eps=0.1`` or ``rbc:l=10,b=100``."""
    text = text.strip().lower()
    kind, _, rest = text.partition(":")
    kv = {}
    pos = []
    for part in filter(None, (p.strip() for p in rest.split(","))):
        if "=" in part:
            k, _, v = part.partition("=")
            kv[k.strip()] = v.strip()
        else:
            pos.append(part)

    def num(*names, default=None):
        for n in names:
            if n in kv:
                return float(kv.pop(n))
        if pos:
            return float(pos.pop(0))
        if default is not None:
            return default
        raise ValueError(f"channel '{text}' is missing parameter {names[0]}")

    if kind == "qec":
        m = QEC(num("eps", "epsilon"))
    elif kind == "bec":
        m = BEC(num("eps", "epsilon"))
    elif kind == "qsc":
        m = QSC(num("beta"))
    elif kind == "qsce":
        q = kv.pop("q", None)
        m = QSCE(num("beta"), num("eps", "epsilon", default=0.0), int(q) if q else None)
    elif kind == "spbc":
        p = kv.pop("pos", None) or (pos.pop(0) if pos else None)
        m = SPBC(int(p) if p is not None else None)
    elif kind == "rbc":
        ell = kv.pop("l", None) or kv.pop("ell", None)
        s = kv.pop("s", None)
        b = kv.pop("b", None) or (pos.pop(0) if pos else None)
        if b is None:
            raise ValueError("rbc channel needs b=<burst length>")
        m = RBC(int(b), int(ell) if ell else None, int(s) if s else None)
    else:
        raise ValueError(f"unknown channel kind '{kind}'")
    if kv or pos:
        raise ValueError(f"unexpected channel parameters in '{text}'")
    return validate(m)


def apply_channel(model, x, rng, q: int | None = None, geometry=None):
    """Pass symbols through a channel.

    ``q`` is the alphabet size for symbol-error channels.  Burst channels
    need ``geometry=(L, M)``: VN index ``(z-1)*M + k`` is the k-th VN of
    spatial position z.  Erased entries become ``ERASED``.
    """
    x = np.asarray(x, dtype=np.int64)
    y = x.copy()
    n = x.size
    if isinstance(model, (QEC, BEC)):
        y[rng.random(n) < model.epsilon] = ERASED
    elif isinstance(model, (QSC, QSCE)):
        if q is None:
            raise ValueError("alphabet size q required for symbol-error channels")
        eps = model.epsilon if isinstance(model, QSCE) else 0.0
        u = rng.random(n)
        err = u < model.beta
        # a uniformly chosen different symbol
        y[err] = (x[err] + rng.integers(1, q, size=int(err.sum()))) % q
        y[(u >= model.beta) & (u < model.beta + eps)] = ERASED
    elif isinstance(model, SPBC):
        L, M = geometry
        z = model.position if model.position is not None else (L + 1) // 2
        if not 1 <= z <= L:
            raise BurstOutOfRange(f"position {z} outside 1..{L}")
        y[(z - 1) * M:z * M] = ERASED
    elif isinstance(model, RBC):
        start, stop = burst_span(model, geometry, rng)
        y[start:stop] = ERASED
    else:
        raise TypeError(f"unsupported channel {model!r}")
    return y


def burst_span(model: RBC, geometry, rng=None) -> tuple[int, int]:
    """Half-open VN index range erased by a random burst."""
    L, M = geometry
    ell = model.ell if model.ell is not None else (L + 1) // 2
    s = model.s if model.s is not None else int(rng.integers(1, M + 1))
    if not 1 <= s <= M:
        raise BurstOutOfRange(f"offset s={s} outside 1..{M}")
    if model.b > (L - ell) * M - s:
        raise BurstOutOfRange(f"burst of {model.b} from position {ell}, offset {s} exceeds the code")
    start = (ell - 1) * M + s
    return start, start + model.b


def qsce_capacity(q: int, beta: float, epsilon: float) -> float:
    """Capacity of the q-ary symmetric channel with erasures, in q-ary units."""
    if beta < 0 or epsilon < 0 or beta + epsilon > 1:
        raise ParameterOutOfRange(f"beta={beta}, epsilon={epsilon}")
    if q < 2:
        raise ParameterOutOfRange("q < 2")
    a = 1.0 - epsilon - beta
    if a <= 0:
        return 0.0

    def lg(v):
        return math.log(v) / math.log(q)

    c = (1 - epsilon) + (1 - epsilon) * lg(a / (1 - epsilon))
    if beta > 0:
        c -= beta * lg(a / beta) + beta * lg(q - 1)
    return c


def qsc_shannon_limit(q: int, rate: float) -> float:
    """Largest symbol error rate beta with qsce_capacity(q, beta, 0) >= rate."""
    if not 0.0 < rate < 1.0:
        raise NoSolution(f"rate {rate} outside (0, 1)")
    hi = (q - 1) / q  # capacity vanishes here
    return brentq(lambda b: qsce_capacity(q, b, 0.0) - rate, 0.0, hi, xtol=1e-12)


def symbol_posteriors(y, q: int, model) -> np.ndarray:
    """Per-symbol probability vectors for the transmitted value given the output."""
    y = np.asarray(y, dtype=np.int64)
    beta = getattr(model, "beta", 0.0)
    keep = 1.0 - beta - getattr(model, "epsilon", 0.0) if isinstance(model, QSCE) else 1.0 - beta
    # likelihoods of an unerased output; normalized below
    p = np.full((y.size, q), beta / (q - 1) if q > 1 else 0.0)
    ok = y != ERASED
    p[np.flatnonzero(ok), y[ok]] = keep
    p[ok] /= p[ok].sum(axis=1, keepdims=True)
    p[~ok] = 1.0 / q
    return p
