"""Pure numpy peeling, used when the compiled kernel is unavailable."""

import numpy as np


def peel_residual(vn_cn, n_cn, erased):
    """Flooding schedule: resolve every degree-one check at once until none is left."""
    vn_cn = np.asarray(vn_cn)
    res = np.array(erased, dtype=np.uint8)
    while True:
        live = np.flatnonzero(res)
        if live.size == 0:
            return res
        cns = vn_cn[live].ravel()
        cnt = np.bincount(cns, minlength=n_cn)
        acc = np.zeros(n_cn, dtype=np.int64)
        np.bitwise_xor.at(acc, cns, np.repeat(live, vn_cn.shape[1]))
        solved = acc[cnt == 1]
        if solved.size == 0:
            return res
        res[solved] = 0
