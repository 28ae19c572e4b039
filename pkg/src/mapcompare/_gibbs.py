"""Hot inner loop of the collapsed Gibbs sampler.

The same kernel body runs either numba-jitted (default) or as plain Python,
selected once at import time by the MAPCOMPARE_NO_NUMBA environment variable.
Both paths consume the same pre-drawn uniform stream and execute identical
arithmetic, so results are bit-identical across paths.
"""

import os

__all__ = ["gibbs_sweep", "USING_NUMBA", "gibbs_sweep_py", "gibbs_sweep_jit"]


def gibbs_sweep_py(tokens, doc_of, z, n_dt, n_tw, n_t, alpha, beta, uniforms, p_buf):
    """One full sweep: resample every token's topic in corpus order.

    tokens, doc_of: int32[n_tokens]  flattened corpus
    z:              int32[n_tokens]  current topic labels (mutated)
    n_dt:           int64[N, k]      doc-topic counts (mutated)
    n_tw:           int64[k, V]      topic-term counts (mutated)
    n_t:            int64[k]         topic totals (mutated)
    uniforms:       float64[n_tokens] one uniform draw per token
    p_buf:          float64[k]       scratch for the cumulative conditional
    """
    k = n_dt.shape[1]
    vbeta = n_tw.shape[1] * beta
    for j in range(tokens.shape[0]):
        d = doc_of[j]
        w = tokens[j]
        t = z[j]
        n_dt[d, t] -= 1
        n_tw[t, w] -= 1
        n_t[t] -= 1
        total = 0.0
        for tt in range(k):
            total += (n_dt[d, tt] + alpha) * (n_tw[tt, w] + beta) / (n_t[tt] + vbeta)
            p_buf[tt] = total
        u = uniforms[j] * total
        t_new = k - 1
        for tt in range(k):
            if u < p_buf[tt]:
                t_new = tt
                break
        z[j] = t_new
        n_dt[d, t_new] += 1
        n_tw[t_new, w] += 1
        n_t[t_new] += 1


gibbs_sweep_jit = None
USING_NUMBA = False

if os.environ.get("MAPCOMPARE_NO_NUMBA", "") not in ("1", "true", "yes"):
    try:
        from numba import njit

        gibbs_sweep_jit = njit(cache=True)(gibbs_sweep_py)
        USING_NUMBA = True
    except ImportError:
        pass

gibbs_sweep = gibbs_sweep_jit if USING_NUMBA else gibbs_sweep_py
