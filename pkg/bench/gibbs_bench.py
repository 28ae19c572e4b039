"""Benchmark the Gibbs sweep kernel: numba @njit vs the pure-Python fallback.

Run:  python3 bench/gibbs_bench.py [n_docs] [doc_len] [k] [sweeps]
"""

import sys
import time

import numpy as np

from mapcompare._gibbs import gibbs_sweep_jit, gibbs_sweep_py


def make_corpus(n_docs, doc_len, vocab_size, seed=0):
    rng = np.random.Generator(np.random.Philox(key=seed))
    tokens = (rng.random(n_docs * doc_len) * vocab_size).astype(np.int32)
    doc_of = np.repeat(np.arange(n_docs, dtype=np.int32), doc_len)
    return tokens, doc_of


def run(kernel, tokens, doc_of, k, vocab_size, sweeps, seed=0):
    rng = np.random.Generator(np.random.Philox(key=seed))
    n_docs = int(doc_of[-1]) + 1
    z = np.minimum((rng.random(len(tokens)) * k).astype(np.int32), k - 1)
    n_dt = np.zeros((n_docs, k), dtype=np.int64)
    n_tw = np.zeros((k, vocab_size), dtype=np.int64)
    np.add.at(n_dt, (doc_of, z), 1)
    np.add.at(n_tw, (z, tokens), 1)
    n_t = n_tw.sum(axis=1)
    p_buf = np.empty(k)
    t0 = time.perf_counter()
    for _ in range(sweeps):
        uniforms = rng.random(len(tokens))
        kernel(tokens, doc_of, z, n_dt, n_tw, n_t, 0.1, 0.1, uniforms, p_buf)
    return time.perf_counter() - t0, z


def main():
    args = [int(a) for a in sys.argv[1:]]
    n_docs = args[0] if len(args) > 0 else 500
    doc_len = args[1] if len(args) > 1 else 50
    k = args[2] if len(args) > 2 else 20
    sweeps = args[3] if len(args) > 3 else 50
    vocab_size = 2000
    tokens, doc_of = make_corpus(n_docs, doc_len, vocab_size)
    n_tok = len(tokens)
    print(f"{n_docs} docs x {doc_len} tokens, k={k}, V={vocab_size}, {sweeps} sweeps")

    t_py, z_py = run(gibbs_sweep_py, tokens, doc_of, k, vocab_size, sweeps)
    print(f"python  : {t_py:8.3f}s  ({sweeps * n_tok / t_py / 1e6:6.2f} M tokens/s)")

    if gibbs_sweep_jit is None:
        print("numba   : unavailable (MAPCOMPARE_NO_NUMBA set or numba missing)")
        return
    run(gibbs_sweep_jit, tokens[:100], doc_of[:100], k, vocab_size, 1)  # warm up JIT
    t_nb, z_nb = run(gibbs_sweep_jit, tokens, doc_of, k, vocab_size, sweeps)
    print(f"numba   : {t_nb:8.3f}s  ({sweeps * n_tok / t_nb / 1e6:6.2f} M tokens/s)")
    print(f"speedup : {t_py / t_nb:8.1f}x")
    print(f"identical results: {np.array_equal(z_py, z_nb)}")


if __name__ == "__main__":
    main()
