"""Small index helpers shared by the construction, codec and folded encoder."""

import numpy as np


def log2_exact(n):
    """``log2(n)`` for a power of two ``n >= 1``; raises ``ValueError`` otherwise."""
    n = int(n)
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def bit_reversal_permutation(n_bits):
    """0-based permutation ``perm[i] = reverse of the n_bits-bit expansion of i``."""
    N = 1 << n_bits
    idx = np.arange(N)
    out = np.zeros(N, dtype=np.int64)
    for b in range(n_bits):
        out |= ((idx >> b) & 1) << (n_bits - 1 - b)
    return out


def generator_matrix(N):
    """``G_N = B_N F^{(x)n}`` over GF(2) as a uint8 array."""
    n = log2_exact(N)
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    return G[bit_reversal_permutation(n)]
