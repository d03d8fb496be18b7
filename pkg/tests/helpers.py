"""Norm zoo and independent oracles shared by the test modules."""

from fractions import Fraction

import numpy as np

from finslerkit import Euclidean, MthRoot, PseudoEuclidean, Randers, evaluate_F2

A3 = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 1.0]])


def randers2():
    return Randers(np.eye(2), [0.5, 0.0])


def randers3():
    return Randers(A3, [0.6, -0.3, 0.2])


def randers4_strong():
    # alpha-norm of beta is 0.9
    beta = np.array([0.6, 0.5, 0.3, np.sqrt(0.81 - 0.36 - 0.25 - 0.09)])
    return Randers(np.eye(4), beta)


def quartic(n=3, weight=0.5):
    """F^4 = |v|^4 + weight * sum v_i^4."""
    terms = [(1.0, (i, i, j, j)) for i in range(n) for j in range(n)]
    terms += [(weight, (i, i, i, i)) for i in range(n)]
    return MthRoot(4, n, terms)


RANDERS = {"randers2": randers2, "randers3": randers3, "randers4": randers4_strong}
POSITIVE = {"euclidean3": lambda: Euclidean(3), **RANDERS, "quartic3": quartic}
PSEUDO = {f"pseudo_p{p}": (lambda p=p: PseudoEuclidean((-1,) * p + (1,) * (4 - p))) for p in (1, 2, 3)}
ALL = {**POSITIVE, **PSEUDO}


def fd_metric_oracle(model, v, h=1e-4):
    """Scalar-loop central second differences of F², written independently of the library."""
    v = np.asarray(v, dtype=float)
    n = v.size
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ei, ej = np.eye(n)[i] * h, np.eye(n)[j] * h
            g[i, j] = (
                evaluate_F2(model, v + ei + ej) - evaluate_F2(model, v + ei - ej)
                - evaluate_F2(model, v - ei + ej) + evaluate_F2(model, v - ei - ej)
            ) / (8 * h * h)
    return g


def exact_rank(rows):
    """Rank by Gaussian elimination over the rationals."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def antisymmetry_rows(signature):
    """Rows of a[k,l] s_l + a[l,k] s_k = 0 (k <= l) for a diagonal metric, built by hand."""
    n = len(signature)
    rows = []
    for k in range(n):
        for l in range(k, n):
            row = [0] * (n * n)
            row[k * n + l] += signature[l]
            row[l * n + k] += signature[k]
            rows.append(row)
    return rows


def classical_gram_schmidt(rows):
    """Textbook Euclidean Gram-Schmidt on row vectors."""
    out = []
    for w in np.asarray(rows, dtype=float):
        u = w - sum((w @ q) * q for q in out)
        out.append(u / np.linalg.norm(u))
    return np.array(out)


def random_basis(rng, n, max_cond=1e3):
    while True:
        b = rng.standard_normal((n, n))
        if np.linalg.cond(b) < max_cond:
            return b
