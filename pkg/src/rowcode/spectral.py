"""Perron eigentheory for graph presentations: capacity and maxentropic chains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError, is_irreducible


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MarkovChainOnGraph:
    transition: np.ndarray
    stationary: np.ndarray
    entropy_bits: float
    perron_value: float | None = None
    right_eigvec: np.ndarray | None = None


def _power(a: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    # Iterate with A + I: same Perron vector, and primitive even when A is periodic.
    n = a.shape[0]
    b = a + np.eye(n)
    x = np.ones(n)
    lam = 0.0
    for _ in range(max_iter):
        y = b @ x
        lam_shift = y.max()
        y /= lam_shift
        if np.max(np.abs(y - x)) <= tol:
            x = y
            lam = lam_shift - 1.0
            break
        x = y
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    # one Rayleigh-quotient polish on the unshifted matrix
    lam = float((x @ (a @ x)) / (x @ x))
    return lam, x / x.max()


def perron(a, tol: float = 1e-13, max_iter: int = 1_000_000) -> tuple[float, np.ndarray]:
    """Perron value and right Perron vector (max entry 1) of an irreducible matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError("adjacency matrix must be square")
    if not is_irreducible(Graph.from_adjacency(a.astype(np.int64))):
        raise GraphError("matrix is not irreducible")
    return _power(a, tol, max_iter)


def left_perron(a, tol: float = 1e-13, max_iter: int = 1_000_000) -> np.ndarray:
    return perron(np.asarray(a, dtype=float).T, tol, max_iter)[1]


def capacity_bits(g: Graph) -> float:
    lam, _ = perron(g.adjacency)
    return float(np.log2(lam))


def stationary_distribution(q) -> np.ndarray:
    """Left eigenvector of an irreducible stochastic matrix, normalized to sum 1."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    # pi (Q - I) = 0 with sum(pi) = 1, solved in the least-squares sense
    lhs = np.vstack([(q - np.eye(n)).T, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return pi


def chain_entropy(a, q, pi) -> float:
    """Entropy (bits per step) of a stationary chain spreading q[i,j] evenly over a[i,j] parallel edges."""
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = q > 0
    terms = np.zeros_like(q)
    terms[mask] = q[mask] * np.log2(q[mask] / a[mask])
    return float(-(np.asarray(pi) @ terms.sum(axis=1)))


def maxentropic_chain(g: Graph) -> MarkovChainOnGraph:
    a = g.adjacency.astype(float)
    lam, x = perron(a)
    y = left_perron(a)
    q = a * x[None, :] / (lam * x[:, None])
    pi = y * x
    pi /= pi.sum()
    return MarkovChainOnGraph(
        transition=q,
        stationary=pi,
        entropy_bits=chain_entropy(a, q, pi),
        perron_value=lam,
        right_eigvec=x,
    )


def markov_chain(g: Graph, q) -> MarkovChainOnGraph:
    """Wrap an arbitrary stationary chain supported on the edges of ``g``."""
    q = np.asarray(q, dtype=float)
    a = g.adjacency
    if q.shape != a.shape:
        raise GraphError("transition matrix shape does not match the graph")
    if np.any((q > 0) & (a == 0)):
        raise GraphError("transition matrix puts mass on a non-edge")
    if not np.allclose(q.sum(axis=1), 1.0, atol=1e-9):
        raise GraphError("transition matrix rows must sum to 1")
    pi = stationary_distribution(q)
    return MarkovChainOnGraph(transition=q, stationary=pi, entropy_bits=chain_entropy(a, q, pi))
