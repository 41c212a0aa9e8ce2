"""Weighted inner products, codifferential, Laplacians and weighted Betti numbers."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cochain import Cochain, coboundary_matrix
from .errors import DegreeUnderflow, SpectralAmbiguity
from .measure import MeasuredComplex, chi_mu, mu
from .simplicial import LeafComplex, Simplex

CUTOFF = 1e-8
AMBIGUITY_BAND = 1e2
DENSE_LIMIT = 5000


@dataclass(frozen=True)
class WeightedInnerProduct:
    """<a, b>_mu = sum over canonical p-simplices of w(s) a(s) b(s)."""

    M: MeasuredComplex
    degree: int

    def weight(self, s: Simplex) -> float:
        return self.M.weight(s)

    def __call__(self, a: Cochain, b: Cochain) -> float:
        small, big = (a, b) if len(a.values) <= len(b.values) else (b, a)
        return math.fsum(self.weight(s) * v * big.values[s] for s, v in small.values.items() if s in big.values)


def codifferential(c: Cochain, M: MeasuredComplex) -> Cochain:
    """mu-adjoint of d: (d*c)(tau) = sum_sigma w(sigma) [sigma : tau] c(sigma) / w(tau)."""
    if c.degree <= 0:
        raise DegreeUnderflow("no codifferential out of degree 0")
    out: Dict[Simplex, list] = {}
    for sigma, v in c.values.items():
        ws = M.weight(sigma)
        for i in range(len(sigma)):
            tau = sigma[:i] + sigma[i + 1:]
            out.setdefault(tau, []).append((-1) ** i * ws * v)
    return Cochain(c.degree - 1, "real", {t: math.fsum(vals) / M.weight(t) for t, vals in out.items()})


def laplacian(leaf: LeafComplex, p: int) -> sp.csr_matrix:
    """Delta_p = d d* + d* d on one leaf (the uniform leaf weight cancels)."""
    n = leaf.count(p)
    L = sp.csr_matrix((n, n))
    if p < leaf.dim:
        D = coboundary_matrix(leaf, p).astype(float)
        L = L + D.T @ D
    if p > 0:
        D = coboundary_matrix(leaf, p - 1).astype(float)
        L = L + D @ D.T
    return L.tocsr()


def _spectrum_dense(L: sp.csr_matrix) -> np.ndarray:
    return np.linalg.eigvalsh(L.toarray())


def _nullity_sparse(L: sp.csr_matrix) -> Tuple[int, float, float]:
    top = float(spla.eigsh(L, k=1, which="LA", return_eigenvectors=False)[0])
    k = 8
    while True:
        k = min(k, L.shape[0] - 1)
        vals = np.sort(spla.eigsh(L, k=k, sigma=-1e-3 * top, which="LM", return_eigenvectors=False))
        cut = CUTOFF * top
        zero = int((vals <= cut).sum())
        if zero < len(vals) or k == L.shape[0] - 1:
            above = vals[vals > cut]
            return zero, top, float(above.min()) if above.size else math.inf
        k *= 2


def harmonic_dimension(leaf: LeafComplex, p: int) -> int:
    """Nullity of Delta_p by spectral cutoff; ambiguous spectra are reported."""
    L = laplacian(leaf, p)
    n = L.shape[0]
    if n <= DENSE_LIMIT:
        vals = _spectrum_dense(L)
        top = float(vals.max()) if n else 0.0
        if top == 0.0:
            return n
        cut = CUTOFF * top
        zero = int((vals <= cut).sum())
        gap = float(vals[vals > cut].min()) if zero < n else math.inf
    else:
        zero, top, gap = _nullity_sparse(L)
        cut = CUTOFF * top
    if gap <= AMBIGUITY_BAND * cut:
        raise SpectralAmbiguity(f"degree {p} on leaf {leaf.leaf_id}: eigenvalue {gap:.3e} "
                                f"too close to the cutoff {cut:.3e}")
    return zero


def leaf_betti(leaf: LeafComplex) -> Tuple[int, ...]:
    return tuple(harmonic_dimension(leaf, p) for p in range(leaf.dim + 1))


def _per_leaf(M: MeasuredComplex, parallel: bool) -> List[Tuple[int, ...]]:
    if parallel and len(M.leaves) > 1:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(leaf_betti, M.leaves))
    return [leaf_betti(leaf) for leaf in M.leaves]


def betti_vector(M: MeasuredComplex, parallel: bool = False) -> Tuple[float, ...]:
    """(b_0, ..., b_n) with b_p = sum_i w_i dim H^p(L_i)."""
    per = _per_leaf(M, parallel)
    return tuple(math.fsum(M.measure[leaf.leaf_id] * b[p] for leaf, b in zip(M.leaves, per))
                 for p in range(M.dim + 1))


def betti_mu(M: MeasuredComplex, p: int) -> float:
    return math.fsum(M.measure[leaf.leaf_id] * harmonic_dimension(leaf, p) for leaf in M.leaves)


def cochain_space_dimension(M: MeasuredComplex, p: int) -> float:
    """dim_mu of the full cochain space, i.e. the mass of the p-simplices."""
    return mu(M, M.simplices(p))


class EulerFromBetti(NamedTuple):
    chi_betti: float
    chi_mu: float
    passed: bool


def euler_from_betti_check(M: MeasuredComplex, tol: float = 1e-6, parallel: bool = False) -> EulerFromBetti:
    b = betti_vector(M, parallel)
    chi_b = math.fsum((-1) ** p * x for p, x in enumerate(b))
    chi = chi_mu(M)
    return EulerFromBetti(chi_b, chi, abs(chi_b - chi) <= tol)


class HodgeDimensions(NamedTuple):
    harmonic: int
    exact: int
    coexact: int
    total: int

    @property
    def passed(self) -> bool:
        return self.harmonic + self.exact + self.coexact == self.total


def hodge_dimensions(leaf: LeafComplex, p: int) -> HodgeDimensions:
    """dim ker Delta_p + rank d_{p-1} + rank d_p against the number of p-simplices."""
    exact = int(np.linalg.matrix_rank(coboundary_matrix(leaf, p - 1).toarray())) if p > 0 else 0
    coexact = int(np.linalg.matrix_rank(coboundary_matrix(leaf, p).toarray())) if p < leaf.dim else 0
    return HodgeDimensions(harmonic_dimension(leaf, p), exact, coexact, leaf.count(p))
