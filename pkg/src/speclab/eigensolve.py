"""Smallest eigenpairs of the generalized symmetric problem ``K u = lam M u``."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, MassNotPD

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
DENSE_MAX = 400
_SEED = 20170714


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    eigenvectors: Optional[np.ndarray] = None  # columns
    method: str = "dense"


def residual_norms(K, M, values, vectors) -> np.ndarray:
    """``|K u - lam M u| / (|K u| + |lam| |M u|)`` per column."""
    Ku = K @ vectors
    Mu = M @ vectors
    num = np.linalg.norm(Ku - Mu * values, axis=0)
    den = np.linalg.norm(Ku, axis=0) + np.abs(values) * np.linalg.norm(Mu, axis=0)
    den = np.where(den > 0, den, 1.0)
    return num / den


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _dense(K, M, m):
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    try:
        la.cholesky(Md, lower=True)
    except la.LinAlgError as exc:
        raise MassNotPD(f"mass matrix is not positive definite: {exc}") from None
    # sygv: Cholesky of M, congruence, tridiagonal reduction, implicit QL/QR
    vals, vecs = la.eigh(Kd, Md, driver="gv")
    return vals[:m], vecs[:, :m]


def _sparse(K, M, m):
    n = K.shape[0]
    v0 = np.random.default_rng(_SEED).standard_normal(n)
    K = sp.csc_matrix(K)
    M = sp.csc_matrix(M)
    # K is PSD, so shift-invert about 0 returns the bottom of the spectrum
    vals, vecs = spla.eigsh(K, k=m, M=M, sigma=0.0, which="LM", v0=v0, tol=0.0)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def smallest_eigs(
    K,
    M,
    m: int,
    *,
    shift: float = 0.0,
    method: str = "auto",
    return_vectors: bool = False,
) -> EigenResult:
    """The ``m`` smallest eigenvalues of ``K u = lam M u``, ascending.

    Parameters
    ----------
    K, M : array_like or sparse matrix
        Symmetric PSD stiffness and SPD mass.
    m : int
        Number of eigenpairs.
    shift : float
        Solve ``(K + shift M) u = (lam + shift) M u`` and shift back. Use a
        positive shift when ``K`` is singular.
    method : {"auto", "dense", "sparse"}
        ``auto`` picks dense up to ``DENSE_MAX`` unknowns.

    Raises
    ------
    MassNotPD
        Cholesky of ``M`` broke down.
    ConvergenceFailure
        Some residual exceeds ``RESIDUAL_TOL``.
    """
    n = K.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"cannot compute {m} eigenvalues of an order-{n} problem")
    if method == "auto":
        method = "dense" if n <= DENSE_MAX or m > n // 4 else "sparse"
    Ks = K + shift * M if shift else K

    if method == "dense":
        vals, vecs = _dense(Ks, M, m)
    elif method == "sparse":
        try:
            vals, vecs = _sparse(Ks, M, m)
        except RuntimeError as exc:
            # singular K at sigma = 0: retry with a unit shift
            if shift:
                raise ConvergenceFailure(f"shift-invert failed: {exc}") from exc
            log.debug("shift-invert at 0 failed (%s); retrying with shift 1", exc)
            return smallest_eigs(K, M, m, shift=1.0, method="sparse", return_vectors=return_vectors)
    else:
        raise ValueError(f"unknown method {method!r}")

    vecs = _fix_signs(vecs)
    res = residual_norms(Ks, M, vals, vecs)
    if np.any(res > RESIDUAL_TOL):
        if not shift:
            # zero modes make the unshifted residual meaningless
            log.debug("residual %.2e without shift; retrying with shift 1", res.max())
            return smallest_eigs(K, M, m, shift=1.0, method=method, return_vectors=return_vectors)
        if method == "sparse":
            log.debug("sparse residual %.2e too large; falling back to dense", res.max())
            return smallest_eigs(K, M, m, shift=shift, method="dense", return_vectors=return_vectors)
        raise ConvergenceFailure(
            f"residual {res.max():.3e} exceeds {RESIDUAL_TOL:g}", best_residual=float(res.max())
        )
    vals = vals - shift if shift else vals
    return EigenResult(
        np.asarray(vals, dtype=float),
        res,
        vecs if return_vectors else None,
        method,
    )
