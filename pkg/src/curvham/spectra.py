"""Lowest eigenpairs of assembled surface operators.

Two backends:

* ``dense``: LAPACK Householder tridiagonalization with implicit-shift QL
  (``scipy.linalg.eigh``), for operators up to a few thousand rows.
* ``lanczos``: block Lanczos with full reorthogonalization and thick
  (Krylov-Schur) restarts, run on a Chebyshev polynomial of ``H`` that
  damps the unwanted upper spectrum. Convergence is always judged on the
  residuals ``||H y - mu y||`` of the un-filtered operator.

Results are returned in the original (unsymmetrized) basis.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.linalg as la
from scipy.linalg import blas
import scipy.sparse as sp
from numpy.typing import NDArray

from .errors import ConfigurationError, ConvergenceError, DimensionError
from .lattice import SurfaceOperator, Topology

DENSE_MAX_DIM = 4096
DEGENERACY_RTOL = 1e-8
_DEBUG = False
MAX_DEGREE = 1500


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray  # columns, original basis
    residuals: NDArray[np.float64]
    scale: float
    backend: str
    metadata: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.eigenvalues.size

    def degeneracy_groups(self, rtol: float = DEGENERACY_RTOL) -> NDArray[np.int64]:
        """Group label per eigenvalue; neighbours closer than ``rtol * scale`` share one."""
        ev = self.eigenvalues
        if ev.size == 0:
            return np.zeros(0, dtype=np.int64)
        jumps = np.diff(ev) > rtol * self.scale
        return np.concatenate([[0], np.cumsum(jumps)]).astype(np.int64)

    def levels(self, rtol: float = DEGENERACY_RTOL) -> list[tuple[float, int]]:
        """``(mean energy, multiplicity)`` per degeneracy group."""
        groups = self.degeneracy_groups(rtol)
        out = []
        for gid in np.unique(groups):
            sel = self.eigenvalues[groups == gid]
            out.append((float(sel.mean()), int(sel.size)))
        return out


def _as_matrix(H) -> tuple[sp.csr_matrix | NDArray, SurfaceOperator | None]:
    if isinstance(H, SurfaceOperator):
        return H.matrix, H
    if sp.issparse(H):
        return sp.csr_matrix(H), None
    A = np.asarray(H)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A, None


def _realify(A):
    """Drop an identically zero imaginary part so real kernels can be used."""
    if np.iscomplexobj(A.data if sp.issparse(A) else A):
        im = A.imag
        if (im.nnz == 0 or not np.any(im.data)) if sp.issparse(A) else not np.any(im):
            return A.real.astype(float)
    return A


def _inf_norm(A) -> float:
    if sp.issparse(A):
        return float(abs(A).sum(axis=1).max())
    return float(np.abs(A).sum(axis=1).max())


def gershgorin_bounds(A) -> tuple[float, float]:
    if sp.issparse(A):
        d = A.diagonal().real
        off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    else:
        d = np.diag(A).real
        off = np.abs(A).sum(axis=1) - np.abs(d)
    return float((d - off).min()), float((d + off).max())


def eigen_lowest(
    H,
    k: int,
    backend: Literal["auto", "dense", "lanczos"] = "auto",
    seed: int = 0,
    tol: float = 1e-10,
    block: int | None = None,
    basis: int | None = None,
    max_restarts: int = 400,
    degree: int | None = None,
) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of a Hermitian operator.

    Parameters
    ----------
    H : SurfaceOperator, sparse matrix or ndarray
        Hermitian operator in the symmetrized basis.
    k : int
        Number of eigenpairs, ``1 <= k <= dim``.
    backend : {"auto", "dense", "lanczos"}
        ``auto`` picks dense up to 4096 rows.
    seed : int
        Seed of the random Lanczos start block.
    tol : float
        Residual target relative to ``scale`` (max absolute row sum).
    block, basis, max_restarts, degree
        Lanczos block size (16 for ``k >= 16``, else 8, when ``None``),
        basis size, restart budget and Chebyshev degree (chosen adaptively
        when ``None``).

    Returns
    -------
    SpectrumResult
        Eigenvectors are returned in the original (unweighted) basis. When
        the operator carries an edge-difference factor the eigenvalues are
        recomputed as Rayleigh quotients ``|F v|^2 + sum d |v|^2``, which
        keeps small eigenvalues accurate relative to their own size rather
        than to ``scale``.

    Raises
    ------
    ConvergenceError
        If the Lanczos residuals do not reach ``tol * scale``.
    """
    A, op = _as_matrix(H)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ConfigurationError(f"k must lie in [1, {n}], got {k}", field="solver.k")
    A = _realify(A)
    scale = _inf_norm(A)
    if backend == "auto":
        backend = "dense" if n <= DENSE_MAX_DIM else "lanczos"
    if block is None:
        block = 16 if k >= 16 else 8
    t0 = time.perf_counter()
    if backend == "dense":
        ev, vecs = _dense(A, k)
        info = {}
    elif backend == "lanczos":
        if n <= 2 * (k + block):
            ev, vecs = _dense(A, k)
            info = {"note": "dimension too small for Lanczos, solved densely"}
        else:
            ev, vecs, info = _filtered_lanczos(
                A, k, seed, tol * scale, block, basis, max_restarts, degree
            )
    else:
        raise ConfigurationError(f"unknown backend {backend!r}", field="solver.backend")
    if op is not None and op.factor is not None:
        # cancellation-free Rayleigh quotients sharpen the low eigenvalues
        ev = op.rayleigh(vecs)
        order = np.argsort(ev, kind="stable")
        ev, vecs = ev[order], vecs[:, order]
        info = {**info, "refined": True}
    res = np.linalg.norm(A @ vecs - vecs * ev, axis=0)
    if op is not None:
        vecs = op.to_original(vecs)
    meta = {"seconds": time.perf_counter() - t0, **info}
    if op is not None:
        meta["operator"] = op.metadata
    return SpectrumResult(ev, vecs, res, scale, backend, meta)


def _dense(A, k: int):
    M = A.toarray() if sp.issparse(A) else np.array(A)
    n = M.shape[0]
    if k == n:
        ev, vecs = la.eigh(M, driver="ev", overwrite_a=True, check_finite=False)
    else:
        # same tridiagonalization; only the wanted subset is resolved
        ev, vecs = la.eigh(M, driver="evx", subset_by_index=(0, k - 1), overwrite_a=True, check_finite=False)
    return ev, vecs


# ---------------------------------------------------------------------------
# Lanczos


def _upper_bound(A, rng, steps: int = 40) -> float:
    """Upper estimate of lambda_max: short Lanczos plus its residual bound."""
    n = A.shape[0]
    steps = min(steps, n - 1)
    V = np.zeros((n, steps + 1), dtype=A.dtype)
    v = rng.standard_normal(n).astype(A.dtype)
    V[:, 0] = v / np.linalg.norm(v)
    alpha = np.zeros(steps)
    beta = np.zeros(steps)
    for j in range(steps):
        w = A @ V[:, j]
        alpha[j] = np.vdot(V[:, j], w).real
        w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] == 0.0:
            steps = j + 1
            break
        V[:, j + 1] = w / beta[j]
    th, S = la.eigh_tridiagonal(alpha[:steps], beta[: steps - 1])
    return float(th[-1] + abs(beta[steps - 1] * S[-1, -1]))


try:  # in-place y += A @ x kernel; the public product is used without it
    from scipy.sparse._sparsetools import csr_matvecs as _csr_matvecs
except ImportError:  # pragma: no cover
    _csr_matvecs = None

# unscaled recurrence is used while |T_d(y0)| stays below e^_GROWTH_LIMIT
_GROWTH_LIMIT = 600.0


class _ChebyshevFilter:
    """``p(H) = T_d(y(H)) / T_d(y(a0))`` damping ``[cut, hi]``.

    ``y(H) = (H - c)/e`` maps the damped band onto ``[-1, 1]``. When the
    growth ``|T_d(y0)|`` is harmless the plain three-term recurrence runs in
    place through an accumulating sparse kernel, with signs tracked instead
    of applied; otherwise the step-wise rescaled recurrence is used. Both are
    the same linear map.
    """

    def __init__(self, A, degree: int, a0: float, cut: float, hi: float):
        self.degree = int(degree)
        self.a0 = a0
        self.cut = cut
        self.hi = hi
        self.e = 0.5 * (hi - cut)
        self.c = 0.5 * (hi + cut)
        self.total = 0
        n = A.shape[0]
        if sp.issparse(A):
            B = ((A - self.c * sp.identity(n, dtype=A.dtype, format="csr")) * (1.0 / self.e)).tocsr()
            B.sort_indices()
        else:
            B = (A - self.c * np.eye(n, dtype=A.dtype)) / self.e
        self.B = B
        self._axpy = blas.zaxpy if np.iscomplexobj(B.data if sp.issparse(B) else B) else blas.daxpy
        y0 = (a0 - self.c) / self.e
        growth = self.degree * math.acosh(max(abs(y0), 1.0))
        self._fast = _csr_matvecs is not None and sp.issparse(B) and growth < _GROWTH_LIMIT
        if self._fast:
            # T_d(y0) for y0 <= -1
            self._norm = (-1.0) ** self.degree * math.cosh(growth)
            self._B2 = (2.0 * B).tocsr()
            self._B2n = (-2.0 * B).tocsr()

    def __call__(self, X: NDArray) -> NDArray:
        self.total += self.degree * X.shape[1]
        X = np.ascontiguousarray(X)
        if self.degree == 1:
            return (self.B @ X) * (self.e / (self.a0 - self.c))
        if self._fast:
            return self._unscaled(X)
        return self._scaled(X)

    def _matvecs(self, M, X, Y) -> None:
        """``Y += M @ X`` in place for C-contiguous blocks."""
        n, nv = X.shape
        _csr_matvecs(M.shape[0], M.shape[1], nv, M.indptr, M.indices, M.data, X.ravel(), Y.ravel())

    def _unscaled(self, X: NDArray) -> NDArray:
        # buffers hold s_k T_k; writing into the older buffer with M = -2 s_{k-1} s_k B
        # gives -s_{k-1} T_{k+1}
        prev = X.astype(np.result_type(X, self.B.dtype), copy=True)
        cur = np.zeros_like(prev)
        self._matvecs(self.B, prev, cur)
        s_prev, s_cur = 1.0, 1.0
        for _ in range(2, self.degree + 1):
            M = self._B2n if s_prev * s_cur > 0 else self._B2
            self._matvecs(M, cur, prev)
            prev, cur = cur, prev
            s_prev, s_cur = s_cur, -s_prev
        cur *= s_cur / self._norm
        return cur

    def _scaled(self, X: NDArray) -> NDArray:
        B = self.B
        sigma1 = self.e / (self.a0 - self.c)
        sigma = sigma1
        Y = B @ X
        Y *= sigma1
        for _ in range(2, self.degree + 1):
            s_new = 1.0 / (2.0 / sigma1 - sigma)
            Ynew = B @ Y
            Ynew *= 2.0 * s_new
            # Ynew -= sigma * s_new * X, in place
            self._axpy(X.reshape(-1), Ynew.reshape(-1), a=-sigma * s_new)
            X, Y = Y, Ynew
            sigma = s_new
        return Y


def _orthonormalize(W, V, rng, dtype):
    """CGS2 against ``V``, QR, and random refill of deflated directions."""
    if V is not None and V.shape[1]:
        W = W - V @ (V.conj().T @ W)
        W = W - V @ (V.conj().T @ W)
    Q, R = np.linalg.qr(W)
    norms = np.linalg.norm(W, axis=0)
    bad = np.abs(np.diag(R)) <= 1e-10 * max(norms.max(), np.finfo(float).tiny)
    if bad.any():
        n = W.shape[0]
        Z = rng.standard_normal((n, int(bad.sum()))).astype(dtype)
        if V is not None and V.shape[1]:
            Z = Z - V @ (V.conj().T @ Z)
            Z = Z - V @ (V.conj().T @ Z)
        Q[:, bad] = Z
        good = Q[:, ~bad]
        Z = Z - good @ (good.conj().T @ Z)
        Q[:, bad], _ = np.linalg.qr(Z)
        if V is not None and V.shape[1]:
            Q = Q - V @ (V.conj().T @ Q)
        Q, _ = np.linalg.qr(Q)
    return Q


def _pick_degree(a0: float, low: float, cut: float, hi: float, dmax: int | None = None) -> int:
    """Degree giving ~e^4 amplification of ``low`` relative to the damped band."""
    gap = max(cut - low, 1e-300)
    d = math.ceil(2.0 * math.sqrt(max(hi - cut, 0.0) / gap))
    return int(min(max(d, 4), dmax or MAX_DEGREE))


def _filtered_lanczos(A, k, seed, atol, b, m, max_restarts, degree):
    n = A.shape[0]
    dtype = A.dtype
    rng = np.random.default_rng(seed)
    b = max(1, min(b, n // 4))
    p = k + max(b, 4)  # kept Ritz vectors
    if m is None:
        m = max(2 * p + 2 * b, 60)
    m = min(m, n - b)
    if m < p + b:
        raise ConfigurationError(f"Lanczos basis {m} too small for k={k}", field="solver.basis")

    glo, ghi = gershgorin_bounds(A)
    hi = min(ghi, 1.02 * _upper_bound(A, rng) + 1e-12 * abs(ghi))
    a0 = glo
    # before any Ritz information: damp the top 99% of the spectrum
    cut = a0 + 0.01 * (hi - a0)
    low = a0
    deg = degree or _pick_degree(a0, low, cut, hi)
    op = _ChebyshevFilter(A, deg, a0, cut, hi)

    V = _orthonormalize(rng.standard_normal((n, b)).astype(dtype), None, rng, dtype)
    HV = A @ V
    OPV = np.zeros((n, 0), dtype=dtype)
    hmatvecs = b
    best = None
    for restart in range(max_restarts):
        # expand: op applied to the oldest unexpanded block
        while V.shape[1] < m + b:
            na = OPV.shape[1]
            W = op(V[:, na : na + b])
            OPV = np.hstack([OPV, W])
            Q = _orthonormalize(W, V, rng, dtype)
            V = np.hstack([V, Q])
            HV = np.hstack([HV, A @ Q])
            hmatvecs += Q.shape[1]
        na = OPV.shape[1]

        # Rayleigh-Ritz with H on the whole basis: candidates and the cut
        G = V.conj().T @ HV
        mu, Z = la.eigh(0.5 * (G + G.conj().T))
        Yh = V @ Z[:, :k]
        res = np.linalg.norm(HV @ Z[:, :k] - Yh * mu[:k], axis=0)
        best = (mu[:k], res)
        if _DEBUG:
            print(restart, op.degree, op.cut, mu[[0, k - 1, p - 1]], res.max())
        if np.all(res <= atol):
            info = {
                "restarts": restart,
                "matvecs": op.total + hmatvecs,
                "degree": op.degree,
                "cut": op.cut,
                "hi": hi,
            }
            return mu[:k], Yh, info

        # mu[p-1] >= lambda_p by interlacing, so nothing wanted lies above it
        # (raised when the first guess damps part of the wanted range)
        new_cut = float(mu[p - 1])
        shrink = new_cut < op.cut - 0.25 * (op.cut - mu[0])
        if degree is None and (shrink or mu[k - 1] > op.cut):
            total = op.total
            op = _ChebyshevFilter(A, _pick_degree(a0, float(mu[0]), new_cut, hi), a0, new_cut, hi)
            op.total = total
            # explicit restart: every start vector mixes all H-Ritz candidates
            V = _orthonormalize((V @ Z[:, :p]) @ rng.standard_normal((p, b)), None, rng, dtype)
            HV = A @ V
            hmatvecs += b
            OPV = np.zeros((n, 0), dtype=dtype)
            continue
        # thick restart on the Ritz vectors of the filtered operator
        T = V[:, :na].conj().T @ OPV
        th, S = la.eigh(0.5 * (T + T.conj().T))
        S = S[:, ::-1][:, :p]
        Y = V[:, :na] @ S
        Q = _orthonormalize(V[:, na:], Y, rng, dtype)
        V = np.hstack([Y, Q])
        HV = np.hstack([HV[:, :na] @ S, A @ Q])
        hmatvecs += Q.shape[1]
        OPV = OPV @ S
    raise ConvergenceError(
        f"Lanczos did not converge after {max_restarts} restarts "
        f"(max residual {best[1].max():.3e}, target {atol:.3e})",
        eigenvalues=best[0],
        residuals=best[1],
    )


# ---------------------------------------------------------------------------
# post-processing


def expectation(O, psi: NDArray, H: SurfaceOperator | None = None):
    """``<psi|O|psi>`` for an original-basis state.

    ``O`` is a :class:`SurfaceOperator` (its own weights are used) or a
    plain matrix acting on symmetrized states together with ``H`` supplying
    the grid weights. A Hermitian observable gives a real number.
    """
    ref = O if isinstance(O, SurfaceOperator) else H
    mat = O.matrix if isinstance(O, SurfaceOperator) else O
    psi = np.asarray(psi).ravel()
    if ref is None:
        raise ConfigurationError("need a SurfaceOperator to supply grid weights", field="observable")
    if psi.size != ref.dim or mat.shape[0] != psi.size:
        raise DimensionError(f"state of size {psi.size} does not match operator dimension {mat.shape[0]}")
    phi = ref.to_symmetric(psi)
    val = complex(np.vdot(phi, mat @ phi))
    herm = isinstance(O, SurfaceOperator) or _is_hermitian(mat)
    return val.real if herm else val


def _is_hermitian(M) -> bool:
    d = M - M.conj().T
    if sp.issparse(d):
        return d.nnz == 0 or not np.any(d.data)
    return not np.any(d)


def spin_observable(op: SurfaceOperator, axis: int) -> sp.csr_matrix:
    """``sigma^axis (x) 1`` on a Pauli operator's (symmetrized) space."""
    from .fields import SIGMA

    if op.spin != 2:
        raise DimensionError("spin observables need a Pauli operator")
    return sp.kron(sp.csr_matrix(SIGMA[axis]), sp.identity(op.grid.n_sites), format="csr")


@dataclass(frozen=True)
class ConvergenceReport:
    spacings: NDArray[np.float64]
    errors: NDArray[np.float64]  # (n_sizes, n_levels)
    slopes: NDArray[np.float64]
    fit_residuals: NDArray[np.float64]
    floor: NDArray[np.bool_]
    monotone: NDArray[np.bool_]

    @property
    def slope(self) -> float:
        """Smallest measured order among the levels that are not at the floor."""
        live = self.slopes[~self.floor]
        return float(live.min()) if live.size else math.nan

    def to_dict(self) -> dict:
        return {
            "spacings": self.spacings.tolist(),
            "errors": self.errors.tolist(),
            "slopes": self.slopes.tolist(),
            "fit_residuals": self.fit_residuals.tolist(),
            "floor": self.floor.tolist(),
            "monotone": self.monotone.tolist(),
        }


def fit_order(spacings: Sequence[float], errors: NDArray, floor: float = 1e-12) -> ConvergenceReport:
    """Log-log least-squares order of ``errors`` (sizes x levels) vs spacing."""
    h = np.asarray(spacings, float)
    E = np.abs(np.asarray(errors, float))
    if E.ndim == 1:
        E = E[:, None]
    if h.size < 3:
        raise ConfigurationError("need at least three sizes for an order estimate", field="sizes")
    at_floor = np.all(E <= floor, axis=0)
    x = np.log(h)
    slopes = np.full(E.shape[1], np.nan)
    fres = np.full(E.shape[1], np.nan)
    for j in range(E.shape[1]):
        if at_floor[j]:
            continue
        y = np.log(np.maximum(E[:, j], np.finfo(float).tiny))
        coef, resid, *_ = np.polyfit(x, y, 1, full=True)
        slopes[j] = coef[0]
        fres[j] = math.sqrt(resid[0] / h.size) if resid.size else 0.0
    order = np.argsort(h)[::-1]
    mono = np.all(np.diff(E[order], axis=0) <= 0, axis=0)
    return ConvergenceReport(h, E, slopes, fres, at_floor, mono)


def convergence_study(
    builder: Callable[[int], SurfaceOperator],
    k: int,
    sizes: Sequence[int],
    reference: Callable[[SurfaceOperator], NDArray] | NDArray,
    spacing: Callable[[SurfaceOperator], float] | None = None,
    floor: float = 1e-12,
    **solver,
) -> ConvergenceReport:
    """Order of convergence of the lowest ``k`` eigenvalues.

    ``builder(N)`` assembles an operator per size and ``reference`` gives
    the exact values (an array or a callable of the operator). Non-monotone
    error sequences are flagged in the report, not raised.
    """
    if len(sizes) < 3:
        raise ConfigurationError("need at least three sizes", field="sizes")
    hs, errs = [], []
    for N in sizes:
        op = builder(N)
        res = eigen_lowest(op, k, **solver)
        ref = reference(op) if callable(reference) else np.asarray(reference)
        errs.append(res.eigenvalues - ref[:k])
        hs.append(spacing(op) if spacing else op.grid.d1)
    return fit_order(hs, np.array(errs), floor)


def phi_sector(op: SurfaceOperator, m: int, check: bool = True) -> NDArray:
    """Restriction of a q2-translation invariant spin-0 operator to Fourier mode ``m``.

    With ``F[(i, j), i] = exp(i m q2_j)/sqrt(N2)`` the block is ``F^H H F``
    (``N1 x N1``). Its eigenvalues are exactly the eigenvalues of ``H`` whose
    eigenvectors carry ``exp(i m q2)``. ``check`` verifies ``H F = F H_m``.
    """
    g = op.grid
    if op.spin != 1 or g.top2 is not Topology.PERIODIC:
        raise ConfigurationError("Fourier sectors need a spin-0 operator with periodic q2", field="sector")
    N1, N2 = g.shape
    phase = np.exp(1j * m * g.q2) / math.sqrt(N2)
    rows = np.arange(N1 * N2)
    cols = np.repeat(np.arange(N1), N2)
    F = sp.csr_matrix((np.tile(phase, N1), (rows, cols)), shape=(N1 * N2, N1))
    HF = (op.matrix @ F).toarray()
    Hm = np.asarray(F.conj().T @ HF)
    if check:
        drift = np.abs(HF - F @ Hm).max()
        if drift > 1e-12 * op.scale:
            raise ConfigurationError(
                f"operator is not q2-translation invariant (commutator {drift:.3e})", field="sector"
            )
    return 0.5 * (Hm + Hm.conj().T)

