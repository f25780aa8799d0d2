"""Dense kernels for small matrices (n roughly 2..10).

Embedding points are tiny matrices, but there are millions of pairwise
operations per epoch, so everything here comes in two flavors:

* a single-matrix API (``sym_eig``, ``svd_2x2``, ``cholesky``, ``spd_fn``)
  with input validation, and
* batched kernels (``eigvalsh``, ``eigh``, ``cholesky_batch``, ...) that
  operate on ``(..., n, n)`` stacks and are pure vectorized arithmetic.

Eigenvalues of 2x2 and 3x3 symmetric matrices use explicit trace/determinant
and affine-shift arccos formulas; everything larger runs cyclic Jacobi
sweeps. Jacobi terminates when the off-diagonal Frobenius norm drops below
``1e-12 * ||A||_F`` or after 100 sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    NotPositiveDefiniteError,
    SingularityError,
)

_JACOBI_SWEEPS = 100
_JACOBI_TOL = 1e-12
# Repeated-eigenvalue gap under which closed-form eigenvectors are
# ill-conditioned and we fall back to Jacobi.
_MULTIPLICITY_TOL = 1e-10


@dataclass
class EigenDecomposition:
    """Eigenvalues sorted descending; eigenvectors as orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass
class SvdDecomposition:
    """Thin SVD with singular values sorted descending."""

    left: np.ndarray
    values: np.ndarray
    right: np.ndarray


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix entries must be finite")
    return a


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(a).max()))
    asym = float(np.abs(a - a.swapaxes(-1, -2)).max())
    if asym > 1e-12 * scale:
        raise InvalidInputError(
            f"matrix is not symmetric (asymmetry {asym:.3e} at scale {scale:.3e})"
        )
    return 0.5 * (a + a.swapaxes(-1, -2))


# ---------------------------------------------------------------------------
# closed-form eigenvalues


def eigvals2_closed(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric 2x2 stacks, descending. Shape (..., 2)."""
    a00 = a[..., 0, 0]
    a11 = a[..., 1, 1]
    a01 = a[..., 0, 1]
    mid = 0.5 * (a00 + a11)
    # sqrt((tr/2)^2 - det) rewritten in cancellation-free form
    rad = np.sqrt((0.5 * (a00 - a11)) ** 2 + a01**2)
    return np.stack([mid + rad, mid - rad], axis=-1)


def eigvals3_closed(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric 3x3 stacks, descending. Shape (..., 3).

    Uses the affine shift A = p*B + q*I with q = tr(A)/3 and
    p = sqrt(tr((A - q I)^2) / 6); the eigenvalues of B come from the
    arccos of det(B)/2. When p vanishes the matrix is (numerically) a
    multiple of the identity and (q, q, q) is returned directly.
    """
    q = np.trace(a, axis1=-2, axis2=-1) / 3.0
    c = a - q[..., None, None] * np.eye(3)
    p = np.sqrt(np.einsum("...ij,...ij->...", c, c) / 6.0)
    safe_p = np.where(p < 1e-12, 1.0, p)
    b = c / safe_p[..., None, None]
    det_b = (
        b[..., 0, 0] * (b[..., 1, 1] * b[..., 2, 2] - b[..., 1, 2] * b[..., 2, 1])
        - b[..., 0, 1] * (b[..., 1, 0] * b[..., 2, 2] - b[..., 1, 2] * b[..., 2, 0])
        + b[..., 0, 2] * (b[..., 1, 0] * b[..., 2, 1] - b[..., 1, 1] * b[..., 2, 0])
    )
    phi = np.arccos(np.clip(det_b / 2.0, -1.0, 1.0)) / 3.0
    k = np.arange(3.0)
    lam_b = 2.0 * np.cos(phi[..., None] + 2.0 * np.pi * k / 3.0)
    lam = q[..., None] + p[..., None] * lam_b
    lam = np.where(p[..., None] < 1e-12, q[..., None] * np.ones(3), lam)
    return -np.sort(-lam, axis=-1)


# ---------------------------------------------------------------------------
# cyclic Jacobi (batched)


def _jacobi_rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    """One batched Jacobi rotation zeroing A[:, p, q], in place."""
    apq = A[:, p, q]
    app = A[:, p, p]
    aqq = A[:, q, q]
    active = apq != 0.0
    tau = np.zeros_like(apq)
    np.divide(aqq - app, 2.0 * apq, out=tau, where=active)
    t = np.where(
        active,
        np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau)),
        0.0,
    )
    # sign(0) == 0 would zero the rotation; tau == 0 means a 45-degree one
    t = np.where(active & (tau == 0.0), 1.0, t)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    rp = A[:, p, :].copy()
    rq = A[:, q, :].copy()
    A[:, p, :] = c[:, None] * rp - s[:, None] * rq
    A[:, q, :] = s[:, None] * rp + c[:, None] * rq
    cp = A[:, :, p].copy()
    cq = A[:, :, q].copy()
    A[:, :, p] = c[:, None] * cp - s[:, None] * cq
    A[:, :, q] = s[:, None] * cp + c[:, None] * cq
    # exact zero of the eliminated pair keeps the sweep monotone
    A[:, p, q] = 0.0
    A[:, q, p] = 0.0

    vp = V[:, :, p].copy()
    vq = V[:, :, q].copy()
    V[:, :, p] = c[:, None] * vp - s[:, None] * vq
    V[:, :, q] = s[:, None] * vp + c[:, None] * vq


def _offdiag_norm(A: np.ndarray) -> np.ndarray:
    n = A.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.einsum("bij,bij->b", A * mask, A * mask))


def jacobi_eigh(a: np.ndarray, sweeps: int = _JACOBI_SWEEPS):
    """Batched cyclic Jacobi. Returns (values desc, vectors) for (..., n, n)."""
    a = np.asarray(a, dtype=float)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    A = a.reshape(-1, n, n).astype(float).copy()
    A = 0.5 * (A + A.swapaxes(-1, -2))
    V = np.tile(np.eye(n), (A.shape[0], 1, 1))
    norms = np.sqrt(np.einsum("bij,bij->b", A, A))
    target = _JACOBI_TOL * np.maximum(norms, 1e-300)
    for _ in range(sweeps):
        if np.all(_offdiag_norm(A) <= target):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(A, V, p, q)
    vals = np.diagonal(A, axis1=-2, axis2=-1)
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    return vals.reshape(*batch_shape, n), V.reshape(*batch_shape, n, n)


# ---------------------------------------------------------------------------
# batched front ends


def eigvalsh(a: np.ndarray) -> np.ndarray:
    """Eigenvalues (descending) of symmetric stacks, closed form when n<=3."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    if n == 1:
        return a[..., 0]
    if n == 2:
        return eigvals2_closed(a)
    if n == 3:
        return eigvals3_closed(a)
    return jacobi_eigh(a)[0]


def eigh(a: np.ndarray):
    """Full decomposition of symmetric stacks: (values desc, vectors)."""
    return jacobi_eigh(np.asarray(a, dtype=float))


def _eigvec_nullspace_3(a: np.ndarray, lam: float) -> np.ndarray:
    """Unit null vector of (a - lam*I) via row cross products (3x3 only)."""
    m = a - lam * np.eye(3)
    crosses = [
        np.cross(m[0], m[1]),
        np.cross(m[0], m[2]),
        np.cross(m[1], m[2]),
    ]
    norms = [np.linalg.norm(v) for v in crosses]
    best = int(np.argmax(norms))
    if norms[best] < 1e-14 * max(1.0, float(np.abs(m).max()) ** 2):
        raise SingularityError("degenerate null space")
    return crosses[best] / norms[best]


def sym_eig(a) -> EigenDecomposition:
    """Symmetric eigendecomposition, closed form for n in {2, 3}.

    Raises InvalidInputError when the input is not symmetric within a
    1e-12 relative entrywise tolerance. Repeated eigenvalues (gap below
    1e-10) make the closed-form eigenvector extraction ill-conditioned,
    in which case the Jacobi path is used instead.
    """
    a = _check_symmetric(_as_square(a))
    n = a.shape[0]
    if n == 1:
        return EigenDecomposition(a[0].copy(), np.ones((1, 1)))
    if n == 2:
        vals = eigvals2_closed(a)
        if vals[0] - vals[1] < _MULTIPLICITY_TOL * max(1.0, abs(vals[0])):
            vals_j, vecs_j = jacobi_eigh(a)
            return EigenDecomposition(vals_j, vecs_j)
        # rotation angle diagonalizing [[a00, a01], [a01, a11]]
        theta = 0.5 * np.arctan2(2.0 * a[0, 1], a[0, 0] - a[1, 1])
        c, s = np.cos(theta), np.sin(theta)
        v_plus = np.array([c, s])
        v_minus = np.array([-s, c])
        # the rotation sends v_plus to the eigenvalue (a00+a11)/2 + rad branch
        if v_plus @ a @ v_plus < v_minus @ a @ v_minus:
            v_plus, v_minus = v_minus, v_plus
        return EigenDecomposition(vals, np.stack([v_plus, v_minus], axis=-1))
    if n == 3:
        vals = eigvals3_closed(a)
        scale = max(1.0, float(np.abs(vals).max()))
        # closed-form eigenvalues are only ~1e-8 accurate near multiplicities,
        # so the tie guard must be at least that wide
        gaps = np.diff(-vals)
        if np.any(np.abs(gaps) < max(_MULTIPLICITY_TOL, 1e-8) * scale):
            vals_j, vecs_j = jacobi_eigh(a)
            return EigenDecomposition(vals_j, vecs_j)
        try:
            vecs = np.stack(
                [_eigvec_nullspace_3(a, lam) for lam in vals], axis=-1
            )
        except SingularityError:
            vals_j, vecs_j = jacobi_eigh(a)
            return EigenDecomposition(vals_j, vecs_j)
        ortho_err = np.abs(vecs.T @ vecs - np.eye(3)).max()
        rec_err = np.abs(vecs @ np.diag(vals) @ vecs.T - a).max()
        if ortho_err > 1e-11 or rec_err > 1e-11 * scale:
            vals_j, vecs_j = jacobi_eigh(a)
            return EigenDecomposition(vals_j, vecs_j)
        return EigenDecomposition(vals, vecs)
    vals, vecs = jacobi_eigh(a)
    return EigenDecomposition(vals, vecs)


# ---------------------------------------------------------------------------
# 2x2 SVD


def singvals_2x2(a: np.ndarray) -> np.ndarray:
    """Closed-form singular values of 2x2 stacks, descending, shape (..., 2).

    sigma_1 = sqrt((S1 + S2)/2), sigma_2 = sqrt((S1 - S2)/2) with
    S1 the squared Frobenius norm and
    S2 = sqrt((a^2+b^2-c^2-d^2)^2 + 4(ac+bd)^2).
    """
    w = a[..., 0, 0]
    x = a[..., 0, 1]
    y = a[..., 1, 0]
    z = a[..., 1, 1]
    s1 = w * w + x * x + y * y + z * z
    s2 = np.sqrt((w * w + x * x - y * y - z * z) ** 2 + 4.0 * (w * y + x * z) ** 2)
    big = np.sqrt(np.maximum(0.5 * (s1 + s2), 0.0))
    small = np.sqrt(np.maximum(0.5 * (s1 - s2), 0.0))
    return np.stack([big, small], axis=-1)


def svd_2x2(a) -> SvdDecomposition:
    """Full SVD of a 2x2 matrix using the closed-form singular values.

    The right factor comes from the (closed-form) eigenvectors of A^T A;
    left columns are A v / sigma with an orthonormal completion when a
    singular value (numerically) vanishes.
    """
    a = _as_square(a)
    if a.shape != (2, 2):
        raise InvalidInputError(f"svd_2x2 requires a 2x2 matrix, got {a.shape}")
    sig = singvals_2x2(a)
    gram = a.T @ a
    theta = 0.5 * np.arctan2(2.0 * gram[0, 1], gram[0, 0] - gram[1, 1])
    c, s = np.cos(theta), np.sin(theta)
    v1 = np.array([c, s])
    v2 = np.array([-s, c])
    if v1 @ gram @ v1 < v2 @ gram @ v2:
        v1, v2 = v2, v1
    V = np.stack([v1, v2], axis=-1)
    scale = max(1.0, float(np.abs(a).max()))
    U = np.zeros((2, 2))
    for i in range(2):
        col = a @ V[:, i]
        if sig[i] > 1e-15 * scale:
            U[:, i] = col / sig[i]
        elif i == 1:
            U[:, 1] = np.array([-U[1, 0], U[0, 0]])
        else:  # zero matrix
            U = np.eye(2)
            break
    return SvdDecomposition(U, sig, V)


def svd_small(a: np.ndarray):
    """Batched thin SVD of (..., n, k) stacks with k small.

    Returns (U, sigma, V) with sigma descending. The right factor comes
    from the symmetric eigendecomposition of A^T A; left columns with
    (numerically) zero singular values are left as zeros, which every
    caller multiplies by sin/tan terms that vanish there too.
    """
    a = np.asarray(a, dtype=float)
    k = a.shape[-1]
    gram = np.einsum("...ji,...jl->...il", a, a)
    if k == 1:
        sig = np.sqrt(np.maximum(gram[..., 0, 0], 0.0))[..., None]
        V = np.ones(a.shape[:-2] + (1, 1))
    elif k == 2:
        sig = singvals_2x2(a) if a.shape[-2] == 2 else None
        vals, V = jacobi_eigh(gram)
        if sig is None:
            sig = np.sqrt(np.maximum(vals, 0.0))
    else:
        vals, V = jacobi_eigh(gram)
        sig = np.sqrt(np.maximum(vals, 0.0))
    av = np.einsum("...ij,...jl->...il", a, V)
    safe = np.maximum(sig, 1e-300)
    U = av / safe[..., None, :]
    U = np.where((sig > 1e-14)[..., None, :], U, 0.0)
    return U, sig, V


# ---------------------------------------------------------------------------
# Cholesky and friends


def cholesky_batch(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of SPD stacks (..., n, n).

    Raises NotPositiveDefiniteError when any pivot is non-positive,
    which is the signal that an iterate has left the SPD cone.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    L = np.zeros_like(a)
    for j in range(n):
        s = a[..., j, j] - np.einsum("...k,...k->...", L[..., j, :j], L[..., j, :j])
        if np.any(s <= 0.0) or not np.all(np.isfinite(s)):
            raise NotPositiveDefiniteError(
                f"non-positive pivot at column {j} (min {np.min(s):.3e})"
            )
        L[..., j, j] = np.sqrt(s)
        if j + 1 < n:
            r = a[..., j + 1 :, j] - np.einsum(
                "...ik,...k->...i", L[..., j + 1 :, :j], L[..., j, :j]
            )
            L[..., j + 1 :, j] = r / L[..., j, j][..., None]
    return L


def cholesky(a) -> np.ndarray:
    """Lower Cholesky factor of a single SPD matrix."""
    return cholesky_batch(_check_symmetric(_as_square(a)))


def solve_lower(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L x = b for lower-triangular stacks by forward substitution."""
    n = L.shape[-1]
    shape = np.broadcast_shapes(L.shape[:-2], b.shape[:-2]) + b.shape[-2:]
    x = np.array(np.broadcast_to(b, shape), dtype=float, copy=True)
    for i in range(n):
        if i:
            x[..., i, :] -= np.einsum(
                "...k,...kj->...j", L[..., i, :i], x[..., :i, :]
            )
        x[..., i, :] /= L[..., i, i][..., None]
    return x


def inv_lower(L: np.ndarray) -> np.ndarray:
    """Inverse of lower-triangular stacks."""
    n = L.shape[-1]
    eye = np.broadcast_to(np.eye(n), L.shape)
    return solve_lower(L, eye)


def spd_inv_batch(a: np.ndarray) -> np.ndarray:
    """Inverse of SPD stacks via Cholesky (L^-T L^-1)."""
    Linv = inv_lower(cholesky_batch(a))
    return np.einsum("...ki,...kj->...ij", Linv, Linv)


def logdet_batch(a: np.ndarray) -> np.ndarray:
    """log det of SPD stacks as 2 * sum(log diag(L))."""
    L = cholesky_batch(a)
    return 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)


# ---------------------------------------------------------------------------
# SPD matrix functions

_SPD_FNS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda x: 1.0 / np.sqrt(x),
}

_NEEDS_POSITIVE = {"log", "sqrt", "inv_sqrt"}


def spd_fn_batch(a: np.ndarray, fn: str, floor: float = 1e-14) -> np.ndarray:
    """Apply a scalar function to SPD stacks via U diag(f(lam)) U^T."""
    if fn not in _SPD_FNS:
        raise InvalidInputError(f"unknown matrix function {fn!r}")
    vals, vecs = jacobi_eigh(a)
    if fn in _NEEDS_POSITIVE and np.any(vals <= floor):
        raise SingularityError(
            f"spd_fn({fn}) requires eigenvalues > {floor:g}, got min "
            f"{float(np.min(vals)):.3e}"
        )
    f = _SPD_FNS[fn](vals)
    out = np.einsum("...ik,...k,...jk->...ij", vecs, f, vecs)
    return 0.5 * (out + out.swapaxes(-1, -2))


def spd_fn(a, fn: str) -> np.ndarray:
    """Single-matrix front end of spd_fn_batch with symmetry validation."""
    return spd_fn_batch(_check_symmetric(_as_square(a)), fn)
