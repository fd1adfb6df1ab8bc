"""
Dense complex linear algebra used throughout the package.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Multi-partite
operators are laid out with factor 0 as the leftmost tensor factor, so an
operator on ``H_in (x) H_out1 (x) H_out2`` has ``dims == (d_in, d_out1, d_out2)``.
"""

import numpy as np
from scipy.stats import unitary_group

from .errors import DimensionError, DomainError, NotPSDError, NumericError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def kron(*ops):
    """Tensor product of any number of operators, leftmost factor first."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def dagger(m):
    return np.asarray(m).conj().T


def transpose(m):
    return np.asarray(m).T


def conj(m):
    return np.asarray(m).conj()


def hermiticity_residual(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_residual(m) <= tol


def hermitize(m):
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def check_hermitian(m, tol=HERMITIAN_TOL):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"operator must be square, got {m.shape}")
    res = hermiticity_residual(m)
    if res > tol:
        raise DomainError(f"operator is not Hermitian (residual {res:.3e})")
    return hermitize(m)


def _check_dims(m, dims):
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be positive: {dims}")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(f"dims {dims} do not match operator of shape {m.shape}")
    return dims


def partial_trace(m, dims, keep):
    """
    Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original relative order.
    """
    m = np.asarray(m, dtype=complex)
    dims = _check_dims(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims)
    for i in reversed(range(n)):
        if i in keep:
            continue
        live = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + live)
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kept, kept)


def eig_hermitian(h):
    """
    Eigendecomposition of a Hermitian operator.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns. Raises ``NumericError`` when the reconstruction
    residual exceeds 1e-9.
    """
    h = hermitize(check_hermitian(h))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition did not converge: {exc}") from exc
    scale = max(1.0, float(np.max(np.abs(h))))
    res = float(np.max(np.abs(h - (v * w) @ v.conj().T)))
    orth = float(np.max(np.abs(v.conj().T @ v - np.eye(len(w)))))
    if res > EIG_RESIDUAL_TOL * scale or orth > EIG_RESIDUAL_TOL:
        raise NumericError(
            f"eigendecomposition residual too large (reconstruction {res:.3e}, orthogonality {orth:.3e})"
        )
    return w, v


def min_eigenvalue(h):
    return float(np.linalg.eigvalsh(hermitize(h))[0])


def psd_sqrt(h, tol=PSD_TOL):
    """Unique positive semidefinite square root; eigenvalues in [-tol, 0) are clamped to 0."""
    w, v = eig_hermitian(h)
    if w[0] < -tol:
        raise NotPSDError(f"operator is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    # round-off level eigenvalues are zeros; sqrt would inflate them to ~1e-8
    noise = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    root = np.sqrt(np.where(w > noise, w, 0.0))
    return hermitize((v * root) @ v.conj().T)


def trace_norm(h):
    w, _ = eig_hermitian(h)
    return float(np.sum(np.abs(w)))


def universal_not(a):
    """The map A -> (Tr(A) 1 - A) / (d - 1)."""
    a = as_matrix(a)
    d = a.shape[0]
    if a.shape != (d, d):
        raise DimensionError(f"operator must be square, got {a.shape}")
    if d < 2:
        raise DomainError("universal NOT needs dimension >= 2")
    return (np.trace(a) * np.eye(d) - a) / (d - 1)


def universal_not_pair(a, d=2):
    """(Gamma (x) Gamma)(A) on a bipartite operator with equal local dimensions ``d``."""
    a = as_matrix(a)
    if a.shape != (d * d, d * d):
        raise DimensionError(f"expected a {d * d}x{d * d} operator, got {a.shape}")
    eye = np.eye(d)
    first = partial_trace(a, (d, d), keep=[0])
    second = partial_trace(a, (d, d), keep=[1])
    out = np.trace(a) * np.eye(d * d) - np.kron(eye, second) - np.kron(first, eye) + a
    return out / (d - 1) ** 2


def ket(index, d):
    v = np.zeros(d, dtype=complex)
    v[index] = 1
    return v


def projector(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def normalize(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise DomainError("cannot normalize the zero vector")
    return v / n


def check_pure_state(v, tol=1e-10):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1) > tol:
        raise DomainError(f"state is not normalized (norm {np.linalg.norm(v):.12f})")
    return v


def max_entangled(d, normalized=True):
    """sum_j |j>|j>, divided by sqrt(d) when ``normalized``."""
    if d < 2:
        raise DomainError("maximally entangled state needs d >= 2")
    v = np.eye(d, dtype=complex).reshape(-1)
    return v / np.sqrt(d) if normalized else v


def random_unitary(d, rng=None):
    return unitary_group.rvs(d, random_state=rng)


def random_pure_state(d, rng=None):
    rng = np.random.default_rng(rng)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density_matrix(d, rng=None, rank=None):
    rng = np.random.default_rng(rng)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_hermitian(d, rng=None):
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitize(g)
