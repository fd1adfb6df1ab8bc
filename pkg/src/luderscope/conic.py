"""
Complex Hermitian SDPs on top of a real PSD-cone interior point solver.

A Hermitian variable ``X`` is parametrized by its real coordinates in an
orthonormal Hermitian basis and enters the cone through the real symmetric
embedding ``[[Re X, -Im X], [Im X, Re X]]``, which is PSD iff ``X`` is.
Clarabel does the numerical work.
"""

from dataclasses import dataclass

import clarabel
import numpy as np
import scipy.sparse as sp


class HermitianBasis:
    """
    Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices.

    Elements are ``E_jj``, ``(E_jk + E_kj)/sqrt2`` and ``i(E_jk - E_kj)/sqrt2``
    for ``j < k``. ``allowed(j, k)`` restricts the basis to a coordinate
    subspace, e.g. block-diagonal operators.
    """

    def __init__(self, n, allowed=None):
        self.n = n
        kinds, rows, cols = [], [], []
        for j in range(n):
            for k in range(j, n):
                if allowed is not None and not allowed(j, k):
                    continue
                if j == k:
                    kinds.append(0)
                    rows.append(j)
                    cols.append(k)
                else:
                    kinds.extend((1, 2))
                    rows.extend((j, j))
                    cols.extend((k, k))
        self.kinds = np.array(kinds)
        self.rows = np.array(rows)
        self.cols = np.array(cols)

    def __len__(self):
        return len(self.kinds)

    def coords(self, y):
        """Real coordinates ``Tr(B_k Y)`` of a Hermitian ``Y``."""
        vals = y[self.rows, self.cols]
        out = np.where(self.kinds == 0, vals.real, np.sqrt(2) * vals.real)
        return np.where(self.kinds == 2, np.sqrt(2) * vals.imag, out)

    def matrix(self, c):
        y = np.zeros((self.n, self.n), dtype=complex)
        c = np.asarray(c, dtype=float)
        diag = self.kinds == 0
        y[self.rows[diag], self.cols[diag]] = c[diag]
        sym = self.kinds == 1
        y[self.rows[sym], self.cols[sym]] += c[sym] / np.sqrt(2)
        asym = self.kinds == 2
        y[self.rows[asym], self.cols[asym]] += 1j * c[asym] / np.sqrt(2)
        off = ~diag
        y[self.cols[off], self.rows[off]] = np.conj(y[self.rows[off], self.cols[off]])
        return y

    def element(self, k):
        e = np.zeros(len(self))
        e[k] = 1
        return self.matrix(e)

    def index_in(self, other):
        """Positions of this basis' elements inside ``other`` (a superset basis)."""
        lookup = {key: i for i, key in enumerate(zip(other.kinds, other.rows, other.cols))}
        return np.array([lookup[key] for key in zip(self.kinds, self.rows, self.cols)])


def real_embedding(x):
    x = np.asarray(x, dtype=complex)
    return np.block([[x.real, -x.imag], [x.imag, x.real]])


def svec_indices(n):
    """Upper triangle in column-major order, the layout Clarabel expects."""
    rows, cols = [], []
    for j in range(n):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    return np.array(rows), np.array(cols)


def svec(m):
    rows, cols = svec_indices(m.shape[0])
    scale = np.where(rows == cols, 1.0, np.sqrt(2))
    return scale * m[rows, cols]


def smat(v, n):
    rows, cols = svec_indices(n)
    scale = np.where(rows == cols, 1.0, 1 / np.sqrt(2))
    m = np.zeros((n, n))
    m[rows, cols] = scale * v
    m[cols, rows] = scale * v
    return m


def embedding_operator(basis):
    """Sparse matrix mapping basis coordinates to ``svec(real_embedding(X))``."""
    cols = [svec(real_embedding(basis.element(k))) for k in range(len(basis))]
    return sp.csc_matrix(np.array(cols).T)


@dataclass
class ConicResult:
    x: np.ndarray
    z: np.ndarray
    status: str
    iterations: int
    objective: float


_REFINE = {
    "iterative_refinement_max_iter": 50,
    "iterative_refinement_reltol": 1e-15,
    "iterative_refinement_abstol": 1e-15,
}

# tried in order until the certified gap is small enough
PROFILES = {
    "default": _REFINE,
    "short-steps": {**_REFINE, "max_step_fraction": 0.95},
    "no-dynamic-reg": {**_REFINE, "dynamic_regularization_enable": False},
}


def solve(q, blocks, tol=1e-10, max_iter=500, profile="default"):
    """
    Minimize ``q.x`` subject to stacked constraints ``A x + s = b``.

    ``blocks`` is a list of ``(kind, A, b)`` with ``kind`` either ``"zero"``
    (equalities) or ``("psd", dim)`` for an svec'd PSD cone of side ``dim``.
    Returns the primal point, the stacked dual ``z`` and the solver status.
    """
    a_parts, b_parts, cones = [], [], []
    for kind, a, b in blocks:
        a_parts.append(sp.csc_matrix(a))
        b_parts.append(np.asarray(b, dtype=float))
        if kind == "zero":
            cones.append(clarabel.ZeroConeT(a.shape[0]))
        else:
            cones.append(clarabel.PSDTriangleConeT(kind[1]))
    a = sp.vstack(a_parts, format="csc")
    b = np.concatenate(b_parts)
    n = a.shape[1]
    p = sp.csc_matrix((n, n))

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = max_iter
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol
    settings.max_threads = 1
    for key, value in PROFILES[profile].items():
        setattr(settings, key, value)
    solver = clarabel.DefaultSolver(p, np.asarray(q, dtype=float), a, b, cones, settings)
    sol = solver.solve()
    return ConicResult(
        x=np.asarray(sol.x),
        z=np.asarray(sol.z),
        status=str(sol.status),
        iterations=int(sol.iterations),
        objective=float(sol.obj_val),
    )
