"""
POVMs, Lüders instruments and the Choi operators of the channels built from them.

Two channels are attached to a POVM ``{M_a}``:

* the measure-and-prepare channel ``rho -> sum_a Tr(M_a rho) |a><a|``, whose
  Choi operator lives on ``in (x) flag``;
* the Lüders channel ``rho -> sum_a sqrt(M_a) rho sqrt(M_a) (x) |a><a|``, whose
  Choi operator lives on ``in (x) out (x) flag``.

The flag register uses the computational basis in POVM element order.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    DomainError,
    EnsembleFormatError,
    NotPSDError,
    UndefinedPostStateError,
)

POVM_PSD_TOL = 1e-9
POVM_COMPLETENESS_TOL = 1e-9
INSTRUMENT_TOL = 1e-8
CHOI_TOL = 1e-8
POST_STATE_MIN_PROB = 1e-12
PRIOR_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Povm:
    elements: tuple

    def __post_init__(self):
        elements = tuple(linalg.as_matrix(m) for m in self.elements)
        if not elements:
            raise DimensionError("a POVM needs at least one element")
        d = elements[0].shape[0]
        for m in elements:
            if m.shape != (d, d):
                raise DimensionError(f"POVM elements must all be {d}x{d}, got {m.shape}")
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self):
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, a):
        return self.elements[a]

    def padded(self, n):
        """Append zero elements up to ``n`` outcomes."""
        if n < len(self):
            raise DimensionError(f"cannot pad a {len(self)}-outcome POVM down to {n}")
        zeros = tuple(np.zeros((self.dim, self.dim), dtype=complex) for _ in range(n - len(self)))
        return Povm(self.elements + zeros)

    def conjugated(self, u):
        """The POVM ``{U M_a U^dagger}``."""
        u = np.asarray(u, dtype=complex)
        return Povm(tuple(u @ m @ u.conj().T for m in self.elements))


@dataclass(frozen=True)
class PovmReport:
    min_eigenvalues: tuple
    hermiticity_residual: float
    completeness_residual: float

    @property
    def ok(self):
        return (
            self.hermiticity_residual <= linalg.HERMITIAN_TOL
            and min(self.min_eigenvalues) >= -POVM_PSD_TOL
            and self.completeness_residual <= POVM_COMPLETENESS_TOL
        )

    def to_dict(self):
        return {
            "ok": self.ok,
            "min_eigenvalues": list(self.min_eigenvalues),
            "hermiticity_residual": self.hermiticity_residual,
            "completeness_residual": self.completeness_residual,
        }

    def __str__(self):
        eigs = ", ".join(f"{e:.3e}" for e in self.min_eigenvalues)
        return (
            f"POVM {'valid' if self.ok else 'INVALID'}: min eigenvalues [{eigs}], "
            f"hermiticity residual {self.hermiticity_residual:.3e}, "
            f"completeness residual {self.completeness_residual:.3e}"
        )


def validate_povm(p):
    herm = max(linalg.hermiticity_residual(m) for m in p)
    mins = tuple(linalg.min_eigenvalue(m) for m in p)
    total = sum(p.elements)
    completeness = float(np.max(np.abs(total - np.eye(p.dim))))
    return PovmReport(mins, herm, completeness)


def pad_povms(povms):
    """Pad every POVM with zero elements so they share one outcome count."""
    n = max(len(p) for p in povms)
    dims = {p.dim for p in povms}
    if len(dims) != 1:
        raise DimensionError(f"POVMs act on different dimensions: {sorted(dims)}")
    return [p.padded(n) for p in povms]


@dataclass(frozen=True)
class LudersInstrument:
    kraus: tuple

    @property
    def dim(self):
        return self.kraus[0].shape[0]

    def __len__(self):
        return len(self.kraus)


def luders_instrument(p):
    return LudersInstrument(tuple(linalg.psd_sqrt(m, tol=POVM_PSD_TOL) for m in p))


def instrument_povm(instr):
    """Recover ``M_a = K_a^dagger K_a`` from a Lüders instrument."""
    elements = []
    for k in instr.kraus:
        if not linalg.is_hermitian(k, tol=INSTRUMENT_TOL) or linalg.min_eigenvalue(k) < -INSTRUMENT_TOL:
            raise NotPSDError("Lüders Kraus operators must be positive semidefinite")
        elements.append(linalg.dagger(k) @ k)
    return Povm(tuple(elements))


def luders_post_state(instr, a, rho):
    """
    Outcome probability and normalized post-measurement state for outcome ``a``.

    Raises ``UndefinedPostStateError`` when ``Tr(M_a rho) <= 1e-12``.
    """
    if not 0 <= a < len(instr):
        raise DimensionError(f"outcome {a} out of range for {len(instr)} outcomes")
    rho = linalg.check_hermitian(rho)
    k = instr.kraus[a]
    unnormalized = k @ rho @ k
    prob = float(np.real(np.trace(unnormalized)))
    if prob <= POST_STATE_MIN_PROB:
        raise UndefinedPostStateError(f"outcome {a} has probability {prob:.3e}")
    return prob, linalg.hermitize(unnormalized / prob)


@dataclass(frozen=True)
class ChoiOperator:
    """Choi operator on ``in (x) out...`` with the subsystem layout in ``dims``."""

    matrix: np.ndarray
    dims: tuple
    is_channel: bool = True

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        if m.shape != (int(np.prod(dims)),) * 2:
            raise DimensionError(f"dims {dims} do not match Choi operator of shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def d_in(self):
        return self.dims[0]

    @property
    def d_out(self):
        return int(np.prod(self.dims[1:]))

    def cp_residual(self):
        """Most negative eigenvalue (0 when CP)."""
        return max(0.0, -linalg.min_eigenvalue(self.matrix))

    def tp_residual(self):
        reduced = linalg.partial_trace(self.matrix, self.dims, keep=[0])
        return float(np.max(np.abs(reduced - np.eye(self.d_in))))

    def is_valid(self, tol=CHOI_TOL):
        ok = self.cp_residual() <= tol and linalg.hermiticity_residual(self.matrix) <= tol
        if self.is_channel:
            ok = ok and self.tp_residual() <= tol
        return ok


def _flag(a, n):
    f = np.zeros((n, n), dtype=complex)
    f[a, a] = 1
    return f


def mp_channel_choi(p, n_outcomes=None):
    """Choi operator ``sum_a M_a^T (x) |a><a|`` of the measure-and-prepare channel."""
    n = len(p) if n_outcomes is None else n_outcomes
    p = p.padded(n)
    c = sum(np.kron(m.T, _flag(a, n)) for a, m in enumerate(p))
    return ChoiOperator(c, (p.dim, n))


def luders_channel_choi(p, n_outcomes=None):
    """
    Choi operator of the Lüders channel, on ``in (x) out (x) flag``.

    Built as ``sum_a |v_a><v_a| (x) |a><a|`` with ``|v_a> = (1 (x) sqrt(M_a)) |Phi+>``
    and ``|Phi+>`` unnormalized.
    """
    n = len(p) if n_outcomes is None else n_outcomes
    p = p.padded(n)
    d = p.dim
    phi = linalg.max_entangled(d, normalized=False)
    c = np.zeros((d * d * n, d * d * n), dtype=complex)
    for a, k in enumerate(luders_instrument(p).kraus):
        v = np.kron(np.eye(d), k) @ phi
        c += np.kron(np.outer(v, v.conj()), _flag(a, n))
    return ChoiOperator(linalg.hermitize(c), (d, d, n))


def projective_luders_choi(p, n_outcomes=None):
    """``sum_a M_a^T (x) M_a (x) |a><a|``; equals the Lüders Choi only for rank-1 projective POVMs."""
    n = len(p) if n_outcomes is None else n_outcomes
    p = p.padded(n)
    c = sum(linalg.kron(m.T, m, _flag(a, n)) for a, m in enumerate(p))
    return ChoiOperator(c, (p.dim, p.dim, n))


# Named measurement families


def projective_qubit_povm(psi):
    psi = linalg.check_pure_state(psi)
    if psi.shape != (2,):
        raise DimensionError("projective_qubit_povm expects a qubit state")
    proj = linalg.projector(psi)
    return Povm((proj, np.eye(2) - proj))


def z_povm():
    return projective_qubit_povm(linalg.ket(0, 2))


def x_povm():
    return projective_qubit_povm(np.array([1, 1]) / np.sqrt(2))


def trine_povm(theta, phi):
    """Three scaled projectors ``(1 + n_j . sigma) / 3`` with Bloch vectors 120 degrees apart."""
    elements = []
    for j in range(3):
        angle = theta + 2 * np.pi * j / 3
        n = (np.cos(angle), np.sin(angle) * np.cos(phi), np.sin(angle) * np.sin(phi))
        bloch = n[0] * linalg.PAULI_X + n[1] * linalg.PAULI_Y + n[2] * linalg.PAULI_Z
        elements.append((np.eye(2) + bloch) / 3)
    return Povm(tuple(elements))


def theta_ket(theta):
    return np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)


def theta_perp_ket(theta):
    return np.array([-np.sin(theta / 2), np.cos(theta / 2)], dtype=complex)


def noisy_z_povm(theta, p):
    """``{|t><t| + p |t_perp><t_perp|, (1 - p) |t_perp><t_perp|}`` for ``|t> = cos(theta/2)|0> + sin(theta/2)|1>``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"noise parameter must lie in [0, 1], got {p}")
    t = linalg.projector(theta_ket(theta))
    tp = linalg.projector(theta_perp_ket(theta))
    return Povm((t + p * tp, (1 - p) * tp))


def w_povm(p):
    return noisy_z_povm(0.0, p)


def random_qubit_povm(n, rng=None):
    """Random ``n``-outcome qubit POVM: random PSD operators rescaled to sum to identity."""
    rng = np.random.default_rng(rng)
    raw = [linalg.random_density_matrix(2, rng) * rng.uniform(0.2, 1.0) for _ in range(n)]
    s = sum(raw)
    inv_root = np.linalg.inv(linalg.psd_sqrt(s))
    return Povm(tuple(linalg.hermitize(inv_root @ r @ inv_root) for r in raw))


# JSON ensemble format


def _parse_matrix(rows, dim):
    m = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows], dtype=complex)
    if m.shape != (dim, dim):
        raise EnsembleFormatError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    return m


def parse_ensemble(obj):
    """
    Parse the JSON ensemble object into ``(priors, povms)``.

    Expected shape::

        {"dim": 2, "priors": [0.5, 0.5],
         "povms": [[[[[1, 0], [0, 0]], [[0, 0], [0, 0]]], ...], ...]}

    Every entry is an ``[re, im]`` pair. Invalid POVMs raise
    ``EnsembleFormatError`` carrying the ``PovmReport``.
    """
    try:
        dim = int(obj["dim"])
        priors = [float(x) for x in obj["priors"]]
        raw_povms = obj["povms"]
        povms = [Povm(tuple(_parse_matrix(m, dim) for m in raw)) for raw in raw_povms]
    except EnsembleFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, DimensionError) as exc:
        raise EnsembleFormatError(f"malformed ensemble: {exc}") from exc
    if len(priors) != len(povms):
        raise EnsembleFormatError(f"{len(priors)} priors for {len(povms)} POVMs")
    if any(x < 0 for x in priors) or abs(sum(priors) - 1) > PRIOR_SUM_TOL:
        raise EnsembleFormatError(f"priors must be nonnegative and sum to 1, got {priors}")
    for x, p in enumerate(povms):
        report = validate_povm(p)
        if not report.ok:
            raise EnsembleFormatError(f"POVM {x} is invalid: {report}", report=report)
    return priors, povms


def load_ensemble(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EnsembleFormatError(f"invalid JSON: {exc}") from exc
    return parse_ensemble(obj)


def ensemble_to_json(priors, povms):
    def enc(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]

    return {
        "dim": povms[0].dim,
        "priors": [float(x) for x in priors],
        "povms": [[enc(m) for m in p] for p in povms],
    }
