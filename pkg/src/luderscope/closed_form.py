"""
Analytic success probabilities used to cross-check the tester SDP.

Covers Helstrom discrimination of two states, dichotomic projective qubit
measurements with and without their post-measurement states, the noisy-Z
family ``W^p = {|0><0| + p|1><1|, (1 - p)|1><1|}`` against ``Z``, and the
explicit entanglement-free strategy for projective pairs.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg, qobjects
from .errors import DomainError
from .tester import SequentialStrategy

DEGENERATE_TOL = 1e-9


def helstrom(p1, rho1, p2, rho2):
    """Optimal probability of telling ``rho1`` from ``rho2`` given priors ``p1, p2``."""
    rho1 = linalg.check_hermitian(rho1)
    rho2 = linalg.check_hermitian(rho2)
    return 0.5 * (1 + linalg.trace_norm(p1 * rho1 - p2 * rho2))


def helstrom_measurement(rho_a, rho_b, p_a):
    """
    Two-outcome POVM ``(E_a, E_b)`` attaining the Helstrom value for priors ``(p_a, 1 - p_a)``.

    ``E_a`` projects onto the nonnegative eigenspace of ``p_a rho_a - (1 - p_a) rho_b``.
    """
    w, v = linalg.eig_hermitian(p_a * rho_a - (1 - p_a) * rho_b)
    cols = v[:, w >= -1e-12]
    e_a = cols @ cols.conj().T
    return e_a, np.eye(len(w)) - e_a


@dataclass(frozen=True)
class ProjectivePair:
    psi: np.ndarray
    phi: np.ndarray
    p_psi: float = 0.5
    p_phi: float = 0.5

    def __post_init__(self):
        psi = linalg.check_pure_state(self.psi)
        phi = linalg.check_pure_state(self.phi)
        if psi.shape != (2,) or phi.shape != (2,):
            raise DomainError("projective pairs are defined for qubits")
        if min(self.p_psi, self.p_phi) < 0 or abs(self.p_psi + self.p_phi - 1) > 1e-12:
            raise DomainError(f"priors must be nonnegative and sum to 1, got ({self.p_psi}, {self.p_phi})")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)

    @property
    def overlap_sq(self):
        """``|<psi|phi>|^2``"""
        return float(abs(np.vdot(self.psi, self.phi)) ** 2)

    def povms(self):
        return qobjects.projective_qubit_povm(self.psi), qobjects.projective_qubit_povm(self.phi)


def projective_luders_success(pair):
    """
    Optimal success with post-measurement states: Helstrom for the two-copy
    states ``psi (x) psi`` and ``phi (x) phi``, i.e.
    ``(1 + sqrt(1 - 4 p_psi p_phi |<psi|phi>|^4)) / 2``.
    """
    x = pair.overlap_sq
    return 0.5 * (1 + np.sqrt(max(0.0, 1 - 4 * pair.p_psi * pair.p_phi * x * x)))


def projective_measurement_success(pair):
    """Optimal success from the classical outcome alone (single-copy Helstrom)."""
    x = pair.overlap_sq
    return 0.5 * (1 + np.sqrt(max(0.0, 1 - 4 * pair.p_psi * pair.p_phi * x)))


def projective_advantage(psi, phi):
    """``sqrt(1 + |<psi|phi>|^2)``; coinciding measurements return the limit sqrt(2) with a warning."""
    x = abs(np.vdot(linalg.check_pure_state(psi), linalg.check_pure_state(phi))) ** 2
    if x >= 1 - DEGENERATE_TOL:
        warnings.warn("identical measurements: advantage reported as its limit sqrt(2)", RuntimeWarning)
        return float(np.sqrt(2))
    return float(np.sqrt(1 + x))


# Z versus the noisy family W^p


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"noise parameter must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class NoisyZParams:
    p: float
    rho: np.ndarray

    def __post_init__(self):
        _check_p(self.p)
        rho = linalg.check_hermitian(self.rho)
        if rho.shape != (2, 2):
            raise DomainError("probe must be a qubit state")
        if linalg.min_eigenvalue(rho) < -1e-10 or abs(np.trace(rho).real - 1) > 1e-10:
            raise DomainError("probe must be a density matrix")
        object.__setattr__(self, "rho", rho)


def noisy_z_measurement_success(p):
    """Optimal Z vs W^p success without post-measurement states: ``1/2 + p/2``."""
    _check_p(p)
    return 0.5 + p / 2


def noisy_z_difference_operator(params):
    """
    ``L_W(rho) - L_Z(rho)`` for the Lüders channels on ``out (x) flag``:
    ``p r11 |10><10| + sqrt(p) r01 |00><10| + sqrt(p) r10 |10><00| - p r11 |11><11|``.
    """
    p, r = params.p, params.rho
    sp_ = np.sqrt(p)
    op = np.zeros((4, 4), dtype=complex)
    op[2, 2] = p * r[1, 1].real
    op[0, 2] = sp_ * r[0, 1]
    op[2, 0] = sp_ * r[1, 0]
    op[3, 3] = -p * r[1, 1].real
    return op


def noisy_z_difference_eigenvalues(params):
    """
    Eigenvalues of ``noisy_z_difference_operator``.

    The ``|00>, |10>`` block is ``[[0, sqrt(p) r01], [sqrt(p) r10, p r11]]``, giving
    ``(0, (p r11 - s)/2, (p r11 + s)/2, -p r11)`` with ``s = sqrt(p^2 r11^2 + 4 p |r01|^2)``.
    """
    p, r = params.p, params.rho
    r11 = float(r[1, 1].real)
    coh = float(abs(r[0, 1]) ** 2)
    s = np.sqrt(p * p * r11 * r11 + 4 * p * coh)
    return (0.0, 0.5 * (p * r11 - s), 0.5 * (p * r11 + s), -p * r11)


def noisy_z_sequential_success(params):
    """Success of the entanglement-free strategy probing with ``rho``: ``1/2 + (sum |eigenvalues|)/4``."""
    return 0.5 + 0.25 * float(np.sum(np.abs(noisy_z_difference_eigenvalues(params))))


def _pure_probe(t):
    v = np.array([np.sqrt(1 - t), np.sqrt(t)])
    return np.outer(v, v).astype(complex)


def noisy_z_sequential_optimum(p):
    """
    Best entanglement-free success over pure probes ``sqrt(1-t)|0> + sqrt(t)|1>``.

    Only ``r11 = t`` and ``|r01|^2 = t(1 - t)`` matter, so a bounded scalar
    search over ``t`` suffices.
    """
    _check_p(p)
    res = minimize_scalar(
        lambda t: -noisy_z_sequential_success(NoisyZParams(p, _pure_probe(t))),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    edge = max(noisy_z_sequential_success(NoisyZParams(p, _pure_probe(t))) for t in (0.0, 1.0))
    return max(-float(res.fun), edge)


def noisy_z_sequential_advantage(p):
    """Advantage ratio attained by ``noisy_z_sequential_optimum``; diverges like 1/(2 sqrt p)."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"advantage needs 0 < p <= 1, got {p}")
    return (noisy_z_sequential_optimum(p) - 0.5) / (noisy_z_measurement_success(p) - 0.5)


def noisy_z_bias_lower(p):
    """
    The expression ``(p + sqrt p) / (2p)``.

    It assumes a trace norm of ``p + sqrt p`` at the probe ``|1><1|``; the
    operator there actually has trace norm ``2p`` (see
    ``noisy_z_difference_eigenvalues``), so treat this as a reference value,
    not a certified bound. ``noisy_z_sequential_advantage`` is the exact
    entanglement-free ratio.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"bias bound needs 0 < p <= 1, got {p}")
    return (p + np.sqrt(p)) / (2 * p)


def noisy_z_probe_bound(params):
    """``1/2 + (sqrt(p) sqrt(4 r01 r10 + r11^2) + p r11)/4``, the value matching ``noisy_z_bias_lower``."""
    p, r = params.p, params.rho
    r11 = float(r[1, 1].real)
    return 0.5 + 0.25 * (np.sqrt(p) * np.sqrt(4 * abs(r[0, 1]) ** 2 + r11 * r11) + p * r11)


# Entanglement-free strategy for projective pairs


def bloch_vector(psi):
    rho = linalg.projector(psi)
    return np.array([np.trace(rho @ s).real for s in (linalg.PAULI_X, linalg.PAULI_Y, linalg.PAULI_Z)])


def bloch_projector(n):
    """Pure-state projector ``(1 + n.sigma)/2`` for the direction of ``n``."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return 0.5 * (np.eye(2) + n[0] * linalg.PAULI_X + n[1] * linalg.PAULI_Y + n[2] * linalg.PAULI_Z)


def _orthogonal_unit(u):
    """Deterministic unit vector orthogonal to ``u``."""
    axis = np.eye(3)[int(np.argmin(np.abs(u)))]
    v = np.cross(u, axis)
    return v / np.linalg.norm(v)


def optimal_sequential_strategy(pair):
    """
    Entanglement-free strategy attaining ``projective_luders_success`` for equal priors.

    Probe with the pure state whose Bloch vector bisects those of ``psi`` and
    ``phi_perp``. After outcome 0 run the Helstrom measurement for ``psi`` vs
    ``phi`` with priors ``(p_M, 1 - p_M)``; after outcome 1 the one for
    ``phi_perp`` vs ``psi_perp``. Here ``p_M`` is the success without
    post-measurement states.
    """
    if abs(pair.p_psi - 0.5) > 1e-12:
        raise DomainError("the sequential construction covers equal priors only")
    psi, phi = pair.psi, pair.phi
    psi_perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
    phi_perp = np.array([-np.conj(phi[1]), np.conj(phi[0])])

    u, v = bloch_vector(psi), bloch_vector(phi_perp)
    mid = u + v
    degenerate = np.linalg.norm(mid) < DEGENERATE_TOL
    if degenerate:
        warnings.warn("antipodal Bloch vectors: choosing an orthogonal bisector", RuntimeWarning)
        mid = _orthogonal_unit(u)
    probe = bloch_projector(mid)

    p_m = projective_measurement_success(pair)
    guess_psi, guess_phi = helstrom_measurement(linalg.projector(psi), linalg.projector(phi), p_m)
    after_0 = (guess_psi, guess_phi)
    guess_phi_perp, guess_psi_perp = helstrom_measurement(
        linalg.projector(phi_perp), linalg.projector(psi_perp), p_m
    )
    after_1 = (guess_psi_perp, guess_phi_perp)
    return SequentialStrategy(probe, (after_0, after_1), degenerate=bool(degenerate))


def entangled_collapse(psi):
    """``(|psi><psi| (x) 1) |phi_2^+>`` with the normalized two-qubit maximally entangled state."""
    psi = linalg.check_pure_state(psi)
    if psi.shape != (2,):
        raise DomainError("entangled_collapse expects a qubit state")
    return np.kron(linalg.projector(psi), np.eye(2)) @ linalg.max_entangled(2)
