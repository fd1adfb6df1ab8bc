"""
Minimum-error discrimination of channels through quantum testers.

A tester ``{T_x}`` on ``in (x) out`` satisfies ``T_x >= 0`` and
``sum_x T_x = sigma (x) 1_out`` for a state ``sigma``; hypothesis ``x`` is
guessed with probability ``Tr(T_x C)`` when the channel has Choi operator
``C``. ``optimize_tester`` maximizes ``sum_x p_x Tr(C_x T_x)`` and returns a
strictly feasible tester together with a certified dual upper bound.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import conic, linalg, qobjects
from .errors import DimensionError, DomainError, SolverError, UndefinedAdvantageError

TESTER_TOL = 1e-7
GAP_TOL = 1e-7
SOLVER_TOL = 1e-10
MAX_ITER = 500
ADVANTAGE_GUARD = 1e-9


@dataclass(frozen=True)
class Ensemble:
    priors: tuple
    chois: tuple

    def __post_init__(self):
        priors = tuple(float(x) for x in self.priors)
        chois = tuple(self.chois)
        if len(priors) != len(chois) or not chois:
            raise DimensionError(f"{len(priors)} priors for {len(chois)} channels")
        if any(x < 0 for x in priors) or abs(sum(priors) - 1) > qobjects.PRIOR_SUM_TOL:
            raise DomainError(f"priors must be nonnegative and sum to 1, got {priors}")
        dims = {c.dims for c in chois}
        if len(dims) != 1:
            raise DimensionError(f"channels have different dimensions: {sorted(dims)}")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "chois", chois)

    @property
    def dims(self):
        return self.chois[0].dims

    @property
    def d_in(self):
        return self.chois[0].d_in

    @property
    def d_out(self):
        return self.chois[0].d_out


@dataclass(frozen=True)
class Tester:
    operators: tuple
    sigma: np.ndarray


@dataclass(frozen=True)
class TesterReport:
    positivity: float
    normalization: float
    sigma_positivity: float
    sigma_trace: float

    @property
    def ok(self):
        return max(self.residuals()) <= TESTER_TOL

    def residuals(self):
        return (self.positivity, self.normalization, self.sigma_positivity, self.sigma_trace)


@dataclass(frozen=True)
class SdpReport:
    primal_value: float
    dual_bound: float
    gap: float
    status: str
    iterations: int

    def to_dict(self):
        def r(x):
            return float(f"{x:.12g}")

        return {
            "primal": r(self.primal_value),
            "dual": r(self.dual_bound),
            "gap": r(self.gap),
            "status": self.status,
            "iterations": self.iterations,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def validate_tester(t, out_dim):
    """Residuals of positivity, normalization and the state-ness of ``sigma``."""
    positivity = max(max(0.0, -linalg.min_eigenvalue(op)) for op in t.operators)
    total = sum(t.operators)
    normalization = float(np.max(np.abs(total - np.kron(t.sigma, np.eye(out_dim)))))
    sigma_positivity = max(0.0, -linalg.min_eigenvalue(t.sigma))
    sigma_trace = abs(float(np.trace(t.sigma).real) - 1.0)
    return TesterReport(positivity, normalization, sigma_positivity, sigma_trace)


def tester_success(t, e):
    if len(t.operators) != len(e.chois):
        raise DimensionError(f"tester has {len(t.operators)} outcomes for {len(e.chois)} hypotheses")
    total = 0.0
    for p, c, op in zip(e.priors, e.chois, t.operators):
        if op.shape != c.matrix.shape:
            raise DimensionError(f"tester operator {op.shape} does not match Choi {c.matrix.shape}")
        total += p * float(np.real(np.trace(c.matrix @ op)))
    return total


def uniform_tester(e):
    """The random-guess tester ``T_x = 1/(N d_in) 1``."""
    n = len(e.chois)
    dim = e.d_in * e.d_out
    op = np.eye(dim, dtype=complex) / (n * e.d_in)
    return Tester(tuple(op for _ in range(n)), np.eye(e.d_in, dtype=complex) / e.d_in)


def _flag_block_diagonal(d_flag):
    def allowed(j, k):
        return j % d_flag == k % d_flag

    return allowed


def _inv_sqrt_on_support(h, rel=1e-12):
    w, v = np.linalg.eigh(linalg.hermitize(h))
    cut = rel * max(1.0, float(np.max(np.abs(w))))
    inv = np.where(w > cut, 1 / np.sqrt(np.where(w > cut, w, 1.0)), 0.0)
    return (v * inv) @ v.conj().T


def _psd_part(h):
    w, v = np.linalg.eigh(linalg.hermitize(h))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def _repair(operators, d_in, d_out):
    """Map a nearly feasible solver iterate onto an exactly normalized tester."""
    ops = [_psd_part(op) for op in operators]
    total = sum(ops)
    sigma = _psd_part(linalg.partial_trace(total, (d_in, d_out), keep=[0]) / d_out)
    sigma = sigma / np.trace(sigma).real
    target = np.kron(sigma, np.eye(d_out))
    left = linalg.psd_sqrt(linalg.hermitize(target), tol=1e-8) @ _inv_sqrt_on_support(total)
    ops = [linalg.hermitize(left @ op @ left.conj().T) for op in ops]
    return Tester(tuple(ops), linalg.hermitize(sigma))


def _certified_bound(w, e):
    """
    Upper bound from any Hermitian ``W``: shift until ``W >= p_x C_x`` for all x,
    then every tester obeys ``sum_x p_x Tr(C_x T_x) <= lambda_max(Tr_out W)``.
    """
    w = linalg.hermitize(w)
    shift = 0.0
    for p, c in zip(e.priors, e.chois):
        shift = max(shift, -linalg.min_eigenvalue(w - p * c.matrix))
    w = w + shift * np.eye(w.shape[0])
    reduced = linalg.partial_trace(w, (e.d_in, e.d_out), keep=[0])
    return float(np.linalg.eigvalsh(linalg.hermitize(reduced))[-1])


def optimize_tester(e, symmetry_reduction=False, tol=SOLVER_TOL, max_iter=MAX_ITER):
    """
    Optimal tester for the ensemble and its ``SdpReport``.

    ``primal_value`` is the success probability of the returned (exactly
    feasible) tester; ``dual_bound`` is a certified upper bound on every
    tester's success probability. With ``symmetry_reduction`` the testers are
    restricted to operators block diagonal in the last (flag) register, which
    loses nothing when every Choi operator is itself block diagonal there.
    """
    d_in, d_out = e.d_in, e.d_out
    dim = d_in * d_out
    n_hyp = len(e.chois)
    full = conic.HermitianBasis(dim)
    if symmetry_reduction:
        basis = conic.HermitianBasis(dim, allowed=_flag_block_diagonal(e.dims[-1]))
    else:
        basis = full
    m = len(basis)
    rows = basis.index_in(full)
    sigma_basis = conic.HermitianBasis(d_in)
    m_sigma = len(sigma_basis)
    n_var = n_hyp * m + m_sigma

    q = np.zeros(n_var)
    for x, (p, c) in enumerate(zip(e.priors, e.chois)):
        q[x * m:(x + 1) * m] = -p * basis.coords(c.matrix)

    # sum_x T_x - sigma (x) 1 = 0, written in the (reduced) basis coordinates
    lift = np.array([basis.coords(np.kron(sigma_basis.element(k), np.eye(d_out))) for k in range(m_sigma)]).T
    eq = sp.hstack([sp.identity(m, format="csc")] * n_hyp + [sp.csc_matrix(-lift)], format="csc")
    trace_row = np.zeros((1, n_var))
    trace_row[0, n_hyp * m:] = sigma_basis.coords(np.eye(d_in))

    emb = conic.embedding_operator(basis)
    blocks = [("zero", sp.vstack([eq, sp.csc_matrix(trace_row)], format="csc"), np.r_[np.zeros(m), 1.0])]
    for x in range(n_hyp):
        a = sp.hstack(
            [sp.csc_matrix((emb.shape[0], x * m)), -emb, sp.csc_matrix((emb.shape[0], n_var - (x + 1) * m))],
            format="csc",
        )
        blocks.append((("psd", 2 * dim), a, np.zeros(emb.shape[0])))
    sigma_emb = conic.embedding_operator(sigma_basis)
    a_sigma = sp.hstack([sp.csc_matrix((sigma_emb.shape[0], n_hyp * m)), -sigma_emb], format="csc")
    blocks.append((("psd", 2 * d_in), a_sigma, np.zeros(sigma_emb.shape[0])))

    best = None
    for profile in conic.PROFILES:
        res = conic.solve(q, blocks, tol=tol, max_iter=max_iter, profile=profile)
        if "Infeasible" in res.status:
            raise SolverError(f"tester SDP reported {res.status}")
        if not np.all(np.isfinite(res.x)):
            continue
        ops = [basis.matrix(res.x[x * m:(x + 1) * m]) for x in range(n_hyp)]
        tester = _repair(ops, d_in, d_out)
        primal = tester_success(tester, e)
        w_coords = np.zeros(len(full))
        w_coords[rows] = res.z[:m]
        dual = _certified_bound(full.matrix(w_coords), e)
        gap = dual - primal
        solved = res.status in ("Solved", "AlmostSolved")
        status = "optimal" if solved and gap <= GAP_TOL else "max-iter"
        candidate = (tester, SdpReport(primal, dual, gap, status, res.iterations))
        if best is None or gap < best[1].gap:
            best = candidate
        if status == "optimal":
            break
    if best is None:
        raise SolverError("solver returned non-finite iterates")
    tester, report = best
    return tester, report


def diamond_distance(a, b, **kwargs):
    """
    Diamond distance ``||A - B||_<>`` from the equal-prior discrimination value.

    Returns ``(value, (lo, hi))`` where ``value = 4 (p - 1/2)`` for the
    achieved success ``p`` and the interval comes from the primal/dual pair.
    """
    _, report = optimize_tester(Ensemble((0.5, 0.5), (a, b)), **kwargs)
    lo = max(0.0, 4 * (report.primal_value - 0.5))
    hi = max(lo, 4 * (report.dual_bound - 0.5))
    return lo, (lo, hi)


def _padded_pair(p1, p2):
    if p1.dim != p2.dim:
        raise DimensionError(f"POVMs act on dimensions {p1.dim} and {p2.dim}")
    n = max(len(p1), len(p2))
    return p1.padded(n), p2.padded(n)


def measurement_distance(p1, p2, **kwargs):
    p1, p2 = _padded_pair(p1, p2)
    return diamond_distance(qobjects.mp_channel_choi(p1), qobjects.mp_channel_choi(p2), **kwargs)[0]


def luders_distance(p1, p2, **kwargs):
    p1, p2 = _padded_pair(p1, p2)
    return diamond_distance(qobjects.luders_channel_choi(p1), qobjects.luders_channel_choi(p2), **kwargs)[0]


def instrument_advantage(p1, p2, **kwargs):
    """Ratio of the Lüders distance to the measurement distance."""
    d_m = measurement_distance(p1, p2, **kwargs)
    if d_m <= ADVANTAGE_GUARD:
        raise UndefinedAdvantageError(f"measurement distance {d_m:.3e} is too small for a ratio")
    return luders_distance(p1, p2, **kwargs) / d_m


def discriminate(povms, priors, mode, **kwargs):
    """Solve the tester SDP for POVMs in ``measurement`` or ``instrument`` mode."""
    povms = qobjects.pad_povms(povms)
    if mode == "measurement":
        chois = [qobjects.mp_channel_choi(p) for p in povms]
    elif mode == "instrument":
        chois = [qobjects.luders_channel_choi(p) for p in povms]
    else:
        raise DomainError(f"unknown mode {mode!r}")
    e = Ensemble(tuple(priors), tuple(chois))
    tester, report = optimize_tester(e, **kwargs)
    return e, tester, report


# Entanglement-free sequential strategies


@dataclass(frozen=True)
class SequentialStrategy:
    """Probe state, then a guessing POVM on the post-measurement state chosen by the outcome.

    ``adaptive_povms[a][x]`` is the element that guesses hypothesis ``x`` after outcome ``a``.
    """

    input_state: np.ndarray
    adaptive_povms: tuple
    degenerate: bool = False


def sequential_success(povms, priors, s):
    """
    Success probability ``sum_x p_x sum_a Tr(M_{a|x} rho) Tr(rho_{a|x} M'_{x|a})``.

    Zero-probability branches contribute nothing.
    """
    povms = qobjects.pad_povms(list(povms))
    rho = linalg.check_hermitian(s.input_state)
    total = 0.0
    for x, (p, povm) in enumerate(zip(priors, povms)):
        instr = qobjects.luders_instrument(povm)
        for a in range(len(povm)):
            k = instr.kraus[a]
            branch = k @ rho @ k
            if np.real(np.trace(branch)) <= qobjects.POST_STATE_MIN_PROB:
                continue
            total += p * float(np.real(np.trace(branch @ s.adaptive_povms[a][x])))
    return total
