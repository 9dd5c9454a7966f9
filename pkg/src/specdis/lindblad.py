"""Fixed-step Lindblad integrator for small target systems.

This is the Markovian baseline the chain dynamics is contrasted with: the
populations relax at rates set by the jump operators alone, with no
dependence on the level energies.  Dense matrices only; the dimension is
capped because the baseline has no performance ambitions.

For the canonical two-level decay model (single lowering operator
|0><1| at rate gamma) the equation integrates to populations
exp(-gamma t) and coherences exp(-i(E0 - E1) t - gamma t / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, NumericsError

MAX_DIM = 16
CONVERGENCE_TOL = 1e-8
_TRACE_TOL = 1e-9
_HERM_TOL = 1e-12
_PSD_TOL = 1e-8
_MAX_REFINEMENTS = 16


def _as_square(mat, name: str) -> np.ndarray:
    mat = np.array(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidSpecError(f"{name} must be a square matrix")
    if not np.isfinite(mat).all():
        raise InvalidSpecError(f"{name} must be finite")
    return mat


@dataclass(frozen=True)
class LindbladModel:
    """Target Hamiltonian plus weighted jump operators."""

    hamiltonian: np.ndarray
    jump_ops: tuple[np.ndarray, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        h = _as_square(self.hamiltonian, "hamiltonian")
        if h.shape[0] > MAX_DIM:
            raise InvalidSpecError(f"dimension {h.shape[0]} exceeds the cap of {MAX_DIM}")
        if np.abs(h - h.conj().T).max() > _HERM_TOL:
            raise InvalidSpecError("hamiltonian must be hermitian")
        ops = tuple(_as_square(op, "jump operator") for op in self.jump_ops)
        rates = tuple(float(r) for r in self.rates)
        if len(ops) != len(rates):
            raise InvalidSpecError("jump_ops and rates must have equal length")
        for op in ops:
            if op.shape != h.shape:
                raise InvalidSpecError("jump operators must match the hamiltonian dimension")
        if any(not math.isfinite(r) or r < 0 for r in rates):
            raise InvalidSpecError("rates must be finite and >= 0")
        h.setflags(write=False)
        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump_ops", ops)
        object.__setattr__(self, "rates", rates)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def lindblad_rhs(model: LindbladModel, rho) -> np.ndarray:
    """-i[H, rho] + sum_k gamma_k (L rho L+ - {L+ L, rho}/2).

    The output is traceless and hermitian for hermitian input.
    """
    rho = _as_square(rho, "rho")
    if rho.shape[0] != model.dim:
        raise InvalidSpecError("rho dimension does not match the model")
    out = -1j * (model.hamiltonian @ rho - rho @ model.hamiltonian)
    for rate, op in zip(model.rates, model.jump_ops):
        op_dag = op.conj().T
        op_sq = op_dag @ op
        out = out + rate * (op @ rho @ op_dag - 0.5 * (op_sq @ rho + rho @ op_sq))
    return out


def _fixed_step_samples(model: LindbladModel, rho0: np.ndarray, times, h: float) -> np.ndarray:
    """Classic RK4 with substeps no longer than h, sampling exactly at times."""
    ham = model.hamiltonian
    terms = [
        (rate, op, op.conj().T, op.conj().T @ op) for rate, op in zip(model.rates, model.jump_ops)
    ]

    def rhs(rho):
        out = -1j * (ham @ rho - rho @ ham)
        for rate, op, op_dag, op_sq in terms:
            out = out + rate * (op @ rho @ op_dag - 0.5 * (op_sq @ rho + rho @ op_sq))
        return out

    rho = rho0.astype(complex)
    out = np.empty((len(times), model.dim, model.dim), dtype=complex)
    t = 0.0
    for i, target in enumerate(times):
        span = target - t
        if span > 0.0:
            nsub = max(1, int(math.ceil(span / h - 1e-12)))
            sub = span / nsub
            for _ in range(nsub):
                k1 = rhs(rho)
                k2 = rhs(rho + 0.5 * sub * k1)
                k3 = rhs(rho + 0.5 * sub * k2)
                k4 = rhs(rho + sub * k3)
                rho = rho + (sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = target
        out[i] = rho
    return out


def integrate(
    model: LindbladModel, rho0, times, tol: float = CONVERGENCE_TOL
) -> np.ndarray:
    """Trajectory of density matrices on the requested time grid.

    The RK4 substep is halved until another halving changes every sample
    by less than ``tol``; failure to converge raises NumericsError, as
    does any trace/hermiticity/positivity violation along the accepted
    trajectory.
    """
    rho0 = _as_square(rho0, "rho0")
    if rho0.shape[0] != model.dim:
        raise InvalidSpecError("rho0 dimension does not match the model")
    if np.abs(rho0 - rho0.conj().T).max() > _HERM_TOL or abs(np.trace(rho0) - 1.0) > _TRACE_TOL:
        raise InvalidSpecError("rho0 must be hermitian with unit trace")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0 or not np.isfinite(times).all():
        raise InvalidSpecError("times must be a non-empty finite array")
    if (times < 0).any() or (np.diff(times) < 0).any():
        raise InvalidSpecError("times must be sorted and non-negative")

    # Seed the step from the jump rates only; the refinement loop detects
    # Hamiltonian-driven stiffness by itself.  Keeping the seed free of the
    # level energies makes population trajectories of diagonal states
    # bitwise energy-independent (the commutator contributes exact zeros).
    h = 0.05 / max(1.0, max(model.rates, default=0.0))
    traj = _fixed_step_samples(model, rho0, times, h)
    for _ in range(_MAX_REFINEMENTS):
        finer = _fixed_step_samples(model, rho0, times, h / 2.0)
        change = float(np.abs(finer - traj).max())
        traj = finer
        h /= 2.0
        if change < tol:
            break
    else:
        raise NumericsError(f"step refinement did not converge below {tol}")

    for i, rho in enumerate(traj):
        herm = np.abs(rho - rho.conj().T).max()
        if herm > 1e-10:
            raise NumericsError(f"hermiticity lost at sample {i}: asymmetry {herm:.3e}")
        if abs(np.trace(rho) - 1.0) > _TRACE_TOL:
            raise NumericsError(f"trace lost at sample {i}: {np.trace(rho)!r}")
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lowest < -_PSD_TOL:
            raise NumericsError(f"positivity lost at sample {i}: eigenvalue {lowest:.3e}")
    return traj


def decay_model(E0: float, E1: float, rate: float) -> LindbladModel:
    """Two-level model: diagonal energies and a single lowering jump |0><1|."""
    lowering = np.zeros((2, 2), dtype=complex)
    lowering[0, 1] = 1.0
    return LindbladModel(
        hamiltonian=np.diag([E0, E1]).astype(complex),
        jump_ops=(lowering,),
        rates=(rate,),
    )


def decay_population(times, rate: float, initial: float = 1.0) -> np.ndarray:
    """Closed-form excited population of the decay model."""
    return initial * np.exp(-rate * np.asarray(times, dtype=float))


def decay_coherence(times, E0: float, E1: float, rate: float, initial: complex) -> np.ndarray:
    """Closed-form off-diagonal element rho_01 of the decay model."""
    t = np.asarray(times, dtype=float)
    return initial * np.exp(-1j * (E0 - E1) * t - 0.5 * rate * t)
