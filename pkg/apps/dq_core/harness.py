"""Fidelity-decay experiments, scaling fits and sweep orchestration.

Every grid point is an exact, deterministic evaluation; the seed only feeds
randomized checks such as ``oracle_check``.
"""

from __future__ import annotations

import itertools
import logging
import multiprocessing
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.stats import binom

from apps.dq_core.channels import (
    PerturbationSpec,
    QuantumChannel,
    collective_damping,
    collective_dephasing_exact,
    compose,
    independent_error_channel,
    kraus_from_joint,
    markovian_dephasing,
    single_qubit_pauli_weights,
)
from apps.dq_core.concat import correct_branches_logical, default_concat_code, inner_code
from apps.dq_core.config import BathMode, ExperimentConfig, Scenario
from apps.dq_core.errors import ConfigError, DimensionMismatchError, DqError, ParameterError
from apps.dq_core.qcore import (
    PAULI,
    CMatrix,
    DensityMatrix,
    apply_channel,
    apply_local,
    as_cmatrix,
    fidelity,
    matrix_exp,
    partial_trace,
    random_density_matrix,
    random_hermitian,
    tensor,
)

logger = logging.getLogger(__name__)

# Generic logical state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
GENERIC_THETA = np.pi / 3
GENERIC_PHI = np.pi / 4

ORACLE_TOL = 1e-12
# Fit windows keep x <= FIT_DECADES_FACTOR * x_min.
FIT_DECADES_FACTOR = 100.0


def generic_logical_amplitudes() -> tuple[complex, complex]:
    alpha = complex(np.cos(GENERIC_THETA / 2))
    beta = complex(np.exp(1j * GENERIC_PHI) * np.sin(GENERIC_THETA / 2))
    return alpha, beta


# ─────────────────────────────────────────────────────────────────────────────
# Joint-evolution oracle
# ─────────────────────────────────────────────────────────────────────────────
def simulate_joint(
    h_s: npt.ArrayLike,
    h_b: npt.ArrayLike,
    h_i: npt.ArrayLike,
    rho_s: DensityMatrix,
    rho_b: DensityMatrix,
    t: float,
) -> DensityMatrix:
    """Tr_B[U (rho_S ⊗ rho_B) U†] with U = exp(-i (H_S⊗1 + 1⊗H_B + H_I) t)."""
    hs, hb, hi = as_cmatrix(h_s), as_cmatrix(h_b), as_cmatrix(h_i)
    ds, db = rho_s.dim, rho_b.dim
    if hs.shape != (ds, ds) or hb.shape != (db, db) or hi.shape != (ds * db, ds * db):
        raise DimensionMismatchError(
            f"Hamiltonian shapes {hs.shape}, {hb.shape}, {hi.shape} do not match dims ({ds}, {db})"
        )
    h = np.kron(hs, np.eye(db)) + np.kron(np.eye(ds), hb) + hi
    u = matrix_exp(h, t)
    joint = u @ tensor(rho_s.matrix, rho_b.matrix) @ u.conj().T
    return partial_trace(DensityMatrix((joint + joint.conj().T) / 2), [ds, db], [0])


@dataclass
class OracleReport:
    n_instances: int
    max_deviation: float
    tol: float = ORACLE_TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol


def oracle_check(
    n_instances: int = 100,
    seed: int = 0,
    sys_dims: Sequence[int] = (2, 4, 8, 16),
    bath_dims: Sequence[int] = (2, 3, 4),
) -> OracleReport:
    """Compare kraus_from_joint + apply_channel with simulate_joint on random instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        ds = int(rng.choice(sys_dims))
        db = int(rng.choice(bath_dims))
        h_s = random_hermitian(ds, rng)
        h_b = random_hermitian(db, rng)
        h_i = random_hermitian(ds * db, rng)
        rho_s = random_density_matrix(ds, rng)
        rho_b = random_density_matrix(db, rng)
        t = float(rng.uniform(0.1, 2.0))

        direct = simulate_joint(h_s, h_b, h_i, rho_s, rho_b, t)
        h = np.kron(h_s, np.eye(db)) + np.kron(np.eye(ds), h_b) + h_i
        channel = kraus_from_joint(matrix_exp(h, t), (ds, db), rho_b)
        via_kraus = apply_channel(channel, rho_s)
        worst = max(worst, float(np.max(np.abs(direct.matrix - via_kraus.matrix))))
    logger.info(f"Oracle check: {n_instances} instances, max deviation {worst:.3e}")
    return OracleReport(n_instances, worst)


# ─────────────────────────────────────────────────────────────────────────────
# Scaling fits
# ─────────────────────────────────────────────────────────────────────────────
@dataclass
class ScalingFit:
    """Least-squares line through (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float
    indices: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "indices": list(self.indices),
        }


def fit_scaling(
    points: Sequence[tuple[float, float]], window: tuple[int, int] | None = None
) -> ScalingFit:
    """Fit log y = slope·log x + intercept over ``points[window[0]:window[1]]``.

    Raises:
        ParameterError: With fewer than 3 points, non-positive values or a
            single distinct x.
    """
    start, stop = window if window is not None else (0, len(points))
    selected = list(points[start:stop])
    if len(selected) < 3:
        raise ParameterError(f"Scaling fit needs at least 3 points, got {len(selected)}")
    xs = np.array([p[0] for p in selected], dtype=np.float64)
    ys = np.array([p[1] for p in selected], dtype=np.float64)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("Scaling fit needs strictly positive x and y")
    if np.unique(xs).size < 2:
        raise ParameterError("Scaling fit needs at least two distinct x values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    predicted = slope * lx + intercept
    ss_res = float(np.sum((ly - predicted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    indices = list(range(start, start + len(selected)))
    return ScalingFit(float(slope), float(intercept), r_squared, indices)


def default_window(xs: Sequence[float]) -> tuple[int, int]:
    """Leading run of sorted x values within two decades of the smallest."""
    limit = FIT_DECADES_FACTOR * xs[0]
    stop = 0
    while stop < len(xs) and xs[stop] <= limit:
        stop += 1
    return 0, stop


# ─────────────────────────────────────────────────────────────────────────────
# Results
# ─────────────────────────────────────────────────────────────────────────────
@dataclass
class SweepPoint:
    lam: float
    epsilon: float
    t: float
    infidelity: float | None
    truncated_mass: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "t": self.t,
            "infidelity": self.infidelity,
            "truncated_mass": self.truncated_mass,
            "error": self.error,
        }


@dataclass
class SweepResult:
    """Grid of infidelities in lambda -> epsilon -> t order, plus log-log fits."""

    scenario: str
    seed: int
    bath: str
    points: list[SweepPoint]
    fits: dict[str, ScalingFit] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "bath": self.bath,
            "points": [p.to_dict() for p in self.points],
            "fits": {axis: fit.to_dict() for axis, fit in sorted(self.fits.items())},
        }


# ─────────────────────────────────────────────────────────────────────────────
# Scenarios
# ─────────────────────────────────────────────────────────────────────────────
def collective_channel(cfg: ExperimentConfig, k: int, lam: float, t: float) -> QuantumChannel:
    """Collective dephasing at rate (Markov) or coupling scale (exact bath) lam."""
    if cfg.bath is BathMode.EXACT:
        return collective_dephasing_exact(k, cfg.bath_model.to_model().scaled(lam), t)
    return markovian_dephasing(k, lam, t)


def _block_damping(cfg: ExperimentConfig, block_qubits: int, lam: float, t: float) -> CMatrix:
    if cfg.bath is BathMode.EXACT:
        bath = cfg.bath_model.to_model().scaled(lam)
        return collective_damping(block_qubits, t, bath=bath)
    return collective_damping(block_qubits, t, rate=lam)


def _infidelity(rho0: DensityMatrix, rhot: DensityMatrix) -> float:
    return 1.0 - fidelity(rho0, rhot)


def _unencoded(cfg: ExperimentConfig, lam: float, t: float) -> float:
    plus = DensityMatrix.from_vector([1, 1])
    return _infidelity(plus, apply_channel(collective_channel(cfg, 1, lam, t), plus))


@lru_cache(maxsize=None)
def dfs_reference_state(inner: str) -> tuple[int, DensityMatrix]:
    """Qubit count and generic logical state of an inner DFS code, built once per name."""
    code = inner_code(inner)
    alpha, beta = generic_logical_amplitudes()
    k = int(round(np.log2(code.phys_dim)))
    return k, DensityMatrix.from_vector(code.isometry @ np.array([alpha, beta]))


def _dfs(cfg: ExperimentConfig, lam: float, eps: float, t: float, perturbed: bool) -> float:
    k, rho0 = dfs_reference_state(cfg.inner)
    channel = collective_channel(cfg, k, lam, t)
    if perturbed:
        independent = independent_error_channel(k, PerturbationSpec(eps, cfg.noise_model), t)
        channel = compose(independent, channel)
    return _infidelity(rho0, apply_channel(channel, rho0))


def pauli_patterns(
    n_qubits: int, weights: dict[str, float], max_weight: int
) -> list[tuple[float, tuple[tuple[int, str], ...]]]:
    """Independent Pauli error patterns of weight <= max_weight with their probabilities."""
    errors = [(name, w) for name, w in weights.items() if name != "I" and w > 0]
    p_id = weights["I"]
    patterns = []
    for weight in range(max_weight + 1):
        for qubits in itertools.combinations(range(n_qubits), weight):
            for combo in itertools.product(errors, repeat=weight):
                prob = p_id ** (n_qubits - weight) * float(np.prod([w for _, w in combo]))
                placed = tuple((q, name) for q, (name, _) in zip(qubits, combo, strict=True))
                patterns.append((prob, placed))
    return patterns


def damping_ensemble(vector: CMatrix, block_damping: CMatrix, n_blocks: int) -> list[CMatrix]:
    """Pure-branch ensemble of D ∘ |v><v| for block-product damping D.

    D is restricted to the support of v and eigendecomposed; a branch with
    weight mu and eigenvector u is sqrt(mu)·(u ∘ v).
    """
    support = np.flatnonzero(vector)
    d = block_damping.shape[0]
    restricted = np.ones((support.size, support.size), dtype=np.complex128)
    for b in range(n_blocks):
        digit = (support // d ** (n_blocks - 1 - b)) % d
        restricted *= block_damping[np.ix_(digit, digit)]
    if np.all(restricted == 1):
        return [vector]
    mu, u = np.linalg.eigh((restricted + restricted.conj().T) / 2)
    keep = mu > 1e-15 * mu.max()
    branches = []
    for m, col in zip(mu[keep], u[:, keep].T, strict=True):
        branch = np.zeros_like(vector)
        branch[support] = np.sqrt(m) * col * vector[support]
        branches.append(branch)
    return branches


def _concatenated(cfg: ExperimentConfig, lam: float, eps: float, t: float) -> tuple[float, float]:
    if cfg.inner != "dephasing2":
        raise ConfigError("The concatenated scenario runs on the dephasing2 inner code only")
    code = default_concat_code()
    alpha, beta = generic_logical_amplitudes()
    target = code.outer.isometry @ np.array([alpha, beta])
    psi = code.lift @ target

    n_qubits = code.register_qubits
    weights = single_qubit_pauli_weights(PerturbationSpec(eps, cfg.noise_model), t)
    p_error = 1.0 - weights["I"]
    truncated = float(binom.sf(cfg.max_error_weight, n_qubits, p_error))
    damping = _block_damping(cfg, code.block_qubits, lam, t)

    infidelity = 0.0
    for prob, pattern in pauli_patterns(n_qubits, weights, cfg.max_error_weight):
        v = psi
        for qubit, name in pattern:
            v = apply_local(PAULI[name], v, qubit, [2] * n_qubits)
        loss = 0.0
        for out in correct_branches_logical(damping_ensemble(v, damping, code.n_blocks), code):
            residual = out - target * np.vdot(target, out)
            loss += float(np.vdot(residual, residual).real)
        infidelity += prob * loss
    return infidelity, truncated


def check_scenario(cfg: ExperimentConfig) -> None:
    """Reject scenario/config combinations that cannot run.

    Raises:
        ConfigError: For the concatenated scenario on a 4-qubit inner code.
    """
    if cfg.scenario is Scenario.CONCATENATED and cfg.inner != "dephasing2":
        raise ConfigError(
            "concatenated scenario needs the dephasing2 inner code; collective4 is block-level only"
        )


def evaluate_point(cfg: ExperimentConfig, lam: float, eps: float, t: float) -> SweepPoint:
    """Infidelity 1 - F of one grid point."""
    truncated = 0.0
    if cfg.scenario is Scenario.UNENCODED:
        value = _unencoded(cfg, lam, t)
    elif cfg.scenario is Scenario.DFS_PERFECT:
        value = _dfs(cfg, lam, eps, t, perturbed=False)
    elif cfg.scenario is Scenario.DFS_PERTURBED:
        value = _dfs(cfg, lam, eps, t, perturbed=True)
    else:
        value, truncated = _concatenated(cfg, lam, eps, t)
    return SweepPoint(lam, eps, t, value, truncated)


def _evaluate_safely(cfg: ExperimentConfig, lam: float, eps: float, t: float) -> SweepPoint:
    try:
        point = evaluate_point(cfg, lam, eps, t)
    except (DqError, ValueError, np.linalg.LinAlgError) as e:
        logger.warning(f"Point (lambda={lam}, eps={eps}, t={t}) failed: {e}")
        return SweepPoint(lam, eps, t, None, error=f"{type(e).__name__}: {e}")
    logger.info(f"Point (lambda={lam}, eps={eps}, t={t}): infidelity={point.infidelity:.6e}")
    return point


def grid(cfg: ExperimentConfig) -> list[tuple[float, float, float]]:
    """Grid points in lambda -> epsilon -> t order."""
    return list(itertools.product(cfg.lambdas, cfg.epsilons, cfg.t_grid))


def attach_fits(cfg: ExperimentConfig, points: Sequence[SweepPoint]) -> dict[str, ScalingFit]:
    """Log-log fits per swept axis with at least 3 values.

    The epsilon axis is read at the first lambda and largest t, the t axis at
    the first lambda and largest epsilon, the lambda axis at the largest
    epsilon and t.
    """
    lams, epss, ts = cfg.lambdas, cfg.epsilons, cfg.t_grid

    def idx(li: int, ei: int, ti: int) -> int:
        return (li * len(epss) + ei) * len(ts) + ti

    axes = {
        "epsilon": (epss, [idx(0, i, len(ts) - 1) for i in range(len(epss))]),
        "t": (ts, [idx(0, len(epss) - 1, i) for i in range(len(ts))]),
        "lambda": (lams, [idx(i, len(epss) - 1, len(ts) - 1) for i in range(len(lams))]),
    }
    fits: dict[str, ScalingFit] = {}
    for axis, (xs, selection) in axes.items():
        if len(xs) < 3:
            continue
        start, stop = default_window(xs)
        chosen = selection[start:stop]
        ys = [points[i].infidelity for i in chosen]
        if any(y is None or y <= 0 for y in ys):
            logger.warning(f"Skipping {axis} fit: non-positive or failed points")
            continue
        pts = [(x, float(y)) for x, y in zip(xs[start:stop], ys, strict=True) if y is not None]
        try:
            fit = fit_scaling(pts)
        except ParameterError as e:
            logger.warning(f"Skipping {axis} fit: {e}")
            continue
        fits[axis] = replace(fit, indices=list(chosen))
    return fits


def run_sweep(cfg: ExperimentConfig, parallelism: int = 1) -> SweepResult:
    """Evaluate the grid, optionally across worker processes, and attach fits.

    Points come back in grid order whatever the execution order; per-point
    failures are recorded on the point.
    """
    check_scenario(cfg)
    tasks = grid(cfg)
    if parallelism <= 1:
        points = [_evaluate_safely(cfg, *task) for task in tasks]
    else:
        lams, epss, ts = zip(*tasks, strict=True)
        context = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=parallelism, mp_context=context) as pool:
            points = list(pool.map(_evaluate_safely, [cfg] * len(tasks), lams, epss, ts))
    return SweepResult(
        scenario=cfg.scenario.value,
        seed=cfg.seed,
        bath=cfg.bath.value,
        points=points,
        fits=attach_fits(cfg, points),
    )


def run_scenario(cfg: ExperimentConfig) -> SweepResult:
    """Run one scenario over its grid in-process.

    Raises:
        ConfigError: On a scenario/config mismatch.
    """
    return run_sweep(cfg, parallelism=1)
