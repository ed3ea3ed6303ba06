"""Controlled transformations, phase kick-back, and exchange statistics.

A controlled transformation applies branch unitary U_i to the target when the
control sits on basis state i, and is itself one reversible map on the
composite.  When every branch fixes a common target state, running the control
through in superposition kicks a phase back onto it; the kicked angles are the
branch eigenphases on that state, gauged so branch 0 carries angle zero.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import (
    EPS_EQ,
    EPS_PSD,
    QUANTUM,
    Effect,
    InfeasibleError,
    Measurement,
    StateVector,
    SystemMismatchError,
    SystemType,
    Transformation,
    ValidationError,
    _rng,
    apply,
    basis_state,
    composite_system,
    density_matrix,
    distinguishing_measurement,
    ket_state,
    pair,
    partial_pair,
    quantum_system,
    random_state,
    tensor_states,
    transform_effect,
    unitary_channel,
)
from .paths import NotAPhaseError, PathExperiment, _path_kets, is_phase, phase_relative_angles

KICKBACK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControlledTransformation:
    """A branch-indexed reversible transformation on control (x) target."""

    control_system: SystemType
    target_system: SystemType
    control_states: tuple[StateVector, ...]
    control_measurement: Measurement
    branch_transforms: tuple[Transformation, ...]
    composite: Transformation
    branch_unitaries: tuple[np.ndarray, ...]
    control_kets: np.ndarray
    designated_target: StateVector | None = None

    @property
    def n_branches(self) -> int:
        return len(self.branch_transforms)


def _as_unitary(mat: np.ndarray, dim: int, label: str) -> np.ndarray:
    u = np.asarray(mat, dtype=complex)
    if u.shape != (dim, dim):
        raise SystemMismatchError(f"{label} has shape {u.shape}, expected {(dim, dim)}")
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))
    if dev > 1e-9:
        raise ValidationError(f"{label} is not unitary (deviation {dev!r})")
    return u


def build_controlled(
    branch_unitaries: Sequence[np.ndarray],
    target_system: SystemType,
    control_kets: np.ndarray | None = None,
    verify_samples: int = 20,
    seed: int | np.random.Generator = 0,
) -> ControlledTransformation:
    """Assemble and verify the controlled transformation of the given branches.

    The control defaults to the computational basis of an n-level quantum
    system.  Construction checks both defining properties on random target
    states: branch i acts on the target whenever the control is prepared on
    basis state i, and filtering the control on (i| after the composite yields
    branch i weighted by the control overlap.
    """
    if target_system.theory != QUANTUM:
        raise SystemMismatchError("controlled transformations are built on the quantum backend")
    n = len(branch_unitaries)
    if n < 2:
        raise ValidationError("need at least two branches to control on")
    d_t = target_system.dim
    unitaries = tuple(
        _as_unitary(u, d_t, f"branch {i}") for i, u in enumerate(branch_unitaries)
    )
    if control_kets is None:
        kets = np.eye(n, dtype=complex)
    else:
        kets = np.asarray(control_kets, dtype=complex)
        if kets.shape != (n, n):
            raise SystemMismatchError(
                f"control kets of shape {kets.shape} do not form a basis for {n} branches"
            )
        dev = float(np.max(np.abs(kets.conj().T @ kets - np.eye(n))))
        if dev > 1e-9:
            raise ValidationError(f"control kets are not orthonormal (deviation {dev!r})")
    control_system = quantum_system(n)
    block = sum(
        np.kron(np.outer(kets[:, i], kets[:, i].conj()), unitaries[i]) for i in range(n)
    )
    composite = unitary_channel(composite_system(control_system, target_system), block)
    control_states = tuple(ket_state(control_system, kets[:, i]) for i in range(n))
    branch_transforms = tuple(unitary_channel(target_system, u) for u in unitaries)
    built = ControlledTransformation(
        control_system=control_system,
        target_system=target_system,
        control_states=control_states,
        control_measurement=distinguishing_measurement(control_states),
        branch_transforms=branch_transforms,
        composite=composite,
        branch_unitaries=unitaries,
        control_kets=kets,
    )
    report = verify_control_contract(built, trials=verify_samples, seed=seed)
    if report["max_branch_deviation"] > 1e-9 or report["max_filter_deviation"] > 1e-9:
        raise ValidationError(f"controlled contract failed at construction: {report}")
    return built


def verify_control_contract(
    controlled: ControlledTransformation,
    trials: int = 20,
    seed: int | np.random.Generator = 0,
) -> dict:
    """Check the two defining equations on random target states.

    Returns max deviations for branch action on control basis states and for
    control filtering on superposed controls.
    """
    rng = _rng(seed)
    branch_dev = 0.0
    for sigma in _target_samples(controlled.target_system, trials, rng):
        for i, state in enumerate(controlled.control_states):
            out = apply(controlled.composite, tensor_states(state, sigma))
            want = tensor_states(state, apply(controlled.branch_transforms[i], sigma))
            branch_dev = max(branch_dev, float(np.max(np.abs(out.coeffs - want.coeffs))))
    filt = superposition_preservation_report(
        controlled.composite,
        controlled.control_measurement.effects[: controlled.n_branches],
        controlled.branch_transforms,
        controlled.control_system,
        controlled.target_system,
        trials=trials,
        seed=rng,
    )
    return {
        "max_branch_deviation": branch_dev,
        "max_filter_deviation": filt["max_deviation"],
        "trials": trials,
    }


def _target_samples(
    system: SystemType, trials: int, rng: np.random.Generator
) -> list[StateVector]:
    kinds = ["pure", "mixed"]
    return [random_state(system, rng, kind=kinds[t % 2]) for t in range(trials)]


def superposition_preservation_report(
    composite: Transformation,
    control_effects: Sequence[Effect],
    branch_transforms: Sequence[Transformation],
    control_system: SystemType,
    target_system: SystemType,
    trials: int = 50,
    seed: int | np.random.Generator = 0,
) -> dict:
    """Deviation of control filtering from weighted branch action.

    For random control states w and target states sigma, compares
    (i| filtering of composite(w (x) sigma) against pair(i, w) times branch i
    of sigma.  Returns the maximum coefficient deviation over all samples and
    branches; a genuinely controlled composite sits at numerical zero.
    """
    rng = _rng(seed)
    if composite.in_system != composite_system(control_system, target_system):
        raise SystemMismatchError("composite does not act on control (x) target")
    max_dev = 0.0
    worst_branch = 0
    for t in range(trials):
        omega = random_state(control_system, rng, kind="mixed" if t % 2 else "pure")
        sigma = random_state(target_system, rng, kind="pure" if t % 2 else "mixed")
        moved = apply(composite, tensor_states(omega, sigma))
        for i, effect in enumerate(control_effects):
            got = partial_pair(moved, effect, 0)
            weight = pair(effect, omega)
            want = weight * apply(branch_transforms[i], sigma).coeffs
            dev = float(np.max(np.abs(got.coeffs - want)))
            if dev > max_dev:
                max_dev, worst_branch = dev, i
    return {"max_deviation": max_dev, "worst_branch": worst_branch, "trials": trials}


def verify_superposition_preservation(
    controlled: ControlledTransformation,
    trials: int = 50,
    seed: int | np.random.Generator = 0,
) -> dict:
    return superposition_preservation_report(
        controlled.composite,
        controlled.control_measurement.effects[: controlled.n_branches],
        controlled.branch_transforms,
        controlled.control_system,
        controlled.target_system,
        trials=trials,
        seed=seed,
    )


def _eigenphase_clusters(u: np.ndarray, tol: float = 1e-8) -> list[tuple[float, np.ndarray]]:
    """Eigenspaces of a unitary, clustered by eigenphase on the circle.

    Returns (angle, orthonormal basis columns) sorted by angle in [0, 2 pi).
    """
    vals, vecs = np.linalg.eig(u)
    angles = np.angle(vals) % (2.0 * math.pi)
    order = np.argsort(angles)
    angles, vecs = angles[order], vecs[:, order]
    groups: list[list[int]] = [[0]]
    for i in range(1, len(angles)):
        if angles[i] - angles[groups[-1][-1]] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    # the circle wraps: a cluster at 2 pi belongs with one at 0
    if len(groups) > 1 and (2.0 * math.pi - angles[groups[-1][0]]) + angles[0] < tol:
        groups[0] = groups.pop() + groups[0]
    clusters = []
    for g in groups:
        q, _ = np.linalg.qr(vecs[:, g])
        clusters.append((float(np.angle(np.exp(1j * angles[g]).mean()) % (2 * math.pi)), q))
    return clusters


def _intersect_subspaces(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the intersection of two column spaces."""
    stacked = np.hstack([a, -b])
    _, svals, vh = np.linalg.svd(stacked)
    null_mask = np.zeros(vh.shape[0], dtype=bool)
    null_mask[: len(svals)] = svals < tol
    null_mask[len(svals):] = True
    null = vh[null_mask].conj().T
    if null.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    vectors = a @ null[: a.shape[1]]
    q, r = np.linalg.qr(vectors)
    keep = np.abs(np.diag(r)) > tol
    return q[:, keep]


def common_fixed_state(
    branch_unitaries: Sequence[np.ndarray],
    target_system: SystemType | None = None,
) -> StateVector | None:
    """A pure target state every branch fixes, or None when none exists.

    Simultaneous eigenvectors are found by refining the eigenspaces of the
    first branch against each later one; candidates are ordered by their
    eigenphase cluster indices and the representative is the first
    computational basis vector's projection, so the result is deterministic.
    The {identity, diag(1, -1)} pair yields basis state 0.
    """
    if not branch_unitaries:
        raise ValidationError("need at least one branch")
    d = np.asarray(branch_unitaries[0]).shape[0]
    system = target_system if target_system is not None else quantum_system(d)
    if system.dim != d:
        raise SystemMismatchError(f"branches of size {d} do not fit system dim {system.dim}")
    unitaries = [_as_unitary(u, d, f"branch {i}") for i, u in enumerate(branch_unitaries)]
    candidates: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.eye(d, dtype=complex))]
    for u in unitaries:
        clusters = _eigenphase_clusters(u)
        refined = []
        for key, space in candidates:
            for ci, (_, eigenspace) in enumerate(clusters):
                meet = _intersect_subspaces(space, eigenspace)
                if meet.shape[1] > 0:
                    refined.append((key + (ci,), meet))
        if not refined:
            return None
        candidates = refined
    candidates.sort(key=lambda kv: kv[0])
    space = candidates[0][1]
    # canonical representative: first basis vector with weight in the subspace
    for j in range(d):
        v = space @ (space.conj().T @ np.eye(d, dtype=complex)[:, j])
        if np.linalg.norm(v) > 1e-6:
            v = v / np.linalg.norm(v)
            lead = np.argmax(np.abs(v))
            v = v * np.exp(-1j * np.angle(v[lead]))
            return ket_state(system, v)
    raise InfeasibleError("empty candidate subspace survived refinement")


@dataclass(frozen=True, eq=False)
class KickbackResult:
    """Kicked phase extracted from a controlled transformation and fixed state."""

    fixed_state: StateVector
    angles: np.ndarray
    transform: Transformation
    kickback_residual: float
    phase_residual: float

    def __post_init__(self) -> None:
        arr = np.array(self.angles, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "angles", arr)

    def to_json_dict(self) -> dict:
        return {
            "fixed_state_coeffs": [float(x) for x in self.fixed_state.coeffs],
            "angles": [float(a) for a in self.angles],
            "kickback_residual": self.kickback_residual,
            "phase_residual": self.phase_residual,
        }


def extract_kickback(
    controlled: ControlledTransformation,
    fixed_state: StateVector | None = None,
    verify_samples: int = 20,
    seed: int | np.random.Generator = 0,
) -> KickbackResult:
    """Kicked phase of a controlled transformation on a commonly fixed target.

    The fixed state defaults to a computed common fixed state.  A supplied one
    is re-verified: each branch must fix it, which for a pure state means the
    ket is a simultaneous eigenvector.  Angles are the branch eigenphases
    gauged so branch 0 sits at zero; the returned transform acts on the
    control and fixes all which-path effects of the control basis.
    """
    if fixed_state is None:
        fixed_state = common_fixed_state(
            controlled.branch_unitaries, controlled.target_system
        )
        if fixed_state is None:
            raise InfeasibleError("branches share no fixed state to kick back from")
    if fixed_state.system != controlled.target_system:
        raise SystemMismatchError("fixed state does not live on the target system")
    deviations = [
        float(np.max(np.abs(apply(t, fixed_state).coeffs - fixed_state.coeffs)))
        for t in controlled.branch_transforms
    ]
    worst = int(np.argmax(deviations))
    if deviations[worst] > EPS_EQ:
        raise InfeasibleError(
            f"branch {worst} moves the target state (deviation {deviations[worst]!r})"
        )
    vals, vecs = np.linalg.eigh(density_matrix(fixed_state))
    if vals[-1] < 1.0 - EPS_PSD:
        raise InfeasibleError(
            f"fixed state is not pure (top eigenvalue {vals[-1]!r}); "
            "kick-back needs a pure fixed state"
        )
    psi = vecs[:, -1]
    raw = np.empty(controlled.n_branches)
    for i, u in enumerate(controlled.branch_unitaries):
        moved = u @ psi
        eig = np.vdot(psi, moved)
        residue = float(np.max(np.abs(moved - eig * psi)))
        if residue > 1e-8 or abs(abs(eig) - 1.0) > 1e-8:
            raise InfeasibleError(
                f"branch {i} does not phase the fixed state (residue {residue!r})"
            )
        raw[i] = np.angle(eig)
    angles = (raw - raw[0]) % (2.0 * math.pi)
    kets = controlled.control_kets
    q_matrix = (kets * np.exp(1j * angles)) @ kets.conj().T
    transform = unitary_channel(controlled.control_system, q_matrix)
    rng = _rng(seed)
    kb_dev = 0.0
    for sigma in _target_samples(controlled.control_system, verify_samples, rng):
        lhs = apply(controlled.composite, tensor_states(sigma, fixed_state))
        rhs = tensor_states(apply(transform, sigma), fixed_state)
        kb_dev = max(kb_dev, float(np.max(np.abs(lhs.coeffs - rhs.coeffs))))
    phase_dev = 0.0
    for effect in controlled.control_measurement.effects[: controlled.n_branches]:
        pulled = transform_effect(transform, effect)
        phase_dev = max(phase_dev, float(np.max(np.abs(pulled.coeffs - effect.coeffs))))
    if kb_dev > KICKBACK_TOL:
        raise ValidationError(f"kick-back equation failed verification (deviation {kb_dev!r})")
    if phase_dev > KICKBACK_TOL:
        raise ValidationError(f"kicked transform moves a which-path effect ({phase_dev!r})")
    return KickbackResult(
        fixed_state=fixed_state,
        angles=angles,
        transform=transform,
        kickback_residual=kb_dev,
        phase_residual=phase_dev,
    )


def realize_phase_as_kickback(
    phase: Transformation,
    control_experiment: PathExperiment,
    seed: int | np.random.Generator = 0,
) -> ControlledTransformation:
    """Controlled transformation whose kick-back reproduces a given phase.

    Branches act on a qubit target as diag(1, e^{i w_i}) with w_i the phase's
    relative angles, so the designated fixed state |1><1| kicks back exactly
    those angles.  The two-path zero/pi phase yields the controlled-sign gate.
    """
    if not is_phase(phase, control_experiment):
        raise NotAPhaseError("transformation to realize is not a phase for the experiment")
    angles = phase_relative_angles(phase, control_experiment)
    target = quantum_system(2)
    branches = [np.diag([1.0, np.exp(1j * a)]) for a in angles]
    kets = _path_kets(control_experiment)
    built = build_controlled(branches, target, control_kets=kets, seed=seed)
    designated = basis_state(target, 1)
    return ControlledTransformation(
        control_system=built.control_system,
        target_system=built.target_system,
        control_states=built.control_states,
        control_measurement=built.control_measurement,
        branch_transforms=built.branch_transforms,
        composite=built.composite,
        branch_unitaries=built.branch_unitaries,
        control_kets=built.control_kets,
        designated_target=designated,
    )


def _swap_unitary(dim: int) -> np.ndarray:
    s = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            s[j * dim + i, i * dim + j] = 1.0
    return s


def control_target_swap_check(
    controlled: ControlledTransformation, tol: float = EPS_EQ
) -> dict:
    """Verify the two factorizations of a doubly diagonal controlled map.

    When every branch is diagonal in the computational target basis, swapping
    the factors exposes the same composite as controlled-from-the-target with
    branches read off column by column (ungauged eigenphases, so the identity
    is exact at channel level).  Returns the kicked-phase table and deviation.
    """
    d_c, d_t = controlled.control_system.dim, controlled.target_system.dim
    if d_c != d_t:
        raise SystemMismatchError(
            f"swap comparison needs equal factors, got {d_c} and {d_t}"
        )
    if float(np.max(np.abs(controlled.control_kets - np.eye(d_c)))) > EPS_EQ:
        raise ValidationError("swap comparison assumes the computational control basis")
    betas = np.empty((controlled.n_branches, d_t))
    for i, u in enumerate(controlled.branch_unitaries):
        off = u - np.diag(np.diag(u))
        if float(np.max(np.abs(off))) > EPS_EQ:
            raise NotAPhaseError(
                f"branch {i} is not diagonal in the target basis; "
                "both factorizations need phase branches"
            )
        betas[i] = np.angle(np.diag(u))
    swapped_branches = [np.diag(np.exp(1j * betas[:, j])) for j in range(d_t)]
    rebuilt = build_controlled(swapped_branches, controlled.control_system)
    swap = unitary_channel(
        composite_system(controlled.control_system, controlled.target_system),
        _swap_unitary(d_c),
    )
    conjugated = Transformation(
        swap.in_system,
        swap.out_system,
        swap.matrix @ controlled.composite.matrix @ swap.matrix,
        reversible=True,
    )
    deviation = float(np.max(np.abs(conjugated.matrix - rebuilt.composite.matrix)))
    return {
        "deviation": deviation,
        "equal": deviation <= tol,
        "kicked_columns": betas.T.tolist(),
    }


# ---------------------------------------------------------------------------
# exchange statistics


@dataclass(frozen=True)
class ParticleClass:
    """Label for the kicked exchange angle: boson 0, fermion pi, else anyon."""

    kind: str
    theta: float

    def __post_init__(self) -> None:
        if self.kind not in ("boson", "fermion", "anyon"):
            raise ValidationError(f"unknown particle kind {self.kind!r}")


def classify_particle(theta: float, tol: float = EPS_EQ) -> ParticleClass:
    wrapped = float(theta) % (2.0 * math.pi)
    if min(wrapped, 2.0 * math.pi - wrapped) <= tol:
        return ParticleClass("boson", 0.0)
    if abs(wrapped - math.pi) <= tol:
        return ParticleClass("fermion", math.pi)
    return ParticleClass("anyon", wrapped)


def exchange_experiment(
    particle_state: StateVector,
    exchange_op: np.ndarray,
    seed: int | np.random.Generator = 0,
) -> float:
    """Kicked angle of controlling identity versus one exchange of the state.

    The exchange operation must fix the state; the returned angle is its
    eigenphase on the state's ket, read out through the two-branch kick-back.
    """
    system = particle_state.system
    d = system.dim
    u = _as_unitary(exchange_op, d, "exchange operation")
    controlled = build_controlled([np.eye(d), u], system, seed=seed)
    result = extract_kickback(controlled, particle_state, seed=seed)
    return float(result.angles[1])


def multi_path_permutation_experiment(
    permutation_ops: Sequence[np.ndarray],
    particle_state: StateVector,
    seed: int | np.random.Generator = 0,
) -> np.ndarray:
    """Kicked angles of a family of permutation-induced operations.

    Branch 0 is the identity gauge; returns the angles of branches 1..n-1.
    Every operation must fix the state, or the kick-back extraction reports
    the offending branch.
    """
    system = particle_state.system
    d = system.dim
    ops = [np.eye(d)] + [
        _as_unitary(u, d, f"permutation operation {i}")
        for i, u in enumerate(permutation_ops)
    ]
    controlled = build_controlled(ops, system, seed=seed)
    result = extract_kickback(controlled, particle_state, seed=seed)
    return result.angles[1:]


def swap_exchange_unitary(factor_dim: int) -> np.ndarray:
    """The unitary exchanging two factors of equal dimension."""
    return _swap_unitary(factor_dim)


def anyonic_exchange_unitary(
    particle_state: StateVector, theta: float
) -> np.ndarray:
    """Exchange with an injected eigenphase on a swap-symmetric state.

    Composes the factor swap with a phase on the state's ray, so the state
    stays fixed while its exchange eigenphase becomes theta.
    """
    system = particle_state.system
    if len(system.factors) != 2 or system.factors[0] != system.factors[1]:
        raise SystemMismatchError("anyonic exchange needs two equal factors")
    vals, vecs = np.linalg.eigh(density_matrix(particle_state))
    if vals[-1] < 1.0 - EPS_PSD:
        raise InfeasibleError("anyonic exchange needs a pure state")
    psi = vecs[:, -1]
    swap = _swap_unitary(system.factors[0])
    if float(np.max(np.abs(swap @ psi - psi))) > 1e-9:
        raise InfeasibleError("state is not swap-symmetric; injected phase would not be clean")
    ray = np.outer(psi, psi.conj())
    return swap @ (np.eye(system.dim) + (np.exp(1j * theta) - 1.0) * ray)
