"""Path experiments: which-path structure, phase transformations, detectability.

An n-path experiment is a list of (state, effect) pairs on one system with
unit pairing on the diagonal, zero pairing off the diagonal, and effects that
resolve the unit effect.  Phase transformations are the reversible maps that
fix every which-path effect; their detectability order is graded by the size
of the effect supports needed to see them.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .core import (
    CLASSICAL,
    EPS_EQ,
    EPS_PSD,
    QUANTUM,
    Effect,
    StateVector,
    SystemMismatchError,
    SystemType,
    Transformation,
    ValidationError,
    _rng,
    basis_effect,
    basis_state,
    density_matrix,
    effect_from_matrix,
    effects_close,
    haar_unitary,
    pair,
    permutation_transformation,
    transform_effect,
    transform_operator,
    unit_effect,
)

DETECT_TOL = 1e-8  # covector deviation above which an effect counts as detecting


class NotAPhaseError(ValueError):
    """The transformation does not fix every which-path effect."""


class PathRankError(ValueError):
    """A path state or effect has rank above 1; only rank-1 paths are supported."""


@dataclass(frozen=True, eq=False)
class Path:
    """A preparation/detection pair with unit pairing."""

    state: StateVector
    effect: Effect

    def __post_init__(self) -> None:
        if self.state.system != self.effect.system:
            raise SystemMismatchError("path state and effect live on different systems")
        p = pair(self.effect, self.state)
        if abs(p - 1.0) > EPS_EQ:
            raise ValidationError(f"path pairing is {p!r}, expected 1")


@dataclass(frozen=True, eq=False)
class PathExperiment:
    """Pairwise disjoint paths whose effects resolve the unit effect."""

    paths: tuple[Path, ...]
    epsilon_support: float = EPS_EQ

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 2:
            raise ValidationError("a path experiment needs at least two paths")
        system = self.paths[0].state.system
        for p in self.paths[1:]:
            if p.state.system != system:
                raise SystemMismatchError("paths live on different systems")
        for i, j in itertools.permutations(range(len(self.paths)), 2):
            val = pair(self.paths[i].effect, self.paths[j].state)
            if abs(val) > EPS_EQ:
                raise ValidationError(
                    f"paths {i} and {j} are not disjoint: cross pairing {val!r}"
                )
        total = np.sum([p.effect.coeffs for p in self.paths], axis=0)
        dev = float(np.max(np.abs(total - unit_effect(system).coeffs)))
        if dev > EPS_EQ:
            raise ValidationError(
                f"path effects do not resolve the unit effect (deviation {dev!r})"
            )
        if system.theory == QUANTUM:
            _path_kets(self)  # rank-1 check; raises on rank >= 2 paths

    @property
    def system(self) -> SystemType:
        return self.paths[0].state.system

    @property
    def n(self) -> int:
        return len(self.paths)


def make_experiment(
    paths: Iterable[Path | tuple[StateVector, Effect]],
    epsilon_support: float = EPS_EQ,
) -> PathExperiment:
    """Validated path experiment from (state, effect) pairs."""
    built = [p if isinstance(p, Path) else Path(*p) for p in paths]
    return PathExperiment(tuple(built), epsilon_support)


def basis_experiment(system: SystemType, epsilon_support: float = EPS_EQ) -> PathExperiment:
    """The computational-basis experiment: one path per basis outcome."""
    paths = [
        Path(basis_state(system, i), basis_effect(system, i)) for i in range(system.dim)
    ]
    return PathExperiment(tuple(paths), epsilon_support)


def _path_kets(experiment: PathExperiment) -> np.ndarray:
    """Kets of the rank-1 quantum paths, one column per path."""
    system = experiment.system
    if system.theory != QUANTUM:
        raise SystemMismatchError("path kets exist for quantum experiments only")
    kets = []
    for i, p in enumerate(experiment.paths):
        vals, vecs = np.linalg.eigh(density_matrix(p.state))
        if vals[-1] < 1.0 - EPS_PSD or abs(vals[:-1]).max() > EPS_PSD:
            raise PathRankError(
                f"path {i} state has rank above 1 (spectrum {vals!r})"
            )
        kets.append(vecs[:, -1])
    return np.column_stack(kets)


@dataclass(frozen=True, eq=False)
class SupportSet:
    """The set of paths on which a state or effect has weight."""

    experiment: PathExperiment
    indices: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", frozenset(int(i) for i in self.indices))
        if not self.indices <= set(range(self.experiment.n)):
            raise ValidationError(
                f"support {set(self.indices)} exceeds path count {self.experiment.n}"
            )


def support_of_state(state: StateVector, experiment: PathExperiment) -> SupportSet:
    """Paths whose effect fires on the state above the support threshold."""
    if state.system != experiment.system:
        raise SystemMismatchError("state does not live on the experiment's system")
    hits = {
        i
        for i, p in enumerate(experiment.paths)
        if pair(p.effect, state) > experiment.epsilon_support
    }
    return SupportSet(experiment, frozenset(hits))


def support_of_effect(effect: Effect, experiment: PathExperiment) -> SupportSet:
    """Paths whose state triggers the effect above the support threshold."""
    if effect.system != experiment.system:
        raise SystemMismatchError("effect does not live on the experiment's system")
    hits = {
        i
        for i, p in enumerate(experiment.paths)
        if pair(effect, p.state) > experiment.epsilon_support
    }
    return SupportSet(experiment, frozenset(hits))


def state_support_equals(
    state: StateVector, experiment: PathExperiment, indices: Iterable[int]
) -> bool:
    """Exact support equality, not containment."""
    return support_of_state(state, experiment).indices == frozenset(indices)


def effect_support_equals(
    effect: Effect, experiment: PathExperiment, indices: Iterable[int]
) -> bool:
    """Exact support equality, not containment."""
    return support_of_effect(effect, experiment).indices == frozenset(indices)


def is_superposition(state: StateVector, experiment: PathExperiment) -> bool:
    """True when the state sits on several paths but outside their mixtures.

    Quantum rule: support on at least two paths plus off-diagonal coherence in
    the path basis.  Classical states are never superpositions.
    """
    support = support_of_state(state, experiment)
    if experiment.system.theory == CLASSICAL:
        return False
    if len(support.indices) < 2:
        return False
    kets = _path_kets(experiment)
    rho = density_matrix(state)
    overlap = kets.conj().T @ rho @ kets
    off = overlap - np.diag(np.diag(overlap))
    return float(np.max(np.abs(off))) > EPS_EQ


def is_phase(transformation: Transformation, experiment: PathExperiment) -> bool:
    """True when the transformation is reversible and fixes every path effect."""
    if transformation.in_system != experiment.system:
        raise SystemMismatchError("transformation does not act on the experiment's system")
    if transformation.out_system != experiment.system:
        return False
    if not transformation.reversible:
        return False
    return all(
        effects_close(transform_effect(transformation, p.effect), p.effect)
        for p in experiment.paths
    )


def phase_relative_angles(
    transformation: Transformation, experiment: PathExperiment
) -> np.ndarray:
    """Diagonal phase angles of a quantum phase transformation, gauged to path 0.

    Every reversible map fixing the which-path effects of a rank-1 experiment
    is conjugation by a phase diagonal in the path basis; the relative angles
    are read off from how the channel transports path coherences.
    """
    if experiment.system.theory != QUANTUM:
        raise SystemMismatchError("relative phase angles exist for quantum experiments only")
    if not is_phase(transformation, experiment):
        raise NotAPhaseError("transformation does not fix the which-path effects")
    kets = _path_kets(experiment)
    angles = np.zeros(experiment.n)
    for j in range(1, experiment.n):
        coherence = np.outer(kets[:, 0], kets[:, j].conj())
        moved = transform_operator(transformation, coherence + coherence.conj().T)
        val = kets[:, 0].conj() @ moved @ kets[:, j]
        if abs(abs(val) - 1.0) > 1e-6:
            raise NotAPhaseError(
                f"path coherence 0-{j} is not phase-transported (magnitude {abs(val)!r})"
            )
        angles[j] = -np.angle(val) % (2.0 * math.pi)
    return angles


def _circular_spread(angles: np.ndarray) -> float:
    """Largest distance of any angle from 0 on the circle."""
    wrapped = np.angle(np.exp(1j * angles))
    return float(np.max(np.abs(wrapped))) if angles.size else 0.0


def is_n_undetectable(
    transformation: Transformation,
    experiment: PathExperiment,
    order: int,
    method: str = "closed-form",
    trials: int = 200,
    seed: int | np.random.Generator = 0,
) -> bool:
    """Whether every effect supported on at most `order` paths fixes under T.

    Closed form (quantum, rank-1 paths): undetectable at order >= 2 exactly
    when all relative phase angles vanish mod 2 pi; order 1 never detects a
    phase.  Classical phases are the identity, hence undetectable at every
    order.  The search method instead samples random effects per subset and
    can only falsify.
    """
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    if method not in ("closed-form", "search"):
        raise ValidationError(f"unknown method {method!r}")
    if experiment.system.theory == CLASSICAL:
        if not is_phase(transformation, experiment):
            raise NotAPhaseError("transformation does not fix the which-path effects")
        return True
    if method == "search":
        found = search_detecting_effect(
            transformation, experiment, max_support=order, trials=trials, seed=seed
        )
        return found is None
    angles = phase_relative_angles(transformation, experiment)
    if order == 1:
        return True
    return _circular_spread(angles) <= EPS_EQ


def detection_order(
    transformation: Transformation, experiment: PathExperiment
) -> int | None:
    """Smallest support size whose effects see the phase; None when none do.

    A quantum phase with any nonvanishing relative angle is caught by an
    effect on the corresponding path pair, so the order is 2 or nothing.
    """
    if experiment.system.theory == CLASSICAL:
        if not is_phase(transformation, experiment):
            raise NotAPhaseError("transformation does not fix the which-path effects")
        return None
    angles = phase_relative_angles(transformation, experiment)
    return None if _circular_spread(angles) <= EPS_EQ else 2


def _subset_effects(
    experiment: PathExperiment,
    indices: tuple[int, ...],
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stack of random effect covectors supported inside the given paths."""
    kets = _path_kets(experiment)[:, list(indices)]
    k = len(indices)
    out = np.empty((trials, experiment.system.vector_space_dim))
    for t in range(trials):
        v = haar_unitary(k, rng)
        vals = rng.uniform(0.0, 1.0, k)
        block = (v * vals) @ v.conj().T
        out[t] = effect_from_matrix(
            experiment.system, kets @ block @ kets.conj().T
        ).coeffs
    return out


def search_detecting_effect(
    transformation: Transformation,
    experiment: PathExperiment,
    max_support: int,
    trials: int = 200,
    seed: int | np.random.Generator = 0,
) -> Effect | None:
    """Randomized hunt for an effect on few paths that the phase moves.

    Returns a detecting effect with support on at most `max_support` paths,
    or None when all sampled effects are fixed within tolerance.
    """
    if experiment.system.theory != QUANTUM:
        raise SystemMismatchError("effect search applies to quantum experiments")
    if not is_phase(transformation, experiment):
        raise NotAPhaseError("transformation does not fix the which-path effects")
    rng = _rng(seed)
    size_cap = min(max_support, experiment.n)
    for size in range(1, size_cap + 1):
        for indices in itertools.combinations(range(experiment.n), size):
            stack = _subset_effects(experiment, indices, trials, rng)
            moved = stack @ transformation.matrix
            dev = np.max(np.abs(moved - stack), axis=1)
            hit = int(np.argmax(dev))
            if dev[hit] > DETECT_TOL:
                return Effect(experiment.system, stack[hit])
    return None


def enumerate_classical_phases(
    experiment: PathExperiment, max_dim: int = 8
) -> list[Transformation]:
    """All classical reversible transformations fixing the which-path effects.

    Exhaustive over permutations, so guarded to small dimensions.
    """
    system = experiment.system
    if system.theory != CLASSICAL:
        raise SystemMismatchError("phase enumeration is exhaustive for classical only")
    if system.dim > max_dim:
        raise ValidationError(
            f"refusing to enumerate {system.dim}! permutations (max_dim={max_dim})"
        )
    found = []
    for perm in itertools.permutations(range(system.dim)):
        t = permutation_transformation(system, perm)
        if is_phase(t, experiment):
            found.append(t)
    return found
