"""Sequential measurement strategies and their knowledge/concurrence trade-offs.

Four ways of extracting knowledge about qubit B of an entangled pair:

* ``single``      one coherent kit;
* ``incoherent``  a fraction of the ensemble is projected, the rest untouched;
* ``independent`` coherent kits in the fixed diagonal meter basis;
* ``adaptive``    coherent kits whose meter basis follows earlier outcomes.

Knowledge always refers to equal-prior inputs |0>, |1> on B. Concurrence is
that of the non-selective (outcome-averaged) final two-qubit state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .entanglement import concurrence
from .measurement import (
    DIAGONAL_BASIS,
    LAMBDA_MAX,
    UNREACHABLE_PROB,
    MeasurementKit,
    PbsImperfection,
    check_meter_angle,
    check_strength,
    dephase,
    knowledge_from_conditional,
    knowledge_of_kit,
    kraus_pair,
    outcome_probabilities_given_input,
    recorded_instrument,
    singlet_state,
)
from .qcore import check_density_matrix, ket, projector
from .search import golden_section_max

STRATEGIES = ("single", "incoherent", "independent", "adaptive")
MAX_SEQUENCE = 8
GRID_POINTS = 181
MAX_REFINEMENT_STEPS = 10_000
MAX_TREE_SWEEPS = 500
TREE_GAIN_TOL = 1e-15

Prefix = tuple[int, ...]


@dataclass(frozen=True)
class TradeoffPoint:
    k_bar: float
    k_tot: float
    c: float
    strategy: str


@dataclass(frozen=True)
class AdaptiveSolution:
    psi: float
    lambda0: float
    lambda1: float
    k_tot: float
    converged: bool
    iterations: int


@dataclass
class BranchTree:
    """Outcome-conditioned meter angles and the resulting leaves.

    ``angles`` maps every recorded-outcome prefix of length < depth to the
    meter angle of the kit applied there (the root ``()`` is the first kit).
    ``leaves`` maps full outcome records to ``(probability, state)``; the
    state is ``None`` for unreachable leaves.
    """

    depth: int
    psi: float
    angles: dict[Prefix, float]
    leaves: dict[Prefix, tuple[float, np.ndarray | None]] = field(default_factory=dict)
    imperfection: PbsImperfection | None = None

    @property
    def node_count(self) -> int:
        return len(self.angles)

    def nonselective_state(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for p, state in self.leaves.values():
            if state is not None:
                out += p * state
        return out


def psi_from_k_bar(k_bar: float) -> float:
    """Coupling strength whose single-kit knowledge is ``k_bar`` (principal branch)."""
    k_bar = float(k_bar)
    if not 0.0 <= k_bar <= 1.0:
        raise ValueError(f"k_bar must lie in [0, 1], got {k_bar}")
    return check_strength(0.5 * math.asin(k_bar))


def _initial(initial: np.ndarray | None) -> np.ndarray:
    return singlet_state() if initial is None else check_density_matrix(initial, dim=4)


def _all_prefixes(n: int) -> list[Prefix]:
    return [p for d in range(n) for p in itertools.product((0, 1), repeat=d)]


# --- generic kit chains -----------------------------------------------------


def evolve_chain(
    rho: np.ndarray,
    psi: float,
    n: int,
    angle_of: Callable[[Prefix], float],
    imperfection: PbsImperfection | None = None,
) -> dict[Prefix, np.ndarray]:
    """Unnormalized two-qubit states for every recorded outcome record of ``n`` kits on B."""
    branches: dict[Prefix, np.ndarray] = {(): np.asarray(rho, dtype=complex)}
    for _ in range(n):
        nxt = {}
        for prefix, state in branches.items():
            kit = MeasurementKit(psi, angle_of(prefix), imperfection)
            for r, terms in enumerate(recorded_instrument(kit, "B")):
                out = np.zeros((4, 4), dtype=complex)
                for w, k in terms:
                    out += w * (k @ state @ k.conj().T)
                nxt[prefix + (r,)] = out
        branches = nxt
    return branches


def outcome_distribution(
    psi: float,
    n: int,
    angle_of: Callable[[Prefix], float],
    imperfection: PbsImperfection | None = None,
) -> dict[Prefix, np.ndarray]:
    """p(record | input |j>) for j = 0, 1, propagated as single-qubit density matrices."""
    out: dict[Prefix, np.ndarray] = {}
    for j in range(2):
        branches: dict[Prefix, np.ndarray] = {(): projector(ket(j))}
        for _ in range(n):
            nxt = {}
            for prefix, state in branches.items():
                kit = MeasurementKit(psi, angle_of(prefix), imperfection)
                ops = list(kraus_pair(kit))
                ideal = [m @ state @ m.conj().T for m in ops]
                flips = np.eye(2) if imperfection is None else imperfection.flip_matrix()
                for r in range(2):
                    nxt[prefix + (r,)] = flips[r, 0] * ideal[0] + flips[r, 1] * ideal[1]
            branches = nxt
        for prefix, state in branches.items():
            out.setdefault(prefix, np.zeros(2))[j] = np.trace(state).real
    return out


def conditional_guess(dist: dict[Prefix, np.ndarray], guess_of: Callable[[Prefix], int]) -> np.ndarray:
    cond = np.zeros((2, 2))
    for record, p in dist.items():
        cond[guess_of(record)] += p
    return cond


def best_assignment_knowledge(dist: dict[Prefix, np.ndarray]) -> float:
    """Largest knowledge over every deterministic map from outcome records to guesses."""
    records = sorted(dist)
    if len(records) <= 4:
        best = 0.0
        for guesses in itertools.product((0, 1), repeat=len(records)):
            table = dict(zip(records, guesses))
            best = max(best, knowledge_from_conditional(conditional_guess(dist, table.__getitem__)))
        return best
    # pointwise choice is optimal and avoids 2^(2^n) enumeration
    return 0.5 * sum(abs(p[0] - p[1]) for p in dist.values())


GROUPINGS = {
    "first": lambda record: record[0],
    "second": lambda record: record[-1],
}


# --- strategies -------------------------------------------------------------


def single_coherent(
    psi: float, initial: np.ndarray | None = None, imperfection: PbsImperfection | None = None
) -> TradeoffPoint:
    kit = MeasurementKit(psi, DIAGONAL_BASIS, imperfection)
    k = knowledge_of_kit(kit).value
    leaves = evolve_chain(_initial(initial), kit.psi, 1, lambda _: DIAGONAL_BASIS)
    c = concurrence(sum(leaves.values()))
    return TradeoffPoint(k, k, c, "single")


def incoherent_sequence(k_bar: float, n: int = 1, initial: np.ndarray | None = None) -> TradeoffPoint:
    """Sub-ensemble projective measurement repeated ``n`` times.

    Each step measures a fraction ``k_bar`` of the ensemble projectively
    (qubit B dephased, value learnt exactly) and leaves the rest untouched;
    an unmeasured member is guessed at random.
    """
    k_bar = float(k_bar)
    if not 0.0 <= k_bar <= 1.0:
        raise ValueError(f"k_bar must lie in [0, 1], got {k_bar}")
    if n < 1:
        raise ValueError("n must be at least 1")
    rho = _initial(initial)
    unmeasured = 1.0
    for _ in range(n):
        rho = (1.0 - k_bar) * rho + k_bar * dephase(rho, "B")
        unmeasured *= 1.0 - k_bar
    p_correct = (1.0 - unmeasured) + 0.5 * unmeasured
    cond = np.array([[p_correct, 1.0 - p_correct], [1.0 - p_correct, p_correct]])
    return TradeoffPoint(k_bar, knowledge_from_conditional(cond), concurrence(rho), "incoherent")


def independent_sequence(
    psi: float,
    n: int = 2,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
    grouping: str = "first",
) -> TradeoffPoint:
    """``n`` kits in the diagonal meter basis, none depending on earlier outcomes.

    ``grouping`` picks the guess: ``"first"`` uses the first kit's outcome,
    ``"second"`` the last kit's, ``"best"`` the best record-to-guess map.
    """
    psi = check_strength(psi)
    angle_of = lambda _: DIAGONAL_BASIS  # noqa: E731
    dist = outcome_distribution(psi, n, angle_of, imperfection)
    if grouping == "best":
        k_tot = best_assignment_knowledge(dist)
    elif grouping in GROUPINGS:
        k_tot = knowledge_from_conditional(conditional_guess(dist, GROUPINGS[grouping]))
    else:
        raise ValueError(f"unknown grouping {grouping!r}")
    leaves = evolve_chain(_initial(initial), psi, n, angle_of, imperfection)
    k_bar = knowledge_of_kit(MeasurementKit(psi, DIAGONAL_BASIS, imperfection)).value
    return TradeoffPoint(k_bar, k_tot, concurrence(sum(leaves.values())), "independent")


def independent_coherent_pair(
    psi: float,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
    grouping: str = "first",
) -> TradeoffPoint:
    return independent_sequence(psi, 2, initial, imperfection, grouping)


def adaptive_coherent_pair(
    psi: float,
    lambda0: float,
    lambda1: float,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
) -> TradeoffPoint:
    """First kit in the diagonal basis, second kit at ``lambda0``/``lambda1`` after outcome 0/1.

    The guess is the second kit's outcome.
    """
    psi = check_strength(psi)
    angles = {(): DIAGONAL_BASIS, (0,): check_meter_angle(lambda0), (1,): check_meter_angle(lambda1)}
    dist = outcome_distribution(psi, 2, angles.__getitem__, imperfection)
    k_tot = knowledge_from_conditional(conditional_guess(dist, GROUPINGS["second"]))
    leaves = evolve_chain(_initial(initial), psi, 2, angles.__getitem__, imperfection)
    k_bar = knowledge_of_kit(MeasurementKit(psi, DIAGONAL_BASIS, imperfection)).value
    return TradeoffPoint(k_bar, k_tot, concurrence(sum(leaves.values())), "adaptive")


# --- adaptive optimization --------------------------------------------------


def adaptive_pair_objective(psi, lambda0, lambda1, imperfection: PbsImperfection | None = None):
    """Signed knowledge p(guess 0|0) - p(guess 0|1) of the adaptive pair, vectorized.

    Broadcasts over array-valued ``lambda0``/``lambda1``; at the optimum it
    is non-negative and equals the reported knowledge.
    """
    first = outcome_probabilities_given_input(psi, DIAGONAL_BASIS, imperfection)
    after0 = outcome_probabilities_given_input(psi, lambda0, imperfection)
    after1 = outcome_probabilities_given_input(psi, lambda1, imperfection)
    guess0 = [first[0][j] * after0[0][j] + first[1][j] * after1[0][j] for j in range(2)]
    return guess0[0] - guess0[1]


def optimize_adaptive_pair(
    psi: float,
    tol: float = 1e-10,
    imperfection: PbsImperfection | None = None,
    grid_points: int = GRID_POINTS,
) -> AdaptiveSolution:
    """Meter angles of the second kit maximizing the adaptive pair's knowledge.

    A ``grid_points`` x ``grid_points`` scan of [0, pi/2]^2 (first maximum in
    lexicographic (lambda0, lambda1) order wins ties) is refined by
    alternating golden-section searches within one grid step of the incumbent.
    """
    psi = check_strength(psi)
    if not 0.0 < tol <= 1e-3:
        raise ValueError(f"tol must lie in (0, 1e-3], got {tol}")
    if grid_points < 181:
        raise ValueError("grid needs at least 181 points per axis")
    grid = np.linspace(0.0, LAMBDA_MAX, grid_points)
    values = adaptive_pair_objective(psi, grid[:, None], grid[None, :], imperfection)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    x = [float(grid[i]), float(grid[j])]
    best = float(values[i, j])
    step = float(grid[1] - grid[0])

    def along(axis: int) -> Callable[[float], float]:
        if axis == 0:
            return lambda t: float(adaptive_pair_objective(psi, t, x[1], imperfection))
        return lambda t: float(adaptive_pair_objective(psi, x[0], t, imperfection))

    iterations = 0
    converged = False
    while iterations < MAX_REFINEMENT_STEPS:
        moved = 0.0
        brackets_ok = True
        for axis in (0, 1):
            lo, hi = max(0.0, x[axis] - step), min(LAMBDA_MAX, x[axis] + step)
            t, ft, used, ok = golden_section_max(
                along(axis), lo, hi, tol, max_iter=MAX_REFINEMENT_STEPS - iterations
            )
            iterations += used
            brackets_ok &= ok
            if ft > best:
                moved = max(moved, abs(t - x[axis]))
                x[axis], best = t, ft
        if brackets_ok and moved < tol:
            converged = True
            break
        if iterations >= MAX_REFINEMENT_STEPS:
            break
    k_tot = abs(float(adaptive_pair_objective(psi, x[0], x[1], imperfection)))
    return AdaptiveSolution(psi, x[0], x[1], k_tot, converged, iterations)


def _depth_angles(angles: dict[Prefix, float], n: int) -> list[np.ndarray]:
    # lexicographic prefixes == binary index order, children of i are 2i and 2i + 1
    return [np.array([angles[p] for p in itertools.product((0, 1), repeat=d)], dtype=float) for d in range(n)]


def _tree_objective_parts(psi, levels: list[np.ndarray], imperfection):
    """Forward reach probabilities and backward guess-0 values, one array per depth.

    ``reach[d][i, j]`` is p(prefix i at depth d | input j); ``value[d][i, j]``
    is p(final guess 0 | prefix i, input j).
    """
    n = len(levels)
    probs = []
    for lam in levels:
        p = outcome_probabilities_given_input(psi, lam, imperfection)
        probs.append(np.stack([np.stack([p[r][0], p[r][1]], axis=-1) for r in range(2)], axis=1))
    reach = [np.ones((1, 2))]
    for d in range(n):
        reach.append((reach[d][:, None, :] * probs[d]).reshape(-1, 2))
    value = [None] * (n + 1)
    value[n] = np.zeros((2**n, 2))
    value[n][0::2] = 1.0
    for d in range(n - 1, -1, -1):
        value[d] = np.sum(probs[d] * value[d + 1].reshape(-1, 2, 2), axis=1)
    return reach, value


def _tree_knowledge(psi, angles, n, imperfection) -> float:
    _, value = _tree_objective_parts(psi, _depth_angles(angles, n), imperfection)
    return float(value[0][0, 0] - value[0][0, 1])


def _optimize_tree(psi, n, tol, imperfection, min_sweeps: int = 3, max_sweeps: int = MAX_TREE_SWEEPS):
    """Coordinate ascent over every non-root branch angle.

    Sweeps continue past ``min_sweeps`` until one full sweep improves the
    knowledge by less than ``TREE_GAIN_TOL``; the coupling between depths
    makes convergence slow (tens of sweeps at n = 3, 4).
    """
    levels = [np.full(2**d, DIAGONAL_BASIS) for d in range(n)]
    grid = np.linspace(0.0, LAMBDA_MAX, GRID_POINTS)
    step = float(grid[1] - grid[0])
    sign = np.array([1.0, -1.0])

    def knowledge() -> float:
        _, value = _tree_objective_parts(psi, levels, imperfection)
        return float(value[0][0, 0] - value[0][0, 1])

    current = knowledge()
    converged = n == 1
    sweeps = 0
    while sweeps < max_sweeps and not converged:
        sweeps += 1
        start = current
        # deepest branches first: their optimum only depends on ancestors through reach
        for d in range(n - 1, 0, -1):
            for i in range(2**d):
                reach, value = _tree_objective_parts(psi, levels, imperfection)
                w = sign * reach[d][i]
                v0, v1 = value[d + 1][2 * i], value[d + 1][2 * i + 1]

                def local(lam):
                    p = outcome_probabilities_given_input(psi, lam, imperfection)
                    return sum(w[j] * (p[0][j] * v0[j] + p[1][j] * v1[j]) for j in range(2))

                k = int(np.argmax(local(grid)))
                lo, hi = max(0.0, grid[k] - step), min(LAMBDA_MAX, grid[k] + step)
                t, ft, _, _ = golden_section_max(lambda x: float(local(x)), lo, hi, tol)
                if ft > float(local(levels[d][i])):
                    levels[d][i] = t
        current = knowledge()
        converged = sweeps >= min_sweeps and current - start < TREE_GAIN_TOL
    angles = {}
    for d in range(n):
        for i, p in enumerate(itertools.product((0, 1), repeat=d)):
            angles[p] = float(levels[d][i])
    return angles, converged


def adaptive_sequence(
    psi: float,
    n: int,
    tol: float = 1e-10,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
) -> tuple[BranchTree, TradeoffPoint]:
    """Adaptive chain of ``n`` equal-strength kits, guessing from the last outcome.

    The root kit is fixed to the diagonal basis; every other branch angle is
    tuned by coordinate ascent (181-point scan plus golden-section refinement
    per branch), sweeping until a full sweep gains less than 1e-15.
    """
    psi = check_strength(psi)
    if not 1 <= n <= MAX_SEQUENCE:
        raise ValueError(f"n must lie in [1, {MAX_SEQUENCE}], got {n}")
    if n == 2:
        sol = optimize_adaptive_pair(psi, tol, imperfection)
        angles = {(): DIAGONAL_BASIS, (0,): sol.lambda0, (1,): sol.lambda1}
    else:
        angles, _ = _optimize_tree(psi, n, tol, imperfection)
    dist = outcome_distribution(psi, n, angles.__getitem__, imperfection)
    k_tot = knowledge_from_conditional(conditional_guess(dist, GROUPINGS["second"]))
    leaves = evolve_chain(_initial(initial), psi, n, angles.__getitem__, imperfection)
    tree = BranchTree(n, psi, angles, imperfection=imperfection)
    for record, state in leaves.items():
        p = float(np.trace(state).real)
        tree.leaves[record] = (p, state / p if p >= UNREACHABLE_PROB else None)
    k_bar = knowledge_of_kit(MeasurementKit(psi, DIAGONAL_BASIS, imperfection)).value
    strategy = "single" if n == 1 else "adaptive"
    return tree, TradeoffPoint(k_bar, k_tot, concurrence(tree.nonselective_state()), strategy)


def conjectured_adaptive_knowledge(psi: float, n: int) -> float:
    """sqrt(1 - cos^(2n) 2psi): the optimal trade-off bound at the chain's final concurrence."""
    return math.sqrt(max(0.0, 1.0 - math.cos(2.0 * psi) ** (2 * n)))


# --- sweeps -----------------------------------------------------------------


def strategy_point(
    strategy: str,
    k_bar: float,
    n: int = 2,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
) -> TradeoffPoint:
    if strategy == "incoherent":
        return incoherent_sequence(k_bar, n, initial)
    psi = psi_from_k_bar(k_bar)
    if strategy == "single" or (strategy == "adaptive" and n == 1):
        point = single_coherent(psi, initial, imperfection)
    elif strategy == "independent":
        point = independent_sequence(psi, n, initial, imperfection)
    elif strategy == "adaptive":
        point = adaptive_sequence(psi, n, initial=initial, imperfection=imperfection)[1]
    else:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return TradeoffPoint(float(k_bar), point.k_tot, point.c, strategy)


def accumulation_curve(
    strategy: str,
    k_bar_grid: Iterable[float],
    n: int = 2,
    initial: np.ndarray | None = None,
    imperfection: PbsImperfection | None = None,
) -> list[TradeoffPoint]:
    """Accumulated knowledge and final concurrence versus single-kit knowledge."""
    return [strategy_point(strategy, k, n, initial, imperfection) for k in k_bar_grid]


@dataclass(frozen=True)
class ZenoRow:
    k_bar: float
    c_adaptive: float
    expansion_adaptive: float
    residual_adaptive: float
    c_incoherent: float
    expansion_incoherent: float
    residual_incoherent: float


def coherent_chain_concurrence(psi: float, n: int, initial: np.ndarray | None = None) -> float:
    # the non-selective state of a coherent chain does not depend on meter angles
    leaves = evolve_chain(_initial(initial), check_strength(psi), n, lambda _: DIAGONAL_BASIS)
    return concurrence(sum(leaves.values()))


def zeno_residuals(n: int, k_bar_grid: Sequence[float]) -> list[ZenoRow]:
    """Deviation of exact concurrences from the weak-measurement expansions.

    Adaptive chains are compared with 1 - n k^2/2, incoherent ones with
    1 - n k, for single-kit knowledge k in (0, 0.3].
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = []
    for k in k_bar_grid:
        k = float(k)
        if not 0.0 < k <= 0.3:
            raise ValueError(f"k_bar grid must lie in (0, 0.3], got {k}")
        c_ad = coherent_chain_concurrence(psi_from_k_bar(k), n)
        c_inc = incoherent_sequence(k, n).c
        e_ad = 1.0 - n * k * k / 2.0
        e_inc = 1.0 - n * k
        rows.append(ZenoRow(k, c_ad, e_ad, abs(c_ad - e_ad), c_inc, e_inc, abs(c_inc - e_inc)))
    return rows
