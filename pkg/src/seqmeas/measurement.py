"""Measurement kits: meter coupling, induced Kraus pair, knowledge and imperfections.

A kit couples qubit B to a meter prepared in |0>_M through
U(psi)|i>|0> = |i>|alpha_i> and then projects the meter onto
|beta> = cos(lam)|0> + sin(lam)|1> or its complement. The meter is
contracted away analytically, leaving a diagonal Kraus pair on B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import check_density_matrix, conjugate_map, ket, projector, tensor_product

PSI_MAX = math.pi / 4
LAMBDA_MAX = math.pi / 2
DIAGONAL_BASIS = math.pi / 4
UNREACHABLE_PROB = 1e-14
_EDGE = 1e-12


def _in_range(value: float, hi: float, name: str) -> float:
    value = float(value)
    if not (-_EDGE <= value <= hi + _EDGE):
        raise ValueError(f"{name}={value!r} outside [0, {hi:.12g}]")
    return min(max(value, 0.0), hi)


def check_strength(psi: float) -> float:
    """Validate a coupling strength psi in [0, pi/4] (radians)."""
    return _in_range(psi, PSI_MAX, "psi")


def check_meter_angle(lam: float) -> float:
    """Validate a meter basis angle lambda in [0, pi/2] (radians)."""
    return _in_range(lam, LAMBDA_MAX, "lambda")


@dataclass(frozen=True)
class PbsImperfection:
    """Polarizing beam splitter port transmissions/reflections."""

    t_H: float = 1.0
    r_V: float = 1.0
    r_H: float | None = None
    t_V: float | None = None

    def __post_init__(self):
        for name in ("t_H", "r_V"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        if self.r_H is None:
            object.__setattr__(self, "r_H", 1.0 - self.t_H)
        if self.t_V is None:
            object.__setattr__(self, "t_V", 1.0 - self.r_V)
        if abs(self.t_H + self.r_H - 1.0) > 1e-12 or abs(self.t_V + self.r_V - 1.0) > 1e-12:
            raise ValueError("need t_H + r_H = 1 and t_V + r_V = 1")

    def flip_matrix(self) -> np.ndarray:
        """F[recorded, ideal]: probability that ideal outcome is recorded as ``recorded``."""
        return np.array([[self.t_H, self.t_V], [self.r_H, self.r_V]])

    @property
    def contrast(self) -> float:
        return self.t_H + self.r_V - 1.0


@dataclass(frozen=True)
class MeasurementKit:
    psi: float
    lam: float = DIAGONAL_BASIS
    imperfection: PbsImperfection | None = None

    def __post_init__(self):
        object.__setattr__(self, "psi", check_strength(self.psi))
        object.__setattr__(self, "lam", check_meter_angle(self.lam))

    def with_angle(self, lam: float) -> MeasurementKit:
        return MeasurementKit(self.psi, lam, self.imperfection)


@dataclass(frozen=True)
class KrausPair:
    m0: np.ndarray
    m1: np.ndarray

    def __iter__(self):
        return iter((self.m0, self.m1))

    def completeness_error(self) -> float:
        total = self.m0.conj().T @ self.m0 + self.m1.conj().T @ self.m1
        return float(np.max(np.abs(total - np.eye(2))))


@dataclass(frozen=True)
class WaveplateAngles:
    theta_a: float
    theta_b: float

    @classmethod
    def optimal(cls, theta_b: float) -> WaveplateAngles:
        return cls(theta_b + math.pi / 4, theta_b)


@dataclass(frozen=True)
class KnowledgeEstimate:
    value: float
    # cond[i, j] = p(guess i | input j)
    cond: np.ndarray = field(repr=False)


@dataclass
class StrategyBranchSet:
    """Outcome-resolved result of one kit acting on a two-qubit state."""

    probabilities: tuple[float, float]
    states: tuple[np.ndarray | None, np.ndarray | None]
    nonselective: np.ndarray

    @property
    def reachable(self) -> tuple[bool, bool]:
        return tuple(s is not None for s in self.states)


def meter_states(psi: float) -> tuple[np.ndarray, np.ndarray]:
    psi = check_strength(psi)
    c, s = math.cos(psi), math.sin(psi)
    return np.array([c, s], dtype=complex), np.array([c, -s], dtype=complex)


def meter_basis(lam: float) -> tuple[np.ndarray, np.ndarray]:
    lam = check_meter_angle(lam)
    c, s = math.cos(lam), math.sin(lam)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def kraus_pair(kit: MeasurementKit) -> KrausPair:
    """Diagonal Kraus operators m_o = diag(<b_o|alpha_0>, <b_o|alpha_1>).

    The PBS imperfection, if any, is not part of the back-action; it only
    mislabels outcomes (see :func:`recorded_outcome_probabilities`).
    """
    alpha0, alpha1 = meter_states(kit.psi)
    beta, beta_perp = meter_basis(kit.lam)
    m0 = np.diag([np.vdot(beta, alpha0), np.vdot(beta, alpha1)]).real
    m1 = np.diag([np.vdot(beta_perp, alpha0), np.vdot(beta_perp, alpha1)]).real
    return KrausPair(m0.astype(complex), m1.astype(complex))


def kraus_diagonals(psi, lam):
    """Closed-form Kraus diagonals, broadcasting over array-valued psi/lam.

    Returns ``(m0_0, m0_1, m1_0, m1_1)`` where ``mo_j`` is entry j of m_o.
    """
    psi = np.asarray(psi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return (np.cos(lam - psi), np.cos(lam + psi), np.sin(psi - lam), -np.sin(psi + lam))


def outcome_probabilities_given_input(psi, lam, imperfection: PbsImperfection | None = None):
    """Recorded-outcome probabilities for basis inputs, vectorized over angles.

    Returns ``p`` with ``p[o][j]`` = p(recorded o | input |j>) as arrays.
    """
    m00, m01, m10, m11 = kraus_diagonals(psi, lam)
    p = [[m00**2, m01**2], [m10**2, m11**2]]
    if imperfection is None:
        return p
    f = imperfection.flip_matrix()
    return [[f[r, 0] * p[0][j] + f[r, 1] * p[1][j] for j in range(2)] for r in range(2)]


def recorded_outcome_probabilities(kit: MeasurementKit, state: np.ndarray) -> np.ndarray:
    """p(recorded o) for a single-qubit state, via the Kraus pair and the flip model."""
    ideal = np.array([conjugate_map(state, m)[1] for m in kraus_pair(kit)])
    if kit.imperfection is None:
        return ideal
    return kit.imperfection.flip_matrix() @ ideal


def recorded_instrument(kit: MeasurementKit, target: str = "B") -> list[list[tuple[float, np.ndarray]]]:
    """Per recorded outcome, the weighted Kraus operators acting on the two-qubit space.

    Entry ``[r]`` is a list of ``(weight, K)`` with the recorded branch map
    rho -> sum weight * K rho K^dag.
    """
    ops = [_embed(m, target) for m in kraus_pair(kit)]
    if kit.imperfection is None:
        return [[(1.0, ops[0])], [(1.0, ops[1])]]
    f = kit.imperfection.flip_matrix()
    return [[(f[r, o], ops[o]) for o in range(2) if f[r, o] > 0.0] for r in range(2)]


def _embed(m: np.ndarray, target: str) -> np.ndarray:
    if target == "B":
        return tensor_product(np.eye(2), m)
    if target == "A":
        return tensor_product(m, np.eye(2))
    raise ValueError(f"target must be 'A' or 'B', got {target!r}")


def apply_kit(rho: np.ndarray, kit: MeasurementKit, target: str = "B") -> StrategyBranchSet:
    """Apply the ideal Kraus pair of ``kit`` to one qubit of a two-qubit state.

    Branches with probability below 1e-14 are reported with state ``None``.
    """
    rho = check_density_matrix(rho, dim=4)
    probs, states = [], []
    nonselective = np.zeros((4, 4), dtype=complex)
    for m in kraus_pair(kit):
        branch, p = conjugate_map(rho, _embed(m, target))
        nonselective += branch
        probs.append(p)
        states.append(branch / p if p >= UNREACHABLE_PROB else None)
    return StrategyBranchSet(tuple(probs), tuple(states), nonselective)


def knowledge_from_conditional(cond: np.ndarray) -> float:
    """K = |p(0|0) + p(1|1) - p(1|0) - p(0|1)| / 2 for cond[guess, input]."""
    return abs(cond[0, 0] + cond[1, 1] - cond[1, 0] - cond[0, 1]) / 2.0


def knowledge_of_kit(kit: MeasurementKit) -> KnowledgeEstimate:
    """Knowledge extracted by one kit on equal-prior inputs |0>, |1>, guessing the outcome."""
    cond = np.empty((2, 2))
    for j in range(2):
        cond[:, j] = recorded_outcome_probabilities(kit, projector(ket(j)))
    return KnowledgeEstimate(knowledge_from_conditional(cond), cond)


def waveplate_to_strength(theta_b: float) -> tuple[float, float]:
    """Map the inner waveplate angle to (psi, K) with psi = pi/4 - 2 theta_b."""
    theta_b = float(theta_b)
    if not (-_EDGE <= theta_b <= math.pi / 8 + _EDGE):
        raise ValueError(f"theta_b={theta_b!r} outside [0, pi/8]")
    theta_b = min(max(theta_b, 0.0), math.pi / 8)
    psi = check_strength(math.pi / 4 - 2.0 * theta_b)
    return psi, abs(math.cos(4.0 * theta_b))


def strength_to_waveplate(psi: float) -> WaveplateAngles:
    return WaveplateAngles.optimal((math.pi / 4 - check_strength(psi)) / 2.0)


def singlet_state() -> np.ndarray:
    """|psi-> = (|10> - |01>)/sqrt(2) as a density matrix."""
    vec = (ket(1, 0) - ket(0, 1)) / math.sqrt(2.0)
    return projector(vec)


def werner_state(p: float) -> np.ndarray:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight must lie in [0, 1], got {p}")
    return p * singlet_state() + (1.0 - p) * np.eye(4, dtype=complex) / 4.0


def dephase(rho: np.ndarray, target: str = "B") -> np.ndarray:
    """Projective computational-basis measurement of one qubit, outcome discarded."""
    out = np.zeros_like(rho, dtype=complex)
    for j in range(2):
        out += conjugate_map(rho, _embed(projector(ket(j)), target))[0]
    return out
