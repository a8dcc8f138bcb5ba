"""Finite-shot emulation: sampled kit chains, knowledge estimates, two-qubit tomography.

Every sampling routine takes an explicit 64-bit seed and builds its own
``numpy.random.Generator``; nothing shares generator state, so sweep points
can run in any order or in parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .entanglement import concurrence
from .measurement import (
    MeasurementKit,
    knowledge_from_conditional,
    kraus_pair,
    recorded_outcome_probabilities,
)
from .qcore import EIGEN_FLOOR, SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, hermitian_eigensystem, ket, projector

SEED_MAX = 2**64
CHUNK = 1_000_000
PAULI_LABELS = ("X", "Y", "Z")
PAULI = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}
# outcome bit 0 is the +1 eigenvector, bit 1 the -1 eigenvector
EIGENBASIS = {
    "X": (np.array([1, 1]) / math.sqrt(2), np.array([1, -1]) / math.sqrt(2)),
    "Y": (np.array([1, 1j]) / math.sqrt(2), np.array([1, -1j]) / math.sqrt(2)),
    "Z": (np.array([1, 0]), np.array([0, 1])),
}
ALL_SETTINGS = tuple(a + b for a, b in itertools.product(PAULI_LABELS, repeat=2))

Prefix = tuple[int, ...]


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for sweep point / sub-task ``path``, independent of execution order."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ShotCounts:
    """Tallies keyed by ``(input_label, outcome_record)``.

    Counts may be non-integer: passing exact probabilities emulates the
    infinite-shot limit.
    """

    counts: dict[tuple[Hashable, Prefix], float] = field(default_factory=dict)

    def add(self, label: Hashable, record: Prefix, count: float) -> None:
        key = (label, tuple(int(b) for b in record))
        self.counts[key] = self.counts.get(key, 0) + count

    def merge(self, other: ShotCounts) -> ShotCounts:
        out = ShotCounts(dict(self.counts))
        for (label, record), c in other.counts.items():
            out.add(label, record, c)
        return out

    def labels(self) -> list[Hashable]:
        return sorted({label for label, _ in self.counts}, key=str)

    def total(self, label: Hashable) -> float:
        return sum(c for (lab, _), c in self.counts.items() if lab == label)

    def records(self, label: Hashable) -> dict[Prefix, float]:
        return {rec: c for (lab, rec), c in self.counts.items() if lab == label}

    def frequencies(self, label: Hashable) -> dict[Prefix, float]:
        n = self.total(label)
        if n <= 0:
            raise ValueError(f"no shots recorded for input {label!r}")
        return {rec: c / n for rec, c in self.records(label).items()}


AdaptationRule = Mapping[Prefix, float] | Callable[[Prefix], float]


def _angle_for(kit: MeasurementKit, prefix: Prefix, adaptation: AdaptationRule | None) -> float:
    if adaptation is None:
        return kit.lam
    if callable(adaptation):
        return adaptation(prefix)
    return adaptation.get(prefix, kit.lam)


def _recorded_branch(kit: MeasurementKit, state: np.ndarray, r: int) -> np.ndarray:
    ops = list(kraus_pair(kit))
    flips = np.eye(2) if kit.imperfection is None else kit.imperfection.flip_matrix()
    return sum(flips[r, o] * (ops[o] @ state @ ops[o].conj().T) for o in range(2))


def sample_kit_chain(
    input_label: int,
    kits: Sequence[MeasurementKit],
    shots: int,
    seed: int,
    adaptation: AdaptationRule | None = None,
) -> ShotCounts:
    """Sample outcome records of a kit chain acting on basis state |input_label>.

    Each shot walks the chain: the Born probability of the next recorded
    outcome is taken from the current conditional state of its branch, and
    ``adaptation`` (a mapping or callable from the recorded prefix to a meter
    angle) overrides the angle of the kit applied after that prefix.
    """
    if input_label not in (0, 1):
        raise ValueError("input label must be 0 or 1")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(check_seed(seed))
    n = len(kits)
    prob0: dict[Prefix, float] = {}
    states: dict[Prefix, np.ndarray] = {(): projector(ket(input_label))}

    def p_zero(prefix: Prefix) -> float:
        if prefix not in prob0:
            d = len(prefix)
            kit = kits[d].with_angle(_angle_for(kits[d], prefix, adaptation))
            state = states[prefix]
            prob0[prefix] = float(recorded_outcome_probabilities(kit, state)[0])
            if d + 1 < n:
                for r in range(2):
                    branch = _recorded_branch(kit, state, r)
                    w = np.trace(branch).real
                    if w > 0:
                        states[prefix + (r,)] = branch / w
        return prob0[prefix]

    tally = np.zeros(2**n, dtype=np.int64)
    done = 0
    while done < shots:
        m = min(CHUNK, shots - done)
        code = np.zeros(m, dtype=np.int64)
        for d in range(n):
            p0 = np.empty(2**d)
            for idx, prefix in enumerate(itertools.product((0, 1), repeat=d)):
                p0[idx] = p_zero(prefix) if prefix in states else 1.0
            bit = rng.random(m) >= p0[code]
            code = 2 * code + bit
        tally += np.bincount(code, minlength=2**n)
        done += m

    out = ShotCounts()
    for idx, record in enumerate(itertools.product((0, 1), repeat=n)):
        c = int(tally[idx])
        if c:
            out.add(input_label, record, c)
    return out


GUESSES: dict[str, Callable[[Prefix], int]] = {
    "last": lambda record: record[-1],
    "first": lambda record: record[0],
}


def estimate_knowledge(counts: ShotCounts, estimator: str = "last") -> tuple[float, float]:
    """Plug-in knowledge estimate and its binomial standard error.

    ``estimator`` picks the guess: ``"last"`` (final kit's outcome), ``"first"``
    (first kit's), or ``"best"`` (per-record majority). The error adds the
    four conditional-frequency variances f(1-f)/n, each weighted 1/2, in
    quadrature.
    """
    totals = {}
    for j in (0, 1):
        totals[j] = counts.total(j)
        if totals[j] <= 0:
            raise ValueError(f"no shots recorded for input {j}")
    freq = {j: counts.frequencies(j) for j in (0, 1)}
    if estimator == "best":
        records = set(freq[0]) | set(freq[1])
        table = {r: 0 if freq[0].get(r, 0.0) >= freq[1].get(r, 0.0) else 1 for r in records}
        guess = table.__getitem__
    elif estimator in GUESSES:
        guess = GUESSES[estimator]
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    cond = np.zeros((2, 2))
    for j in (0, 1):
        for record, f in freq[j].items():
            cond[guess(record), j] += f
    k_hat = knowledge_from_conditional(cond)
    var = sum(0.5 * cond[i, j] * (1.0 - cond[i, j]) / totals[j] for i in (0, 1) for j in (0, 1))
    return float(k_hat), math.sqrt(var)


# --- tomography ------------------------------------------------------------


@dataclass(frozen=True)
class TomographySettings:
    shots_per_setting: int
    settings: tuple[str, ...] = ALL_SETTINGS

    def __post_init__(self):
        if self.shots_per_setting < 1:
            raise ValueError("shots_per_setting must be at least 1")
        for s in self.settings:
            if len(s) != 2 or any(c not in PAULI_LABELS for c in s):
                raise ValueError(f"bad tomography setting {s!r}")


@dataclass
class ReconstructedState:
    raw: np.ndarray
    physical: np.ndarray
    distance: float


def setting_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Born probabilities of the four outcomes (00, 01, 10, 11) of a local Pauli setting."""
    rho = np.asarray(rho, dtype=complex)
    probs = np.empty(4)
    for idx, (a, b) in enumerate(itertools.product((0, 1), repeat=2)):
        vec = np.kron(EIGENBASIS[setting[0]][a], EIGENBASIS[setting[1]][b])
        probs[idx] = np.vdot(vec, rho @ vec).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def exact_tomography_counts(rho: np.ndarray, settings: Sequence[str] = ALL_SETTINGS) -> ShotCounts:
    """Infinite-shot limit: counts equal to the exact outcome probabilities."""
    out = ShotCounts()
    for s in settings:
        for idx, rec in enumerate(itertools.product((0, 1), repeat=2)):
            out.add(s, rec, float(setting_probabilities(rho, s)[idx]))
    return out


def simulate_tomography(rho: np.ndarray, settings: TomographySettings, seed: int) -> ShotCounts:
    rng = np.random.default_rng(check_seed(seed))
    out = ShotCounts()
    for s in settings.settings:
        draws = rng.multinomial(settings.shots_per_setting, setting_probabilities(rho, s))
        for idx, rec in enumerate(itertools.product((0, 1), repeat=2)):
            out.add(s, rec, int(draws[idx]))
    return out


def _correlator(freq: dict[Prefix, float], use_a: bool, use_b: bool) -> float:
    total = 0.0
    for (a, b), f in freq.items():
        sign = (-1) ** ((a if use_a else 0) + (b if use_b else 0))
        total += sign * f
    return total


def project_to_physical(raw: np.ndarray) -> tuple[np.ndarray, float]:
    """Clamp negative eigenvalues and renormalize; states already within the floor pass unchanged."""
    w, v = hermitian_eigensystem(raw)
    if w[0] >= EIGEN_FLOOR:
        return raw, 0.0
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    phys = (v * w) @ v.conj().T
    phys = 0.5 * (phys + phys.conj().T)
    return phys, float(np.linalg.norm(raw - phys))


def reconstruct(counts: ShotCounts) -> ReconstructedState:
    """Linear-inversion estimate from the nine local Pauli settings, then physicality projection."""
    missing = [s for s in ALL_SETTINGS if counts.total(s) <= 0]
    if missing:
        raise ValueError(f"missing tomography settings: {', '.join(missing)}")
    freq = {s: counts.frequencies(s) for s in ALL_SETTINGS}
    weight = {s: counts.total(s) for s in ALL_SETTINGS}

    def pooled(side: int, label: str) -> float:
        group = [s for s in ALL_SETTINGS if s[side] == label]
        tot = sum(weight[s] for s in group)
        return sum(weight[s] * _correlator(freq[s], side == 0, side == 1) for s in group) / tot

    stokes = {("I", "I"): 1.0}
    for a in PAULI_LABELS:
        stokes[(a, "I")] = pooled(0, a)
        stokes[("I", a)] = pooled(1, a)
        for b in PAULI_LABELS:
            stokes[(a, b)] = _correlator(freq[a + b], True, True)
    raw = sum(s * np.kron(PAULI[i], PAULI[j]) for (i, j), s in stokes.items()) / 4.0
    raw = 0.5 * (raw + raw.conj().T)
    physical, distance = project_to_physical(raw)
    return ReconstructedState(raw, physical, distance)


def bootstrap_concurrence_sigma(counts: ShotCounts, resamples: int, seed: int) -> float:
    """Parametric-bootstrap standard deviation of the reconstructed concurrence."""
    rng = np.random.default_rng(check_seed(seed))
    values = []
    for _ in range(resamples):
        fake = ShotCounts()
        for s in ALL_SETTINGS:
            n = int(round(counts.total(s)))
            f = counts.frequencies(s)
            recs = list(itertools.product((0, 1), repeat=2))
            p = np.array([f.get(r, 0.0) for r in recs])
            for r, c in zip(recs, rng.multinomial(n, p / p.sum())):
                fake.add(s, r, int(c))
        values.append(concurrence(reconstruct(fake).physical))
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


# --- experiment emulation ----------------------------------------------------


@dataclass(frozen=True)
class EmulatedPoint:
    psi: float
    strategy: str
    k_hat: float
    k_sigma: float
    c_hat: float
    c_sigma: float
    seed: int


def emulate_point(
    psi: float,
    strategy: str,
    shots: int,
    seed: int,
    initial: np.ndarray | None = None,
    imperfection=None,
    bootstrap: int = 20,
) -> EmulatedPoint:
    """One emulated data point: sampled knowledge plus tomography of the final state.

    ``strategy`` is ``single``, ``independent`` or ``adaptive`` (two kits of
    strength ``psi``; adaptive angles come from the optimizer). Sub-seeds for
    the two inputs, the tomography and the bootstrap derive from ``seed``.
    """
    from . import strategies as st

    seed = check_seed(seed)
    kit = MeasurementKit(psi, imperfection=imperfection)
    if strategy == "single":
        kits, adaptation, estimator = [kit], None, "last"
        angles = {(): kit.lam}
    elif strategy == "independent":
        kits, adaptation, estimator = [kit, kit], None, "first"
        angles = {(): kit.lam, (0,): kit.lam, (1,): kit.lam}
    elif strategy == "adaptive":
        sol = st.optimize_adaptive_pair(kit.psi, imperfection=imperfection)
        adaptation = {(0,): sol.lambda0, (1,): sol.lambda1}
        kits, estimator = [kit, kit], "last"
        angles = {(): kit.lam, **adaptation}
    else:
        raise ValueError(f"strategy must be single, independent or adaptive, got {strategy!r}")

    counts = sample_kit_chain(0, kits, shots, derive_seed(seed, 0), adaptation)
    counts = counts.merge(sample_kit_chain(1, kits, shots, derive_seed(seed, 1), adaptation))
    k_hat, k_sigma = estimate_knowledge(counts, estimator)

    rho = st._initial(initial)
    final = sum(st.evolve_chain(rho, kit.psi, len(kits), angles.__getitem__, imperfection).values())
    tomo = simulate_tomography(final, TomographySettings(shots), derive_seed(seed, 2))
    c_hat = concurrence(reconstruct(tomo).physical)
    c_sigma = bootstrap_concurrence_sigma(tomo, bootstrap, derive_seed(seed, 3)) if bootstrap > 1 else 0.0
    return EmulatedPoint(kit.psi, strategy, k_hat, k_sigma, c_hat, c_sigma, seed)


def tradeoff_deviation(point: EmulatedPoint) -> float:
    """Distance of (k_hat, c_hat) from C = sqrt(1 - K^2) in units of the combined sigma."""
    k = min(point.k_hat, 1.0)
    curve = math.sqrt(max(0.0, 1.0 - k * k))
    slope = k / curve if curve > 0 else math.inf
    sigma = math.hypot(point.c_sigma, slope * point.k_sigma)
    gap = abs(point.c_hat - curve)
    if sigma == 0.0:
        return 0.0 if gap == 0.0 else math.inf
    return gap / sigma
