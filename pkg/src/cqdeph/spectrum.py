"""Closed-form level structure and degeneracy-protected subspace discovery.

Energies are H/hbar values (angular frequency units) of the cross-Kerr
normal form:

    E(m, n, 0) = (omega_a_prime - chi n) m
    E(m, n, 1) = -(omega_a_prime - chi n) (m + 1)

independent of :mod:`cqdeph.hamiltonians` (which builds the same spectrum
through operator products) so the two routes can certify each other.

Coherences between equal-energy labels acquire no damping and no extra
phase, so every multi-member degeneracy class is a protected subspace of
the pure-dephasing dynamics.  Discovery is by clustering the energy line,
not by a closed-form index condition; see INDEX_CONVENTION_NOTE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from . import bath
from .device import EffectiveParams
from .errors import InvalidArgumentError
from .hilbert import FockCutoff, TensorBasisLabel, all_labels

INDEX_CONVENTION_NOTE = (
    "Index convention: the computed eigenvalues vanish for every m and both "
    "qubit levels exactly when the mode-B photon number satisfies "
    "chi*n = omega_a_prime, so integer omega_a_prime/chi pins n (mode B) and "
    "protects superpositions over m and the qubit. A reading that pins the "
    "mode-A number m instead circulates for this model; it is inconsistent "
    "with the level formula used here, where m enters only through the "
    "prefactor (omega_a_prime - chi*n). This report follows the computed "
    "spectrum."
)

TRUNCATION_NOTE = (
    "Classes are enumerated over the truncated label set only; families like "
    "{(m, n0, i) : all m} extend to unbounded m in the untruncated model."
)


@dataclass(frozen=True)
class EnergyLevel:
    label: TensorBasisLabel
    energy: float


def eigenvalue(label: TensorBasisLabel, eff: EffectiveParams) -> float:
    """Closed-form energy of one basis label (H/hbar units)."""
    coeff = eff.omega_a_prime - eff.chi * label.n
    if label.i == 0:
        return coeff * label.m
    return -coeff * (label.m + 1)


def energy_difference(label1: TensorBasisLabel, label2: TensorBasisLabel,
                      eff: EffectiveParams) -> float:
    """eigenvalue(label1) - eigenvalue(label2)."""
    return eigenvalue(label1, eff) - eigenvalue(label2, eff)


def energies_vector(eff: EffectiveParams, cutoff: FockCutoff) -> np.ndarray:
    """All eigenvalues in flat-index order, vectorized."""
    m = np.arange(cutoff.dim_a, dtype=float)[:, None]
    n = np.arange(cutoff.dim_b, dtype=float)[None, :]
    coeff = eff.omega_a_prime - eff.chi * n
    e0 = coeff * m
    e1 = -coeff * (m + 1.0)
    return np.concatenate([e0.reshape(-1), e1.reshape(-1)])


def levels(eff: EffectiveParams, cutoff: FockCutoff) -> list[EnergyLevel]:
    ev = energies_vector(eff, cutoff)
    return [EnergyLevel(lab, float(ev[lab.flat_index(cutoff)]))
            for lab in all_labels(cutoff)]


def cluster_energies(energies, tol: float) -> list[np.ndarray]:
    """Single-linkage clustering of a 1-D energy list.

    Returns index arrays, one per class, ordered by class energy.  Two
    energies land in one class iff they are connected by a chain of gaps
    <= tol, so distinct classes are separated by > tol at their nearest
    points.
    """
    if tol < 0:
        raise InvalidArgumentError(f"tol must be >= 0, got {tol}")
    energies = np.asarray(energies, dtype=float)
    if energies.size == 0:
        return []
    order = np.argsort(energies, kind="stable")
    gaps = np.diff(energies[order])
    breaks = np.nonzero(gaps > tol)[0] + 1
    return [np.sort(chunk) for chunk in np.split(order, breaks)]


@dataclass(frozen=True)
class DegeneracyClass:
    """One energy cluster: all labels whose energies coincide within tol."""

    energy: float
    members: tuple[TensorBasisLabel, ...]
    tolerance: float

    def __len__(self) -> int:
        return len(self.members)

    def member_energies(self, eff: EffectiveParams) -> np.ndarray:
        return np.array([eigenvalue(lab, eff) for lab in self.members])


@dataclass(frozen=True)
class DfsResult:
    """Partition of every truncated label into degeneracy classes."""

    classes: tuple[DegeneracyClass, ...]
    ratio: float
    exact: bool
    tolerance: float
    note: str = INDEX_CONVENTION_NOTE

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, idx) -> DegeneracyClass:
        return self.classes[idx]

    def multi_member(self) -> tuple[DegeneracyClass, ...]:
        """The protected subspaces: every class with at least two labels."""
        return tuple(c for c in self.classes if len(c) >= 2)

    def class_of(self, label: TensorBasisLabel) -> DegeneracyClass:
        for c in self.classes:
            if label in c.members:
                return c
        raise InvalidArgumentError(f"label {label} outside the scanned cutoff")

    def to_text(self) -> str:
        lines = [
            f"degeneracy classes: {len(self.classes)} "
            f"({len(self.multi_member())} with >= 2 members)",
            f"omega_a_prime/chi = {self.ratio!r}"
            + (" (exact rational arithmetic)" if self.exact
               else f" (float clustering, tol = {self.tolerance:.3e})"),
        ]
        if self.exact and float(self.ratio) == int(self.ratio):
            lines.append(
                f"integer ratio r = {int(self.ratio)}: the E = 0 class joins "
                f"every (m, n = r, i) with the m = 0, i = 0 zero modes"
            )
        for k, c in enumerate(self.classes):
            if len(c) < 2:
                continue
            members = " ".join(f"({l.m},{l.n},{l.i})" for l in c.members)
            lines.append(f"class {k}: E = {c.energy:.9g}  size {len(c)}: {members}")
        lines.append(self.note)
        lines.append(TRUNCATION_NOTE)
        return "\n".join(lines)


def _exact_classes(eff: EffectiveParams, cutoff: FockCutoff,
                   ratio: Fraction) -> list[tuple[Fraction, list[int]]]:
    groups: dict[Fraction, list[int]] = {}
    for lab in all_labels(cutoff):
        coeff = ratio - lab.n
        value = coeff * lab.m if lab.i == 0 else -coeff * (lab.m + 1)
        groups.setdefault(Fraction(value), []).append(lab.flat_index(cutoff))
    return sorted(groups.items(), key=lambda kv: kv[0])


def dfs_find(eff: EffectiveParams, cutoff: FockCutoff,
             tol: float | None = None, *,
             ratio: Rational | None = None) -> DfsResult:
    """Partition all labels into degeneracy classes.

    Float path: single-linkage clustering with ``tol`` (default
    1e-9 * max|E|).  Exact path: pass ``ratio`` as the rational value of
    omega_a_prime/chi and classes are grouped in integer arithmetic --
    immune to the false splits float rounding can produce at, say,
    omega_a_prime = 3*chi with omega_a_prime - 3*chi = O(eps).
    """
    labels = all_labels(cutoff)
    if ratio is not None:
        if not isinstance(ratio, Rational):
            raise InvalidArgumentError(
                f"ratio must be a rational number, got {type(ratio).__name__}"
            )
        if eff.chi == 0:
            raise InvalidArgumentError(
                "exact-ratio classification needs chi > 0"
            )
        ratio = Fraction(ratio)
        classes = []
        for value, idxs in _exact_classes(eff, cutoff, ratio):
            classes.append(DegeneracyClass(
                energy=float(value) * eff.chi,
                members=tuple(labels[i] for i in idxs),
                tolerance=0.0,
            ))
        return DfsResult(tuple(classes), ratio=float(ratio), exact=True,
                         tolerance=0.0)

    energies = energies_vector(eff, cutoff)
    if tol is None:
        scale = float(np.max(np.abs(energies)))
        tol = 1e-9 * scale if scale > 0 else 1e-30
    elif tol <= 0:
        raise InvalidArgumentError(f"tol must be > 0, got {tol}")
    classes = []
    for idxs in cluster_energies(energies, tol):
        classes.append(DegeneracyClass(
            energy=float(np.mean(energies[idxs])),
            members=tuple(labels[i] for i in idxs),
            tolerance=tol,
        ))
    ratio_f = eff.omega_a_prime / eff.chi if eff.chi != 0 else math.inf
    return DfsResult(tuple(classes), ratio=ratio_f, exact=False, tolerance=tol)


@dataclass(frozen=True)
class PairCheck:
    """Damping/phase bounds for one ordered label pair inside a class."""

    label_hi: TensorBasisLabel
    label_lo: TensorBasisLabel
    delta_e: float
    square_diff: float
    max_gamma: float
    max_abs_phase: float


@dataclass(frozen=True)
class DfsVerification:
    cls: DegeneracyClass
    t_grid: np.ndarray
    q1_vals: np.ndarray
    q2_vals: np.ndarray
    pairs: tuple[PairCheck, ...]
    max_gamma: float
    max_abs_phase: float
    threshold: float
    protected: bool
    note: str

    def to_text(self) -> str:
        head = (
            f"class at E = {self.cls.energy:.9g}, {len(self.cls)} members, "
            f"{len(self.pairs)} ordered pairs, {self.t_grid.size} times\n"
            f"max Gamma = {self.max_gamma:.3e} (threshold {self.threshold:.3e})"
            f" -> {'protected' if self.protected else 'NOT protected'}\n"
            f"max |dphi| = {self.max_abs_phase:.3e}"
        )
        return head + "\n" + self.note


def dfs_verify(cls: DegeneracyClass, eff: EffectiveParams, model,
               state: bath.BathState, t_grid,
               rtol: float = bath.DEFAULT_RTOL) -> DfsVerification:
    """Evaluate damping and phase shift for every ordered pair in a class.

    Gamma = (E' - E)^2 Q2(t) and dphi = (E'^2 - E^2) Q1(t) on the grid;
    a genuine protected class keeps max Gamma below tol^2 * max Q2 (the
    worst residual its own clustering tolerance permits).
    """
    if len(cls) == 0:
        raise InvalidArgumentError("empty degeneracy class")
    t_grid = np.asarray(t_grid, dtype=float)
    q1_vals = bath.q1_grid(model, t_grid, rtol)
    q2_vals = bath.q2_grid(model, state, t_grid, rtol)
    member_e = cls.member_energies(eff)
    pairs = []
    max_gamma = 0.0
    max_phase = 0.0
    q2_peak = float(np.max(q2_vals)) if q2_vals.size else 0.0
    q1_peak = float(np.max(np.abs(q1_vals))) if q1_vals.size else 0.0
    for j, lab_hi in enumerate(cls.members):
        for k, lab_lo in enumerate(cls.members):
            if j == k:
                continue
            de = float(member_e[j] - member_e[k])
            sq = float(member_e[j] ** 2 - member_e[k] ** 2)
            g = de * de * q2_peak
            ph = abs(sq) * q1_peak
            pairs.append(PairCheck(lab_hi, lab_lo, de, sq, g, ph))
            max_gamma = max(max_gamma, g)
            max_phase = max(max_phase, ph)
    threshold = cls.tolerance**2 * q2_peak + 1e-30
    note = (
        "dphi = (E'^2 - E^2) Q1 can survive degeneracy only for mirrored "
        "pairs E' = -E; within an equal-energy class E' = E, so both the "
        "damping and the extra phase vanish."
    )
    return DfsVerification(
        cls=cls,
        t_grid=t_grid,
        q1_vals=q1_vals,
        q2_vals=q2_vals,
        pairs=tuple(pairs),
        max_gamma=max_gamma,
        max_abs_phase=max_phase,
        threshold=threshold,
        protected=max_gamma <= threshold,
        note=note,
    )
