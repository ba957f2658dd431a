"""Reduced dephasing dynamics and the brute-force checks that certify it.

Everything here works in hbar = 1 units: energies are angular frequencies
and time grids are in the inverse unit.  The closed-form evolution
multiplies each density-matrix element by

    exp(-i dE t) * exp(-i (E'^2 - E^2) Q1(t)) * exp(-(dE)^2 Q2(t))

with the level energies from :mod:`cqdeph.spectrum` used for all three
factors.  Populations are exactly frozen; only coherences move.

Two independent validators live here as well: a finite-mode bath propagated
exactly on the composite space (`finite_bath_oracle`) and a fidelity
comparison of the number-dependent JC stage against its dispersive normal
form (`dispersive_check`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import bath, kernels, spectrum
from .device import EffectiveParams
from .errors import CapacityError, InvalidArgumentError, NumericsError
from .hamiltonians import (
    FRAME_B_ROTATING,
    FRAME_FULLY_ROTATING,
    HamiltonianStage,
    build_diagonal,
    build_jc,
    frame_free_part,
)
from .hilbert import (
    FockCutoff,
    OperatorMatrix,
    StateVector,
    TensorBasisLabel,
    require_density_matrix,
)

OBSERVABLE_NAMES = ("purity", "qubit_coherence", "fidelity_to_initial")


@dataclass(frozen=True)
class PairRecord:
    """Per-element bookkeeping for one coherence rho[row, col]."""

    row: int
    col: int
    label_row: TensorBasisLabel
    label_col: TensorBasisLabel
    delta_e: float
    square_diff: float
    phase: np.ndarray     # dphi(t) = (E_row^2 - E_col^2) Q1(t)
    damping: np.ndarray   # Gamma(t) = (E_row - E_col)^2 Q2(t)


@dataclass(frozen=True)
class DephasingTrajectory:
    cutoff: FockCutoff
    t_grid: np.ndarray
    rho0: np.ndarray
    snapshots: np.ndarray       # (nt, dim, dim)
    energies: np.ndarray
    q1_vals: np.ndarray
    q2_vals: np.ndarray
    pairs: tuple[PairRecord, ...]

    @property
    def dim(self) -> int:
        return self.rho0.shape[0]


def _check_t_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidArgumentError("t_grid must be a nonempty 1-D array")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise InvalidArgumentError(
            "t_grid must be strictly increasing and non-negative"
        )
    return t


def _need_cutoff(op) -> FockCutoff:
    if op.cutoff is None:
        raise InvalidArgumentError(
            "operator carries no FockCutoff; construct it with one"
        )
    return op.cutoff


def evolve_reduced(rho0: OperatorMatrix, eff: EffectiveParams, model,
                   state: bath.BathState, t_grid, *,
                   rtol: float = bath.DEFAULT_RTOL,
                   pairs=None) -> DephasingTrajectory:
    """Closed-form reduced evolution of a density matrix under dephasing.

    Q1/Q2 are evaluated once per grid time and shared by all element pairs.
    ``pairs`` selects which coherences get PairRecords (defaults to every
    nonzero element above the diagonal of rho0); the snapshots always cover
    the full matrix.
    """
    cutoff = _need_cutoff(rho0)
    t = _check_t_grid(t_grid)
    if t.size * cutoff.dim ** 2 > 50_000_000:
        raise CapacityError(
            f"trajectory would hold {t.size} snapshots of a "
            f"{cutoff.dim}x{cutoff.dim} matrix; shrink the grid or cutoff")
    require_density_matrix(rho0)
    rho = np.array(rho0.mat, dtype=complex)

    energies = spectrum.energies_vector(eff, cutoff)
    q1_vals = bath.q1_grid(model, t, rtol)
    q2_vals = bath.q2_grid(model, state, t, rtol)

    snaps = np.empty((t.size, rho.shape[0], rho.shape[0]), dtype=complex)
    for k in range(t.size):
        mult = kernels.dephasing_multipliers(
            energies, float(t[k]), float(q1_vals[k]), float(q2_vals[k])
        )
        snaps[k] = rho * mult

    if pairs is None:
        rows, cols = np.nonzero(np.triu(np.abs(rho), k=1))
        req = list(zip(rows.tolist(), cols.tolist()))
    else:
        req = []
        for pa, pb in pairs:
            if isinstance(pa, TensorBasisLabel):
                pa = pa.flat_index(cutoff)
            if isinstance(pb, TensorBasisLabel):
                pb = pb.flat_index(cutoff)
            req.append((int(pa), int(pb)))

    records = []
    for row, col in req:
        de = float(energies[row] - energies[col])
        sq = float(energies[row] ** 2 - energies[col] ** 2)
        records.append(PairRecord(
            row=row, col=col,
            label_row=TensorBasisLabel.from_flat(row, cutoff),
            label_col=TensorBasisLabel.from_flat(col, cutoff),
            delta_e=de, square_diff=sq,
            phase=sq * q1_vals, damping=de * de * q2_vals,
        ))
    return DephasingTrajectory(
        cutoff=cutoff, t_grid=t, rho0=rho, snapshots=snaps,
        energies=energies, q1_vals=q1_vals, q2_vals=q2_vals,
        pairs=tuple(records),
    )


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _uhlmann(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    s = _sqrtm_psd(rho_a)
    lam = np.linalg.eigvalsh(s @ rho_b @ s)
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) ** 2)


def observables(traj: DephasingTrajectory, which: str) -> np.ndarray:
    """Scalar time series derived from a trajectory.

    purity               Tr rho(t)^2 (real)
    qubit_coherence      the (0, 1) element of the qubit state after tracing
                         out both resonators (complex)
    fidelity_to_initial  Uhlmann fidelity of the full reduced state rho(t)
                         against rho(0) -- the three-factor system is itself
                         the subsystem left after the reservoir trace
    """
    snaps = traj.snapshots
    if which == "purity":
        return np.einsum("tij,tji->t", snaps, snaps).real
    if which == "qubit_coherence":
        dab = traj.cutoff.dim_a * traj.cutoff.dim_b
        qubit = np.einsum(
            "tiaja->tij", snaps.reshape(-1, 2, dab, 2, dab)
        )
        return qubit[:, 0, 1]
    if which == "fidelity_to_initial":
        return np.array([_uhlmann(traj.rho0, snaps[k])
                         for k in range(snaps.shape[0])])
    raise InvalidArgumentError(
        f"unknown observable {which!r}; expected one of {OBSERVABLE_NAMES}"
    )


@dataclass(frozen=True)
class FiniteBathSpec:
    """A small explicit reservoir: K modes with truncations and occupancies.

    occupations are mean thermal photon numbers per mode (None = vacuum);
    the initial bath state is the exact truncated thermal density matrix,
    never a sampled ensemble, so runs are deterministic.
    """

    frequencies: tuple[float, ...]
    couplings: tuple[float, ...]
    cutoffs: tuple[int, ...]
    occupations: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        if self.occupations is not None:
            object.__setattr__(
                self, "occupations", tuple(float(x) for x in self.occupations)
            )
        k = len(self.frequencies)
        if not 1 <= k <= 4:
            raise InvalidArgumentError(f"mode count must be 1..4, got {k}")
        if len(self.couplings) != k or len(self.cutoffs) != k:
            raise InvalidArgumentError(
                "frequencies, couplings, cutoffs must have equal length"
            )
        if self.occupations is not None and len(self.occupations) != k:
            raise InvalidArgumentError("occupations length must match modes")
        if any(w <= 0 for w in self.frequencies):
            raise InvalidArgumentError("mode frequencies must be positive")
        if any(c < 1 for c in self.cutoffs):
            raise InvalidArgumentError("mode cutoffs must be >= 1")
        if self.occupations is not None and any(x < 0 for x in self.occupations):
            raise InvalidArgumentError("occupations must be >= 0")

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def mean_occupations(self) -> tuple[float, ...]:
        if self.occupations is None:
            return (0.0,) * self.n_modes
        return self.occupations


@dataclass(frozen=True)
class FiniteBathReport:
    t_grid: np.ndarray
    reduced: np.ndarray         # (nt, dim_S, dim_S), brute-force propagation
    analytic: np.ndarray        # (nt, dim_S, dim_S), closed-form law
    deviation: np.ndarray       # per-t max entrywise |reduced - analytic|
    max_deviation: float
    displacement_metric: float
    total_dim: int
    q1_vals: np.ndarray
    q2_vals: np.ndarray


def _thermal_diag(n_levels: int, nbar: float) -> np.ndarray:
    if nbar == 0.0:
        p = np.zeros(n_levels)
        p[0] = 1.0
        return p
    r = nbar / (1.0 + nbar)
    p = r ** np.arange(n_levels)
    return p / p.sum()


def finite_bath_oracle(rho0_system: OperatorMatrix, eff: EffectiveParams,
                       spec: FiniteBathSpec, t_grid) -> FiniteBathReport:
    """Exact composite propagation against the closed-form dephasing law.

    The composite Hamiltonian is

        H_T = H_S + sum_k w_k n_k + H_S sum_k c_k (b_k + b_k^dag)
              + H_S^2 sum_k c_k^2 / w_k

    with H_S the diagonal system Hamiltonian.  The quadratic term is the
    displacement counter-term: each bath mode is displaced by -E c_k/w_k in
    the eigenspace at system energy E, at polaron energy -E^2 c_k^2/w_k, and
    the counter-term cancels exactly that shift.  With it the reduced
    coherences obey the closed-form law with the discrete sums

        Q1(t) = sum_k (c_k^2/w_k^2) sin(w_k t)
        Q2(t) = 2 sum_k (c_k^2/w_k^2) sin^2(w_k t/2) (1 + 2 nbar_k)

    (a 1/w_k^2 weight in the counter-term would instead leave secular
    phases growing linearly in t, and the law would fail).

    The only approximation left is the bath Fock truncation; its reach is
    the displacement metric max |E c_k / w_k|, warned about above 0.3 and
    rejected above 1.0.
    """
    cutoff = _need_cutoff(rho0_system)
    require_density_matrix(rho0_system)
    rho_s = np.array(rho0_system.mat, dtype=complex)
    t = _check_t_grid(t_grid)

    energies = spectrum.energies_vector(eff, cutoff)
    e_scale = float(np.max(np.abs(energies)))
    metric = max(
        e_scale * abs(c) / w
        for c, w in zip(spec.couplings, spec.frequencies)
    )
    if metric > 1.0:
        raise NumericsError(
            f"displacement metric {metric:.3g} > 1.0: bath truncation "
            "cannot represent the displaced states"
        )
    if metric > 0.3:
        warnings.warn(
            f"displacement metric {metric:.3g} > 0.3: bath-truncation error "
            "may dominate the comparison",
            stacklevel=2,
        )

    dim_s = rho_s.shape[0]
    dims_b = [c + 1 for c in spec.cutoffs]
    dim_b = int(np.prod(dims_b))
    total = dim_s * dim_b
    if total > 20000:
        raise CapacityError(
            f"composite dimension {total} exceeds the oracle cap 20000"
        )

    # composite operators, system factor first
    h = np.zeros((total, total), dtype=complex)
    h += np.kron(np.diag(energies), np.eye(dim_b))
    renorm = sum(c * c / w for c, w in zip(spec.couplings, spec.frequencies))
    h += np.kron(np.diag(energies**2 * renorm), np.eye(dim_b))
    for k in range(spec.n_modes):
        nk = dims_b[k]
        bk = np.diag(np.sqrt(np.arange(1, nk, dtype=float)), k=1)
        xk = bk + bk.conj().T
        num_k = bk.conj().T @ bk
        left = int(np.prod(dims_b[:k]))
        right = int(np.prod(dims_b[k + 1:]))
        bath_num = np.kron(np.kron(np.eye(left), num_k), np.eye(right))
        bath_x = np.kron(np.kron(np.eye(left), xk), np.eye(right))
        h += spec.frequencies[k] * np.kron(np.eye(dim_s), bath_num)
        h += spec.couplings[k] * np.kron(np.diag(energies), bath_x)

    occ = spec.mean_occupations()
    rho_b = np.diag(_thermal_diag(dims_b[0], occ[0])).astype(complex)
    for k in range(1, spec.n_modes):
        rho_b = np.kron(rho_b, np.diag(_thermal_diag(dims_b[k], occ[k])))
    rho_t0 = np.kron(rho_s, rho_b)

    w_eig, v = np.linalg.eigh(h)
    rho_tilde = v.conj().T @ rho_t0 @ v

    ws = np.array(spec.frequencies)
    cs = np.array(spec.couplings)
    coth = 1.0 + 2.0 * np.array(occ)
    weight = cs * cs / (ws * ws)
    q1_vals = np.array([np.sum(weight * np.sin(ws * tk)) for tk in t])
    q2_vals = np.array(
        [2.0 * np.sum(weight * np.sin(0.5 * ws * tk) ** 2 * coth) for tk in t]
    )

    reduced = np.empty((t.size, dim_s, dim_s), dtype=complex)
    analytic = np.empty_like(reduced)
    for k, tk in enumerate(t):
        phases = np.exp(-1j * w_eig * tk)
        rho_tk = (v * phases) @ rho_tilde @ (v * phases).conj().T
        reduced[k] = np.einsum(
            "abcb->ac", rho_tk.reshape(dim_s, dim_b, dim_s, dim_b)
        )
        mult = kernels.dephasing_multipliers(
            energies, float(tk), float(q1_vals[k]), float(q2_vals[k])
        )
        analytic[k] = rho_s * mult

    deviation = np.max(np.abs(reduced - analytic), axis=(1, 2))
    return FiniteBathReport(
        t_grid=t, reduced=reduced, analytic=analytic, deviation=deviation,
        max_deviation=float(np.max(deviation)),
        displacement_metric=float(metric), total_dim=total,
        q1_vals=q1_vals, q2_vals=q2_vals,
    )


@dataclass(frozen=True)
class DispersiveCheck:
    t_grid: np.ndarray
    fidelity: np.ndarray
    min_fidelity: float
    mean_photons_a: float
    jc_frame: str
    comparison_frame: str


def dispersive_check(psi0: StateVector, eff: EffectiveParams, e_j_max: float,
                     t_grid, *, hbar: float = 1.0,
                     jc_stage: HamiltonianStage | None = None,
                     diagonal_stage: HamiltonianStage | None = None) -> DispersiveCheck:
    """Fidelity of the dispersive normal form against the JC stage.

    Both states are propagated in the mode-B picture: the JC stage lives
    there already, and the diagonal stage is pulled back by re-adding the
    free part that was rotated away.  Passing stages built elsewhere is
    allowed but their frames are checked first -- comparing states that
    live in different pictures produces meaningless fidelities.

    The initial mean photon number of mode A is reported because the
    dispersive approximation degrades as photons increase.
    """
    cutoff = _need_cutoff(psi0)
    t = _check_t_grid(t_grid)
    jc = jc_stage if jc_stage is not None else build_jc(
        eff, e_j_max, cutoff, hbar=hbar)
    dia = diagonal_stage if diagonal_stage is not None else build_diagonal(
        eff, cutoff)
    if jc.frame != FRAME_B_ROTATING or dia.frame != FRAME_FULLY_ROTATING:
        raise InvalidArgumentError(
            f"frame mismatch: jc stage lives in {jc.frame!r} (need "
            f"{FRAME_B_ROTATING!r}), diagonal stage in {dia.frame!r} (need "
            f"{FRAME_FULLY_ROTATING!r})"
        )
    free = frame_free_part(eff, e_j_max, cutoff, hbar=hbar)
    h_cmp = dia.matrix.mat + free.mat

    psi = np.array(psi0.vec, dtype=complex)
    m_diag = np.repeat(
        np.tile(np.arange(cutoff.dim_a), 2), cutoff.dim_b
    ).astype(float)
    mean_photons = float(np.real(np.sum(m_diag * np.abs(psi) ** 2)))

    psi_jc = _propagate_states(jc.matrix.mat, psi, t)
    psi_cmp = _propagate_states(h_cmp, psi, t)
    overlap = np.einsum("tj,tj->t", psi_jc.conj(), psi_cmp)
    fid = np.abs(overlap) ** 2
    return DispersiveCheck(
        t_grid=t, fidelity=fid, min_fidelity=float(np.min(fid)),
        mean_photons_a=mean_photons, jc_frame=jc.frame,
        comparison_frame=FRAME_B_ROTATING,
    )


def _propagate_states(h: np.ndarray, psi0: np.ndarray,
                      t_grid: np.ndarray) -> np.ndarray:
    """Rows are the propagated state at each grid time."""
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ psi0
    return (np.exp(-1j * np.outer(t_grid, w)) * coeff) @ v.T
