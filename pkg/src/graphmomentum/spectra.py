"""Spectra of momentum operators.

For a compact graph the eigenvalues are the real roots of
``det(U diag(e^{i k l}) - I) = 0`` where ``U`` is the global coupling in edge
order: the eigenfunction ansatz ``c_m e^{i k x}`` on edge ``m`` turns the
vertex conditions into ``c = U diag(e^{i k l}) c``.

The root finder tracks the eigenphases of the unitary ``A(k) = U diag(e^{ikl})``.
All eigenphases increase with ``k`` at rates between the shortest and longest
edge length, and their sum increases exactly at rate ``L`` (the total length),
which gives an exact integer count of phase crossings between any two momenta
from just two matrix diagonalizations:

    crossings(a, b) = ((b - a) L - S(b) + S(a)) / 2 pi

with ``S(k)`` the sum of eigenphases folded to ``[0, 2 pi)``.  Bisection on
this count cannot miss a root; a secant polish on the eigenphase closest to
zero sharpens simple roots to near machine precision.

Finite-core graphs (with leads) additionally support embedded eigenvalues
(L2 eigenfunctions vanishing on every lead, found by a rank test), scattering
transfer coefficients, and resonance continuation for the two-loop family.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .coupling import BoundaryVector, MomentumOperator
from .errors import (
    AtEmbeddedEigenvalue,
    CompactGraphRequired,
    ContinuationDiverged,
    GraphMomentumError,
    LeadToLeadPathPresent,
)
from .graphs import MetricGraph
from .orientation import PathDecomposition, PathKind

TWO_PI = 2.0 * math.pi

PHASE_TOL = 1e-9          # eigenphase distance to 0 mod 2pi counting as "at" a root
SV_TOL = 1e-10            # singular-value threshold for embedded eigenvalues
K_TOL = 1e-12             # momentum resolution of the root finder


@dataclass(frozen=True)
class EigenfunctionCoefficients:
    """Per-edge amplitudes of an eigenfunction ``c_e e^{i k x}``."""

    momentum: complex
    amplitudes: Mapping[int, complex]

    def amplitude(self, edge: int) -> complex:
        return complex(self.amplitudes.get(edge, 0.0))


@dataclass(frozen=True)
class SpectrumResult:
    """Sorted eigenvalues with multiplicities inside ``(-window, window)``.

    ``eigenfunctions``, when present, holds one basis tuple of coefficient
    sets per eigenvalue, aligned with ``eigenvalues``.
    """

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]
    window: float
    eigenfunctions: tuple[tuple[EigenfunctionCoefficients, ...], ...] | None = None

    @property
    def count(self) -> int:
        return int(sum(self.multiplicities))

    def pairs(self) -> list[tuple[float, int]]:
        return list(zip(self.eigenvalues, self.multiplicities))


@dataclass(frozen=True)
class ResonanceResult:
    """Complex roots continued from the real seeds ``pi n / ell``."""

    roots: tuple[complex, ...]
    seed_indices: tuple[int, ...]
    parameter: float


@dataclass(frozen=True, eq=False)
class SecularSystem:
    """Edge-ordered data of the secular problem on a compact graph."""

    operator: MomentumOperator
    edge_order: tuple[int, ...]
    lengths: np.ndarray
    coupling: np.ndarray

    def __init__(self, operator, edge_order, lengths, coupling):
        object.__setattr__(self, "operator", operator)
        object.__setattr__(self, "edge_order", tuple(edge_order))
        lengths = np.asarray(lengths, dtype=float)
        lengths.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)
        coupling = np.asarray(coupling, dtype=complex)
        coupling.setflags(write=False)
        object.__setattr__(self, "coupling", coupling)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


# ---------------------------------------------------------------------------
# global coupling in edge order


@dataclass(frozen=True)
class _GlobalCoupling:
    """Vertex couplings flattened to edge-end indexed matrices."""

    fin_ids: tuple[int, ...]
    out_lead_ids: tuple[int, ...]
    in_lead_ids: tuple[int, ...]
    fin_lengths: np.ndarray
    ff: np.ndarray  # finite out-ends <- finite in-ends
    fl: np.ndarray  # finite out-ends <- incoming leads
    lf: np.ndarray  # outgoing leads  <- finite in-ends
    ll: np.ndarray  # outgoing leads  <- incoming leads


def _global_coupling(op: MomentumOperator) -> _GlobalCoupling:
    g = op.graph
    fin = tuple(sorted(e.id for e in g.finite_edges))
    louts = tuple(sorted(l.id for l in g.leads if l.outgoing))
    lins = tuple(sorted(l.id for l in g.leads if not l.outgoing))
    fin_pos = {e: i for i, e in enumerate(fin)}
    lout_pos = {e: i for i, e in enumerate(louts)}
    lin_pos = {e: i for i, e in enumerate(lins)}

    ff = np.zeros((len(fin), len(fin)), dtype=complex)
    fl = np.zeros((len(fin), len(lins)), dtype=complex)
    lf = np.zeros((len(louts), len(fin)), dtype=complex)
    ll = np.zeros((len(louts), len(lins)), dtype=complex)

    for c in op.couplings:
        for i, out_e in enumerate(c.out_order):
            for j, in_e in enumerate(c.in_order):
                val = c.matrix[i, j]
                if out_e in fin_pos and in_e in fin_pos:
                    ff[fin_pos[out_e], fin_pos[in_e]] = val
                elif out_e in fin_pos:
                    fl[fin_pos[out_e], lin_pos[in_e]] = val
                elif in_e in fin_pos:
                    lf[lout_pos[out_e], fin_pos[in_e]] = val
                else:
                    ll[lout_pos[out_e], lin_pos[in_e]] = val

    lengths = np.array([g.finite_edge(e).length for e in fin], dtype=float)
    return _GlobalCoupling(fin, louts, lins, lengths, ff, fl, lf, ll)


def secular_system(op: MomentumOperator) -> SecularSystem:
    """Edge-ordered secular data; defined for compact graphs only."""
    if op.graph.leads:
        raise CompactGraphRequired("the secular system needs a graph without leads")
    parts = _global_coupling(op)
    return SecularSystem(op, parts.fin_ids, parts.fin_lengths, parts.ff)


def secular_matrix(s: SecularSystem, k: complex) -> np.ndarray:
    """``A(k) = U diag(e^{i k l})``; ``k`` is an eigenvalue iff 1 is in its spectrum."""
    return s.coupling * np.exp(1j * k * s.lengths)[None, :]


# ---------------------------------------------------------------------------
# real spectrum via eigenphase winding


def _batched_matrices(s: SecularSystem, ks: np.ndarray) -> np.ndarray:
    phases = np.exp(1j * np.multiply.outer(ks, s.lengths))
    return s.coupling[None, :, :] * phases[:, None, :]


def _phase_sums(s: SecularSystem, ks: np.ndarray) -> np.ndarray:
    """Sum of eigenphases of ``A(k)`` folded to [0, 2 pi), per grid point."""
    ev = np.linalg.eigvals(_batched_matrices(s, np.atleast_1d(ks)))
    return np.mod(np.angle(ev), TWO_PI).sum(axis=1)


def _nearest_phases(s: SecularSystem, ks: np.ndarray) -> np.ndarray:
    """Signed eigenphase of ``A(k)`` closest to zero, per grid point."""
    ev = np.linalg.eigvals(_batched_matrices(s, np.atleast_1d(ks)))
    ang = np.angle(ev)
    idx = np.argmin(np.abs(ang), axis=1)
    return ang[np.arange(ang.shape[0]), idx]


def _crossings(L: float, a: float, b: float, Sa: float, Sb: float) -> int:
    return int(np.rint(((b - a) * L - Sb + Sa) / TWO_PI))


def real_spectrum(
    s: SecularSystem,
    halfwidth: float,
    *,
    k_tol: float = K_TOL,
    phase_tol: float = PHASE_TOL,
    grid_step: float | None = None,
) -> SpectrumResult:
    """All eigenvalues in ``(-halfwidth, halfwidth)`` with multiplicities.

    The winding count over every grid cell is exact, so no root can be
    missed as long as ``grid_step`` keeps each eigenphase advancing by less
    than ``2 pi`` per cell (the default ``pi / (2 max(l))`` is far below).
    Unresolvable clusters narrower than ``k_tol`` are reported as one root
    with the combined multiplicity.
    """
    lam = float(halfwidth)
    if lam <= 0:
        raise ValueError("window halfwidth must be positive")
    L = s.total_length
    lmax = float(s.lengths.max())
    h = grid_step if grid_step is not None else math.pi / (2.0 * lmax)
    n_cells = max(1, int(math.ceil(2.0 * lam / h)))
    ks = np.linspace(-lam, lam, n_cells + 1)
    S = _phase_sums(s, ks)

    work: list[tuple[float, float, float, float, int]] = []
    for i in range(n_cells):
        c = _crossings(L, ks[i], ks[i + 1], S[i], S[i + 1])
        if c > 0:
            work.append((ks[i], ks[i + 1], S[i], S[i + 1], c))

    secant_width = max(1e-5, 100.0 * k_tol)
    resolved: list[tuple[float, int]] = []
    polish: list[tuple[float, float]] = []

    while work:
        mids = np.array([0.5 * (a + b) for a, b, _, _, _ in work])
        Sm = _phase_sums(s, mids)
        nxt: list[tuple[float, float, float, float, int]] = []
        for (a, b, Sa, Sb, c), m, Smi in zip(work, mids, Sm):
            ca = min(max(_crossings(L, a, m, Sa, Smi), 0), c)
            halves = ((a, m, Sa, Smi, ca), (m, b, Smi, Sb, c - ca))
            for lo, hi, Slo, Shi, cc in halves:
                if cc == 0:
                    continue
                if hi - lo <= k_tol:
                    resolved.append((0.5 * (lo + hi), cc))
                elif cc == 1 and hi - lo <= secant_width:
                    polish.append((lo, hi))
                else:
                    nxt.append((lo, hi, Slo, Shi, cc))
        work = nxt

    resolved.extend(
        (k, 1) for k in _secant_polish(s, polish, L, k_tol)
    )
    inside = [(k, m) for k, m in resolved if abs(k) < lam]
    inside.sort()
    return SpectrumResult(
        eigenvalues=tuple(k for k, _ in inside),
        multiplicities=tuple(m for _, m in inside),
        window=lam,
    )


def _secant_polish(
    s: SecularSystem,
    brackets: Sequence[tuple[float, float]],
    L: float,
    k_tol: float,
) -> list[float]:
    """Refine simple roots inside ``brackets`` on the nearest eigenphase.

    Falls back to winding bisection whenever the bracket endpoints do not
    show the expected sign change (which happens when another eigenphase
    sits closer to zero than the crossing one).
    """
    if not brackets:
        return []
    lo = np.array([a for a, _ in brackets])
    hi = np.array([b for _, b in brackets])
    tlo = _nearest_phases(s, lo)
    thi = _nearest_phases(s, hi)

    good = (tlo < 0.0) & (thi > 0.0)
    roots = [None] * len(brackets)

    x0, t0 = lo.copy(), tlo.copy()
    x1, t1 = hi.copy(), thi.copy()
    blo, bhi = lo.copy(), hi.copy()
    active = np.where(good)[0]
    for _ in range(60):
        if len(active) == 0:
            break
        denom = t1[active] - t0[active]
        step_ok = np.abs(denom) > 0
        x2 = np.where(
            step_ok,
            x1[active] - t1[active] * (x1[active] - x0[active]) / np.where(step_ok, denom, 1.0),
            0.5 * (blo[active] + bhi[active]),
        )
        outside = (x2 <= blo[active]) | (x2 >= bhi[active])
        x2 = np.where(outside, 0.5 * (blo[active] + bhi[active]), x2)
        t2 = _nearest_phases(s, x2)

        neg = t2 < 0.0
        blo[active] = np.where(neg, x2, blo[active])
        bhi[active] = np.where(neg, bhi[active], x2)
        x0[active], t0[active] = x1[active], t1[active]
        x1[active], t1[active] = x2, t2

        done = (np.abs(t2) <= 1e-13) | ((bhi[active] - blo[active]) <= k_tol)
        for idx, is_done, xv in zip(active, done, x2):
            if is_done:
                roots[idx] = float(xv)
        active = active[~done]

    out: list[float] = []
    for i, (a, b) in enumerate(brackets):
        if roots[i] is not None:
            out.append(roots[i])
        else:
            out.append(_bisect_crossing(s, a, b, L, k_tol))
    return out


def _bisect_crossing(s: SecularSystem, a: float, b: float, L: float, k_tol: float) -> float:
    """Locate the single eigenphase crossing in ``[a, b]`` by winding counts."""
    Sa = float(_phase_sums(s, np.array([a]))[0])
    while b - a > k_tol:
        m = 0.5 * (a + b)
        Sm = float(_phase_sums(s, np.array([m]))[0])
        if _crossings(L, a, m, Sa, Sm) > 0:
            b = m
        else:
            a, Sa = m, Sm
    return 0.5 * (a + b)


def counting_function(s: SecularSystem, halfwidth: float) -> int:
    """Number of eigenvalues (with multiplicity) in ``(-halfwidth, halfwidth)``.

    Computed from the exact winding identity with two diagonalizations.
    Eigenvalues lying exactly on the window boundary may round to either
    side of it.
    """
    lam = float(halfwidth)
    if lam <= 0:
        raise ValueError("window halfwidth must be positive")
    S = _phase_sums(s, np.array([-lam, lam]))
    return _crossings(s.total_length, -lam, lam, float(S[0]), float(S[1]))


# ---------------------------------------------------------------------------
# closed-form oracles


def _merge_values(
    values: Iterable[tuple[float, int]], tol: float
) -> tuple[tuple[float, ...], tuple[int, ...]]:
    ordered = sorted(values)
    ks: list[float] = []
    ms: list[int] = []
    for k, m in ordered:
        if ks and abs(k - ks[-1]) <= tol:
            ms[-1] += m
        else:
            ks.append(k)
            ms.append(m)
    return tuple(ks), tuple(ms)


def loop_graph_spectrum(
    total_length: float, phases: Sequence[float], halfwidth: float
) -> SpectrumResult:
    """Closed-form spectrum of a single loop with phase couplings.

    A loop of length ``L`` whose vertices multiply the function by
    ``e^{i alpha_j}`` has eigenvalues ``(2 pi n - sum(alpha)) / L``; only the
    phase sum modulo ``2 pi`` (the determinant of the coupling) matters.
    """
    L = float(total_length)
    if L <= 0:
        raise ValueError("loop length must be positive")
    lam = float(halfwidth)
    a = float(sum(phases))
    n_lo = math.floor((-lam * L + a) / TWO_PI)
    n_hi = math.ceil((lam * L + a) / TWO_PI)
    ks = []
    for n in range(n_lo, n_hi + 1):
        k = (TWO_PI * n - a) / L
        if abs(k) < lam:
            ks.append(k)
    ks.sort()
    return SpectrumResult(tuple(ks), tuple(1 for _ in ks), lam)


def decoupled_spectrum(
    d: PathDecomposition, halfwidth: float, merge_tol: float = 1e-9
) -> SpectrumResult:
    """Multiset union of ``2 pi m / l`` progressions over the loops of ``d``."""
    if any(p.kind is not PathKind.LOOP for p in d.paths):
        raise LeadToLeadPathPresent("decoupled spectra need an all-loop decomposition")
    lam = float(halfwidth)
    values: list[tuple[float, int]] = []
    for length in d.loop_lengths():
        n_max = math.ceil(lam * length / TWO_PI)
        for n in range(-n_max, n_max + 1):
            k = TWO_PI * n / length
            if abs(k) < lam:
                values.append((k, 1))
    ks, ms = _merge_values(values, merge_tol)
    return SpectrumResult(ks, ms, lam)


# ---------------------------------------------------------------------------
# embedded eigenvalues on finite-core graphs


def _embedded_matrix_parts(op: MomentumOperator) -> tuple[_GlobalCoupling, np.ndarray]:
    parts = _global_coupling(op)
    n = len(parts.fin_ids)
    eye = np.eye(n, dtype=complex)
    return parts, eye


def _embedded_matrix(parts: _GlobalCoupling, eye: np.ndarray, k: float) -> np.ndarray:
    E = np.exp(1j * k * parts.fin_lengths)
    top = parts.ff * E[None, :] - eye
    bottom = parts.lf * E[None, :]
    return np.vstack([top, bottom])


def _smallest_sv(parts: _GlobalCoupling, eye: np.ndarray, k: float) -> float:
    return float(np.linalg.svd(_embedded_matrix(parts, eye, k), compute_uv=False)[-1])


def embedded_eigenvalues(
    op: MomentumOperator,
    halfwidth: float,
    *,
    sv_tol: float = SV_TOL,
    scan_step: float | None = None,
) -> SpectrumResult:
    """Eigenvalues whose L2 eigenfunctions vanish on every lead.

    On a graph with leads a square-integrable eigenfunction must have zero
    amplitude on each lead, so ``k`` qualifies exactly when a nonzero
    finite-edge amplitude vector reproduces itself through the couplings
    while feeding nothing into the outgoing leads.  That is a rank test on
    the stacked conditions; roots are located by scanning the smallest
    singular value and refined by bounded minimization.
    """
    if not op.graph.leads:
        raise GraphMomentumError(
            "graph has no leads; use real_spectrum on the secular system"
        )
    lam = float(halfwidth)
    parts, eye = _embedded_matrix_parts(op)
    if not parts.fin_ids:
        return SpectrumResult((), (), lam, ())

    lmax = float(parts.fin_lengths.max())
    step = scan_step if scan_step is not None else min(0.05, 0.2 / lmax)
    n_pts = int(math.ceil(2 * lam / step)) + 1
    ks = np.linspace(-lam, lam, n_pts)
    E = np.exp(1j * np.multiply.outer(ks, parts.fin_lengths))
    tops = parts.ff[None, :, :] * E[:, None, :] - eye[None, :, :]
    bottoms = parts.lf[None, :, :] * E[:, None, :]
    sv = np.linalg.svd(np.concatenate([tops, bottoms], axis=1), compute_uv=False)[:, -1]

    threshold = 0.25
    candidates = []
    for i in range(len(ks)):
        if sv[i] >= threshold:
            continue
        left = sv[i - 1] if i > 0 else np.inf
        right = sv[i + 1] if i + 1 < len(ks) else np.inf
        if sv[i] <= left and sv[i] <= right:
            candidates.append(ks[i])

    found: list[tuple[float, tuple[EigenfunctionCoefficients, ...]]] = []
    for k0 in candidates:
        res = minimize_scalar(
            lambda k: _smallest_sv(parts, eye, k),
            bounds=(k0 - step, k0 + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        k_star = _parabola_refine(parts, eye, float(res.x))
        if _smallest_sv(parts, eye, k_star) >= sv_tol:
            continue
        if abs(k_star) >= lam:
            continue
        if found and abs(k_star - found[-1][0]) <= max(10 * step * 1e-3, 1e-8):
            continue
        found.append((k_star, _null_space_coefficients(op, parts, eye, k_star, sv_tol)))

    found.sort(key=lambda item: item[0])
    return SpectrumResult(
        eigenvalues=tuple(k for k, _ in found),
        multiplicities=tuple(len(basis) for _, basis in found),
        window=lam,
        eigenfunctions=tuple(basis for _, basis in found),
    )


def _parabola_refine(parts, eye, k0: float, rounds: int = 2) -> float:
    """Sharpen a minimum of the smallest singular value by parabola fits."""
    h = 1e-7 * max(1.0, abs(k0))
    for _ in range(rounds):
        f0 = _smallest_sv(parts, eye, k0) ** 2
        fp = _smallest_sv(parts, eye, k0 + h) ** 2
        fm = _smallest_sv(parts, eye, k0 - h) ** 2
        denom = fp - 2 * f0 + fm
        if denom <= 0:
            break
        shift = 0.5 * h * (fm - fp) / denom
        if abs(shift) > 2 * h:
            shift = math.copysign(2 * h, shift)
        k0 += shift
        h *= 1e-3
    return k0


def _null_space_coefficients(
    op: MomentumOperator, parts, eye, k: float, sv_tol: float
) -> tuple[EigenfunctionCoefficients, ...]:
    m = _embedded_matrix(parts, eye, k)
    _, sv, vh = np.linalg.svd(m)
    basis = []
    for i in range(len(sv) - 1, -1, -1):
        if sv[i] >= max(sv_tol, 1e-12):
            break
        vec = vh[i].conj()
        pivot = vec[np.argmax(np.abs(vec))]
        vec = vec / pivot
        amplitudes = {eid: complex(vec[j]) for j, eid in enumerate(parts.fin_ids)}
        for l in op.graph.leads:
            amplitudes[l.id] = 0.0
        basis.append(EigenfunctionCoefficients(momentum=k, amplitudes=amplitudes))
    return tuple(reversed(basis))


def eigenfunction_boundary_values(
    op: MomentumOperator, coeffs: EigenfunctionCoefficients
) -> BoundaryVector:
    """Boundary values of the ansatz ``c_e e^{i k x}`` on every edge."""
    g = op.graph
    k = coeffs.momentum
    out_values: dict[int, complex] = {}
    in_values: dict[int, complex] = {}
    for e in g.finite_edges:
        c = coeffs.amplitude(e.id)
        out_values[e.id] = c
        in_values[e.id] = c * cmath.exp(1j * k * e.length)
    for l in g.leads:
        c = coeffs.amplitude(l.id)
        if l.outgoing:
            out_values[l.id] = c
        else:
            in_values[l.id] = c
    return BoundaryVector(out_values=out_values, in_values=in_values)


# ---------------------------------------------------------------------------
# scattering transfer and resonances for the two-loop family


def transfer_coefficients(
    op: MomentumOperator,
    k: float,
    *,
    incoming: Mapping[int, complex] | None = None,
    singular_tol: float = 1e-8,
) -> EigenfunctionCoefficients:
    """Generalized-eigenfunction amplitudes for unit incoming amplitude.

    Solves the vertex conditions for the finite-edge and outgoing-lead
    amplitudes given prescribed incoming-lead amplitudes (default: amplitude
    one on the lowest-id incoming lead).  Raises ``AtEmbeddedEigenvalue``
    when the finite-edge system is singular at ``k``.
    """
    parts = _global_coupling(op)
    if not parts.in_lead_ids:
        raise GraphMomentumError("transfer coefficients need an incoming lead")
    if incoming is None:
        incoming = {parts.in_lead_ids[0]: 1.0}
    a = np.array([complex(incoming.get(e, 0.0)) for e in parts.in_lead_ids])

    E = np.exp(1j * k * parts.fin_lengths)
    system = parts.ff * E[None, :] - np.eye(len(parts.fin_ids), dtype=complex)
    rhs = -(parts.fl @ a)
    sv = np.linalg.svd(system, compute_uv=False)
    if sv[-1] < singular_tol:
        raise AtEmbeddedEigenvalue(
            f"transfer system singular at k={k!r} (smallest singular value {sv[-1]:.2e})"
        )
    c = np.linalg.solve(system, rhs)
    o = parts.lf @ (E * c) + parts.ll @ a

    amplitudes: dict[int, complex] = {}
    for eid, val in zip(parts.fin_ids, c):
        amplitudes[eid] = complex(val)
    for eid, val in zip(parts.out_lead_ids, o):
        amplitudes[eid] = complex(val)
    for eid, val in zip(parts.in_lead_ids, a):
        amplitudes[eid] = complex(val)
    return EigenfunctionCoefficients(momentum=k, amplitudes=amplitudes)


def two_loop_resonance_function(ell: float, delta: float):
    """Resonance condition of the two-loop graph with lengths (l, l+delta, l).

    Returns ``f, df`` where the complex roots of ``f`` are the resonances:
    ``f(k) = 4 i sin(k l) + e^{i k l} (e^{i k delta} - 1)``, which carries the
    same zeros as the denominator of the transfer coefficients.
    """

    def f(k: complex) -> complex:
        return 4j * cmath.sin(k * ell) + cmath.exp(1j * k * ell) * (
            cmath.exp(1j * k * delta) - 1.0
        )

    def df(k: complex) -> complex:
        ek = cmath.exp(1j * k * ell)
        ed = cmath.exp(1j * k * delta)
        return 4j * ell * cmath.cos(k * ell) + 1j * ell * ek * (ed - 1.0) + 1j * delta * ek * ed

    return f, df


def resonances(
    ell: float,
    delta: float,
    n_values: Sequence[int],
    *,
    max_step: float | None = None,
) -> ResonanceResult:
    """Continue the real roots ``pi n / ell`` into the complex plane.

    The length perturbation is ramped from 0 to ``delta`` in increments of at
    most ``|delta| / 16`` (or ``max_step``), applying Newton iteration on the
    resonance condition at each stage.  Raises ``ContinuationDiverged`` when
    an iterate stops converging or strays into a neighboring root's basin.
    """
    if ell <= 0:
        raise ValueError("loop length must be positive")
    seeds = [int(n) for n in n_values]
    step = abs(delta) / 16.0 if max_step is None else max_step
    if delta == 0.0 or step == 0.0:
        stages = [0.0]
    else:
        n_stages = max(16, int(math.ceil(abs(delta) / step)))
        stages = [delta * (i + 1) / n_stages for i in range(n_stages)]

    guard = math.pi / (2.0 * ell)
    roots: list[complex] = []
    for n in seeds:
        k = complex(math.pi * n / ell)
        seed = k
        if delta != 0.0:
            for d in stages:
                f, df = two_loop_resonance_function(ell, d)
                for _ in range(50):
                    val = f(k)
                    dv = df(k)
                    if dv == 0:
                        raise ContinuationDiverged(f"flat condition at n={n}, delta={d}")
                    change = val / dv
                    k = k - change
                    if abs(change) <= 1e-14 * max(1.0, abs(k)):
                        break
                else:
                    raise ContinuationDiverged(f"no convergence at n={n}, delta={d}")
                if abs(k - seed) > guard:
                    raise ContinuationDiverged(
                        f"root from n={n} left its seed basin at delta={d}"
                    )
        roots.append(k)
    return ResonanceResult(tuple(roots), tuple(seeds), float(delta))


# ---------------------------------------------------------------------------
# compact two-loop family, closed form


def compact_two_loop_spectrum(
    l1: float, l3: float, l4: float, halfwidth: float, *, merge_tol: float = 1e-9
) -> SpectrumResult:
    """Spectrum of the compact two-loop graph with equal parallel edges.

    Edge ids follow the ``two-loop-compact`` builtin: 0 and 1 are the two
    parallel edges of length ``l1``, 2 the return edge of length ``l3``, and
    3 the closing edge of length ``l4``.  Eigenfunctions symmetric under
    swapping the parallel edges live on ``{0, 1, 2}`` with momenta
    ``2 pi n / (l1 + l3)``; antisymmetric ones live on ``{0, 1, 3}`` with
    momenta ``2 pi n / (l1 + l4)``.  Every basis eigenfunction therefore
    vanishes identically on one edge.
    """
    lam = float(halfwidth)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    entries: list[tuple[float, EigenfunctionCoefficients]] = []

    period_sym = l1 + l3
    n_max = math.ceil(lam * period_sym / TWO_PI)
    for n in range(-n_max, n_max + 1):
        k = TWO_PI * n / period_sym
        if abs(k) >= lam:
            continue
        s = inv_sqrt2 * cmath.exp(-1j * k * l1)
        entries.append(
            (k, EigenfunctionCoefficients(k, {0: s, 1: s, 2: 1.0, 3: 0.0}))
        )

    period_anti = l1 + l4
    n_max = math.ceil(lam * period_anti / TWO_PI)
    for n in range(-n_max, n_max + 1):
        k = TWO_PI * n / period_anti
        if abs(k) >= lam:
            continue
        t = inv_sqrt2 * cmath.exp(1j * k * l4)
        entries.append(
            (k, EigenfunctionCoefficients(k, {0: t, 1: -t, 2: 0.0, 3: 1.0}))
        )

    entries.sort(key=lambda item: item[0])
    ks: list[float] = []
    ms: list[int] = []
    fns: list[list[EigenfunctionCoefficients]] = []
    for k, fn in entries:
        if ks and abs(k - ks[-1]) <= merge_tol:
            ms[-1] += 1
            fns[-1].append(fn)
        else:
            ks.append(k)
            ms.append(1)
            fns.append([fn])
    return SpectrumResult(
        tuple(ks), tuple(ms), lam, tuple(tuple(b) for b in fns)
    )


# ---------------------------------------------------------------------------
# complex scans


def secular_determinant_grid(
    s: SecularSystem,
    re_halfwidth: float,
    im_halfwidth: float,
    n_re: int,
    n_im: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``|det(A(k) - I)|`` on a rectangular grid in the complex plane.

    Returns ``(re_values, im_values, magnitude)`` with ``magnitude[i, j]``
    evaluated at ``k = re_values[j] + 1j * im_values[i]``.  For a unitary
    coupling the determinant vanishes at real momenta only, so the grid is a
    direct check that no spurious complex roots exist.
    """
    res = np.linspace(-re_halfwidth, re_halfwidth, n_re)
    ims = np.linspace(-im_halfwidth, im_halfwidth, n_im)
    K = res[None, :] + 1j * ims[:, None]
    phases = np.exp(1j * K[..., None] * s.lengths)
    A = s.coupling[None, None, :, :] * phases[:, :, None, :]
    dets = np.linalg.det(A - np.eye(len(s.edge_order))[None, None, :, :])
    return res, ims, np.abs(dets)
