"""Momentum-space analysis: bands, stationary points and flat bands.

In momentum space one step acts as U(k) = D(k) C with
D(k) = diag(exp(-i e_j . k)).  Writing the eigenvalues as exp(i omega_j(k)),
the band gradient follows from first-order perturbation theory,

    d omega_j / d k_l = -sum_i e_{i,l} |v_{j,i}(k)|^2,

which is exact wherever band j is non-degenerate.  The saddle finder and
the band tracker both rely on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from .coins import CoinOperator, CoinState

__all__ = [
    "AMBIGUITY_THRESHOLD",
    "SpectralGrid",
    "SaddlePoint",
    "SaddleContinuum",
    "SaddleReport",
    "FlatBandVerdict",
    "k_axis",
    "evolution_operator_k",
    "eig_unitary",
    "band_structure",
    "band_gradient",
    "find_saddles",
    "flat_band_overlap",
    "stationary_state_subspace",
    "predicted_exponent",
    "kspace_return_amplitude",
    "fourier_implicit",
    "fourier_phase_gradient",
    "wrap_phase",
]

AMBIGUITY_THRESHOLD = 0.6
FLAT_TOL = 1e-10
DEGENERACY_TOL = 1e-7
GRAD_TOL = 1e-8
KERNEL_TOL = 1e-6


def wrap_phase(x):
    """Map angles into (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def k_axis(n: int) -> NDArray[np.float64]:
    """n equally spaced momenta covering (-pi, pi], ending at pi."""
    return -np.pi + 2 * np.pi * np.arange(1, n + 1) / n


def evolution_operator_k(coin: CoinOperator, k) -> NDArray[np.complex128]:
    """D(k) C for one momentum or a stack of momenta (trailing axis d)."""
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    phase = np.exp(-1j * (k @ coin.displacements.array.T))
    return phase[..., :, None] * coin.matrix


def eig_unitary(u: NDArray) -> tuple[NDArray, NDArray]:
    """Eigenvalues and orthonormal eigenvectors (columns) of unitary matrices.

    ``np.linalg.eig`` may return non-orthogonal vectors inside a
    degenerate eigenspace.  For a normal matrix the eigenspaces of distinct
    eigenvalues are orthogonal, so a QR pass only mixes vectors within
    one eigenspace and yields an orthonormal eigenbasis.
    """
    lam, v = np.linalg.eig(u)
    q, _ = np.linalg.qr(v)
    lam = np.einsum("...ij,...ik,...kj->...j", q.conj(), u, q)
    lam = lam / np.abs(lam)
    return lam, q


def _hf_gradient(vecs: NDArray, disp: NDArray) -> NDArray:
    # vecs (..., c, c) with eigenvectors in columns -> (..., c_bands, d)
    return -np.einsum("...ij,il->...jl", np.abs(vecs) ** 2, disp)


@dataclass(eq=False)
class SpectralGrid:
    """Tracked bands on an N^d momentum grid.

    ``phases[..., j]`` is omega_j at each node and ``vectors[..., :, j]`` the
    matching unit eigenvector.  Band labels follow maximal eigenvector
    overlap along a boustrophedon sweep; ``unresolved`` lists nodes where
    the best overlap fell below ``AMBIGUITY_THRESHOLD``.
    """

    coin: CoinOperator
    resolution: int
    axis: NDArray[np.float64]
    phases: NDArray[np.float64]
    vectors: NDArray[np.complex128]
    unresolved: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.coin.d

    @property
    def c(self) -> int:
        return self.coin.c

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.resolution

    def momenta(self) -> NDArray[np.float64]:
        grids = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    @property
    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.exp(1j * self.phases)

    def gradients(self) -> NDArray[np.float64]:
        """Band gradients (..., c, d) at every node."""
        return _hf_gradient(self.vectors, self.coin.displacements.array)

    def degenerate_mask(self, tol: float = DEGENERACY_TOL) -> NDArray[np.bool_]:
        """(..., c) True where band j shares its eigenvalue with another band."""
        lam = self.eigenvalues
        diff = np.abs(lam[..., :, None] - lam[..., None, :])
        diff[..., np.arange(self.c), np.arange(self.c)] = np.inf
        return np.min(diff, axis=-1) < tol

    def phase_spread(self) -> NDArray[np.float64]:
        """Per band, max over nodes of |e^{i omega(k)} - e^{i omega(k_0)}|."""
        lam = self.eigenvalues.reshape(-1, self.c)
        return np.max(np.abs(lam - lam[0]), axis=0)

    def flat_bands(self, tol: float = FLAT_TOL) -> list[int]:
        return [j for j, s in enumerate(self.phase_spread()) if s <= tol]


def _snake_order(n: int, d: int, starts=None):
    """Boustrophedon ordering of {0..n-1}^d; consecutive entries are adjacent.

    Axis a is walked cyclically from ``starts[a]``; since the momentum grid
    is periodic this keeps neighbours adjacent while moving the turning
    hyperplanes to chosen positions.
    """
    starts = [0] * d if starts is None else list(starts)
    first = [(starts[0] + i) % n for i in range(n)]
    if d == 1:
        return [(i,) for i in first]
    sub = _snake_order(n, d - 1, starts[1:])
    out = []
    for r, i in enumerate(first):
        seq = sub if r % 2 == 0 else sub[::-1]
        out.extend((i,) + s for s in seq)
    return out


def _turn_offsets(lam: NDArray) -> list[int]:
    """Per axis, the start index whose turning hyperplanes are least degenerate."""
    diff = np.abs(lam[..., :, None] - lam[..., None, :])
    c = lam.shape[-1]
    diff[..., np.arange(c), np.arange(c)] = np.inf
    gap = np.min(diff, axis=(-2, -1))
    d = gap.ndim
    n = gap.shape[0]
    starts = []
    for a in range(d):
        other = tuple(b for b in range(d) if b != a)
        col = np.min(gap, axis=other) if other else gap
        # turns along this axis happen at the first and last visited index
        quality = np.minimum(col, np.roll(col, 1))
        starts.append(int(np.argmax(quality)) % n)
    return starts


def band_structure(coin: CoinOperator, resolution: int) -> SpectralGrid:
    """Diagonalize U(k) on the grid and give bands consistent labels."""
    n = resolution
    if n < 16 or n % 2:
        raise ValueError("resolution must be even and at least 16")
    d, c = coin.d, coin.c
    axis = k_axis(n)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    ks = np.stack(grids, axis=-1)
    lam, vecs = eig_unitary(evolution_operator_k(coin, ks))

    phases = np.empty(lam.shape)
    tracked = np.empty(vecs.shape, dtype=complex)
    order = _snake_order(n, d, _turn_offsets(lam))

    disp = coin.displacements.array
    spacing = 2 * np.pi / n
    first = order[0]
    perm = np.argsort(np.angle(lam[first]))
    ref = vecs[first][:, perm].copy()
    ref_lam = lam[first][perm].copy()
    ref_k = np.tile(ks[first], (c, 1))
    phases[first] = np.angle(ref_lam)
    tracked[first] = ref
    unresolved = []
    for idx in order[1:]:
        v = vecs[idx]
        ov = np.abs(ref.conj().T @ v)
        # first-order prediction of each band's eigenvalue; it carries the
        # labels through conical points where eigenvectors turn abruptly
        grad = _hf_gradient(ref, disp)
        pred = ref_lam * np.exp(1j * np.sum(grad * (ks[idx] - ref_k), axis=1))
        jump = np.abs(pred[:, None] - lam[idx][None, :]) / spacing
        rows, cols = linear_sum_assignment(jump + (1.0 - ov**2))
        perm = cols[np.argsort(rows)]
        best = ov[np.arange(c), perm]
        if np.min(best) < AMBIGUITY_THRESHOLD:
            unresolved.append(tuple(float(axis[i]) for i in idx))
        lam_here = lam[idx][perm]
        phases[idx] = np.angle(lam_here)
        tracked[idx] = v[:, perm]
        gaps = np.abs(lam_here[:, None] - lam_here[None, :]) + np.diag(np.full(c, np.inf))
        # eigenvectors inside a degenerate eigenspace are arbitrary:
        # keep the last well-defined reference for those bands
        keep = np.min(gaps, axis=1) >= DEGENERACY_TOL
        ref[:, keep] = tracked[idx][:, keep]
        ref_lam[keep] = lam_here[keep]
        ref_k[keep] = ks[idx]
    phases = wrap_phase(phases)
    return SpectralGrid(coin, n, axis, phases, tracked, unresolved)


def _band_at(coin: CoinOperator, k, vref: NDArray):
    """Eigenpair at k continuing the band whose last vector was ``vref``."""
    lam, vecs = eig_unitary(evolution_operator_k(coin, k))
    j = int(np.argmax(np.abs(vref.conj() @ vecs)))
    others = np.delete(lam, j)
    gap = float(np.min(np.abs(others - lam[j]))) if others.size else np.inf
    return lam[j], vecs[:, j], gap


def band_gradient(coin: CoinOperator, k, vref: NDArray) -> tuple[NDArray, NDArray, float]:
    """(gradient, eigenvector, gap) of the band continuing ``vref`` at k."""
    _, v, gap = _band_at(coin, k, vref)
    g = -(np.abs(v) ** 2) @ coin.displacements.array
    return g.astype(float), v, gap


def _hessian(coin: CoinOperator, k: NDArray, v: NDArray, h: float = 1e-5) -> NDArray:
    d = k.size
    H = np.empty((d, d))
    for l in range(d):
        dk = np.zeros(d)
        dk[l] = h
        gp, _, _ = band_gradient(coin, k + dk, v)
        gm, _, _ = band_gradient(coin, k - dk, v)
        H[:, l] = (gp - gm) / (2 * h)
    return 0.5 * (H + H.T)


def _newton(coin, k0, v0, max_iter=60):
    k = np.array(k0, dtype=float)
    g, v, gap = band_gradient(coin, k, v0)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gap < DEGENERACY_TOL:
            return None
        if gn <= GRAD_TOL:
            return wrap_phase(k), v, g
        H = _hessian(coin, k, v)
        step = -np.linalg.lstsq(H, g, rcond=1e-8)[0]
        lam = 1.0
        for _ in range(40):
            g2, v2, gap2 = band_gradient(coin, k + lam * step, v)
            if np.linalg.norm(g2) < gn:
                break
            lam *= 0.5
        else:
            return None
        k, g, v, gap = k + lam * step, g2, v2, gap2
    return None


@dataclass
class SaddlePoint:
    k: NDArray[np.float64]
    band: int
    hessian_eigenvalues: NDArray[np.float64]
    order: float  # amplitude contribution ~ t^-order
    omega: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "k": self.k.tolist(),
            "band": self.band,
            "omega": self.omega,
            "hessian_eigenvalues": self.hessian_eigenvalues.tolist(),
            "amplitude_order": self.order,
        }


@dataclass
class SaddleContinuum:
    """A family of stationary points of one band.

    ``fixed`` maps each pinned axis to its momentum; the remaining axes are
    free along the family.  ``points``, ``vectors`` and ``phases`` sample it.
    """

    band: int
    fixed: dict[int, float]
    free_axes: list[int]
    kernel_dim: int
    order: float
    points: NDArray[np.float64] = field(repr=False)
    vectors: NDArray[np.complex128] = field(repr=False)
    phases: NDArray[np.float64] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "band": self.band,
            "fixed": {str(a): v for a, v in self.fixed.items()},
            "free_axes": self.free_axes,
            "kernel_dim": self.kernel_dim,
            "amplitude_order": self.order,
            "n_points": int(len(self.points)),
            "omega_min": float(np.min(self.phases)) if self.phases is not None else None,
            "omega_max": float(np.max(self.phases)) if self.phases is not None else None,
        }


@dataclass
class SaddleReport:
    points: list[SaddlePoint]
    continua: list[SaddleContinuum]
    flat_bands: list[tuple[int, float]]
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "flat_bands": [{"band": b, "phase": p} for b, p in self.flat_bands],
            "points": [p.as_dict() for p in self.points],
            "continua": [c.as_dict() for c in self.continua],
            "warnings": list(self.warnings),
        }

    def points_of(self, band: int) -> list[SaddlePoint]:
        return [p for p in self.points if p.band == band]


def _periodic_delta(a: NDArray, b: NDArray) -> NDArray:
    return np.abs(wrap_phase(np.asarray(a) - np.asarray(b)))


def _local_minima(field_: NDArray) -> NDArray[np.bool_]:
    d = field_.ndim
    mask = np.ones(field_.shape, dtype=bool)
    for shift in itertools.product((-1, 0, 1), repeat=d):
        if any(shift):
            mask &= field_ <= np.roll(field_, shift, axis=tuple(range(d)))
    return mask


def _kernel_axes(kernel: NDArray, tol: float = 1e-6) -> list[int]:
    """Axes spanning a Hessian kernel, or [] if it is not axis aligned."""
    weight = np.sum(kernel**2, axis=1)
    axes = [a for a in range(kernel.shape[0]) if weight[a] > tol]
    return axes if len(axes) == kernel.shape[1] else []


def _sweep_continuum(coin, k0, v0, free: list[int], grid: SpectralGrid):
    """Check that the gradient vanishes over the grid slice through k0.

    Returns (fixed, free, points, vectors) or None.  Nodes where the band
    touches another one are skipped.
    """
    n = grid.resolution
    start = [int(np.argmin(_periodic_delta(grid.axis, k0[a]))) for a in free]
    pts, vecs = [], []
    v = v0
    for idx in _snake_order(n, len(free), start):
        k = np.array(k0, dtype=float)
        k[free] = grid.axis[list(idx)]
        g, w, gap = band_gradient(coin, k, v)
        if gap < DEGENERACY_TOL:
            continue
        if np.linalg.norm(g) > 1e3 * GRAD_TOL:
            return None
        v = w
        pts.append(k)
        vecs.append(w)
    fixed = {a: float(k0[a]) for a in range(k0.size) if a not in free}
    return fixed, list(free), np.array(pts), np.array(vecs)


def _phase_at(coin: CoinOperator, k, v: NDArray) -> float:
    return float(np.angle(v.conj() @ evolution_operator_k(coin, k) @ v))


def _same_band(coin, k, v: NDArray, cont: SaddleContinuum, tol: float = 1e-6) -> bool:
    """True if the eigenvector v at k belongs to the band carrying ``cont``."""
    if not all(_periodic_delta(k[a], x) <= tol for a, x in cont.fixed.items()):
        return False
    near = int(np.argmin(np.max(_periodic_delta(cont.points, k), axis=-1)))
    _, w, _ = band_gradient(coin, k, cont.vectors[near])
    return abs(np.vdot(w, v)) > 0.99


def _grid_label(grid: SpectralGrid, k: NDArray, v: NDArray) -> int:
    """Tracked band whose eigenvector at the grid node nearest k best matches v."""
    idx = tuple(np.rint((np.asarray(k) + np.pi) / grid.spacing).astype(int) % grid.resolution - 1)
    return int(np.argmax(np.abs(grid.vectors[idx].conj().T @ v)))


def _snap(x: float) -> float:
    # report -pi as pi and -0 as 0 so the same line has one name
    x = float(wrap_phase(x))
    if abs(x) < 1e-9:
        return 0.0
    return np.pi if x <= -np.pi + 1e-9 else x


def find_saddles(grid: SpectralGrid, candidate_tol: float | None = None) -> SaddleReport:
    """Locate and classify stationary points of every dispersive band.

    Seeds are grid nodes where |grad omega| is a local minimum below
    ``candidate_tol`` (default max(1e-3, 2 * spacing)); nodes where the band
    is degenerate are skipped because the band is not smooth there.  Seeds
    are refined by damped Newton iteration to |grad omega| <= 1e-8 and merged.
    A refined point whose Hessian kernel is spanned by coordinate axes is
    tested for a continuum by sweeping the grid slice through it along those
    axes; if the gradient vanishes on the whole slice it is reported as one.

    Seeds whose Newton iteration runs into a band touching are dropped and
    listed in ``SaddleReport.warnings``.

    Band labels come from tracking and can swap where bands touch, so
    results are merged by eigenvector identity: a point or continuum found
    from two labels is reported once, under the first label seen.
    """
    if grid.d <= 2 and grid.resolution < 64:
        raise ValueError("saddle search needs at least 64 points per axis for d ≤ 2")
    coin = grid.coin
    d = grid.d
    tol = candidate_tol if candidate_tol is not None else max(1e-3, 2 * grid.spacing)
    flat = grid.flat_bands()
    flat_info = [(j, float(wrap_phase(np.angle(grid.eigenvalues.reshape(-1, grid.c)[0, j])))) for j in flat]
    grads = np.linalg.norm(grid.gradients(), axis=-1)
    degenerate = grid.degenerate_mask()
    ks = grid.momenta()

    cands: list[tuple[NDArray, int, NDArray]] = []
    notes: list[str] = []
    for j in range(grid.c):
        if j in flat:
            continue
        gj = np.where(degenerate[..., j], np.inf, grads[..., j])
        seeds = np.argwhere(_local_minima(gj) & (gj < tol))
        for idx in map(tuple, seeds):
            out = _newton(coin, ks[idx], grid.vectors[idx][:, j])
            if out is None:
                notes.append(f"band {j}: Newton failed from k={np.round(ks[idx], 6).tolist()}")
                continue
            k0 = np.reshape(out[0], d)
            cands.append((k0, _grid_label(grid, k0, out[1]), out[1]))

    continua: list[SaddleContinuum] = []
    isolated = []
    for k0, j, v0 in cands:
        if any(_same_band(coin, k0, v0, c) for c in continua):
            continue
        ev, evec = np.linalg.eigh(_hessian(coin, k0, v0))
        kernel = np.abs(ev) < KERNEL_TOL
        kd = int(np.sum(kernel))
        if kd:
            free = _kernel_axes(evec[:, kernel])
            cont = _sweep_continuum(coin, k0, v0, free, grid) if free else None
            if cont is not None:
                fixed, free, pts, vecs = cont
                fixed = {a: _snap(x) for a, x in fixed.items()}
                phases = np.array([_phase_at(coin, k, v) for k, v in zip(pts, vecs)])
                continua.append(SaddleContinuum(j, fixed, free, kd, (d - kd) / 2, pts, vecs, phases))
                continue
        isolated.append((k0, j, v0, ev, kd))

    points: list[SaddlePoint] = []
    seen: list[tuple[NDArray, NDArray]] = []
    for k0, j, v0, ev, kd in isolated:
        if any(_same_band(coin, k0, v0, c) for c in continua):
            continue
        if any(np.max(_periodic_delta(k, k0)) <= 1e-6 and abs(np.vdot(v, v0)) > 0.99 for k, v in seen):
            continue
        seen.append((k0, v0))
        points.append(SaddlePoint(k0, j, ev, (d - kd) / 2, _phase_at(coin, k0, v0)))
    return SaddleReport(points, continua, flat_info, notes)


@dataclass
class FlatBandVerdict:
    max_overlaps: dict[int, float]
    verdict: str


def flat_band_overlap(psi0: CoinState | NDArray, grid: SpectralGrid, tol: float = 1e-8) -> FlatBandVerdict:
    """Largest overlap of the initial state with each flat band.

    Nodes where a flat band is degenerate with another band are skipped:
    the flat-band eigenvector is not defined there.
    """
    flat = grid.flat_bands()
    if not flat:
        return FlatBandVerdict({}, "no flat bands")
    psi = np.asarray(psi0, dtype=complex).ravel()
    deg = grid.degenerate_mask()
    overlaps = {}
    for j in flat:
        ov = np.abs(np.einsum("i,...i->...", psi.conj(), grid.vectors[..., :, j]))
        ov = np.where(deg[..., j], 0.0, ov)
        overlaps[j] = float(np.max(ov))
    localized = any(v > tol for v in overlaps.values())
    return FlatBandVerdict(overlaps, "localized" if localized else "not localized by flat bands")


def stationary_state_subspace(grid: SpectralGrid, report: SaddleReport, tol: float = 1e-8) -> NDArray:
    """Orthonormal basis (columns) of states orthogonal to every slow band.

    The slow bands are those carrying continua of stationary points; the
    returned states do not excite them anywhere on those continua.
    """
    if not report.continua:
        return np.zeros((grid.c, 0), dtype=complex)
    rows = np.concatenate([cont.vectors.conj() for cont in report.continua])
    _, s, vh = np.linalg.svd(rows)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    return vh[rank:].conj().T


def predicted_exponent(report: SaddleReport, grid: SpectralGrid, psi0, tol: float = 1e-8) -> float:
    """Leading decay exponent alpha of p0 ~ t^-alpha for an initial state.

    A flat band the state overlaps gives 0; otherwise the slowest stationary
    set the state excites gives 2 * order.
    """
    psi = np.asarray(psi0, dtype=complex).ravel()
    if flat_band_overlap(psi, grid, tol).verdict == "localized":
        return 0.0
    best = np.inf
    for cont in report.continua:
        if np.max(np.abs(cont.vectors.conj() @ psi)) > tol:
            best = min(best, 2 * cont.order)
    for p in report.points:
        _, v, _ = band_gradient(grid.coin, p.k, grid.vectors[_nearest(grid, p.k)][:, p.band])
        if abs(np.vdot(v, psi)) > tol:
            best = min(best, 2 * p.order)
    return float(best)


def _nearest(grid: SpectralGrid, k) -> tuple[int, ...]:
    idx = np.argmin(_periodic_delta(grid.axis[None, :], np.asarray(k)[:, None]), axis=1)
    return tuple(int(i) for i in idx)


def kspace_return_amplitude(coin: CoinOperator, psi0, t, n: int) -> NDArray[np.float64] | float:
    """p0(t) from the momentum-space solution on an n^d grid.

    psi(0, t) = n^-d sum_k sum_j lambda_j(k)^t (v_j, psi0) v_j.  The sum is
    an exact quadrature for trigonometric polynomials of degree below n;
    n > 2 t keeps it exact with room to spare.  ``t`` may be a scalar or a
    sequence of step counts.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=int))
    if np.any(n <= 2 * ts):
        raise ValueError("quadrature aliasing: need N > 2t")
    psi = np.asarray(psi0, dtype=complex).ravel()
    axis = k_axis(n)
    ks = np.stack(np.meshgrid(*([axis] * coin.d), indexing="ij"), axis=-1).reshape(-1, coin.d)
    lam, vecs = eig_unitary(evolution_operator_k(coin, ks))
    coef = np.einsum("nij,i->nj", vecs.conj(), psi)
    omega = np.angle(lam)
    out = np.empty(ts.size)
    for i, tt in enumerate(ts):
        amp = np.einsum("nij,nj->i", vecs, np.exp(1j * tt * omega) * coef) / ks.shape[0]
        out[i] = float(np.vdot(amp, amp).real)
    return out if np.ndim(t) else float(out[0])


def fourier_implicit(k1, k2, omega):
    """Characteristic function of the Fourier walk; zero on its bands.

    Written for the displacement order used here, (1,1), (1,-1), (-1,1),
    (-1,-1), so the first momentum is the one paired with cos in front of
    sin(omega).
    """
    return (
        1
        + np.cos(2 * k1)
        - 2 * np.cos(2 * omega)
        + 2 * np.sin(2 * omega)
        + 4 * np.cos(k1) * np.sin(omega) * (np.sin(k2) - np.cos(k2))
    )


def fourier_phase_gradient(k1, k2, omega) -> NDArray[np.float64]:
    """(d omega/d k1, d omega/d k2) on a Fourier-walk band, by implicit differentiation."""
    den = np.cos(2 * omega) + np.sin(2 * omega) + np.cos(k1) * np.cos(omega) * (np.sin(k2) - np.cos(k2))
    d_k2 = -np.cos(k1) * np.sin(omega) * (np.cos(k2) + np.sin(k2)) / den
    d_k1 = -(2 * np.sin(k1) * np.sin(omega) * (np.cos(k2) - np.sin(k2)) - np.sin(2 * k1)) / (2 * den)
    return np.stack([d_k1, d_k2], axis=-1)
