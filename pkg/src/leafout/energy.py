"""Torsion-spring energy, landscapes over psi and bistability reports.

Every spring-bearing crease j contributes (kappa_j / 2)(rho_j - rest_j)^2.
Energies are evaluated along kinematic paths only; the uniform landscape
E(psi) is the workhorse for bistability characterization and for the
rest-angle design surface of the energy ratio xi.
"""
from dataclasses import dataclass, field

import numpy as np

from .unitcell import sub_angle_from_main
from .uniform import boundary_angles, clip_psi_range, main_angles, psi_motion_range

DEFAULT_PSI_STEP = np.radians(0.5)


class ConfigurationError(ValueError):
    """Spring model does not cover the geometry's crease set."""


@dataclass
class SpringModel:
    """Per-crease stiffness and rest angle, in canonical crease order
    (main, sub left, sub right, boundary, per unit counterclockwise)."""
    kappa: np.ndarray
    rest_angle: np.ndarray

    def __post_init__(self):
        self.kappa = np.asarray(self.kappa, dtype=float)
        self.rest_angle = np.asarray(self.rest_angle, dtype=float)
        if self.kappa.shape != self.rest_angle.shape:
            raise ConfigurationError("kappa and rest_angle length mismatch")
        if np.any(self.kappa < 0):
            raise ConfigurationError("negative stiffness")

    @classmethod
    def uniform(cls, geom, kappa, rest_main, rest_boundary, rest_sub=None):
        """Identical stiffness on every crease; the sub-crease rest angle
        defaults to the one compatible with rest_main on the fold branch."""
        return cls.per_kind(geom, kappa, kappa, kappa, rest_main,
                            rest_boundary, rest_sub)

    @classmethod
    def per_kind(cls, geom, kappa_main, kappa_sub, kappa_boundary,
                 rest_main, rest_boundary, rest_sub=None):
        if not 0.0 <= rest_main <= np.pi:
            raise ConfigurationError("main rest angle must be in [0, pi]")
        if not -np.pi <= rest_boundary <= 0.0:
            raise ConfigurationError("boundary rest angle must be in [-pi, 0]")
        if rest_sub is None:
            rest_sub = sub_angle_from_main(geom.alpha, rest_main)
        if not 0.0 <= rest_sub <= np.pi:
            raise ConfigurationError("sub rest angle must be in [0, pi]")
        n = geom.n_cell
        kap = np.tile([kappa_main, kappa_sub, kappa_sub, kappa_boundary], n)
        rest = np.tile([rest_main, rest_sub, rest_sub, rest_boundary], n)
        return cls(kappa=kap, rest_angle=rest)

    @classmethod
    def from_maps(cls, geom, kappa_map, rest_map):
        """Build from CreaseId-keyed dicts; every crease must be covered."""
        kap, rest = [], []
        for cid in geom.creases():
            if cid not in kappa_map or cid not in rest_map:
                raise ConfigurationError(f"missing spring assignment for {cid}")
            kap.append(kappa_map[cid])
            rest.append(rest_map[cid])
        return cls(kappa=np.array(kap), rest_angle=np.array(rest))

    def scaled(self, factor):
        return SpringModel(kappa=self.kappa * factor,
                           rest_angle=self.rest_angle.copy())


def crease_angle_matrix(rho_m, rho_s, rho_b):
    """Per-crease current angles in canonical order, vectorized over
    leading sample axes.  Inputs are (..., n_cell) arrays."""
    return np.stack([rho_m, rho_s, rho_s, rho_b], axis=-1).reshape(
        *rho_m.shape[:-1], -1)


def energy_of_state(geom, springs, state):
    """Total torsion-spring energy of one fold state."""
    if springs.kappa.shape != (geom.n_total_creases,):
        raise ConfigurationError("spring model size does not match geometry")
    angles = crease_angle_matrix(state.rho_m, state.rho_s, state.rho_b)
    return float(0.5 * np.sum(springs.kappa * (angles - springs.rest_angle) ** 2))


def path_energies(geom, springs, path):
    """Energies along a FoldingPath (vectorized)."""
    rho = path.angles()
    rho_s = path.sub_angles()
    angles = crease_angle_matrix(rho[:, 0::2], rho_s, rho[:, 1::2])
    return 0.5 * np.sum(springs.kappa * (angles - springs.rest_angle) ** 2,
                        axis=-1)


@dataclass
class LandscapeCurve:
    """E(psi) along the uniform path, with the path arrays kept for
    downstream sweeps."""
    psi: np.ndarray
    energy: np.ndarray
    rho_m: np.ndarray
    rho_s: np.ndarray
    rho_b: np.ndarray
    truncated: bool = False


def uniform_path_arrays(geom, psi_range, n_samples=None, step=DEFAULT_PSI_STEP):
    """(psi, rho_m, rho_s, rho_b, truncated) arrays of the uniform path,
    clipped to the admissible motion range.

    When the interval spans the flat state the grid is snapped to contain
    psi = 0 exactly: the energy kinks there (the two fold phases meet at
    a corner), and extremum refinement benefits from an exact node.
    """
    lo, hi, clipped = clip_psi_range(geom.alpha, psi_range)
    if lo < 0.0 < hi:
        if n_samples is None:
            n_lo = max(1, int(round(-lo / step)))
            n_hi = max(1, int(round(hi / step)))
        else:
            n_lo = max(1, int(round((n_samples - 1) * (-lo) / (hi - lo))))
            n_hi = max(1, int(n_samples) - 1 - n_lo)
        psis = np.concatenate([np.linspace(lo, 0.0, n_lo + 1),
                               np.linspace(0.0, hi, n_hi + 1)[1:]])
    else:
        if n_samples is None:
            n_samples = int(round((hi - lo) / step)) + 1
        psis = np.linspace(lo, hi, int(n_samples))
    rho_m = main_angles(geom.alpha, psis)
    rho_b = boundary_angles(geom.alpha, psis, rho_m)
    rho_s = sub_angle_from_main(geom.alpha, rho_m)
    return psis, rho_m, rho_s, rho_b, clipped


def landscape_over_psi(geom, springs, psi_range, n_samples=None):
    """Energy along the uniform path over a psi interval.

    The requested range is clipped to the admissible motion range and
    flagged when truncation occurs.  Default sampling is 0.5 degrees.
    """
    psis, rho_m, rho_s, rho_b, clipped = uniform_path_arrays(
        geom, psi_range, n_samples)
    n = geom.n_cell
    kap = springs.kappa.reshape(n, 4)
    rest = springs.rest_angle.reshape(n, 4)
    E = np.zeros_like(psis)
    # uniform path: every unit sees the same angles, units may differ in springs
    for u in range(n):
        E += 0.5 * (kap[u, 0] * (rho_m - rest[u, 0]) ** 2
                    + kap[u, 1] * (rho_s - rest[u, 1]) ** 2
                    + kap[u, 2] * (rho_s - rest[u, 2]) ** 2
                    + kap[u, 3] * (rho_b - rest[u, 3]) ** 2)
    return LandscapeCurve(psi=psis, energy=E, rho_m=rho_m, rho_s=rho_s,
                          rho_b=rho_b, truncated=clipped)


def refine_extremum(x, y, i):
    """Refine a grid extremum at index i to sub-grid accuracy.

    Smooth extrema get a three-point parabola (grid spacing may be
    uneven).  A corner extremum, detected by the slope change being
    concentrated in the central cell, is returned as the sample itself;
    on the 0-snapped landscape grid this makes the flat-state peak exact
    rather than overshot by the parabola vertex.
    """
    if 2 <= i <= len(x) - 3:
        m = np.diff(y[i - 2:i + 3]) / np.diff(x[i - 2:i + 3])
        c_center = abs(m[2] - m[1])
        c_sides = abs(m[1] - m[0]) + abs(m[3] - m[2])
        if c_center > 10.0 * (c_sides + 1e-300):
            return float(x[i]), float(y[i])
    d0 = x[i - 1] - x[i]
    d2 = x[i + 1] - x[i]
    det = d0 * d0 * d2 - d2 * d2 * d0
    if det == 0.0:
        return float(x[i]), float(y[i])
    dy0 = y[i - 1] - y[i]
    dy2 = y[i + 1] - y[i]
    a = (dy0 * d2 - dy2 * d0) / det
    b = (dy2 * d0 * d0 - dy0 * d2 * d2) / det
    if a == 0.0:
        return float(x[i]), float(y[i])
    t = float(np.clip(-b / (2.0 * a), d0, d2))
    return float(x[i] + t), float(y[i] + b * t + a * t * t)


def interior_extrema(x, y):
    """Indices of interior minima and maxima of a sampled curve."""
    dy = np.diff(y)
    s = np.sign(dy)
    mins = [i for i in range(1, len(y) - 1) if s[i - 1] < 0 <= s[i]]
    maxs = [i for i in range(1, len(y) - 1) if s[i - 1] > 0 >= s[i]]
    return mins, maxs


@dataclass
class BistabilityReport:
    stability_class: str
    psi_open: float | None = None
    psi_closed: float | None = None
    psi_barrier: float | None = None
    E_open: float | None = None
    E_closed: float | None = None
    E_barrier: float | None = None
    delta_E_g: float | None = None
    delta_E_r: float | None = None
    ratio_xi: float | None = None
    minima: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "stability_class", "psi_open", "psi_closed", "psi_barrier",
            "E_open", "E_closed", "E_barrier", "delta_E_g", "delta_E_r",
            "ratio_xi")}


def characterize_bistability(curve):
    """Classify a landscape curve and measure its energy gaps.

    Bistable needs exactly two interior minima separated by one interior
    maximum.  More than two minima is reported as multistable with all
    minima listed; gaps are then undefined.
    """
    psi, E = curve.psi, curve.energy
    if psi[0] >= 0.0 or psi[-1] <= 0.0:
        raise ValueError("curve must span both the open and closed phase")
    mins, maxs = interior_extrema(psi, E)
    refined_minima = [refine_extremum(psi, E, i) for i in mins]
    if len(mins) == 1 and len(maxs) == 0:
        return BistabilityReport(stability_class="monostable",
                                 minima=refined_minima)
    if len(mins) > 2:
        return BistabilityReport(stability_class="multistable",
                                 minima=refined_minima)
    if len(mins) == 2:
        between = [i for i in maxs if mins[0] < i < mins[1]]
        if len(between) == 1:
            p_open, e_open = refined_minima[0]
            p_closed, e_closed = refined_minima[1]
            p_bar, e_bar = refine_extremum(psi, E, between[0])
            d_g = e_bar - e_open
            d_r = e_bar - e_closed
            if d_g > 0 and d_r > 0:
                return BistabilityReport(
                    stability_class="bistable", psi_open=p_open,
                    psi_closed=p_closed, psi_barrier=p_bar, E_open=e_open,
                    E_closed=e_closed, E_barrier=e_bar, delta_E_g=d_g,
                    delta_E_r=d_r, ratio_xi=(d_g - d_r) / (d_g + d_r),
                    minima=refined_minima)
    return BistabilityReport(stability_class="monostable" if not mins
                             else "multistable", minima=refined_minima)


@dataclass
class RatioSurface:
    rest_main: np.ndarray
    rest_boundary: np.ndarray
    xi: np.ndarray               # (len(rest_main), len(rest_boundary)), NaN where undefined
    contours: list               # list of polylines, each an (m, 2) array


def ratio_surface(geom, rest_main_grid, rest_boundary_grid, kappa=1.0,
                  psi_step=DEFAULT_PSI_STEP):
    """Energy-ratio surface xi over a grid of rest angles.

    The uniform path is precomputed once; each grid point only reweights
    the same path arrays, so the sweep is a dense vectorized pass.
    Monostable or multistable points are NaN and excluded from the
    xi = 0 contour.
    """
    lo, hi = psi_motion_range(geom.alpha)
    psis, rho_m, rho_s, rho_b, _ = uniform_path_arrays(
        geom, (lo + 1e-6, hi - 1e-6), step=psi_step)
    gm = np.asarray(rest_main_grid, dtype=float)
    gb = np.asarray(rest_boundary_grid, dtype=float)
    rbs = sub_angle_from_main(geom.alpha, gm)
    n = geom.n_cell
    xi = np.full((len(gm), len(gb)), np.nan)
    for i, (rbm, rs_rest) in enumerate(zip(gm, rbs)):
        # energy curves for all rest_boundary values at once
        base = 0.5 * n * kappa * ((rho_m - rbm) ** 2 + 2 * (rho_s - rs_rest) ** 2)
        E = base[None, :] + 0.5 * n * kappa * (rho_b[None, :] - gb[:, None]) ** 2
        dE = np.diff(E, axis=1)
        s = np.sign(dE)
        flips_min = (s[:, :-1] < 0) & (s[:, 1:] >= 0)
        flips_max = (s[:, :-1] > 0) & (s[:, 1:] <= 0)
        n_min = flips_min.sum(axis=1)
        n_max = flips_max.sum(axis=1)
        for j in np.where((n_min == 2) & (n_max == 1))[0]:
            i_mins = np.where(flips_min[j])[0] + 1
            i_max = np.where(flips_max[j])[0][0] + 1
            if not i_mins[0] < i_max < i_mins[1]:
                continue
            _, e_open = refine_extremum(psis, E[j], i_mins[0])
            _, e_closed = refine_extremum(psis, E[j], i_mins[1])
            _, e_bar = refine_extremum(psis, E[j], i_max)
            d_g, d_r = e_bar - e_open, e_bar - e_closed
            if d_g > 0 and d_r > 0:
                xi[i, j] = (d_g - d_r) / (d_g + d_r)
    contours = zero_contours(gm, gb, xi)
    return RatioSurface(rest_main=gm, rest_boundary=gb, xi=xi,
                        contours=contours)


def zero_contours(gx, gy, field):
    """Zero-level polylines of a gridded field with NaN holes.

    Marching-squares segments on cells whose corners are all defined,
    chained into polylines by shared endpoints.
    """
    segs = []
    for i in range(len(gx) - 1):
        for j in range(len(gy) - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            vals = [field[a, b] for a, b in corners]
            if any(np.isnan(v) for v in vals):
                continue
            pts = []
            edges = [((i, j), (i + 1, j)), ((i + 1, j), (i + 1, j + 1)),
                     ((i + 1, j + 1), (i, j + 1)), ((i, j + 1), (i, j))]
            for (a1, b1), (a2, b2) in edges:
                v1, v2 = field[a1, b1], field[a2, b2]
                if v1 == 0.0 and v2 == 0.0:
                    continue
                if v1 * v2 < 0.0 or (v1 == 0.0) != (v2 == 0.0):
                    t = v1 / (v1 - v2)
                    x = gx[a1] + t * (gx[a2] - gx[a1])
                    y = gy[b1] + t * (gy[b2] - gy[b1])
                    pts.append((x, y))
            if len(pts) == 2:
                segs.append(tuple(pts))
    # chain segments into polylines
    def key(p):
        return (round(p[0], 12), round(p[1], 12))

    adj = {}
    for a, b in segs:
        adj.setdefault(key(a), []).append((a, b))
        adj.setdefault(key(b), []).append((b, a))
    used = set()
    polylines = []
    for a, b in segs:
        if (key(a), key(b)) in used or (key(b), key(a)) in used:
            continue
        line = [a, b]
        used.add((key(a), key(b)))
        for grow_end in (True, False):
            while True:
                tip = line[-1] if grow_end else line[0]
                nxt = None
                for p, q in adj.get(key(tip), []):
                    if (key(p), key(q)) in used or (key(q), key(p)) in used:
                        continue
                    nxt = q
                    used.add((key(p), key(q)))
                    break
                if nxt is None:
                    break
                if grow_end:
                    line.append(nxt)
                else:
                    line.insert(0, nxt)
        polylines.append(np.array(line))
    return polylines
