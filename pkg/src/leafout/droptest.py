"""Drop-impact trigger prediction for the physical prototype.

The prototype folds only at its boundary creases (the PET comb layer);
main and sub creases are left to a pliable nylon film and carry no
spring.  A falling ball triggers the snap-through when its potential
energy exceeds the barrier of the bistable landscape; the decision map
compares E_ball = m g h with the barrier over drop height and rest angle.

Internally everything is SI (J, m, kg, rad).  The torsion constant per
unit crease width is accepted in either of two unit readings; a value
quoted around 1 N*m/rad/mm would be wildly stiff for a 0.25 mm film, so
that spelling is treated as a misprint of N*mm/rad/mm:

  "N*mm/rad/mm": 1e-3 J/rad^2 per mm of width   (default, physical)
  "N*m/rad/mm":  1.0  J/rad^2 per mm of width

The conversion of the per-width constant to a per-crease stiffness uses
an effective PET width.  The comb has 1 mm cuts between 11.5 mm teeth;
by default only complete teeth along the crease count as spring
material.  Both the tooth model and a plain fractional-coverage model
are provided, and the width can be overridden directly.
"""
from dataclasses import dataclass, field

import numpy as np

from .energy import SpringModel, characterize_bistability, landscape_over_psi

G_DEFAULT = 9.81                 # m/s^2
KAPPA_PET_DEFAULT = 0.76         # PET hinge constant per mm of crease width
KAPPA_PET_UNIT_DEFAULT = "N*mm/rad/mm"
COMB_CUT_MM = 1.0
COMB_GAP_MM = 11.5

_UNIT_TO_SI = {
    "N*mm/rad/mm": 1e-3,         # -> J/rad^2 per mm width
    "N*m/rad/mm": 1.0,
}


def kappa_pet_si(kappa_pet, unit=KAPPA_PET_UNIT_DEFAULT):
    """Per-width constant in J/rad^2 per mm of crease width."""
    if unit not in _UNIT_TO_SI:
        raise ValueError(f"unknown kappa unit {unit!r}; expected one of "
                         f"{sorted(_UNIT_TO_SI)}")
    return float(kappa_pet) * _UNIT_TO_SI[unit]


def default_effective_width(crease_length_mm, cut_mm=COMB_CUT_MM,
                            gap_mm=COMB_GAP_MM, mode="teeth"):
    """Effective PET width of one boundary crease, in mm.

    "teeth": complete comb teeth only (cut-bounded teeth of gap_mm each).
    "fraction": crease length scaled by the gap/(gap+cut) coverage.
    """
    period = gap_mm + cut_mm
    if mode == "teeth":
        return float(np.floor(crease_length_mm / period)) * gap_mm
    if mode == "fraction":
        return crease_length_mm * gap_mm / period
    raise ValueError(f"unknown effective-width mode {mode!r}")


@dataclass
class DropScenario:
    """Ball drop onto the prototype; heights measured plate-to-ball-bottom."""
    m_ball: float                      # kg
    R_ball: float                      # m (geometry bookkeeping only)
    h: float                           # m
    g: float = G_DEFAULT
    kappa_pet: float = KAPPA_PET_DEFAULT
    kappa_pet_unit: str = KAPPA_PET_UNIT_DEFAULT
    effective_width_mm: float | None = None   # per boundary crease
    rest_angle: float = np.radians(71.8)      # magnitude of the PET rest fold

    def __post_init__(self):
        for name in ("m_ball", "R_ball", "g", "kappa_pet", "rest_angle"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.h < 0:
            raise ValueError("drop height must be non-negative")
        kappa_pet_si(self.kappa_pet, self.kappa_pet_unit)   # validate unit


def ball_energy(scenario):
    """Potential energy of the ball at release, E = m g h (J)."""
    return scenario.m_ball * scenario.g * scenario.h


def prototype_spring_model(geom, scenario):
    """Boundary-only spring model of the prototype.

    kappa_M = kappa_S = 0; each boundary crease gets the per-width PET
    constant times its effective width; the boundary rest angle is the
    mountain fold -rest_angle.
    """
    width = scenario.effective_width_mm
    if width is None:
        width = default_effective_width(geom.L2)
    kappa_b = kappa_pet_si(scenario.kappa_pet, scenario.kappa_pet_unit) * width
    return SpringModel.per_kind(geom, 0.0, 0.0, kappa_b,
                                rest_main=0.0, rest_sub=0.0,
                                rest_boundary=-abs(scenario.rest_angle))


def prototype_barrier(geom, springs, psi_range=None, n_samples=None):
    """Snap-through barrier dE_g of the prototype landscape (J).

    Raises if the landscape is not bistable (no barrier to cross).
    """
    if psi_range is None:
        psi_range = (-np.pi, np.pi)          # clipped to the motion range
    curve = landscape_over_psi(geom, springs, psi_range, n_samples)
    report = characterize_bistability(curve)
    if report.stability_class != "bistable":
        raise ValueError(f"prototype landscape is {report.stability_class}; "
                         "no snap-through barrier")
    return report.delta_E_g, report


@dataclass
class TriggerPrediction:
    h: float
    rest_angle: float
    E_ball: float
    delta_E_g: float
    E_gap: float
    outcome: str          # "no-trigger" | "grasp"

    def to_dict(self):
        return {"h_m": self.h, "rest_angle_rad": self.rest_angle,
                "E_ball_J": self.E_ball, "delta_E_g_J": self.delta_E_g,
                "E_gap": self.E_gap, "outcome": self.outcome}


@dataclass
class TriggerMap:
    heights: np.ndarray            # m
    rest_angles: np.ndarray        # rad
    predictions: list              # rows per rest angle, cols per height
    threshold_heights: np.ndarray  # m, E_gap = 0 contour h*(rest_angle)
    observations: list = field(default_factory=list)


def trigger_map(geom, scenario, h_range, rest_angle_range, n_h=25, n_rest=25,
                observations=None):
    """Decision map of E_gap = (E_ball - dE_g) / kappa_pet over (h, rest).

    E_gap is normalized by the per-width kappa, which leaves the sign
    decision unchanged and keeps map values comparable across widths.
    Retention failure at large impact energy is an empirical effect with
    no criterion in the energy model, so predictions above threshold are
    reported as "grasp" with retention not asserted.  Optional
    experimental observations (h, outcome in {cross, circle, triangle})
    are carried through for overlay plotting.
    """
    if min(h_range) < 0 or min(rest_angle_range) <= 0:
        raise ValueError("ranges must be positive")
    heights = np.linspace(h_range[0], h_range[1], n_h)
    rests = np.linspace(rest_angle_range[0], rest_angle_range[1], n_rest)
    kap_si = kappa_pet_si(scenario.kappa_pet, scenario.kappa_pet_unit)
    rows = []
    thresholds = np.empty_like(rests)
    for i, rest in enumerate(rests):
        scen_i = DropScenario(
            m_ball=scenario.m_ball, R_ball=scenario.R_ball, h=scenario.h,
            g=scenario.g, kappa_pet=scenario.kappa_pet,
            kappa_pet_unit=scenario.kappa_pet_unit,
            effective_width_mm=scenario.effective_width_mm, rest_angle=rest)
        springs = prototype_spring_model(geom, scen_i)
        d_g, _ = prototype_barrier(geom, springs)
        thresholds[i] = d_g / (scenario.m_ball * scenario.g)
        row = []
        for h in heights:
            e_ball = scenario.m_ball * scenario.g * h
            e_gap = (e_ball - d_g) / kap_si
            row.append(TriggerPrediction(
                h=float(h), rest_angle=float(rest), E_ball=float(e_ball),
                delta_E_g=float(d_g), E_gap=float(e_gap),
                outcome="no-trigger" if e_gap < 0 else "grasp"))
        rows.append(row)
    return TriggerMap(heights=heights, rest_angles=rests, predictions=rows,
                      threshold_heights=thresholds,
                      observations=list(observations or []))
