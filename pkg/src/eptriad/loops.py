"""Closed stroboscopic loops in parameter space and the bundled presets.

A loop is a closed waypoint polygon densified by linear interpolation.
The presets realize the six canonical encircling scenarios: the two
generators (swap of bands 2,3 and of bands 1,2), their two concatenations,
the outer-pair swap at eta = 0, and a single large loop around both arcs.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import AnchorMismatch, PathTouchesEP
from .model import ParamPoint, discriminant_formula

#: loop steps must keep |disc| above this bound
EP_CLEARANCE = 1e-8

MIN_STEPS = 8


@dataclass(frozen=True)
class LoopPath:
    g: float
    waypoints: tuple[ParamPoint, ...]
    steps: tuple[ParamPoint, ...]
    label: str = ""

    def __post_init__(self):
        if self.waypoints[0] != self.waypoints[-1]:
            raise ValueError("loop waypoints must close (first == last)")
        if self.steps[0] != self.steps[-1]:
            raise ValueError("loop steps must close (first == last)")
        if len(self.steps) < MIN_STEPS:
            raise ValueError(f"need at least {MIN_STEPS} steps, got {len(self.steps)}")
        for q in self.steps:
            d = abs(discriminant_formula(q))
            if d < EP_CLEARANCE:
                raise PathTouchesEP(f"|disc| = {d:.2e} at {q}")

    @property
    def n_steps(self) -> int:
        return len(self.steps)


def interpolate_loop(
    waypoints: list[ParamPoint] | tuple[ParamPoint, ...],
    steps_per_segment: int = 200,
    label: str = "",
) -> LoopPath:
    """Densify a closed waypoint sequence by linear interpolation.

    Requires at least 3 distinct waypoints and exact closure.  The total
    step count is n_segments * steps_per_segment + 1 with both endpoints
    included (and equal).
    """
    pts = tuple(waypoints)
    if len(set(pts)) < 3:
        raise ValueError("need at least 3 distinct waypoints")
    if pts[0] != pts[-1]:
        raise ValueError("waypoints must form a closed loop (first == last)")
    gs = {p.g for p in pts}
    if len(gs) != 1:
        raise ValueError("all waypoints must share g")
    steps: list[ParamPoint] = []
    for a, b in zip(pts[:-1], pts[1:]):
        va, vb = a.as_array(), b.as_array()
        for s in range(steps_per_segment):
            f = s / steps_per_segment
            v = (1 - f) * va + f * vb
            steps.append(ParamPoint(*v))
    steps.append(pts[-1])
    return LoopPath(g=pts[0].g, waypoints=pts, steps=tuple(steps), label=label)


def concat_loops(a: LoopPath, b: LoopPath) -> LoopPath:
    """Concatenate two loops sharing an anchor: b is traversed first, then a.

    The operation order "a after b" matches the matrix order U_a @ U_b of the
    resulting holonomies.
    """
    if a.g != b.g:
        raise AnchorMismatch(f"g mismatch: {a.g} != {b.g}")
    if a.waypoints[0] != b.waypoints[0]:
        raise AnchorMismatch(f"anchors differ: {a.waypoints[0]} vs {b.waypoints[0]}")
    waypoints = b.waypoints[:-1] + a.waypoints
    steps = b.steps[:-1] + a.steps
    label = f"{a.label or 'a'}_after_{b.label or 'b'}"
    return LoopPath(g=a.g, waypoints=waypoints, steps=steps, label=label)


def reverse_loop(loop: LoopPath) -> LoopPath:
    return LoopPath(
        g=loop.g,
        waypoints=tuple(reversed(loop.waypoints)),
        steps=tuple(reversed(loop.steps)),
        label=f"{loop.label}-reversed" if loop.label else "reversed",
    )


# --------------------------------------------------------------------------
# bundled loop presets
#
# (zeta, xi) waypoint tables for the canonical runs.  The mu3 rectangle's
# right edge must clear the band-degeneracy point at zeta ~ 0.5408 in the
# eta = 0.33 plane, hence 0.55 there.
G_CANONICAL = 0.61
ETA_GENERATORS = 0.33

_MU1_ZX = [
    (0.00, 0.00), (-0.40, 0.00), (-0.60, 0.00), (-0.60, -0.16), (-0.60, -0.44),
    (-0.36, -0.41), (0.00, -0.46), (0.00, -0.26), (0.00, 0.00),
]
_MU3_ZX = [
    (0.00, 0.00), (0.16, 0.00), (0.55, 0.00), (0.55, 0.35), (0.55, 0.51),
    (0.16, 0.51), (0.00, 0.50), (0.00, 0.30), (0.00, 0.00),
]
_RHO2_NEG_ZX = [
    (0.00, 0.00), (-0.40, 0.00), (-0.60, 0.00), (-0.60, -0.16), (-0.60, -0.44),
    (-0.37, -0.42), (0.00, -0.43), (0.00, -0.27), (0.00, 0.00),
]
_RHO2_POS_ZX = [
    (0.00, 0.00), (0.16, 0.00), (0.55, 0.00), (0.55, 0.29), (0.55, 0.51),
    (0.16, 0.50), (0.00, 0.50), (0.00, 0.33), (0.00, 0.00),
]
# closed quadrilateral around the negative-zeta arc crossing in the eta = 0
# plane; anchored away from the zeta = -0.2 edge and off the xi = 0 line so
# the anchor band order is stable under small eta shifts (the net permutation
# is reported relative to the anchor's Re-sorted bands)
_MU2_ZX = [
    (-0.81, -0.44), (-0.61, -0.45), (-0.22, -0.46), (-0.20, 0.00), (-0.21, 0.44),
    (-0.57, 0.40), (-0.79, 0.40), (-0.79, 0.00), (-0.81, -0.44),
]
_BIG_ZX = [
    (0.80, 0.60), (-0.90, 0.60), (-0.90, -0.60), (0.80, -0.60), (0.80, 0.60),
]


def _to_waypoints(zx: list[tuple[float, float]], eta: float, g: float) -> list[ParamPoint]:
    return [ParamPoint(eta, z, x, g) for (z, x) in zx]


def preset_waypoints(name: str, eta: float | None = None, g: float = G_CANONICAL) -> list[ParamPoint]:
    """Waypoint list for a named preset loop.

    mu1  -- negative-quadrant rectangle at eta = 0.33 (swaps bands 2, 3)
    mu3  -- positive-quadrant rectangle at eta = 0.33 (swaps bands 1, 2)
    rho1 -- mu3 then mu1 around the 17-point composite path
    rho2 -- mu1-shape then mu3-shape, opposite order composite
    mu2  -- quadrilateral around the negative-zeta crossing at eta = 0
    big  -- one rectangle enclosing both arc crossings at eta = 0.33
    """
    if name in ("mu1", "mu3", "rho1", "rho2", "big"):
        e = ETA_GENERATORS if eta is None else eta
    elif name == "mu2":
        e = 0.0 if eta is None else eta
    else:
        raise KeyError(f"unknown preset {name!r}")
    if name == "mu1":
        return _to_waypoints(_MU1_ZX, e, g)
    if name == "mu3":
        return _to_waypoints(_MU3_ZX, e, g)
    if name == "rho1":
        # generator order: mu3 first, then mu1
        return _to_waypoints(_MU3_ZX[:-1] + _MU1_ZX, e, g)
    if name == "rho2":
        return _to_waypoints(_RHO2_NEG_ZX[:-1] + _RHO2_POS_ZX, e, g)
    if name == "mu2":
        return _to_waypoints(_MU2_ZX, e, g)
    return _to_waypoints(_BIG_ZX, e, g)


PRESET_NAMES = ("mu1", "mu2", "mu3", "rho1", "rho2", "big")


def preset_loop(name: str, steps_per_segment: int = 200, eta: float | None = None,
                g: float = G_CANONICAL) -> LoopPath:
    return interpolate_loop(preset_waypoints(name, eta=eta, g=g), steps_per_segment, label=name)
