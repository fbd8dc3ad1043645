"""Synthetic dental arch models with exact ground truth.

Models are open heightfield meshes: a flat base with analytic bumps for
teeth, built in the canonical frame (x right, y forwards, z up = occlusal)
along a known quadratic arch.  Crowns are seated so every erupted tip
meets a shared occlusal plane, as erupted teeth do; partially erupted
teeth stop short of it.  Tooth feet form the concave creases the
segmentation relies on, tooth walls and caps are convex (free to flood),
and saddles between cusps are mildly concave, so the adaptive threshold
has a real optimum.  The rectangle rim provides genuine boundary edges.

Tooth shape families:

* incisor: a mesiodistally long tented ridge with a gently domed crest
  (one strict peak, blunt top);
* canine: an elliptical cone (one sharp peak);
* premolar: a pedestal with buccal + lingual cusp bumps;
* molar: a pedestal with four cusp bumps; an optional central groove deep
  enough to split the flood reproduces the classic two-half molar.

Ground truth records the frame, arch, per-tooth face sets (and mesial /
distal halves), cusp apexes and expected landmarks, so pipeline output can
be scored without any manual annotation.  Specs are deterministic in
``seed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arch import ArchCurve
from .errors import GenerationError
from .orientation import Frame
from .stl import TriangleSoup
from .teeth import JAW_KINDS, tooth_class, type_table

# Gum between neighbouring tooth feet.  Kept wide enough that each tooth
# wall meets flat gum before the next wall starts: two steep walls meeting
# directly form a near-180 degree vee whose |n0 x n1| crossing cost is
# small, which would let floods hop between teeth.
_GAP = 1.2
_MARGIN = 5.0               # mm of flat base beyond the dentition
_FRONT_APRON = 10.0         # extra flat shelf in front of the incisors
_MIN_WIDTH_SURPLUS = 6.0    # domain width must exceed depth for PCA order

#: (mesiodistal, buccolingual, height) per ordinal, millimetres, stylised.
_DIMS = {
    "adult_upper": {
        "1": (7.1, 7.0, 9.5), "2": (5.6, 6.1, 8.8), "3": (6.3, 7.6, 10.0),
        "4": (5.9, 7.5, 8.3), "5": (5.5, 7.6, 8.0), "6": (9.0, 9.1, 7.3),
        "7": (8.1, 8.7, 7.0), "8": (7.1, 8.2, 6.6),
    },
    "adult_lower": {
        "1": (4.5, 5.9, 8.7), "2": (5.0, 6.2, 8.9), "3": (5.7, 7.3, 9.5),
        "4": (5.8, 6.6, 8.1), "5": (5.9, 6.9, 7.8), "6": (9.2, 8.4, 7.1),
        "7": (8.6, 8.1, 6.8), "8": (7.6, 7.8, 6.4),
    },
    "deciduous_upper": {
        "A": (5.5, 5.0, 7.8), "B": (4.5, 4.4, 7.2), "C": (5.3, 5.5, 8.4),
        "D": (6.1, 6.8, 6.6), "E": (7.3, 7.6, 6.2),
    },
    "deciduous_lower": {
        "A": (4.0, 4.0, 7.4), "B": (4.4, 4.2, 7.6), "C": (5.0, 5.2, 8.1),
        "D": (6.4, 6.3, 6.4), "E": (7.7, 7.1, 6.0),
    },
}

_ARCH = {
    "adult_upper": (-0.0608, 20.0),
    "adult_lower": (-0.0620, 19.0),
    "deciduous_upper": (-0.0650, 13.0),
    "deciduous_lower": (-0.0660, 12.5),
}

_DEFAULT_ORDINALS = {
    "adult": ("1", "2", "3", "4", "5", "6", "7"),
    "deciduous": ("A", "B", "C", "D", "E"),
}

KNOWN_VARIANTS = ("two_half_molar", "erupting_molar",
                  "second_erupting_molar", "crowding", "cheek_fragment",
                  "bl_groove", "noisy_cap")


@dataclass
class ToothSpec:
    """One tooth bump: placement along the arch plus footprint and shape."""

    code: str               # full Palmer code, e.g. "UR6"
    arc: float              # signed arc length of the centre from the apex
    md: float               # mesiodistal footprint
    bl: float               # buccolingual footprint
    height: float
    kind: str               # incisor | canine | premolar | molar
    v_offset: float = 0.0   # buccal(+) / lingual(-) displacement
    seat: float = 0.0       # vertical lift seating the tip on the occlusal plane
    groove: float = 0.0     # central (mesial/distal split) groove depth 0..1
    bl_groove: float = 0.0  # buccal/lingual split groove depth 0..1
    partial: bool = False   # partially erupted (mesial half only)
    noise: float = 0.0      # cap dimple amplitude
    two_cusps: bool = False # molar shape with one cusp pair (erupting)


@dataclass
class FeatureSpec:
    """Non-tooth surface feature: kind 'bump' | 'shelf' | 'ridge'."""

    kind: str
    params: dict


@dataclass
class JawSpec:
    jaw_kind: str
    seed: int
    arch_a: float
    apex_y: float
    grid_step: float
    teeth: list[ToothSpec]
    features: list[FeatureSpec] = field(default_factory=list)


@dataclass
class GtTooth:
    code: str
    centre_xy: np.ndarray
    apex: np.ndarray                    # highest cusp tip, world coords
    cusps: list[dict]                   # {position, buccal: bool}
    faces: np.ndarray = field(default_factory=lambda: np.empty(0, np.int32))
    half_faces: dict = field(default_factory=dict)   # mesial / distal
    expected_landmarks: list[dict] = field(default_factory=list)
    partial: bool = False


@dataclass
class GroundTruth:
    jaw_kind: str
    frame: Frame
    arch: ArchCurve
    teeth: list[GtTooth]
    spec: JawSpec

    def tooth(self, code: str) -> GtTooth:
        for t in self.teeth:
            if t.code == code:
                return t
        raise KeyError(code)


# ---------------------------------------------------------------------------
# arch geometry helpers

def _arc_table(a: float, x_max: float = 40.0, n: int = 4001):
    """Dense (x, arc length) table for the arch y = a x^2 + c."""
    x = np.linspace(0.0, x_max, n)
    slope = 2.0 * a * x
    ds = np.sqrt(1.0 + slope * slope)
    arc = np.concatenate([[0.0], np.cumsum(
        0.5 * (ds[1:] + ds[:-1]) * np.diff(x))])
    return x, arc


def _arc_to_x(spec_a: float, arcs: np.ndarray) -> np.ndarray:
    x, arc = _arc_table(spec_a)
    return np.sign(arcs) * np.interp(np.abs(arcs), arc, x)


def _tangent(a: float, x0: float) -> np.ndarray:
    m = 2.0 * a * x0
    t = np.array([1.0, m]) / np.hypot(1.0, m)
    return t


# ---------------------------------------------------------------------------
# height field pieces (all vectorised over arbitrary-shape x, y arrays)

def _tooth_frame(spec: JawSpec, tooth: ToothSpec):
    """Centre (x, y), unit tangent and buccal normal of a tooth."""
    x0 = float(_arc_to_x(spec.arch_a, np.array([tooth.arc]))[0])
    y0 = spec.arch_a * x0 * x0 + spec.apex_y
    t = _tangent(spec.arch_a, x0)
    b = np.array([-t[1], t[0]])        # CCW normal: buccal (positive y side)
    centre = np.array([x0, y0]) + tooth.v_offset * b
    return centre, t, b


def _cusp_layout(tooth: ToothSpec, mesial_sign: float):
    """(du, dv, apex_fraction) cusp bumps in tooth-local coordinates.

    Besides the cusps proper, erupted premolars and molars carry a pair of
    marginal ridges near the mesial / distal crown ends.  Real crowns keep
    their silhouette within a couple of millimetres of the cusp tips, and
    the vertical-refinement line fit relies on that: without ridges the
    interproximal notches bias the fitted occlusal line.  Ridges sit
    slightly lingual so buccal-cusp landmark selection never picks them.
    """
    au, bv = tooth.md / 2.0, tooth.bl / 2.0
    if tooth.two_cusps:
        return [(0.0, 0.40 * bv, 1.00), (0.0, -0.40 * bv, 0.96)]
    ridges = [(-0.76 * au, -0.12 * bv, 0.84), (0.76 * au, -0.12 * bv, 0.84)]
    if tooth.kind == "premolar":
        return [(0.0, 0.40 * bv, 1.00), (0.0, -0.40 * bv, 0.96)] + ridges
    if tooth.kind == "molar":
        u_m = mesial_sign * 0.34 * au
        return [
            (u_m, 0.40 * bv, 1.00),     # mesiobuccal: the highest cusp
            (u_m, -0.40 * bv, 0.97),    # mesiolingual
            (-u_m, 0.40 * bv, 0.96),    # distobuccal
            (-u_m, -0.40 * bv, 0.93),   # distolingual
        ] + ridges
    return []


def _tooth_field(spec: JawSpec, tooth: ToothSpec, px: np.ndarray,
                 py: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    centre, t, b = _tooth_frame(spec, tooth)
    au, bv = tooth.md / 2.0, tooth.bl / 2.0
    u = (px - centre[0]) * t[0] + (py - centre[1]) * t[1]
    v = (px - centre[0]) * b[0] + (py - centre[1]) * b[1]
    h = tooth.height
    e2 = (u / au) ** 2 + (v / bv) ** 2

    if tooth.kind == "incisor":
        # Blade with a flat quartic cap and a moderate foot pitch.  The
        # radial profile h(1 - 4.1 t^4 + 3.1 t^5) has zero slope at the
        # crest (no fold line, so grid aliasing cannot fabricate low
        # micro-peaks for the rise/run gum rule), is quasi-concave (no
        # saddle bands to split the flood), and ends at slope 0.9 h so
        # the per-column drop at the fringe stays small enough for the
        # foot crease to hold the flood in.
        rho = np.minimum(np.sqrt(e2), 1.0)
        z = h * (1.0 - 4.1 * rho ** 4 + 3.1 * rho ** 5)
    elif tooth.kind == "canine":
        rho = np.sqrt(e2)
        cone = h * np.clip(1.0 - rho, 0.0, None)
        z = cone
        # Mesial / distal incisal shoulders, blended like the posterior
        # marginal ridges: canine embrasures stay shallow in silhouette
        # while the apex keeps its sharp, highest tip.
        rc_s = 0.40 * bv
        for su in (-0.70 * au, 0.70 * au):
            r2 = ((u - su) ** 2 + v * v) / (rc_s * rc_s)
            blend = np.clip(1.0 - r2, 0.0, None) ** 2
            z = z + blend * (0.80 * h - cone)
    else:
        rho2 = e2
        ped_frac = 0.72 if tooth.kind == "premolar" else 0.75
        ped = ped_frac * h * np.clip(1.0 - rho2, 0.0, None)
        z = ped
        mesial_sign = -np.sign(centre[0]) if centre[0] != 0 else 1.0
        rc = 0.55 * bv if (tooth.kind == "premolar" or tooth.two_cusps) \
            else 0.42 * min(au, bv)
        for du, dv, frac in _cusp_layout(tooth, mesial_sign):
            # Blend towards the cusp tip height rather than stacking a
            # bump on the sloped pedestal: a stacked bump peaks uphill of
            # its centre and overshoots frac * h, tilting the occlusal
            # plane.  Blending pins a zero-gradient maximum of exactly
            # frac * h at (du, dv); cusp supports overlap too little for
            # their sum to lift anything above the tallest tip.
            r2 = ((u - du) ** 2 + (v - dv) ** 2) / (rc * rc)
            blend = np.clip(1.0 - r2, 0.0, None) ** 2
            z = z + blend * (frac * h - ped)
        if tooth.groove > 0:
            # Fissure canyon: the crown is scaled to zero over a flat
            # ground strip wider than two grid cells.  The smoothstep
            # shoulder keeps the walls creaseless (a sharp fold line
            # would alias into fake micro-peaks) while the two wall
            # bends still outprice any cap the ladder can select.
            t_w = np.clip((np.abs(u) - 1.2 * tooth.groove) / 0.9, 0.0, 1.0)
            z = z * t_w * t_w * (3.0 - 2.0 * t_w)
        if tooth.bl_groove > 0:
            t_w = np.clip((np.abs(v) - 1.2 * tooth.bl_groove) / 0.9,
                          0.0, 1.0)
            z = z * t_w * t_w * (3.0 - 2.0 * t_w)
    if tooth.seat > 0:
        # Alveolar seating: lift the whole crown (fissure floors included,
        # which is why this is added after groove scaling) so the tip
        # reaches the occlusal plane.  The skirt is a one-cell cliff; its
        # base crease outprices the old foot crease and its top ring is a
        # free convex fold with strictly rising inward neighbours, so no
        # alias micro-peaks appear on either side.
        z = z + tooth.seat * (e2 < 1.0)
    if tooth.noise > 0:
        # A few dimples on the cap: raises internal flood costs.
        for _ in range(5):
            du = rng.uniform(-0.5, 0.5) * au
            dv = rng.uniform(-0.5, 0.5) * bv
            rr = ((u - du) ** 2 + (v - dv) ** 2) / (0.8 * 0.8)
            z = z - tooth.noise * np.clip(1.0 - rr, 0.0, None) ** 2 \
                * (z > 0.5)
    return z


def _feature_field(feat: FeatureSpec, px: np.ndarray,
                   py: np.ndarray) -> np.ndarray:
    p = feat.params
    if feat.kind == "bump":
        r = np.hypot(px - p["cx"], py - p["cy"]) / p["radius"]
        return p["height"] * np.clip(1.0 - r ** p.get("q", 1.6),
                                     0.0, None) ** p.get("power", 1.0)
    if feat.kind == "shelf":
        r2 = ((px - p["cx"]) ** 2 + (py - p["cy"]) ** 2) / p["radius"] ** 2
        return p["height"] * np.exp(-r2)
    if feat.kind == "ridge":
        ax, ay = p["p0"]
        bx, by = p["p1"]
        dx, dy = bx - ax, by - ay
        length2 = dx * dx + dy * dy
        tt = np.clip(((px - ax) * dx + (py - ay) * dy) / length2, 0.0, 1.0)
        d = np.hypot(px - (ax + tt * dx), py - (ay + tt * dy))
        dome = 1.0 - 0.08 * (2.0 * tt - 1.0) ** 2
        return p["height"] * dome * np.clip(1.0 - d / p["width"], 0.0, None)
    raise GenerationError(f"unknown feature kind {feat.kind!r}")


def _height_field(spec: JawSpec, px: np.ndarray, py: np.ndarray,
                  rng: np.random.Generator) -> np.ndarray:
    z = np.zeros_like(px)
    for tooth in spec.teeth:
        z = z + _tooth_field(spec, tooth, px, py, rng)
    for feat in spec.features:
        z = z + _feature_field(feat, px, py)
    return z


# ---------------------------------------------------------------------------
# spec construction

def build_jaw_spec(jaw_kind: str, seed: int = 0, grid_step: float = 0.45,
                   missing: tuple[str, ...] = (),
                   variants: tuple[str, ...] = (),
                   include_third_molars: bool = False,
                   replace_seven_with_eight: bool = False) -> JawSpec:
    """Assemble a jaw specification with seeded size jitter.

    ``missing`` lists full Palmer codes to omit.  ``variants`` toggles the
    fixture features documented in :data:`KNOWN_VARIANTS`.
    ``replace_seven_with_eight`` swaps the second molars for third molars
    (used to collect wisdom-tooth reference data without lengthening the
    arch).
    """
    if jaw_kind not in JAW_KINDS:
        raise GenerationError(f"unknown jaw kind {jaw_kind!r}")
    unknown = set(variants) - set(KNOWN_VARIANTS)
    if unknown:
        raise GenerationError(f"unknown variants {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    dims = _DIMS[jaw_kind]
    arch_a, apex_y = _ARCH[jaw_kind]
    dentition = jaw_kind.split("_")[0]
    ordinals = list(_DEFAULT_ORDINALS[dentition])
    if include_third_molars and dentition == "adult":
        ordinals.append("8")
    if replace_seven_with_eight and dentition == "adult":
        ordinals = [o for o in ordinals if o != "7"] + ["8"]
        ordinals.sort()

    # Quadrant prefixes in arch order: first limb is frame-left.
    upper = jaw_kind.endswith("upper")
    first, second = ("UR", "UL") if upper else ("LL", "LR")

    teeth: list[ToothSpec] = []
    for prefix, sign in ((first, -1.0), (second, +1.0)):
        arc = _GAP
        for o in ordinals:
            md, bl, h = dims[o]
            jm = 1.0 + 0.03 * float(np.clip(rng.standard_normal(), -2.5, 2.5))
            jb = 1.0 + 0.03 * float(np.clip(rng.standard_normal(), -2.5, 2.5))
            jh = 1.0 + 0.02 * float(np.clip(rng.standard_normal(), -2.5, 2.5))
            md_j, bl_j, h_j = md * jm, bl * jb, h * jh
            centre_arc = arc + md_j / 2.0
            arc += md_j + _GAP
            code = prefix + o
            if code in missing:
                continue
            teeth.append(ToothSpec(
                code=code, arc=sign * centre_arc, md=md_j, bl=bl_j,
                height=h_j, kind=tooth_class(o),
                v_offset=float(rng.uniform(-0.12, 0.12))))

    # Erupted tips share one occlusal plane: each crown is seated on a
    # lift making up the difference to the tallest crown present.  The
    # lift absorbs the height jitter as well, teeth erupt until they
    # meet the plane, so crown proportions vary but tip heights do not.
    if teeth:
        h_ref = max(t.height for t in teeth)
        for t in teeth:
            t.seat = h_ref - t.height

    spec = JawSpec(jaw_kind=jaw_kind, seed=seed, arch_a=arch_a,
                   apex_y=apex_y, grid_step=grid_step, teeth=teeth)
    _apply_variants(spec, variants, rng)
    return spec


def _find_tooth(spec: JawSpec, code: str) -> ToothSpec:
    for t in spec.teeth:
        if t.code == code:
            return t
    raise GenerationError(f"variant needs tooth {code}, not in spec")


def _apply_variants(spec: JawSpec, variants: tuple[str, ...],
                    rng: np.random.Generator) -> None:
    upper = spec.jaw_kind.endswith("upper")
    molar = "6" if spec.jaw_kind.startswith("adult") else "E"
    lateral = "2" if spec.jaw_kind.startswith("adult") else "B"
    if "two_half_molar" in variants:
        _find_tooth(spec, ("UL" if upper else "LR") + molar).groove = 0.45
    if "bl_groove" in variants:
        _find_tooth(spec, ("UR" if upper else "LL") + molar).bl_groove = 0.45
    def _erupt(t: ToothSpec) -> None:
        mesial_arc_sign = -np.sign(t.arc)
        t.arc += mesial_arc_sign * t.md * 0.24
        t.md *= 0.52
        t.height *= 0.72
        t.two_cusps = True
        t.partial = True

    if "erupting_molar" in variants:
        _erupt(_find_tooth(spec, ("UR" if upper else "LL") + molar))
    if "second_erupting_molar" in variants:
        _erupt(_find_tooth(spec, ("UL" if upper else "LR") + molar))
    if "crowding" in variants:
        t = _find_tooth(spec, ("UL" if upper else "LR") + lateral)
        t.v_offset -= 1.6
    if "noisy_cap" in variants:
        code = ("UR5" if upper else "LL5") \
            if spec.jaw_kind.startswith("adult") else \
            ("URD" if upper else "LLD")
        _find_tooth(spec, code).noise = 0.28
    if "cheek_fragment" in variants:
        # Placed after the domain is known; store a marker resolved in
        # generate().  Height keeps its peak inside the 6 mm band.
        spec.features.append(FeatureSpec(kind="bump", params={
            "cx": None, "cy": None, "radius": 5.0, "height": 5.5,
            "q": 1.3, "edge": "left_back"}))


def _domain(spec: JawSpec):
    """Bounding rectangle of the dentition plus flat margin.

    The margin is wider on the incisor side: scans run over the anterior
    vestibule, so a shelf of gum shows in front of the arch.  The shelf
    also centres the row of bin tops used by vertical refinement on the
    dentition, which keeps the fitted occlusal line level.
    """
    lo = np.array([np.inf, np.inf])
    hi = np.array([-np.inf, -np.inf])
    for tooth in spec.teeth:
        centre, _, _ = _tooth_frame(spec, tooth)
        r = max(tooth.md, tooth.bl) / 2.0
        lo = np.minimum(lo, centre - r)
        hi = np.maximum(hi, centre + r)
    lo -= _MARGIN
    hi += _MARGIN
    hi[1] += _FRONT_APRON
    # PCA must see width (x) as the strongest spread.
    width, depth = hi[0] - lo[0], hi[1] - lo[1]
    if width < depth + _MIN_WIDTH_SURPLUS:
        pad = (depth + _MIN_WIDTH_SURPLUS - width) / 2.0
        lo[0] -= pad
        hi[0] += pad
    return lo, hi


def generate_synthetic_jaw(spec: JawSpec) -> tuple[TriangleSoup, GroundTruth]:
    """Build the mesh and its ground truth for ``spec``."""
    if not spec.teeth:
        raise GenerationError("spec has no teeth")
    rng = np.random.default_rng(spec.seed + 104729)
    lo, hi = _domain(spec)
    for feat in spec.features:
        if feat.params.get("cx") is None:     # edge-anchored feature
            feat.params["cx"] = float(lo[0] + 1.0)
            feat.params["cy"] = float(lo[1] + 10.0)
            feat.params.pop("edge", None)

    g = spec.grid_step
    jx, jy = rng.uniform(0.13, 0.87, size=2) * g
    xs = np.arange(lo[0] + jx, hi[0], g)
    ys = np.arange(lo[1] + jy, hi[1], g)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = _height_field(spec, X, Y, np.random.default_rng(spec.seed + 7))

    nx, ny = xs.size, ys.size
    vid = np.arange(nx * ny).reshape(nx, ny)
    v00 = vid[:-1, :-1].ravel()
    v10 = vid[1:, :-1].ravel()
    v11 = vid[1:, 1:].ravel()
    v01 = vid[:-1, 1:].ravel()
    tri_idx = np.concatenate([
        np.stack([v00, v10, v11], axis=1),
        np.stack([v00, v11, v01], axis=1)])
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    triangles = verts[tri_idx]

    e1 = triangles[:, 1] - triangles[:, 0]
    e2 = triangles[:, 2] - triangles[:, 0]
    normals = np.cross(e1, e2)
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / np.where(norm > 0, norm, 1.0)

    soup = TriangleSoup(triangles=triangles, stored_normals=normals,
                        name=f"synthetic {spec.jaw_kind} seed {spec.seed}")
    gt = _ground_truth(spec, triangles)
    return soup, gt


def _ground_truth(spec: JawSpec, triangles: np.ndarray) -> GroundTruth:
    frame = Frame(right=np.array([1.0, 0.0, 0.0]),
                  forwards=np.array([0.0, 1.0, 0.0]),
                  up=np.array([0.0, 0.0, 1.0]),
                  origin=np.zeros(3))
    curve = ArchCurve(a=spec.arch_a, b=0.0, c=spec.apex_y)
    centroids = triangles.mean(axis=1)
    rng = np.random.default_rng(spec.seed + 7)

    def z_at(px: np.ndarray, py: np.ndarray) -> np.ndarray:
        return _height_field(spec, px, py,
                             np.random.default_rng(spec.seed + 7))

    teeth = []
    for tooth in spec.teeth:
        centre, t, b = _tooth_frame(spec, tooth)
        au, bv = tooth.md / 2.0, tooth.bl / 2.0
        du = (centroids[:, 0] - centre[0]) * t[0] \
            + (centroids[:, 1] - centre[1]) * t[1]
        dv = (centroids[:, 0] - centre[0]) * b[0] \
            + (centroids[:, 1] - centre[1]) * b[1]
        inside = (du / au) ** 2 + (dv / bv) ** 2 <= 1.0
        faces = np.flatnonzero(inside).astype(np.int32)

        mesial_sign = -np.sign(centre[0]) if centre[0] != 0 else 1.0
        half_faces = {}
        if tooth.groove > 0:
            half_faces["mesial"] = faces[du[faces] * mesial_sign > 0]
            half_faces["distal"] = faces[du[faces] * mesial_sign <= 0]

        cusps = []
        landmarks = []
        if tooth.kind == "incisor":
            apex = _refine_apex(z_at, centre)
            landmarks.append({"kind": "incisal_midpoint", "position": apex})
        elif tooth.kind == "canine":
            apex = _refine_apex(z_at, centre)
            landmarks.append({"kind": "canine_tip", "position": apex})
        else:
            layout = _cusp_layout(tooth, mesial_sign)
            apex = None
            buccal_tips = []
            for duc, dvc, frac in layout:
                pos = _refine_apex(
                    z_at, centre + duc * t + dvc * b)
                is_buccal = dvc > 0
                cusps.append({"position": pos, "buccal": is_buccal})
                if apex is None or pos[2] > apex[2]:
                    apex = pos
                if is_buccal:
                    buccal_tips.append((duc * mesial_sign, pos))
            # Expected buccal cusp landmarks, mesial first.
            for _, pos in sorted(buccal_tips, key=lambda e: -e[0]):
                landmarks.append({"kind": "buccal_cusp", "position": pos})
        teeth.append(GtTooth(code=tooth.code, centre_xy=centre, apex=apex,
                             cusps=cusps, faces=faces,
                             half_faces=half_faces,
                             expected_landmarks=landmarks,
                             partial=tooth.partial))
    del rng
    return GroundTruth(jaw_kind=spec.jaw_kind, frame=frame, arch=curve,
                       teeth=teeth, spec=spec)


def _refine_apex(z_at, start_xy: np.ndarray, span: float = 0.6,
                 steps: int = 3) -> np.ndarray:
    """Locate the analytic local maximum near ``start_xy`` by shrinking
    grid search (exact enough for ground truth: final pitch 0.01 mm)."""
    centre = np.asarray(start_xy, dtype=np.float64)
    for _ in range(steps):
        xs = centre[0] + np.linspace(-span, span, 25)
        ys = centre[1] + np.linspace(-span, span, 25)
        GX, GY = np.meshgrid(xs, ys, indexing="ij")
        ZZ = z_at(GX, GY)
        k = np.unravel_index(np.argmax(ZZ), ZZ.shape)
        centre = np.array([GX[k], GY[k]])
        span /= 8.0
    return np.array([centre[0], centre[1],
                     float(z_at(np.array([centre[0]]),
                                np.array([centre[1]]))[0])])


# ---------------------------------------------------------------------------
# serialisable spec for the CLI

def spec_to_json(spec: JawSpec) -> dict:
    return {
        "jaw_kind": spec.jaw_kind,
        "seed": spec.seed,
        "grid_step": spec.grid_step,
    }


def spec_from_json(payload: dict) -> JawSpec:
    """Build a JawSpec from the CLI's JSON description.

    Recognised keys: jaw_kind (required), seed, grid_step, missing,
    variants, include_third_molars, replace_seven_with_eight.
    """
    try:
        jaw_kind = payload["jaw_kind"]
    except KeyError:
        raise GenerationError("synthesis spec needs a 'jaw_kind'") from None
    return build_jaw_spec(
        jaw_kind,
        seed=int(payload.get("seed", 0)),
        grid_step=float(payload.get("grid_step", 0.45)),
        missing=tuple(payload.get("missing", ())),
        variants=tuple(payload.get("variants", ())),
        include_third_molars=bool(payload.get("include_third_molars",
                                              False)),
        replace_seven_with_eight=bool(payload.get(
            "replace_seven_with_eight", False)))


def truth_summary(gt: GroundTruth) -> dict:
    """JSON-ready ground-truth digest written next to synthesised models."""
    return {
        "jaw_kind": gt.jaw_kind,
        "arch": {"a": gt.arch.a, "b": gt.arch.b, "c": gt.arch.c},
        "teeth": [
            {
                "code": t.code,
                "partial": t.partial,
                "centre": [float(t.centre_xy[0]), float(t.centre_xy[1])],
                "apex": [float(c) for c in t.apex],
                "landmarks": [
                    {"kind": lm["kind"],
                     "position": [float(c) for c in lm["position"]]}
                    for lm in t.expected_landmarks
                ],
            }
            for t in gt.teeth
        ],
    }
