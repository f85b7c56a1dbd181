"""Point-mass spacecraft mass-property model.

The spacecraft is described as a catalog of point masses at positions given
in centimeters in the structure frame, plus one movable "regolith" component
confined to a payload chamber box.  Mass properties derive from first
principles:

* center of gravity ``r_g = sum(m_i r_i) / sum(m_i)``,
* inertia about the CG assembled by extracting the coefficients of the
  angular-momentum map ``H(omega) = sum_i r'_i x m_i (omega x r'_i)`` over the
  recentred positions ``r'_i = r_i - r_g`` (columns of J are ``H`` evaluated
  at the three basis rates, which is exact because ``H`` is linear).

Positions stay in centimeters at the catalog boundary and convert to SI
meters inside the inertia assembly, so the returned tensors are kg*m^2.

A catalog whose masses are collinear (the bundled stack with the regolith
stowed on the z axis is one) has a singular inertia tensor about that line.
That is reported -- via the ``degenerate`` flag and a
:class:`DegenerateCatalogWarning` -- rather than silently accepted; closed
loop scenarios condition the tensor with :func:`apply_inertia_floor` before
propagating.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .quatmath import Vec3

__all__ = [
    "MassComponent",
    "ChamberBounds",
    "MassCatalog",
    "MassProperties",
    "CornerEnvelope",
    "CatalogError",
    "DegenerateCatalogWarning",
    "compute_cg",
    "recentre",
    "inertia_tensor",
    "mass_properties",
    "corner_envelope",
    "sample_regolith",
    "apply_inertia_floor",
    "artificial_gravity",
    "load_catalog",
    "bundled_catalog",
    "CM_TO_M",
]

CM_TO_M = 0.01

# Eigenvalues below this fraction of the largest are treated as zero when
# deciding whether a catalog is degenerate (collinear point masses).
_DEGENERATE_REL_TOL = 1e-9


class CatalogError(ValueError):
    """A mass catalog file or structure is invalid."""


class DegenerateCatalogWarning(UserWarning):
    """All catalog mass is collinear; inertia is singular about that line."""


@dataclass(frozen=True, slots=True)
class MassComponent:
    name: str
    mass_kg: float
    position_cm: Vec3

    def __post_init__(self) -> None:
        if not self.name:
            raise CatalogError("component name must be non-empty")
        if not (self.mass_kg > 0.0):
            raise CatalogError(f"{self.name}: mass must be > 0, got {self.mass_kg}")


@dataclass(frozen=True, slots=True)
class ChamberBounds:
    """Axis-aligned payload chamber box, centimeters in the structure frame."""

    x: tuple[float, float]
    y: tuple[float, float]
    z: tuple[float, float]

    def __post_init__(self) -> None:
        for axis in ("x", "y", "z"):
            lo, hi = getattr(self, axis)
            if not (lo < hi):
                raise CatalogError(f"chamber {axis} bounds must satisfy min < max, got {(lo, hi)}")

    def contains(self, p: Vec3) -> bool:
        return (self.x[0] <= p[0] <= self.x[1]
                and self.y[0] <= p[1] <= self.y[1]
                and self.z[0] <= p[2] <= self.z[1])

    def corners(self) -> tuple[Vec3, ...]:
        return tuple(
            Vec3(cx, cy, cz)
            for cx in self.x for cy in self.y for cz in self.z
        )


DEFAULT_CHAMBER = ChamberBounds(x=(-4.0, 4.0), y=(-4.0, 4.0), z=(0.0, 18.0))


@dataclass(frozen=True, slots=True)
class MassCatalog:
    """Fixed components plus at most one movable regolith component."""

    components: tuple[MassComponent, ...]
    regolith: MassComponent | None = None
    chamber: ChamberBounds = DEFAULT_CHAMBER
    name: str = "catalog"

    def __post_init__(self) -> None:
        if not self.components:
            raise CatalogError("catalog needs at least one fixed component")
        names = [c.name for c in self.components]
        if self.regolith is not None:
            names.append(self.regolith.name)
        if len(set(names)) != len(names):
            raise CatalogError(f"component names must be unique, got {names}")

    @property
    def all_components(self) -> tuple[MassComponent, ...]:
        if self.regolith is None:
            return self.components
        return self.components + (self.regolith,)

    @property
    def total_mass_kg(self) -> float:
        return sum(c.mass_kg for c in self.all_components)

    def with_regolith_at(self, position_cm: Vec3) -> "MassCatalog":
        if self.regolith is None:
            raise CatalogError(f"{self.name} has no movable regolith component")
        return replace(self, regolith=replace(self.regolith, position_cm=Vec3(*position_cm)))


def compute_cg(catalog: MassCatalog) -> Vec3:
    """Mass-weighted center of gravity in catalog centimeters."""
    mx = my = mz = m = 0.0
    for c in catalog.all_components:
        m += c.mass_kg
        mx += c.mass_kg * c.position_cm[0]
        my += c.mass_kg * c.position_cm[1]
        mz += c.mass_kg * c.position_cm[2]
    return Vec3(mx / m, my / m, mz / m)


def recentre(catalog: MassCatalog, r_g: Vec3) -> list[Vec3]:
    """Positions shifted so the CG is the origin (still centimeters)."""
    return [
        Vec3(c.position_cm[0] - r_g[0], c.position_cm[1] - r_g[1], c.position_cm[2] - r_g[2])
        for c in catalog.all_components
    ]


def _point_mass_inertia_columns(masses: np.ndarray, positions_m: np.ndarray) -> np.ndarray:
    """Assemble J column-by-column from the angular-momentum map.

    Column j is ``H(e_j) = sum_i r_i x m_i (e_j x r_i)``, i.e. the coefficient
    of ``omega_j`` in each component of H.
    """
    J = np.empty((3, 3))
    for j, e in enumerate(np.eye(3)):
        h = np.zeros(3)
        for m, r in zip(masses, positions_m):
            h += np.cross(r, m * np.cross(e, r))
        J[:, j] = h
    return J


def inertia_tensor(catalog: MassCatalog) -> np.ndarray:
    """Inertia tensor about the CG, kg*m^2 (possibly singular -- see module doc)."""
    r_g = compute_cg(catalog)
    rel = np.array(recentre(catalog, r_g)) * CM_TO_M
    masses = np.array([c.mass_kg for c in catalog.all_components])
    return _point_mass_inertia_columns(masses, rel)


@dataclass(frozen=True, slots=True)
class MassProperties:
    total_mass_kg: float
    cg_cm: Vec3
    inertia_kgm2: np.ndarray
    degenerate: bool


def mass_properties(catalog: MassCatalog, warn_degenerate: bool = True) -> MassProperties:
    """Total mass, CG, and inertia; flags (and warns on) degenerate catalogs."""
    cg = compute_cg(catalog)
    J = inertia_tensor(catalog)
    eig = np.linalg.eigvalsh(0.5 * (J + J.T))
    degenerate = bool(eig[0] <= _DEGENERATE_REL_TOL * max(eig[-1], 0.0))
    if degenerate and warn_degenerate:
        warnings.warn(
            f"{catalog.name}: all mass is collinear; inertia is singular about "
            "that axis and cannot drive three-axis dynamics without conditioning",
            DegenerateCatalogWarning,
            stacklevel=2,
        )
    return MassProperties(catalog.total_mass_kg, cg, J, degenerate)


@dataclass(frozen=True, slots=True)
class CornerEnvelope:
    """Elementwise CG/inertia extremes over the 8 chamber-corner placements.

    CG is linear in the regolith position, so its bounds hold for any interior
    placement.  Diagonal inertia entries are convex in the regolith position:
    the corner sweep bounds their maximum, but their minimum can fall inside
    the chamber, so ``j_min`` is a corner-sweep statistic, not a global bound.
    """

    cg_min_cm: Vec3
    cg_max_cm: Vec3
    j_min_kgm2: np.ndarray
    j_max_kgm2: np.ndarray
    corners: tuple[tuple[Vec3, MassProperties], ...]


def corner_envelope(catalog: MassCatalog, chamber: ChamberBounds | None = None) -> CornerEnvelope:
    chamber = chamber or catalog.chamber
    results = []
    for corner in chamber.corners():
        props = mass_properties(catalog.with_regolith_at(corner), warn_degenerate=False)
        results.append((corner, props))
    cgs = np.array([p.cg_cm for _, p in results])
    js = np.array([p.inertia_kgm2 for _, p in results])
    return CornerEnvelope(
        cg_min_cm=Vec3(*cgs.min(axis=0)),
        cg_max_cm=Vec3(*cgs.max(axis=0)),
        j_min_kgm2=js.min(axis=0),
        j_max_kgm2=js.max(axis=0),
        corners=tuple(results),
    )


def sample_regolith(chamber: ChamberBounds, seed: int) -> Vec3:
    """Uniform random placement inside the chamber, deterministic per seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return Vec3(
        float(rng.uniform(*chamber.x)),
        float(rng.uniform(*chamber.y)),
        float(rng.uniform(*chamber.z)),
    )


def apply_inertia_floor(J: np.ndarray, floor_kgm2: float) -> np.ndarray:
    """Clamp principal moments from below; conditions collinear stacks.

    A line of point masses has zero spin inertia about its own axis, which no
    physical structure does.  Clamping the eigenvalues to a configured floor
    keeps the dynamics well-posed while leaving well-separated moments alone.
    """
    if not (floor_kgm2 > 0.0):
        raise ValueError(f"inertia floor must be > 0, got {floor_kgm2}")
    sym = 0.5 * (J + J.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    clamped = np.maximum(eigvals, floor_kgm2)
    return eigvecs @ np.diag(clamped) @ eigvecs.T


def artificial_gravity(radius_m: float, omega_radps: float) -> float:
    """Centripetal acceleration ``a = r * omega^2`` at radius r from the spin axis."""
    if radius_m < 0.0:
        raise ValueError(f"radius must be >= 0, got {radius_m}")
    return radius_m * omega_radps * omega_radps


# ---------------------------------------------------------------------------
# Catalog files
# ---------------------------------------------------------------------------

def _vec3_from(obj, where: str) -> Vec3:
    if (not isinstance(obj, (list, tuple))) or len(obj) != 3:
        raise CatalogError(f"{where}: expected a 3-element [x, y, z] list, got {obj!r}")
    try:
        return Vec3(float(obj[0]), float(obj[1]), float(obj[2]))
    except (TypeError, ValueError) as exc:
        raise CatalogError(f"{where}: non-numeric entry in {obj!r}") from exc


def _component_from(obj, where: str) -> MassComponent:
    if not isinstance(obj, dict):
        raise CatalogError(f"{where}: expected an object, got {obj!r}")
    for key in ("name", "mass_kg", "position_cm"):
        if key not in obj:
            raise CatalogError(f"{where}: missing required key '{key}'")
    try:
        mass = float(obj["mass_kg"])
    except (TypeError, ValueError) as exc:
        raise CatalogError(f"{where}.mass_kg: expected a number, got {obj['mass_kg']!r}") from exc
    return MassComponent(str(obj["name"]), mass, _vec3_from(obj["position_cm"], f"{where}.position_cm"))


def catalog_from_dict(data: dict, name: str = "catalog") -> MassCatalog:
    if not isinstance(data, dict):
        raise CatalogError("catalog file must contain a JSON object at the top level")
    if "components" not in data:
        raise CatalogError("catalog requires a 'components' section")
    components = tuple(
        _component_from(c, f"components[{i}]") for i, c in enumerate(data["components"])
    )
    regolith = (_component_from(data["regolith"], "regolith")
                if "regolith" in data else None)
    chamber = DEFAULT_CHAMBER
    if "chamber_cm" in data:
        ch = data["chamber_cm"]
        if not isinstance(ch, dict) or set(ch) != {"x", "y", "z"}:
            raise CatalogError("chamber_cm must be an object with 'x', 'y', 'z' ranges")
        def _pair(axis):
            v = ch[axis]
            if not isinstance(v, (list, tuple)) or len(v) != 2:
                raise CatalogError(f"chamber_cm.{axis}: expected [min, max]")
            return (float(v[0]), float(v[1]))
        chamber = ChamberBounds(x=_pair("x"), y=_pair("y"), z=_pair("z"))
    return MassCatalog(components, regolith, chamber, name=str(data.get("name", name)))


def load_catalog(path) -> MassCatalog:
    """Load a mass catalog from a JSON file.

    Raises:
        CatalogError: on malformed JSON or schema violations, with the
            offending key in the message.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CatalogError(f"cannot read catalog file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog file {path} is not valid JSON: {exc}") from exc
    return catalog_from_dict(data, name=str(path))


def bundled_catalog() -> MassCatalog:
    """The flight mass catalog shipped with the package (regolith stowed)."""
    text = resources.files("adcslab.data").joinpath("aosat1_mass_catalog.json").read_text("utf-8")
    return catalog_from_dict(json.loads(text), name="bundled:aosat1")
