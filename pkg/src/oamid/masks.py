"""Complex transmission masks A(rho, phi) for transmissive targets.

Masks are evaluated in the dimensionless radial coordinate
rho = sqrt(2) r / w0 of :mod:`oamid.lg`; physical lengths enter only when a
mask is constructed from a :class:`ModeGeometry`.

Beyond pointwise evaluation, analytic masks expose structural information
that the projection quadrature exploits:

* ``smoothness`` classifies the azimuthal regularity of the radial profile
  R(phi) ("smooth", "kink" for continuous with slope breaks, "jump" for
  discontinuities), which sets the azimuthal sampling density;
* ``radial_integral_table`` returns exact closed-form radial moments for
  masks that are piecewise constant along every ray (strips, sectors);
* ``radial_breakpoints`` / ``phi_breakpoints`` report discontinuity loci so
  the brute-force verification quadrature can split its domains.

Masks are immutable after construction and safe for concurrent evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammainc, gammaln

from oamid.lg import ModeGeometry

SMOOTH = "smooth"
KINK = "kink"
JUMP = "jump"

# Default strip thickness relative to the beam waist.
DEFAULT_STRIP_WIDTH_FACTOR = 0.83

_TWO_PI = 2.0 * np.pi
_PARALLEL_EPS = 1e-14
_BOUNDARY_EPS = 1e-12


def _gamma_segment(s_values, a_sq, b_sq):
    """integral_a^b rho^(s+1) exp(-rho^2) drho for each s, vectorized.

    Equals (Gamma(s/2 + 1) / 2) * (P(s/2+1, b^2) - P(s/2+1, a^2)) with P the
    regularized lower incomplete gamma. a_sq/b_sq broadcast against s_values.
    """
    alpha = np.asarray(s_values, dtype=float) / 2.0 + 1.0
    scale = 0.5 * np.exp(gammaln(alpha))
    hi = gammainc(alpha, np.minimum(b_sq, 1e300))
    lo = gammainc(alpha, np.minimum(a_sq, 1e300))
    return scale * (hi - lo)


class ObjectMask:
    """Base class: complex transmittance A(rho, phi) with |A| <= 1."""

    smoothness = SMOOTH

    def __init__(self, geometry: ModeGeometry, descriptor=None):
        self.geometry = geometry
        self.descriptor = descriptor or {"kind": type(self).__name__}

    def value(self, rho, phi):
        raise NotImplementedError

    def radial_integral_table(self, phi, s_values):
        """Exact integral_0^inf rho^(s+1) e^(-rho^2) A(rho, phi) drho.

        Returns an array of shape (len(phi), len(s_values)), or None when no
        closed form is available and numerical radial quadrature must be used.
        """
        return None

    def radial_breakpoints(self, phi):
        """Radii where A is discontinuous along the ray at scalar angle phi."""
        return np.empty(0)

    def phi_breakpoints(self):
        """Angles in [0, 2pi) where the radial profile loses smoothness."""
        return np.empty(0)


def mask_value(mask: ObjectMask, rho, phi):
    """Evaluate a mask with phi reduced mod 2pi."""
    return mask.value(np.asarray(rho, dtype=float), np.mod(phi, _TWO_PI))


class UniformMask(ObjectMask):
    """Constant transmittance everywhere (t = 1 is the empty aperture)."""

    def __init__(self, geometry, transmittance=1.0):
        if abs(transmittance) > 1 + 1e-12:
            raise ValueError("passive mask requires |t| <= 1")
        super().__init__(geometry, {"kind": "uniform", "transmittance": transmittance})
        self.transmittance = complex(transmittance)

    def value(self, rho, phi):
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        return np.full(rho.shape, self.transmittance)

    def radial_integral_table(self, phi, s_values):
        phi = np.atleast_1d(np.asarray(phi, float))
        base = _gamma_segment(s_values, 0.0, np.inf)
        return self.transmittance * np.broadcast_to(base, (phi.size, np.size(s_values))).copy()


def uniform_mask(geometry, transmittance=1.0):
    return UniformMask(geometry, transmittance)


@dataclass(frozen=True)
class StripSpec:
    """One opaque (or semi-transparent) band, in physical units.

    The band is infinite along its axis: |x . n(angle) - offset| <= width/2,
    where n(angle) is the unit normal of a strip whose axis points along
    ``angle``. ``offset`` displaces the centerline perpendicular to the axis.
    """

    width: float
    angle: float = 0.0
    offset: float = 0.0
    transmittance: complex = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("strip width must be positive")


def standard_strip(geometry: ModeGeometry, angle=0.0, offset=0.0, transmittance=0.0):
    """Strip with the default width 0.83 * w0."""
    return StripSpec(DEFAULT_STRIP_WIDTH_FACTOR * geometry.w0, angle, offset, transmittance)


class StripStack(ObjectMask):
    """Multiplicative composition of band masks; radial structure is exact.

    Internally widths and offsets are stored in rho units. Along any ray each
    band blocks at most one interval, so the radial moments reduce to
    incomplete-gamma differences combined by inclusion-exclusion over bands.
    """

    smoothness = KINK
    MAX_EXACT_STRIPS = 6  # inclusion-exclusion subset count stays <= 63

    def __init__(self, geometry, widths, angles, offsets, transmittances, descriptor=None):
        super().__init__(geometry, descriptor)
        self.widths = np.asarray(widths, dtype=float)
        self.angles = np.asarray(angles, dtype=float)
        self.offsets = np.asarray(offsets, dtype=float)
        self.transmittances = np.asarray(transmittances, dtype=complex)
        if not (self.widths.shape == self.angles.shape == self.offsets.shape == self.transmittances.shape):
            raise ValueError("strip parameter arrays must have matching shapes")
        if self.widths.size == 0 or np.any(self.widths <= 0):
            raise ValueError("need at least one strip with positive width")
        if np.any(np.abs(self.transmittances) > 1 + 1e-12):
            raise ValueError("passive mask requires |t| <= 1")
        if self.widths.size > self.MAX_EXACT_STRIPS:
            raise ValueError(f"at most {self.MAX_EXACT_STRIPS} strips supported")

    def value(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        rho, phi = np.broadcast_arrays(rho, phi)
        u = rho[..., None] * np.sin(phi[..., None] - self.angles)
        inside = np.abs(u - self.offsets) <= self.widths / 2.0
        factors = np.where(inside, self.transmittances, 1.0 + 0.0j)
        return factors.prod(axis=-1)

    def _intervals(self, phi):
        """Blocked radial interval [a, b] per strip per angle; a = b = 0 if empty."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        c = np.sin(phi[:, None] - self.angles)  # (n_phi, n_strips)
        lo_edge = self.offsets - self.widths / 2.0
        hi_edge = self.offsets + self.widths / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            e1 = lo_edge / c
            e2 = hi_edge / c
        a = np.minimum(e1, e2)
        b = np.maximum(e1, e2)
        empty = b <= 0
        a = np.clip(a, 0.0, None)
        parallel = np.abs(c) < _PARALLEL_EPS
        blocked_ray = np.abs(self.offsets) <= self.widths / 2.0
        a = np.where(parallel, 0.0, a)
        b = np.where(parallel, np.where(blocked_ray, np.inf, 0.0), b)
        empty = np.where(parallel, ~blocked_ray, empty)
        a = np.where(empty, 0.0, a)
        b = np.where(empty, 0.0, b)
        return a, b

    def radial_integral_table(self, phi, s_values):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
        a, b = self._intervals(phi)
        n = self.widths.size
        table = np.broadcast_to(
            _gamma_segment(s_values, 0.0, np.inf), (phi.size, s_values.size)
        ).astype(complex).copy()
        # product over bands = sum over subsets S of prod_{i in S} (t_i - 1) on the
        # intersection of the blocked intervals of S
        for bits in range(1, 1 << n):
            members = [i for i in range(n) if bits >> i & 1]
            coeff = np.prod(self.transmittances[members] - 1.0)
            lo = a[:, members].max(axis=1)
            hi = b[:, members].min(axis=1)
            live = hi > lo
            if not np.any(live):
                continue
            seg = _gamma_segment(s_values, lo[live, None] ** 2, hi[live, None] ** 2)
            table[live] += coeff * seg
        return table

    def radial_breakpoints(self, phi):
        a, b = self._intervals(float(phi))
        pts = np.concatenate([a.ravel(), b.ravel()])
        pts = pts[np.isfinite(pts) & (pts > 0)]
        return np.unique(pts)

    def phi_breakpoints(self):
        pts = list(np.mod(self.angles, _TWO_PI)) + list(np.mod(self.angles + np.pi, _TWO_PI))
        n = self.widths.size
        # slope breaks where an edge of strip i meets an edge of strip j
        for i in range(n):
            for j in range(i + 1, n):
                for p in (self.offsets[i] - self.widths[i] / 2, self.offsets[i] + self.widths[i] / 2):
                    for q in (self.offsets[j] - self.widths[j] / 2, self.offsets[j] + self.widths[j] / 2):
                        y = p * np.sin(self.angles[j]) - q * np.sin(self.angles[i])
                        x = p * np.cos(self.angles[j]) - q * np.cos(self.angles[i])
                        if abs(x) < 1e-300 and abs(y) < 1e-300:
                            continue
                        ang = np.arctan2(y, x)
                        pts.append(np.mod(ang, _TWO_PI))
                        pts.append(np.mod(ang + np.pi, _TWO_PI))
        pts = np.sort(np.asarray(pts))
        if pts.size == 0:
            return pts
        keep = np.concatenate([[True], np.diff(pts) > 1e-12])
        return pts[keep]


def make_cross(arms: int, strip: StripSpec, per_arm_offsets=None, geometry: ModeGeometry | None = None):
    """Product of ``arms`` rotated copies of a strip, spaced pi/arms apart.

    Arm i sits at angle strip.angle + i*pi/arms. With zero offsets, n arms
    give a 2n-fold symmetric cross. ``per_arm_offsets`` (physical units, one
    signed perpendicular offset per arm) replaces the strip's own offset;
    alternating signs such as (d, -d, d) build the three-line triangle
    configuration, which is 3-fold symmetric.
    """
    if geometry is None:
        raise ValueError("geometry is required")
    arms = int(arms)
    if arms < 1:
        raise ValueError("arms must be >= 1")
    if per_arm_offsets is None or len(per_arm_offsets) == 0:
        offsets_phys = [strip.offset] * arms
    elif len(per_arm_offsets) == arms:
        offsets_phys = list(per_arm_offsets)
    else:
        raise ValueError("per_arm_offsets must be empty or have one entry per arm")
    widths = [geometry.to_rho(strip.width)] * arms
    angles = [strip.angle + i * np.pi / arms for i in range(arms)]
    offsets = [geometry.to_rho(d) for d in offsets_phys]
    trans = [strip.transmittance] * arms
    descriptor = {
        "kind": "cross",
        "arms": arms,
        "width": strip.width,
        "angle": strip.angle,
        "offsets": offsets_phys,
        "transmittance": strip.transmittance,
    }
    return StripStack(geometry, widths, angles, offsets, trans, descriptor)


class SectorMask(ObjectMask):
    """Angular sector with constant transmittance inside [start, end).

    Radially constant along every ray; azimuthally discontinuous, so the
    profile is of "jump" class. Exactly at a boundary angle the mask reports
    the midpoint value, which keeps equispaced azimuthal sampling accurate
    when the boundaries fall on grid points.
    """

    smoothness = JUMP

    def __init__(self, geometry, start, end, inside=1.0, outside=0.0):
        super().__init__(
            geometry,
            {"kind": "sector", "start": float(start), "end": float(end),
             "inside": inside, "outside": outside},
        )
        self.start = float(np.mod(start, _TWO_PI))
        self.end = float(np.mod(end, _TWO_PI))
        if self.end <= self.start:
            self.end += _TWO_PI
        if max(abs(inside), abs(outside)) > 1 + 1e-12:
            raise ValueError("passive mask requires |t| <= 1")
        self.inside = complex(inside)
        self.outside = complex(outside)

    def _angular_value(self, phi):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        w = np.mod(phi - self.start, _TWO_PI)
        span = self.end - self.start
        val = np.where(w < span, self.inside, self.outside)
        mid = 0.5 * (self.inside + self.outside)
        on_edge = (np.minimum(w, _TWO_PI - w) < _BOUNDARY_EPS) | (np.abs(w - span) < _BOUNDARY_EPS)
        return np.where(on_edge, mid, val)

    def value(self, rho, phi):
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        return self._angular_value(phi.ravel()).reshape(phi.shape)

    def radial_integral_table(self, phi, s_values):
        v = self._angular_value(phi)
        base = _gamma_segment(s_values, 0.0, np.inf)
        return v[:, None] * base[None, :]

    def phi_breakpoints(self):
        return np.unique(np.mod([self.start, self.end], _TWO_PI))


def half_plane(geometry):
    """A = 1 on phi in [0, pi), 0 on the lower half plane."""
    return SectorMask(geometry, 0.0, np.pi, inside=1.0, outside=0.0)


class RotatedMask(ObjectMask):
    """Mask rotated by ``delta``: value(rho, phi) = base(rho, phi - delta)."""

    def __init__(self, base: ObjectMask, delta: float):
        super().__init__(base.geometry, {"kind": "rotated", "delta": float(delta),
                                         "base": base.descriptor})
        self.base = base
        self.delta = float(delta)
        self.smoothness = base.smoothness

    def value(self, rho, phi):
        return self.base.value(rho, np.asarray(phi, dtype=float) - self.delta)

    def radial_integral_table(self, phi, s_values):
        return self.base.radial_integral_table(np.atleast_1d(phi) - self.delta, s_values)

    def radial_breakpoints(self, phi):
        return self.base.radial_breakpoints(float(phi) - self.delta)

    def phi_breakpoints(self):
        pts = self.base.phi_breakpoints()
        return np.sort(np.mod(pts + self.delta, _TWO_PI))


def rotate_mask(mask: ObjectMask, delta: float):
    """Rotate a mask about the optical axis; compositions add their angles."""
    if isinstance(mask, RotatedMask):
        return RotatedMask(mask.base, mask.delta + delta)
    return RotatedMask(mask, delta)


class FourierRingMask(ObjectMask):
    """Smooth real amplitude mask built from Gaussian rings with cosine lobes.

    A = 1/2 + raw / (2 * sum of ring amplitudes), which keeps A in [0, 1]
    without clipping, so the mask stays infinitely smooth in both variables.
    """

    smoothness = SMOOTH

    def __init__(self, geometry, amplitudes, radii, sigmas, harmonics, phases, seed=None):
        super().__init__(geometry, {"kind": "fourier_rings", "seed": seed})
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.radii = np.asarray(radii, dtype=float)
        self.sigmas = np.asarray(sigmas, dtype=float)
        self.harmonics = np.asarray(harmonics, dtype=int)
        self.phases = np.asarray(phases, dtype=float)
        self._norm = 2.0 * self.amplitudes.sum()

    def value(self, rho, phi):
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        raw = np.zeros(rho.shape, dtype=float)
        for a, r0, sg, n, ps in zip(self.amplitudes, self.radii, self.sigmas,
                                    self.harmonics, self.phases):
            raw += a * np.exp(-(((rho - r0) / sg) ** 2)) * np.cos(n * phi + ps)
        return (0.5 + raw / self._norm).astype(complex)


def random_smooth_mask(seed, geometry, n_terms=4, max_harmonic=5):
    """Seeded smooth random mask; low azimuthal bandwidth by construction."""
    rng = np.random.default_rng(seed)
    return FourierRingMask(
        geometry,
        amplitudes=rng.uniform(0.2, 1.0, n_terms),
        radii=rng.uniform(0.3, 2.5, n_terms),
        sigmas=rng.uniform(0.5, 1.5, n_terms),
        harmonics=rng.integers(0, max_harmonic + 1, n_terms),
        phases=rng.uniform(0.0, _TWO_PI, n_terms),
        seed=seed,
    )


class RasterMask(ObjectMask):
    """Pixel-grid mask sampled with bilinear interpolation.

    ``origin`` is the (x, y) pixel coordinate of the optical axis and
    ``pixel_pitch`` the physical size of one pixel. Outside the grid the
    transmittance is ``exterior`` (1 by default: finite occluder in an open
    beam). Discretization error dominates any quadrature subtlety, so the
    mask is treated as azimuthally smooth.
    """

    smoothness = SMOOTH

    def __init__(self, geometry, pixels, pixel_pitch, origin, exterior=1.0, descriptor=None):
        super().__init__(geometry, descriptor or {"kind": "raster"})
        pixels = np.asarray(pixels, dtype=complex)
        if pixels.ndim != 2 or min(pixels.shape) < 2:
            raise ValueError("raster grid must be at least 2x2")
        if pixel_pitch <= 0:
            raise ValueError("pixel_pitch must be positive")
        mag = np.abs(pixels)
        if np.any(mag > 1 + 1e-9):
            raise ValueError("raster transmittance values exceed 1 after normalization")
        self.pixels = pixels
        self.pixel_pitch = float(pixel_pitch)
        self.origin = (float(origin[0]), float(origin[1]))
        self.exterior = complex(exterior)

    def value(self, rho, phi):
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        r = self.geometry.to_physical(rho)
        px = self.origin[0] + r * np.cos(phi) / self.pixel_pitch
        py = self.origin[1] + r * np.sin(phi) / self.pixel_pitch
        h, w = self.pixels.shape
        inside = (px >= 0) & (px <= w - 1) & (py >= 0) & (py <= h - 1)
        x0 = np.clip(np.floor(px).astype(int), 0, w - 2)
        y0 = np.clip(np.floor(py).astype(int), 0, h - 2)
        fx = np.clip(px - x0, 0.0, 1.0)
        fy = np.clip(py - y0, 0.0, 1.0)
        p = self.pixels
        interp = (
            p[y0, x0] * (1 - fx) * (1 - fy)
            + p[y0, x0 + 1] * fx * (1 - fy)
            + p[y0 + 1, x0] * (1 - fx) * fy
            + p[y0 + 1, x0 + 1] * fx * fy
        )
        return np.where(inside, interp, self.exterior)


def _read_pgm(path):
    """Binary (P5) PGM reader; returns values normalized to [0, 1]."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval <= 0 or maxval >= 65536:
        raise ValueError(f"{path}: invalid maxval {maxval}")
    dtype = ">u2" if maxval > 255 else "u1"
    raw = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    if raw.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return raw.reshape(height, width).astype(float) / maxval


def load_raster(path, meta=None, phase_path=None, exterior=1.0, l_max=12):
    """Load a grayscale PGM mask with its JSON sidecar metadata.

    ``meta`` may be a dict with keys pixel_pitch_um, origin_px and w0_um; when
    omitted, ``<path>.json`` is read. Gray levels map linearly to amplitude in
    [0, 1]; an optional second PGM supplies phase in [0, 2pi).
    """
    path = Path(path)
    amp = _read_pgm(path)
    if meta is None:
        sidecar = path.with_suffix(path.suffix + ".json")
        if not sidecar.exists():
            raise FileNotFoundError(f"missing sidecar metadata {sidecar}")
        meta = json.loads(sidecar.read_text())
    try:
        pitch = float(meta["pixel_pitch_um"])
        origin = tuple(meta["origin_px"])
        w0 = float(meta["w0_um"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"raster metadata incomplete: {exc}") from exc
    pixels = amp.astype(complex)
    if phase_path is not None:
        phase = _read_pgm(phase_path)
        if phase.shape != amp.shape:
            raise ValueError("phase raster dimensions do not match amplitude raster")
        pixels = amp * np.exp(2j * np.pi * phase)
    geometry = ModeGeometry(w0=w0, l_max=l_max)
    return RasterMask(geometry, pixels, pitch, origin, exterior=exterior,
                      descriptor={"kind": "raster", "path": str(path)})


def rasterize_mask(mask: ObjectMask, n_pixels: int, extent_rho: float = 4.0):
    """Sample an analytic mask onto a centered square raster (testing aid)."""
    geometry = mask.geometry
    half = geometry.to_physical(extent_rho)
    pitch = 2.0 * half / (n_pixels - 1)
    idx = np.arange(n_pixels)
    x = (idx - (n_pixels - 1) / 2.0) * pitch
    xx, yy = np.meshgrid(x, x)
    r = np.hypot(xx, yy)
    phi = np.mod(np.arctan2(yy, xx), _TWO_PI)
    vals = mask.value(geometry.to_rho(r), phi)
    return RasterMask(geometry, vals, pitch, ((n_pixels - 1) / 2.0, (n_pixels - 1) / 2.0),
                      descriptor={"kind": "rasterized", "base": mask.descriptor})
