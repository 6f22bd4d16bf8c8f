"""Geometry of the 2-torus T^2 = R^2/Z^2 and trigonometric polynomial fields.

Provides mod-1 reduction, the hyperbolic eigenframe of the cat matrix
[[2,1],[1,1]], orthonormal stable/unstable coordinates, and real-valued
finite Fourier sums with exact term-by-term calculus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SQRT5 = math.sqrt(5.0)

#: Expansion rate of the cat matrix, (3 + sqrt 5)/2.
LAMBDA = (3.0 + SQRT5) / 2.0

#: Contraction rate, (3 - sqrt 5)/2 = 1/LAMBDA.
NU = (3.0 - SQRT5) / 2.0


def reduce_mod1(values):
    """Reduce coordinates into [0, 1).

    Exactly representable integers map to 0.0.  Guards against the
    floating-point artifact where ``np.mod(-tiny, 1.0)`` rounds to 1.0.
    """
    r = np.mod(np.asarray(values, dtype=float), 1.0)
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^2 with coordinates reduced into [0, 1)."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(reduce_mod1(self.x)))
        object.__setattr__(self, "y", float(reduce_mod1(self.y)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class LiftPoint:
    """A point of the universal cover R^2."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def project(p: LiftPoint) -> TorusPoint:
    """Projection R^2 -> T^2, coordinates reduced mod 1 into [0, 1)."""
    return TorusPoint(p.x, p.y)


def lift(p: TorusPoint) -> LiftPoint:
    """Canonical lift of a torus point into the fundamental domain [0, 1)^2."""
    return LiftPoint(p.x, p.y)


def reduced_displacement(points, center) -> np.ndarray:
    """Displacement p - center, wrapped componentwise into [-1/2, 1/2).

    ``points`` has shape (..., 2); ``center`` is a length-2 array-like.
    """
    d = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    return reduce_mod1(d + 0.5) - 0.5


@dataclass(frozen=True)
class FrameCoords:
    """Coordinates (s, u) in the orthonormal stable/unstable frame."""

    s: float
    u: float


@dataclass(frozen=True)
class HyperbolicFrame:
    """Eigenframe of the cat matrix.

    ``lam`` and ``nu`` are the expansion and contraction rates, ``e_u`` and
    ``e_s`` the unit unstable/stable eigenvectors.  Both eigenvectors are
    normalized with positive first coordinate, which makes (e_s, e_u) a
    direct orthonormal frame.
    """

    lam: float
    nu: float
    e_u: tuple[float, float]
    e_s: tuple[float, float]

    def e_u_array(self) -> np.ndarray:
        return np.array(self.e_u)

    def e_s_array(self) -> np.ndarray:
        return np.array(self.e_s)


def _unit(v) -> tuple[float, float]:
    a = np.asarray(v, dtype=float)
    a = a / math.hypot(a[0], a[1])
    return (float(a[0]), float(a[1]))

_E_U = _unit((1.0, (SQRT5 - 1.0) / 2.0))
_E_S = _unit((1.0, (-SQRT5 - 1.0) / 2.0))
_FRAME = HyperbolicFrame(lam=LAMBDA, nu=NU, e_u=_E_U, e_s=_E_S)

# Row i of _TO_FRAME is e_s resp. e_u; the matrix is orthogonal.
_TO_FRAME = np.array([_E_S, _E_U])


def frame() -> HyperbolicFrame:
    """The hyperbolic eigenframe of the cat matrix [[2,1],[1,1]]."""
    return _FRAME


def to_frame(v) -> FrameCoords:
    """Coordinates of a plane vector in the (e_s, e_u) frame."""
    sv, uv = _TO_FRAME @ np.asarray(v, dtype=float)
    return FrameCoords(float(sv), float(uv))


def from_frame(c: FrameCoords) -> np.ndarray:
    """Inverse of :func:`to_frame`."""
    return _TO_FRAME.T @ np.array([c.s, c.u])


def to_frame_array(vectors) -> np.ndarray:
    """Vectorized frame change: (..., 2) xy-vectors to (..., 2) (s, u) pairs."""
    return np.asarray(vectors, dtype=float) @ _TO_FRAME.T


def from_frame_array(coords) -> np.ndarray:
    """Vectorized inverse frame change."""
    return np.asarray(coords, dtype=float) @ _TO_FRAME


class TrigPolyScalar:
    """Real trigonometric polynomial g(x) = sum_m c_m exp(2 pi i m.x) on T^2.

    The coefficient map is finite and Hermitian (c_{-m} = conj(c_m)), so
    evaluation is real.  Differential operators act term by term and are
    exact.
    """

    _HERMITIAN_TOL = 1e-12

    def __init__(self, coefficients: dict[tuple[int, int], complex]):
        clean: dict[tuple[int, int], complex] = {}
        for mode, c in coefficients.items():
            m = (int(mode[0]), int(mode[1]))
            c = complex(c)
            if c == 0:
                continue
            if m in clean:
                raise ConfigError(f"duplicate Fourier mode {m}")
            clean[m] = c
        for m, c in clean.items():
            neg = (-m[0], -m[1])
            partner = clean.get(neg)
            if partner is None:
                raise ConfigError(f"non-Hermitian coefficients: mode {m} has no conjugate partner")
            if abs(partner - c.conjugate()) > self._HERMITIAN_TOL * max(1.0, abs(c)):
                raise ConfigError(f"non-Hermitian coefficients at mode {m}")
        self._coeffs = clean
        if clean:
            self._mode_arr = np.array(sorted(clean), dtype=np.int64)
            self._coef_arr = np.array([clean[tuple(m)] for m in self._mode_arr], dtype=complex)
        else:
            self._mode_arr = np.zeros((0, 2), dtype=np.int64)
            self._coef_arr = np.zeros(0, dtype=complex)

    @classmethod
    def zero(cls) -> "TrigPolyScalar":
        return cls({})

    @classmethod
    def constant(cls, value: float) -> "TrigPolyScalar":
        return cls({(0, 0): complex(value)}) if value != 0 else cls({})

    @classmethod
    def cos_mode(cls, m1: int, m2: int, amplitude: float = 1.0) -> "TrigPolyScalar":
        """amplitude * cos(2 pi (m1 x + m2 y))."""
        a = 0.5 * amplitude
        return cls({(m1, m2): a, (-m1, -m2): a})

    @classmethod
    def sin_mode(cls, m1: int, m2: int, amplitude: float = 1.0) -> "TrigPolyScalar":
        """amplitude * sin(2 pi (m1 x + m2 y))."""
        a = amplitude / 2j
        return cls({(m1, m2): a, (-m1, -m2): a.conjugate()})

    @property
    def coefficients(self) -> dict[tuple[int, int], complex]:
        return dict(self._coeffs)

    @property
    def n_modes(self) -> int:
        return len(self._coeffs)

    def sum_abs_coeffs(self) -> float:
        return float(np.sum(np.abs(self._coef_arr)))

    def eval_complex(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.n_modes == 0:
            return np.zeros(pts.shape[:-1], dtype=complex)
        phases = pts @ self._mode_arr.T.astype(float)
        return np.exp((2j * math.pi) * phases) @ self._coef_arr

    def eval(self, points) -> np.ndarray:
        """Evaluate at (..., 2) points; the imaginary residue must be negligible."""
        vals = self.eval_complex(points)
        scale = max(1.0, self.sum_abs_coeffs())
        residue = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
        assert residue < 1e-13 * scale, f"imaginary residue {residue:g} exceeds tolerance"
        return vals.real

    def partial(self, axis: int) -> "TrigPolyScalar":
        """Exact partial derivative along coordinate ``axis`` (0 = x, 1 = y)."""
        pref = 2j * math.pi
        return TrigPolyScalar({m: pref * m[axis] * c for m, c in self._coeffs.items()})

    def gradient(self) -> "TrigPolyVectorField":
        return TrigPolyVectorField(self.partial(0), self.partial(1))

    def gradient_eval(self, points) -> np.ndarray:
        return self.gradient().eval(points)

    def __add__(self, other: "TrigPolyScalar") -> "TrigPolyScalar":
        merged = dict(self._coeffs)
        for m, c in other._coeffs.items():
            merged[m] = merged.get(m, 0.0) + c
        return TrigPolyScalar(merged)

    def __mul__(self, scalar: float) -> "TrigPolyScalar":
        return TrigPolyScalar({m: scalar * c for m, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"TrigPolyScalar({self._coeffs!r})"


@dataclass(frozen=True)
class TrigPolyVectorField:
    """Vector field on T^2 with trigonometric polynomial components."""

    component_x: TrigPolyScalar
    component_y: TrigPolyScalar

    @classmethod
    def constant(cls, vx: float, vy: float) -> "TrigPolyVectorField":
        return cls(TrigPolyScalar.constant(vx), TrigPolyScalar.constant(vy))

    def eval(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        out = np.empty(pts.shape)
        out[..., 0] = self.component_x.eval(pts)
        out[..., 1] = self.component_y.eval(pts)
        return out

    def divergence(self) -> TrigPolyScalar:
        """Exact divergence; its (0,0) Fourier mode vanishes identically."""
        return self.component_x.partial(0) + self.component_y.partial(1)

    def jacobian_eval(self, points) -> np.ndarray:
        """Jacobian matrices DX at (..., 2) points, shape (..., 2, 2)."""
        pts = np.asarray(points, dtype=float)
        out = np.empty(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = self.component_x.partial(0).eval(pts)
        out[..., 0, 1] = self.component_x.partial(1).eval(pts)
        out[..., 1, 0] = self.component_y.partial(0).eval(pts)
        out[..., 1, 1] = self.component_y.partial(1).eval(pts)
        return out

    def sup_operator_norm(self, grid_n: int = 256) -> float:
        """Max spectral norm of DX over a uniform grid (no safety factor)."""
        xs = np.arange(grid_n) / grid_n
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        jac = self.jacobian_eval(pts)
        # Largest singular value of a 2x2 matrix in closed form.
        frob2 = np.sum(jac * jac, axis=(-2, -1))
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        disc = np.maximum(frob2 * frob2 - 4.0 * det * det, 0.0)
        smax2 = 0.5 * (frob2 + np.sqrt(disc))
        return float(np.sqrt(np.max(smax2)))

    def __add__(self, other: "TrigPolyVectorField") -> "TrigPolyVectorField":
        return TrigPolyVectorField(
            self.component_x + other.component_x,
            self.component_y + other.component_y,
        )


def _format_coeff_lines(poly: TrigPolyScalar) -> list[str]:
    lines = []
    for (m1, m2), c in sorted(poly.coefficients.items()):
        lines.append(f"{m1} {m2} {c.real!r} {c.imag!r}")
    return lines


def _parse_coeff_lines(lines, source: str) -> TrigPolyScalar:
    coeffs: dict[tuple[int, int], complex] = {}
    for lineno, raw in lines:
        parts = raw.split()
        if len(parts) != 4:
            raise ConfigError(f"{source}:{lineno}: expected 'm1 m2 re im', got {raw!r}")
        try:
            m = (int(parts[0]), int(parts[1]))
            c = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        if m in coeffs:
            raise ConfigError(f"{source}:{lineno}: duplicate mode {m}")
        coeffs[m] = c
    return TrigPolyScalar(coeffs)


def save_scalar(poly: TrigPolyScalar, path) -> None:
    """Write a scalar coefficient file, one 'm1 m2 re im' line per mode."""
    with open(path, "w") as fh:
        fh.write("\n".join(_format_coeff_lines(poly)) + "\n")


def save_field(field: TrigPolyVectorField, path) -> None:
    """Write a vector-field coefficient file with [x] and [y] sections."""
    with open(path, "w") as fh:
        fh.write("[x]\n")
        fh.write("\n".join(_format_coeff_lines(field.component_x)))
        fh.write("\n[y]\n")
        fh.write("\n".join(_format_coeff_lines(field.component_y)) + "\n")


def _content_lines(path):
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read coefficient file {path}: {exc}") from exc
    out = []
    for i, line in enumerate(raw, start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            out.append((i, stripped))
    return out


def load_scalar(path) -> TrigPolyScalar:
    """Parse a scalar coefficient file; rejects non-Hermitian inputs."""
    lines = _content_lines(path)
    if any(text.startswith("[") for _, text in lines):
        raise ConfigError(f"{path}: scalar coefficient file must not contain sections")
    return _parse_coeff_lines(lines, str(path))


def load_field(path) -> TrigPolyVectorField:
    """Parse a vector-field coefficient file with [x] and [y] sections."""
    lines = _content_lines(path)
    sections: dict[str, list] = {}
    current = None
    for lineno, text in lines:
        if text.startswith("["):
            name = text.strip("[]").strip().lower()
            if name not in ("x", "y"):
                raise ConfigError(f"{path}:{lineno}: unknown section [{name}]")
            if name in sections:
                raise ConfigError(f"{path}:{lineno}: repeated section [{name}]")
            sections[name] = []
            current = name
        else:
            if current is None:
                raise ConfigError(f"{path}:{lineno}: coefficient line before any [x]/[y] section")
            sections[current].append((lineno, text))
    if set(sections) != {"x", "y"}:
        raise ConfigError(f"{path}: vector-field file needs both [x] and [y] sections")
    return TrigPolyVectorField(
        _parse_coeff_lines(sections["x"], str(path)),
        _parse_coeff_lines(sections["y"], str(path)),
    )
