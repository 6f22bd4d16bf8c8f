"""The cat map on T^2, its perturbations, and iterated-divergence sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus import TorusPoint, TrigPolyVectorField, reduce_mod1

#: The hyperbolic toral automorphism (x, y) -> (2x + y, x + y).
CAT_MATRIX = np.array([[2, 1], [1, 1]], dtype=np.int64)

#: Its inverse, (x, y) -> (x - y, -x + 2y).
CAT_INVERSE = np.array([[1, -1], [-1, 2]], dtype=np.int64)


def apply_points(points) -> np.ndarray:
    """One forward cat-map step on (..., 2) torus coordinates."""
    pts = np.asarray(points, dtype=float)
    return reduce_mod1(pts @ CAT_MATRIX.T.astype(float))


def inverse_apply_points(points) -> np.ndarray:
    """One backward cat-map step on (..., 2) torus coordinates."""
    pts = np.asarray(points, dtype=float)
    return reduce_mod1(pts @ CAT_INVERSE.T.astype(float))


def iterate_points(points, k: int) -> np.ndarray:
    """k-fold iterate (negative k iterates the inverse), reducing mod 1 each step."""
    pts = reduce_mod1(points)
    step = apply_points if k >= 0 else inverse_apply_points
    for _ in range(abs(int(k))):
        pts = step(pts)
    return pts


@dataclass(frozen=True)
class CatMap:
    """The cat map as integer matrices, with pointwise apply/iterate."""

    matrix: np.ndarray = None
    inverse_matrix: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", CAT_MATRIX.copy())
        object.__setattr__(self, "inverse_matrix", CAT_INVERSE.copy())

    def apply(self, p: TorusPoint) -> TorusPoint:
        q = apply_points(p.as_array())
        return TorusPoint(float(q[0]), float(q[1]))

    def inverse_apply(self, p: TorusPoint) -> TorusPoint:
        q = inverse_apply_points(p.as_array())
        return TorusPoint(float(q[0]), float(q[1]))

    def iterate(self, p: TorusPoint, k: int) -> TorusPoint:
        q = iterate_points(p.as_array(), k)
        return TorusPoint(float(q[0]), float(q[1]))


CAT = CatMap()


@dataclass(frozen=True)
class PerturbationFamily:
    """Realized family f_t(x) = project(F lift(x) + t X(f_0(x))).

    The generator at t = 0 is exactly the field X.  ``validity_radius`` is a
    conservative bound below which every f_t is a diffeomorphism: the map
    Id + tX is invertible on the cover once t sup|DX| < 1, and we keep a
    factor-2 margin plus a 1.1 safety factor on the grid-estimated sup.
    """

    X: TrigPolyVectorField
    validity_radius: float

    @classmethod
    def from_field(cls, X: TrigPolyVectorField, grid_n: int = 256, safety: float = 1.1) -> "PerturbationFamily":
        sup = X.sup_operator_norm(grid_n)
        radius = float("inf") if sup == 0.0 else 1.0 / (2.0 * safety * sup)
        return cls(X=X, validity_radius=radius)

    def _check_t(self, t: float) -> None:
        if not abs(t) < self.validity_radius:
            raise ValueError(
                f"|t| = {abs(t):g} is outside the validity radius {self.validity_radius:g}"
            )

    def perturbed_apply_points(self, t: float, points) -> np.ndarray:
        """One step of f_t on (..., 2) torus coordinates."""
        self._check_t(t)
        image = apply_points(points)
        if t == 0.0:
            return image
        return reduce_mod1(image + t * self.X.eval(image))

    def perturbed_apply(self, t: float, p: TorusPoint) -> TorusPoint:
        q = self.perturbed_apply_points(t, p.as_array())
        return TorusPoint(float(q[0]), float(q[1]))

    def jacobian_det_points(self, t: float, points) -> np.ndarray:
        """det Df_t = det(I + t DX(f_0(p))), since the linear part has det 1."""
        self._check_t(t)
        pts = np.asarray(points, dtype=float)
        if t == 0.0:
            return np.ones(pts.shape[:-1])
        jac = self.X.jacobian_eval(apply_points(pts))
        a = 1.0 + t * jac[..., 0, 0]
        b = t * jac[..., 0, 1]
        c = t * jac[..., 1, 0]
        d = 1.0 + t * jac[..., 1, 1]
        return a * d - b * c

    def jacobian_det(self, t: float, p: TorusPoint) -> float:
        return float(self.jacobian_det_points(t, p.as_array()))


def divergence_of_Xm(family: PerturbationFamily, m: int, p) -> float:
    """Divergence of the generator of t -> f_t^m: sum_{k<m} div X at f^{-k}(p)."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    div = family.X.divergence()
    pts = p.as_array() if isinstance(p, TorusPoint) else np.asarray(p, dtype=float)
    total = 0.0
    current = reduce_mod1(pts)
    for _ in range(m):
        total += float(div.eval(current))
        current = inverse_apply_points(current)
    return total
