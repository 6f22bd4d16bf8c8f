"""The cat map, its hyperbolic frame, and the realized perturbation family.

Run from the repository root:  python3 demos/01_cat_map_and_frame.py
"""

import numpy as np

from srb_response import (
    CAT,
    PerturbationFamily,
    TorusPoint,
    TrigPolyScalar,
    TrigPolyVectorField,
    frame,
)

# The map (x, y) -> (2x + y, x + y) mod 1 and its exact inverse.
p = TorusPoint(0.123, 0.456)
q = CAT.apply(p)
print(f"f({p.x}, {p.y}) = ({q.x}, {q.y})")
back = CAT.inverse_apply(q)
print(f"f^-1 of that  = ({back.x:.15f}, {back.y:.15f})")

# Hyperbolic structure: expansion lambda, contraction nu = 1/lambda, and the
# orthonormal eigenframe.
fr = frame()
print(f"\nlambda = {fr.lam:.12f}")
print(f"nu     = {fr.nu:.12f}   lambda * nu = {fr.lam * fr.nu:.1f}")
print(f"e_u = {fr.e_u}")
print(f"e_s = {fr.e_s}")
A = np.array([[2.0, 1.0], [1.0, 1.0]])
print("eigen residual |A e_u - lambda e_u| =",
      np.max(np.abs(A @ fr.e_u_array() - fr.lam * fr.e_u_array())))

# A short orbit: chaotic wandering over the torus.
print("\norbit of (0.123, 0.456):")
x = p
for k in range(8):
    x = CAT.apply(x)
    print(f"  f^{k+1}: ({x.x:.6f}, {x.y:.6f})")

# The perturbation family f_t = (Id + t X) o f with X = (sin 2 pi x, 0).
X = TrigPolyVectorField(TrigPolyScalar.sin_mode(1, 0), TrigPolyScalar.zero())
fam = PerturbationFamily.from_field(X)
print(f"\nperturbation X = (sin 2 pi x, 0)")
print(f"validity radius for t:  {fam.validity_radius:.6f}")
print(f"f_0.01(p) = {fam.perturbed_apply(0.01, p)}")
print(f"det Df_t at t=0 (volume preserving): {fam.jacobian_det(0.0, p)}")
print(f"det Df_t at t=0.01:                  {fam.jacobian_det(0.01, p):.8f}")
