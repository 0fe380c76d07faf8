# # An elliptic cylinder
#
# Ellipse `a = 6`, `b = 3` (foci at `c = sqrt(27)`), line current on the major
# axis at 7.5, and 80 sources on the confocal ellipse with `a_aux = 5.2222`.
# The system is dense. The continued scattered field is singular on the confocal
# ellipse `xi = 2 xi0 - xi_fil`, i.e. `a_image ~ 5.289`, so this auxiliary ellipse is
# inside it and the currents zig-zag.

# +
import numpy as np

from mas_lab import elliptic as el

p = el.EllipticProblem(a=6.0, b=3.0, rho_fil=7.5, a_aux=5.2222, N=80, scheme="traditional")
print("b_aux", p.b_aux, " a_image", p.a_image)
sol = el.solve_elliptic(p)
print(el.diagnostics_elliptic(sol, p))
# -

# Along `phi = 90 deg` the total potential still matches the closed form.

s = np.linspace(1, 3, 6)
print(np.c_[s, el.potential_mas_total_elliptic(p, sol, s * p.b, np.pi / 2), el.potential_exact_total_elliptic(p, s * p.b, np.pi / 2)])
print("relative error", el.relative_error_along(p, sol, np.pi / 2, np.linspace(1, 3, 201)))

# Moving the auxiliary ellipse outside the image (a_aux = 5.9) gives smooth currents.

q = p.with_(a_aux=5.9)
for n in (40, 80):
    sq = el.solve_elliptic(q.with_(N=n))
    d = el.diagnostics_elliptic(sq, q.with_(N=n))
    print(n, "zigzag", d.zigzag_fraction, "error", el.relative_error_along(q.with_(N=n), sq, np.pi / 2, np.linspace(1, 3, 41)))

# The expansion coefficients have a closed form and a route through the J integral.

for m in (1, 5, 10):
    print(m, el.coefficient_closed(p, m), el.coefficient_via_J(p, m, route="quadrature"))
