# # A cavity: the potential diverges by a constant
#
# Now the line current (at `rho_fil = 4`) is inside a cavity of radius 5 in a
# permeable medium and the auxiliary sources sit outside, on `rho_aux = 6.5`.
# The image is at `rho_cri = 25 / 4 = 6.25`, so `t = 1.04` and the currents
# oscillate again. Here the mean current times `ln(rho_aux / d_ref)` adds a
# constant to the potential which grows like `t^N`; the field `H` is unaffected.

# +
import numpy as np

from mas_lab import interior as it

p = it.InteriorCircularProblem(rho_cyl=5.0, rho_fil=4.0, rho_aux=6.5, N=59)
print(it.regime(p))
# -

for n in (59, 60, 61):
    q = p.with_(N=n)
    print(f"N={n}  N*I^(0) = {n * it.spectrum_exact_interior(q)[0]:.6f}  divergent part = {it.divergent_part(q):.6f}")

# Two discretisations differ by the difference of their divergent parts.

rep = it.h_field_consistency(p, 59, 61)
print("offset mean     ", rep.offset_mean)
print("divergent diff  ", rep.divergent_diff)
print("offset std      ", rep.offset_std)
print("grad diff / max ", rep.relative_grad_diff)

# The gradient agreement improves quickly with N; what is left at N = 59 comes
# from the aliased modes near m = N/2, which decay like (rho / rho_cri)^(N/2).

for n in (59, 89, 119):
    print(n, it.h_field_consistency(p, n, n + 2).relative_grad_diff)

# Choosing `d_ref = rho_aux` removes the constant altogether.

print(it.divergent_part(p.with_(d_ref=6.5)), p.with_(d_ref=6.5).theoretical_only)
