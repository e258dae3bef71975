"""One-sided limits of the inverse Fourier transform of a cut-off 1/x.

The transform of (1 - chi0(x))/x is odd with a jump of i at the origin, so the
two one-sided limits straddle zero at -i/2 and +i/2.
"""
from cylstokes.fourier_jump import pv_inverse_ft, residue_integrals

for n in (2**14, 2**17, 2**20):
    rep = pv_inverse_ft(n_samples=n)
    print(f"n={n:8d}  left={rep.left_limit:.6f}  right={rep.right_limit:.6f}  "
          f"jump={rep.jump:.6f}  extrapolation error ~{rep.extrapolation_error_estimate:.1e}")

print("\nrational integrals, quadrature vs closed form (a = 1):")
for name, (quad, exact) in residue_integrals(1.0).items():
    print(f"  {name:12s} {quad: .12f}  {exact: .12f}  diff {abs(quad - exact):.1e}")
