"""
Comparing two smoothness levels on an oscillating circle
========================================================

The circle with radius ``1 + (2 pi n)^-(beta+1) sin(2 pi n t)`` is pushed
radially onto the unit circle.  As ``n`` grows both dual distances shrink;
plotting one against the other on log axes gives a line whose slope is the
interpolation exponent ``(beta+gamma)/(beta+eta)``.
"""

from manifold_ipm import ExperimentSpec, fit_exponent, predicted_exponent, run_family

for beta in (0.0, 1.0):
    spec = ExperimentSpec(
        "perturbed_circle", (4, 8, 16, 32), ((1.0, 2.0),), beta=beta, J=10, nodes=512
    )
    rows = run_family(spec)
    print(f"\nbeta = {beta}")
    print("   n     d_1         d_2")
    for r in rows:
        print(f"{r.index:4d}  {r.d_gamma:.5e}  {r.d_eta:.5e}")
    fit = fit_exponent(rows)
    print(f"fitted slope {fit.slope:.3f}, predicted {predicted_exponent(beta, 1, 2):.3f}, "
          f"r^2 {fit.r_squared:.4f}")

# The dilated circle probes the regime below Lipschitz smoothness.
spec = ExperimentSpec("circle_radius", (0.025, 0.05, 0.1, 0.2), ((0.5, 1.0),))
fit = fit_exponent(run_family(spec))
print(f"\ncircle radius family: slope {fit.slope:.3f}, predicted 0.5")
