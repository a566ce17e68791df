"""
Daubechies tables and coefficient fields
========================================

Build a Daubechies family, check that it behaves like an orthonormal
multiresolution, then look at the sparse coefficient field of a point mass.
"""

import numpy as np

from manifold_ipm import DiscreteMeasure, analyze_measure, build_family
from manifold_ipm.wavelets import (
    filter_residuals,
    gram_errors,
    partition_of_unity_error,
    two_scale_error,
)

# Four vanishing moments, tables on a grid of spacing 2^-12.
family = build_family(4, cascade_depth=12)
print("filter taps:", np.round(family.low_pass, 6))
print("filter residuals:", filter_residuals(family.low_pass))
print("partition of unity error:", partition_of_unity_error(family))
print("two-scale error:", two_scale_error(family))
print("worst Gram error over 50 pairs:", gram_errors(family, 50).max())

# A unit mass at a point has coefficient psi_jlw(x0) at every index.
point = DiscreteMeasure([[0.3, -0.2]], [1.0])
field = analyze_measure(point, family, J=4)
for j in range(5):
    keys, vals = field.level(j)
    print(f"level {j}: {len(vals):4d} nonzero coefficients, "
          f"sum |a| = {np.abs(vals).sum():.3f}")
