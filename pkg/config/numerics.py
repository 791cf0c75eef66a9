# config/numerics.py

"""
Numerical policy for the L²-invariant lab.

These values are HARD-CODED and must not be modified dynamically.
Any change here represents a change in numerical policy, and the
acceptance tolerances in tests/ are calibrated against them.
"""

# ---- Hermitian eigenvalues ----
HERMITIAN_RELATIVE_TOLERANCE = 1e-12

# Retained eigenvalues at or below this are an exact/numeric nullity clash.
ILL_CONDITIONED_EIGENVALUE = 1e-300

# ---- Polynomial roots (Mahler measure) ----
NEWTON_RELATIVE_RESIDUAL = 1e-12
NEWTON_MAX_STEPS = 50

# ---- Torus quadrature ----
TORUS_SKIP_THRESHOLD = 1e-14
TORUS_MAX_SKIPPED_FRACTION = 0.01

# ---- Adaptive quadrature (density toolkit) ----
QUADRATURE_ABS_TOLERANCE = 1e-12
QUADRATURE_REL_TOLERANCE = 1e-12
QUADRATURE_SUBDIVISIONS = 200

# ---- Experiments ----
DEFAULT_TOWER = "pow:2:10"
DEFAULT_MAX_QUOTIENT_SIZE = 4096
DEFAULT_FIELD = "Q"

# ---- Reports ----
REPORT_SIGNIFICANT_DIGITS = 12
REPORT_FLOAT_FORMAT = f"%.{REPORT_SIGNIFICANT_DIGITS}g"

# ---- Known constants ----
LEHMER_COEFFICIENTS = (1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1)  # z^10 .. z^0
LEHMER_MAHLER_MEASURE = 1.17628
