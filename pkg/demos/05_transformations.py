"""Modular transformations of vector-valued Nahm sums.

The two Rogers-Ramanujan functions, multiplied by q^(-1/60) and q^(11/60),
form a vector that T multiplies by roots of unity and S maps by a fixed 2x2
matrix.  We check this numerically for every bundled preset.
"""
from nahmsums.transforms import PRESETS, verify_preset

for name in PRESETS:
    rep = verify_preset(name, (0.8, 1.0, 1.3), 40)
    print(f"{name:9s} T consistent: {rep['T_ok']}   max S error: {rep['max_error']}")
