"""Disturbance-robust trajectory optimization for floating-base robots.

Plans dynamically consistent trajectories through contact and maximizes the
smallest unrejectable end-effector force (SUF) via an affine-gain
reformulation, cross-validated by a brute-force directional LP oracle.
"""

__version__ = "0.1.0"
