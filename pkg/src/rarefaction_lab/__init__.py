"""Planar 3-rarefaction waves of the compressible Navier-Stokes-Fourier system.

Submodules: :mod:`thermo` (ideal-gas thermodynamics and Riemann invariants),
:mod:`wave` (exact fan and smooth profile), :mod:`grid` (stencils, norms,
field dumps), :mod:`solver` (SSP-RK3 time marching), :mod:`diagnostics`
(perturbation norms, relative entropy, decay fits), :mod:`studies`,
:mod:`config` and :mod:`cli`.
"""

__version__ = "0.1.0"
