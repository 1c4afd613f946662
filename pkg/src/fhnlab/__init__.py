"""Numerical laboratory for a spatially extended FitzHugh-Nagumo mean-field model.

Three description levels of the same neuron network live here side by
side: a stochastic particle system, a kinetic phase-space solver, and
the macroscopic mean equations, plus the log-transform diagnostics that
quantify how sharply the kinetic density concentrates around the
macroscopic state as the alignment stiffness 1/epsilon grows.
"""

__version__ = "0.1.0"
