"""Spreading speeds of KPP fronts in shifting environments.

Three routes to the same number: closed-form regime formulas, flux-limited
Hamilton-Jacobi solutions (explicit and on a grid), and direct simulation of
the reaction-diffusion equation.
"""

__version__ = "0.1.0"
