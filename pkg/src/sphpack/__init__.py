"""sphpack: packings of congruent regular spherical polygons on S^2,
with certified lower bounds via Riemannian augmented-Lagrangian optimization
and theta-prime upper bounds via harmonic analysis on SO(3), trigonometric
sums of squares, and semidefinite programming."""

__version__ = "0.1.0"
