"""annet: exact computation with perfect planar directed networks in an annulus.

Boundary measurement matrices as rational functions of a spectral
parameter, Poisson bracket verification (universal, induced, trigonometric
R-matrix), Grassmannian-loop path reversal, and a compiler from rational
matrix functions to networks realizing them.
"""

__version__ = "0.1.0"
