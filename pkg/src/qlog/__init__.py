"""qlog: the quantum logarithm and its Borel-Wolff-Denjoy analysis toolkit.

Submodules
----------
numbers    exact continued fractions, arithmetic functions, roots of unity
lagrange   quadratic-form values and one-sided Lagrange spectral constants
domains    small-divisor domain geometry (approximation functions, compacts)
series     power-series kernel: Hadamard products, fundamental solution, BWD sums
borel      Borel-Laplace calculus, Gevrey/Carleman diagnostics, Pade approximants
resonance  asymptotics, Borel transform and resummation at roots of unity
quadpoint  two-strip Borel transforms at quadratic irrationals
gammel     the number-theoretic series continuation experiment
cli        command-line front end
"""

__version__ = "0.1.0"
