"""Numerics for first-order difference equations ``x_{n+1} = G(x_n)``.

Submodules
----------
series        truncated power series, exact or big-float
maps          rational maps and polynomial helpers
linearization conjugation maps, conserved quantities, barrier probes
classifier    Painleve-property test and solvable logistic cases
julia         conformal parametrization of logistic Julia sets
asymptotics   boundary asymptotics near z = 1
borel         Borel-plane solver for the parabolic logistic map
"""
__version__ = "0.1.0"
