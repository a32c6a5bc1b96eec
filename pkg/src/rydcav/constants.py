"""Fourier-convention bookkeeping.

Frequency-domain operators use the symmetric convention
``x(w) = (2 pi)^-1/2 \\int dt e^{i w t} x(t)``, so a stationary mean value
``<x(t)> = c`` becomes ``sqrt(2 pi) c delta(w)``.  Each observable below owns
exactly the factors listed here and nowhere else:

* ``a_mean_first``      time-domain constant ``<a>^(1)``; no 2 pi factor.
* ``a_mean_third``      delta(w) coefficient of ``<a(w)>^(3)``; owns
                        ``(-i sqrt(2 pi) alpha)^3`` and the ``1/(2 pi)`` of
                        the T-matrix vertex.
* ``elastic_weight``    delta(w) delta(w') coefficient; owns ``-2 pi``.
  Rebuilding it from the two mean values needs ``SQRT_2PI * a_mean_first``.
* ``inelastic_density`` delta(w - w') coefficient; no 2 pi factor.
* ``bubble``            owns the ``1/(2 pi)`` of the loop integral.
* Faddeev kernel        owns ``(-i/(2 pi))`` per T-matrix vertex.
* ``three_photon``      owns ``(alpha sqrt(2 pi))^3``.
"""

import math

TWO_PI = 2.0 * math.pi
SQRT_2PI = math.sqrt(TWO_PI)

# Prefactor of the blockade T-matrix continuum integral, 2 pi^2 / 3.
BLOCKADE_PREFACTOR = 2.0 * math.pi ** 2 / 3.0
