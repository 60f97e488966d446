"""cholq: mean-field models of chirally doped nematic liquid crystals.

The package covers four layers that build on each other:

* tensor algebra and the maximum-entropy singular potential
  (:mod:`cholq.qtensor`, :mod:`cholq.entropy`);
* homogeneous two-species thermodynamics: order parameters, the
  helical-twisting-power law, and phase maps (:mod:`cholq.bulk`);
* interaction kernels and their moment integrals: mean couplings, elastic
  tensors, chiral strength, Frank constants (:mod:`cholq.kernels`);
* the nonlocal energy of host + dopant on a periodic box, its gradient and
  minimization, and the local elastic energy recovered in the fine-scale
  limit (:mod:`cholq.torus`, :mod:`cholq.nonlocal_energy`,
  :mod:`cholq.oflimit`).

``cholq.cli`` exposes the whole stack as a command-line tool.
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401
