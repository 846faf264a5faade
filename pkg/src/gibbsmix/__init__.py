"""Additive mixtures of a reversible Markov kernel with partition-induced Gibbs kernels."""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .curie_weiss import *  # noqa: F401,F403
from .curie_weiss import __all__ as _cw_all
from .frobenius import *  # noqa: F401,F403
from .frobenius import __all__ as _frob_all
from .kl import *  # noqa: F401,F403
from .kl import __all__ as _kl_all
from .partition_opt import *  # noqa: F401,F403
from .partition_opt import __all__ as _opt_all
from .spectral import *  # noqa: F401,F403
from .spectral import __all__ as _spectral_all

__version__ = "0.1.0"

__all__ = [*_core_all, *_spectral_all, *_frob_all, *_opt_all, *_kl_all, *_cw_all]
