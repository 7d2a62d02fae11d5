"""Full-RNS CKKS kernels and an analytical model of the HEAX accelerator."""
from .modarith import Modulus, barrett_reduce, gen_ntt_primes, mul_red, precompute_shoup  # noqa: F401
from .ntt import NttTable, ntt_forward, ntt_inverse, ntt_table  # noqa: F401

__version__ = "0.1.0"
