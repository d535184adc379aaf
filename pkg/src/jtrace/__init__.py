"""Exact and numerical trace functions of lattice and Heisenberg vertex algebra modules."""
from .eisenstein import TwistSpec, bernoulli, classical_E, twisted_E, twisted_E_eval, twisted_E_qexp
from .errors import (ConditionHError, DomainError, InputError, JTraceError, LatticeError,
                     VerificationError)
from .lattice import CosetSystem, EvenLattice, HSpec, discriminant_cosets, short_vectors, theta_series
from .qseries import MultiSeries, SamplePoint, TruncationPolicy, eta, eta_inverse_pow
from .recursion import (Insertion, ReducedForm, TraceRequest, reduce_charged, reduce_full,
                        reduce_h_minus1, reduce_L_minus2, reduce_neg_mode, two_point_reduce)
from .voa.family import ModuleFamily, assemble_trace, delta_module_shift, family_trace_value, phi_trace
from .voa.heisenberg import HeisenbergModule, SquareMonomial, heisenberg_trace
from .weierstrass import twisted_P, twisted_P_direct, twisted_P_series

__version__ = "0.1.0"
