"""Exact construction and verification of wavelet frames over GF(q)((t)).

Submodules: algebra (field arithmetic, translation indexing), harmonic
(character and exact Fourier transforms of step functions), stepfn (step
function cell tables and unitary operators), framekit (masks, refinement,
UEP Gram and frame checks), periodic (folding onto the unit ball and the
periodic tightness checks), runner/cli (reports and command line).
"""

from .algebra import (
    FieldConfig,
    FieldElement,
    LambdaIndex,
    SystemConfig,
    chi,
    chi_xi,
    embed_integer,
    uindex,
)

__version__ = "0.1.0"
