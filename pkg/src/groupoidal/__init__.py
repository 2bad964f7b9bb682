"""Finite groupoids, their convolution algebras, states and independence checks."""
from .algebra import (
    AlgebraElement,
    adjoint,
    convolve,
    delta,
    embed,
    fundamental_representation,
    gns_representation,
    left_regular_representation,
)
from .core import (
    Groupoid,
    GroupoidError,
    Outcome,
    Transition,
    make_groupoid,
    pair_groupoid,
    validate,
)
from .kernels import BACKEND
from .products import FreeProduct, FreeProductSpec, direct_product
from .qmeasure import Event, arrival_event, decoherence, interference, quantum_measure
from .states import State, check_positivity, restrict

__version__ = "0.1.0"
