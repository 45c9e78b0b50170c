"""Fire containment and retainment on Cayley graphs of finitely generated groups."""

from fireretain.groups import (
    Cyclic,
    DirectProduct,
    FreeGroup,
    GroupError,
    Heisenberg,
    WreathProduct,
    ZPowerD,
    construct_group,
    parse_descriptor,
)

__all__ = [
    "Cyclic",
    "DirectProduct",
    "FreeGroup",
    "GroupError",
    "Heisenberg",
    "WreathProduct",
    "ZPowerD",
    "construct_group",
    "parse_descriptor",
]
