"""Bundled example systems used by the demos, configs and test suite.

Each entry pairs a network text with the conservation vector and initial
state the experiments use.  Rates without an authoritative source are
pinned here and documented in the matching config files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsl import parse_network
from .network import ReactionNetwork

__all__ = ["Model", "BUNDLED", "birth_death", "simple_exchange", "three_node_cycle",
           "dimerization", "lotka_volterra", "toggle_switch"]


@dataclass(frozen=True)
class Model:
    name: str
    text: str
    w: tuple  # default conservation vector(s), one row per tuple entry
    x0: tuple
    desk_N: int  # small bound for quick cross-validation runs

    def network(self) -> ReactionNetwork:
        return parse_network(self.text)


# Birth-death: constant influx 1, per-copy decay 2.
birth_death = Model(
    name="birth_death",
    text="0 <-> X @ 1.0, 2.0\n",
    w=((1,),),
    x0=(0,),
    desk_N=6,
)

# Single-species exchange with influx 2 and unit decay; the deterministic
# steady state is 2, so the stationary law is Poisson(2) truncated.
simple_exchange = Model(
    name="simple_exchange",
    text="X -> 0 @ 1.0\n0 -> X @ 2.0\n",
    w=((1,),),
    x0=(0,),
    desk_N=8,
)

# Three-complex cycle with a chord; weakly reversible, deficiency zero.
three_node_cycle = Model(
    name="three_node_cycle",
    text="""\
0 <-> A @ 1.0, 1.0
A <-> B @ 1.0, 1.0
0 -> B @ 1.0
""",
    w=((2, 1),),
    x0=(5, 5),
    desk_N=20,
)

# Dimerization under fast monomer production.  Only the production and
# dimerization reactions are fixed by the source system; the rates here
# (and the degradation/undimerization reactions) are pinned so the chain
# is ergodic and the first-passage target is almost surely reached.
dimerization = Model(
    name="dimerization",
    text="""\
0 -> X1 @ 6.0
X1 -> 0 @ 1.0
2X1 -> X2 @ 0.1
X2 -> 2X1 @ 2.0
""",
    w=((1, 2),),
    x0=(0, 0),
    desk_N=16,
)

# Predator-prey with migration; A is the prey, B the predator.
lotka_volterra = Model(
    name="lotka_volterra",
    text="""\
0 -> A @ 0.2
A -> 0 @ 0.6
A -> 2A @ 0.2
B -> 0 @ 0.1
0 -> B @ 0.1
A + B -> 2B @ 0.2
""",
    w=((1, 1),),
    x0=(3, 3),
    desk_N=12,
)

# Mutually repressing protein pair; one copy of each gene, whose occupied
# state sequesters one repressor molecule.  Proteins are fast (synthesis
# 2000 while the gene is free, degradation 100 per copy) and the promoters
# slow (binding 10 per repressor copy, unbinding 0.1), which makes the
# switch rarely leave the low-protein region.  Species order:
# X, Z, DX0, DZ0, DX1, DZ1.
toggle_switch = Model(
    name="toggle_switch",
    text="""\
X -> 0 @ 100.0
Z -> 0 @ 100.0
DX0 -> X + DX0 @ 2000.0
DZ0 -> Z + DZ0 @ 2000.0
Z + DX0 -> DX1 @ 10.0
DX1 -> Z + DX0 @ 0.1
X + DZ0 -> DZ1 @ 10.0
DZ1 -> X + DZ0 @ 0.1
""",
    w=((1, 1, 0, 0, 0, 0),),
    x0=(0, 0, 1, 1, 0, 0),
    desk_N=6,
)

BUNDLED: dict[str, Model] = {
    m.name: m
    for m in [birth_death, simple_exchange, three_node_cycle, dimerization,
              lotka_volterra, toggle_switch]
}
