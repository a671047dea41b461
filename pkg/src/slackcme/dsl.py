"""Plain-text reaction network format.

One statement per line, ``#`` starts a comment::

    0 <-> X @ 1.0, 2.0      # reversible, forward then backward rate
    2X1 + X2 -> X3 @ 0.5    # irreversible
    X3 -> 0 @ 1e-2

A complex is ``0`` (empty) or ``+``-separated terms with an optional
integer coefficient.  Species are ordered by first appearance; complexes
are deduplicated by their stoichiometric vector.
"""

from __future__ import annotations

import re

from .network import Complex, Reaction, ReactionNetwork

__all__ = ["parse_network", "format_network", "DslError"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_COEFF = re.compile(r"\d+")
_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class DslError(ValueError):
    """Syntax or semantic error in the network text, with position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)


class _LineScanner:
    def __init__(self, text, lineno):
        self.text = text
        self.lineno = lineno
        self.pos = 0

    def error(self, message):
        raise DslError(message, self.lineno, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def take(self, literal):
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal, what):
        if not self.take(literal):
            self.error(f"expected {what}")

    def match(self, pattern):
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m


def _parse_complex(sc: _LineScanner) -> dict[str, int]:
    sc.skip_ws()
    if sc.take("0"):
        return {}
    counts: dict[str, int] = {}
    while True:
        coeff = 1
        m = sc.match(_COEFF)
        if m:
            coeff = int(m.group())
        m = sc.match(_IDENT)
        if not m:
            sc.error("expected species name")
        counts[m.group()] = counts.get(m.group(), 0) + coeff
        if not sc.take("+"):
            return counts


def _parse_rate(sc: _LineScanner) -> float:
    m = sc.match(_NUMBER)
    if not m:
        sc.error("expected rate constant")
    value = float(m.group())
    if not value > 0:
        sc.error(f"rate constant must be positive, got {m.group()}")
    return value


def parse_network(text: str) -> ReactionNetwork:
    """Parse the text format into a ReactionNetwork.

    Raises DslError with line/column on bad syntax, non-positive rates,
    self-loop reactions, duplicate reactions or an empty reaction list.
    """
    species_order: list[str] = []
    seen_species: set[str] = set()
    statements = []  # (reactant counts, product counts, rate, lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        sc = _LineScanner(line, lineno)
        lhs = _parse_complex(sc)
        reversible = sc.take("<->")
        if not reversible:
            sc.expect("->", "'->' or '<->'")
        rhs = _parse_complex(sc)
        sc.expect("@", "'@' before the rate")
        fwd = _parse_rate(sc)
        bwd = None
        if reversible:
            sc.expect(",", "',' and a backward rate")
            bwd = _parse_rate(sc)
        if not sc.at_end():
            sc.error("unexpected trailing input")
        if lhs == rhs:
            raise DslError("reactant equals product", lineno, 1)
        for counts in (lhs, rhs):
            for name in counts:
                if name not in seen_species:
                    seen_species.add(name)
                    species_order.append(name)
        statements.append((lhs, rhs, fwd, lineno))
        if reversible:
            statements.append((rhs, lhs, bwd, lineno))

    if not statements:
        raise DslError("no reactions")

    d = len(species_order)
    pos = {name: i for i, name in enumerate(species_order)}

    def vec(counts):
        v = [0] * d
        for name, k in counts.items():
            v[pos[name]] = k
        return tuple(v)

    complexes: list[tuple[int, ...]] = []
    cindex: dict[tuple[int, ...], int] = {}
    reactions = []
    seen_rxn = set()
    for lhs, rhs, rate, lineno in statements:
        pair = []
        for counts in (lhs, rhs):
            v = vec(counts)
            if v not in cindex:
                cindex[v] = len(complexes)
                complexes.append(v)
            pair.append(cindex[v])
        if (pair[0], pair[1]) in seen_rxn:
            raise DslError("duplicate reaction", lineno, 1)
        seen_rxn.add((pair[0], pair[1]))
        reactions.append(Reaction(pair[0], pair[1], rate))

    return ReactionNetwork(species_order, [Complex(c) for c in complexes], reactions)


def format_network(net: ReactionNetwork) -> str:
    """Emit the network back as text; parse(format(net)) is isomorphic."""
    lines = []
    for r in net.reactions:
        lines.append(
            f"{net.format_complex(r.reactant)} -> {net.format_complex(r.product)}"
            f" @ {r.rate_constant!r}"
        )
    return "\n".join(lines) + "\n"
