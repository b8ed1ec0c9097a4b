"""Chemical reaction networks with mass-action kinetics.

A Hungarized rail system translates monomial-by-monomial into reactions:
every positive matrix entry becomes a catalytic reaction x_j -> x_j + x_i,
every positive offset a production 0 -> x_i, and each state pair gets the
annihilation x_i+ + x_i- -> 0 at rate gamma.  The mass-action field of the
emitted network reproduces the rail field identically.

The `.crn` text format is line oriented with '#' comments:

    species <name> [<name> ...]
    init <name> <value>
    <reactants> ->{<rate>} <products>      (sides are `0` or `a [+ b]`)

Structured comments `# meta <key> <value>` and `# diff <out> <plus> <minus>`
carry compile metadata and rail-pair annotations; they survive round trips
and are plain comments to any other reader.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InitConflict,
    NegativeInit,
    ParseError,
    UnknownSpecies,
)
from .numerics import as_vector
from .positivation import HungarizedSystem


@dataclass(frozen=True)
class Reaction:
    reactants: tuple[str, ...]
    products: tuple[str, ...]
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "reactants", tuple(self.reactants))
        object.__setattr__(self, "products", tuple(self.products))
        if not self.rate > 0.0:
            raise ValueError("reaction rate must be positive")


@dataclass(frozen=True)
class Crn:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    init: dict[str, float] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)
    diffs: tuple[tuple[str, str, str], ...] = ()  # (out, plus, minus)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "diffs", tuple(self.diffs))
        if len(set(self.species)) != len(self.species):
            raise ValueError("duplicate species names")
        known = set(self.species)
        for r in self.reactions:
            for sp in r.reactants + r.products:
                if sp not in known:
                    raise UnknownSpecies(f"reaction references unknown species {sp!r}")
        for sp, val in self.init.items():
            if sp not in known:
                raise UnknownSpecies(f"init references unknown species {sp!r}")
            if val < 0.0:
                raise NegativeInit(f"init[{sp!r}] = {val} is negative")

    def initial_state(self) -> np.ndarray:
        return np.array([self.init.get(sp, 0.0) for sp in self.species])


EMPTY = Crn((), ())


def emit_crn(hs: HungarizedSystem, init_plus, init_minus) -> Crn:
    """Reactions of a Hungarized system, zero-rate entries omitted.

    Order is deterministic: catalytic reactions row-major over the state and
    coupling matrices, then productions, then annihilations.  Initial
    concentrations cover the state rails only; exogenous input rails are
    expected to get theirs from the network that owns them.
    """
    plus = as_vector(init_plus, "init_plus")
    minus = as_vector(init_minus, "init_minus")
    quad = hs.quad
    n = quad.n
    if plus.shape != (n,) or minus.shape != (n,):
        raise ValueError("initial rails must match the state count")
    if np.any(plus < 0.0) or np.any(minus < 0.0):
        raise NegativeInit("initial rail concentrations must be nonnegative")

    rails = hs.rail_names
    in_rails = hs.input_rail_names
    species = rails + in_rails

    def rail(idx: int, sign: int, exo: bool = False) -> str:
        base = in_rails if exo else rails
        return base[2 * idx + (0 if sign > 0 else 1)]

    reactions: list[Reaction] = []
    cpl = quad.coupling
    q = cpl.q if cpl is not None else 0
    for i in range(n):
        for j in range(n + q):
            if j < n:
                up, um = quad.aplus[i, j], quad.aminus[i, j]
                cat_p, cat_m = rail(j, +1), rail(j, -1)
            else:
                up, um = cpl.cplus[i, j - n], cpl.cminus[i, j - n]
                cat_p, cat_m = rail(j - n, +1, True), rail(j - n, -1, True)
            if up > 0.0:
                reactions.append(Reaction((cat_p,), (cat_p, rail(i, +1)), up))
                reactions.append(Reaction((cat_m,), (cat_m, rail(i, -1)), up))
            if um > 0.0:
                reactions.append(Reaction((cat_m,), (cat_m, rail(i, +1)), um))
                reactions.append(Reaction((cat_p,), (cat_p, rail(i, -1)), um))
    for i in range(n):
        if quad.bplus[i] > 0.0:
            reactions.append(Reaction((), (rail(i, +1),), quad.bplus[i]))
        if quad.bminus[i] > 0.0:
            reactions.append(Reaction((), (rail(i, -1),), quad.bminus[i]))
    if hs.gamma > 0.0:
        for i in range(n):
            reactions.append(Reaction((rail(i, +1), rail(i, -1)), (), hs.gamma))

    init = {}
    for i in range(n):
        if plus[i] != 0.0:
            init[rail(i, +1)] = float(plus[i])
        if minus[i] != 0.0:
            init[rail(i, -1)] = float(minus[i])
    return Crn(species, tuple(reactions), init)


def mass_action_field(net: Crn):
    """Evaluable concentration derivative under the law of mass action."""
    n_sp = len(net.species)
    idx = {sp: i for i, sp in enumerate(net.species)}
    n_rx = len(net.reactions)
    # reactant index pairs; the sentinel slot n_sp reads a constant 1.0
    r1 = np.full(n_rx, n_sp, dtype=int)
    r2 = np.full(n_rx, n_sp, dtype=int)
    rates = np.empty(n_rx)
    stoich = np.zeros((n_sp, n_rx))
    for j, rx in enumerate(net.reactions):
        if len(rx.reactants) > 2:
            raise ValueError("mass action supported up to binary reactions")
        rates[j] = rx.rate
        if len(rx.reactants) >= 1:
            r1[j] = idx[rx.reactants[0]]
        if len(rx.reactants) == 2:
            r2[j] = idx[rx.reactants[1]]
        for sp in rx.reactants:
            stoich[idx[sp], j] -= 1.0
        for sp in rx.products:
            stoich[idx[sp], j] += 1.0

    def rhs(c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape != (n_sp,):
            raise DimensionMismatch(f"expected {n_sp} concentrations")
        c_ext = np.append(c, 1.0)
        flux = rates * c_ext[r1] * c_ext[r2]
        return stoich @ flux

    return rhs


def union(a: Crn, b: Crn) -> Crn:
    """Compose two networks; shared species names identify shared species.

    Initial values are partial maps: a conflict is raised only when both
    networks assign a shared species different values.
    """
    shared = set(a.species) & set(b.species)
    for sp in sorted(shared):
        if sp in a.init and sp in b.init and a.init[sp] != b.init[sp]:
            raise InitConflict(
                f"species {sp!r} has init {a.init[sp]} in one network "
                f"and {b.init[sp]} in the other"
            )
    species = a.species + tuple(sp for sp in b.species if sp not in set(a.species))
    init = dict(a.init)
    for sp, val in b.init.items():
        init.setdefault(sp, val)
    meta = dict(a.meta)
    for key, val in b.meta.items():
        meta.setdefault(key, val)
    diffs = a.diffs + tuple(d for d in b.diffs if d not in set(a.diffs))
    return Crn(species, a.reactions + b.reactions, init, meta, diffs)


def _side_str(names: tuple[str, ...]) -> str:
    return " + ".join(names) if names else "0"


def format_reaction(rx: Reaction) -> str:
    return f"{_side_str(rx.reactants)} ->{{{rx.rate:.17g}}} {_side_str(rx.products)}"


def serialize_crn(net: Crn) -> str:
    """Deterministic text form; parse_crn inverts it losslessly."""
    lines = ["# crn"]
    for key in sorted(net.meta):
        lines.append(f"# meta {key} {net.meta[key]}")
    if net.species:
        lines.append("species " + " ".join(net.species))
    for sp in net.species:
        if sp in net.init:
            lines.append(f"init {sp} {net.init[sp]:.17g}")
    for rx in net.reactions:
        lines.append(format_reaction(rx))
    for out, plus, minus in net.diffs:
        lines.append(f"# diff {out} {plus} {minus}")
    return "\n".join(lines) + "\n"


def _parse_side(text: str, line_no: int) -> tuple[str, ...]:
    text = text.strip()
    if text == "0":
        return ()
    names = [t.strip() for t in text.split("+")]
    if any(not nm for nm in names):
        raise ParseError(line_no, f"malformed reaction side {text!r}")
    return tuple(names)


def parse_crn(text: str) -> Crn:
    species: list[str] = []
    init: dict[str, float] = {}
    reactions: list[Reaction] = []
    meta: dict[str, str] = {}
    diffs: list[tuple[str, str, str]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            toks = line[1:].split()
            if toks[:1] == ["meta"] and len(toks) >= 3:
                meta[toks[1]] = " ".join(toks[2:])
            elif toks[:1] == ["diff"] and len(toks) == 4:
                diffs.append((toks[1], toks[2], toks[3]))
            continue
        if line.startswith("species"):
            for nm in line.split()[1:]:
                if nm in species:
                    raise ParseError(line_no, f"duplicate species {nm!r}")
                species.append(nm)
            continue
        if line.startswith("init"):
            toks = line.split()
            if len(toks) != 3:
                raise ParseError(line_no, "init takes: name value")
            if toks[1] not in species:
                raise ParseError(line_no, f"init of undeclared species {toks[1]!r}")
            try:
                val = float(toks[2])
            except ValueError:
                raise ParseError(line_no, f"bad init value {toks[2]!r}") from None
            if val < 0.0:
                raise ParseError(line_no, f"negative init for {toks[1]!r}")
            init[toks[1]] = val
            continue
        if "->{" in line:
            left, rest = line.split("->{", 1)
            if "}" not in rest:
                raise ParseError(line_no, "missing closing brace on rate")
            rate_str, right = rest.split("}", 1)
            try:
                rate = float(rate_str)
            except ValueError:
                raise ParseError(line_no, f"bad rate {rate_str!r}") from None
            if rate <= 0.0:
                raise ParseError(line_no, "rate must be positive")
            reactants = _parse_side(left, line_no)
            products = _parse_side(right, line_no)
            for sp in reactants + products:
                if sp not in species:
                    raise ParseError(line_no, f"undeclared species {sp!r}")
            reactions.append(Reaction(reactants, products, rate))
            continue
        raise ParseError(line_no, f"unrecognized line {line!r}")

    return Crn(tuple(species), tuple(reactions), init, meta, tuple(diffs))
