"""Netlist parsing and Modified Nodal Analysis compilation.

The netlist grammar is line oriented with '#' comments:

    R|L|C <name> <node1> <node2> <value>
    V|I   <name> <node+> <node-> DC <level>
    V|I   <name> <node+> <node-> FOURIER <alpha> (<beta> <omega> <gamma>)*
    OUT   <node+> [<node->]

Ground is the literal node "0".  Compilation produces the pencil
E dx/dt = A x + B u over x = (non-ground node voltages) ++ (branch currents
of voltage sources and inductors), with one input column per source.

A voltage source with one grounded terminal pins the other node's voltage
to the input directly; the pinned node, its KCL row, and the source current
unknown are then removed from the state.  This keeps textbook circuits at
the same size as their hand-derived systems (the output node and nodes with
capacitors attached are never pinned, so no input derivative can appear).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dae import DaeSystem, InputModel, combine_inputs, fourier_input
from .errors import ParseError, ValidationError

GROUND = "0"


@dataclass(frozen=True)
class Dc:
    level: float


@dataclass(frozen=True)
class Fourier:
    alpha: float
    terms: tuple[tuple[float, float, float], ...]  # (beta, omega, gamma)


Waveform = Dc | Fourier


@dataclass(frozen=True)
class Component:
    kind: str  # R, L, C, V, I
    name: str
    n1: str
    n2: str
    value: float | None  # None for sources


@dataclass(frozen=True)
class Netlist:
    components: tuple[Component, ...]
    output_spec: tuple[str, str]  # (node+, node-), node- defaults to ground
    source_waveforms: dict[str, Waveform] = field(default_factory=dict)

    def nodes(self) -> list[str]:
        seen: list[str] = []
        for c in self.components:
            for nd in (c.n1, c.n2):
                if nd not in seen:
                    seen.append(nd)
        return seen

    def sources(self) -> list[Component]:
        return [c for c in self.components if c.kind in ("V", "I")]


def _float(tok: str, line_no: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(line_no, f"bad {what} value {tok!r}") from None


def parse_netlist(text: str) -> Netlist:
    """Parse and validate a netlist; raises ParseError / ValidationError."""
    components: list[Component] = []
    waveforms: dict[str, Waveform] = {}
    output: tuple[str, str] | None = None
    names: set[str] = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0].upper()

        if kind == "OUT":
            if output is not None:
                raise ParseError(line_no, "duplicate OUT directive")
            if len(toks) == 2:
                output = (toks[1], GROUND)
            elif len(toks) == 3:
                output = (toks[1], toks[2])
            else:
                raise ParseError(line_no, "OUT takes one or two nodes")
            continue

        if kind in ("R", "L", "C"):
            if len(toks) != 5:
                raise ParseError(line_no, f"{kind} line needs: name n1 n2 value")
            name = toks[1]
            value = _float(toks[4], line_no, kind)
            if value <= 0.0:
                raise ParseError(line_no, f"{kind} value must be positive")
            comp = Component(kind, name, toks[2], toks[3], value)
        elif kind in ("V", "I"):
            if len(toks) < 5:
                raise ParseError(line_no, f"{kind} line needs: name n+ n- DC|FOURIER ...")
            name = toks[1]
            mode = toks[4].upper()
            if mode == "DC":
                if len(toks) != 6:
                    raise ParseError(line_no, "DC takes a single level")
                waveforms[name] = Dc(_float(toks[5], line_no, "DC level"))
            elif mode == "FOURIER":
                rest = toks[5:]
                if not rest or (len(rest) - 1) % 3 != 0:
                    raise ParseError(
                        line_no, "FOURIER takes alpha then (beta omega gamma) triples"
                    )
                alpha = _float(rest[0], line_no, "alpha")
                terms = []
                for i in range(1, len(rest), 3):
                    beta = _float(rest[i], line_no, "beta")
                    omega = _float(rest[i + 1], line_no, "omega")
                    gamma = _float(rest[i + 2], line_no, "gamma")
                    if omega <= 0.0:
                        raise ParseError(line_no, "omega must be positive")
                    terms.append((beta, omega, gamma))
                waveforms[name] = Fourier(alpha, tuple(terms))
            else:
                raise ParseError(line_no, f"unknown source mode {toks[4]!r}")
            comp = Component(kind, name, toks[2], toks[3], None)
        else:
            raise ParseError(line_no, f"unknown directive {toks[0]!r}")

        if comp.name in names:
            raise ParseError(line_no, f"duplicate component name {comp.name!r}")
        names.add(comp.name)
        components.append(comp)

    if not components:
        raise ParseError(0, "no components")
    if output is None:
        raise ValidationError("missing OUT directive")

    net = Netlist(tuple(components), output, waveforms)
    _validate_graph(net)
    return net


def _validate_graph(net: Netlist) -> None:
    nodes = net.nodes()
    if GROUND not in nodes:
        raise ValidationError("no component is connected to ground node \"0\"")
    # union-find connectivity over component edges
    parent = {nd: nd for nd in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in net.components:
        parent[find(c.n1)] = find(c.n2)
    root = find(GROUND)
    stray = [nd for nd in nodes if find(nd) != root]
    if stray:
        raise ValidationError(f"nodes disconnected from ground: {', '.join(stray)}")
    for nd in net.output_spec:
        if nd != GROUND and nd not in nodes:
            raise ValidationError(f"OUT references unknown node {nd!r}")


def serialize_netlist(net: Netlist) -> str:
    """Textual form that parses back to an equal Netlist."""
    lines = []
    for c in net.components:
        if c.kind in ("R", "L", "C"):
            lines.append(f"{c.kind} {c.name} {c.n1} {c.n2} {c.value:.17g}")
        else:
            wf = net.source_waveforms[c.name]
            if isinstance(wf, Dc):
                lines.append(f"{c.kind} {c.name} {c.n1} {c.n2} DC {wf.level:.17g}")
            else:
                parts = [f"{c.kind} {c.name} {c.n1} {c.n2} FOURIER {wf.alpha:.17g}"]
                for beta, omega, gamma in wf.terms:
                    parts.append(f"{beta:.17g} {omega:.17g} {gamma:.17g}")
                lines.append(" ".join(parts))
    plus, minus = net.output_spec
    lines.append(f"OUT {plus}" if minus == GROUND else f"OUT {plus} {minus}")
    return "\n".join(lines) + "\n"


def source_models(net: Netlist) -> list[tuple[str, InputModel]]:
    """One input generator per source, in netlist order."""
    models = []
    for c in net.sources():
        wf = net.source_waveforms[c.name]
        if isinstance(wf, Dc):
            models.append((c.name, fourier_input(wf.level, [], name=c.name)))
        else:
            models.append((c.name, fourier_input(wf.alpha, wf.terms, name=c.name)))
    return models


def build_dae(net: Netlist) -> tuple[DaeSystem, InputModel]:
    """Compile the netlist into E dx/dt = A x + B u plus its input model."""
    sources = net.sources()
    src_index = {c.name: i for i, c in enumerate(sources)}
    out_plus, out_minus = net.output_spec
    if out_minus != GROUND:
        raise ValidationError("only ground-referenced OUT is supported")
    if out_plus == GROUND:
        raise ValidationError("output node must not be ground")

    cap_nodes = {
        nd
        for c in net.components
        if c.kind == "C"
        for nd in (c.n1, c.n2)
    }

    # Grounded voltage sources pin the opposite node: v(node) = sign * u.
    pinned: dict[str, tuple[int, float]] = {}
    eliminated: set[str] = set()
    for c in sources:
        if c.kind != "V":
            continue
        if c.n2 == GROUND and c.n1 != GROUND:
            node, sign = c.n1, 1.0
        elif c.n1 == GROUND and c.n2 != GROUND:
            node, sign = c.n2, -1.0
        else:
            continue
        if node == out_plus or node in cap_nodes or node in pinned:
            continue
        pinned[node] = (src_index[c.name], sign)
        eliminated.add(c.name)

    volt_nodes = [nd for nd in net.nodes() if nd != GROUND and nd not in pinned]
    state_names = [f"v{nd}" for nd in volt_nodes]
    node_idx = {nd: i for i, nd in enumerate(volt_nodes)}
    current_of: dict[str, int] = {}
    for c in net.components:
        if c.kind == "L" or (c.kind == "V" and c.name not in eliminated):
            current_of[c.name] = len(state_names)
            state_names.append(f"i_{c.name}")

    n = len(state_names)
    m = len(sources)
    E = np.zeros((n, n))
    A = np.zeros((n, n))
    B = np.zeros((n, m))

    kcl_row = dict(node_idx)  # KCL equation index per retained node

    def stamp_a(row: int, node: str, coef: float) -> None:
        """Add coef * v(node) to the A x + B u side of a row."""
        if node == GROUND:
            return
        if node in pinned:
            s, sign = pinned[node]
            B[row, s] += coef * sign
        else:
            A[row, node_idx[node]] += coef

    def stamp_e(row: int, node: str, coef: float) -> None:
        if node == GROUND:
            return
        # pinned nodes never carry capacitors, so E never sees an input
        E[row, node_idx[node]] += coef

    for c in net.components:
        if c.kind == "R":
            g = 1.0 / c.value
            for a, b in ((c.n1, c.n2), (c.n2, c.n1)):
                if a in kcl_row:
                    row = kcl_row[a]
                    # out-current g (v_a - v_b) moves negated to the RHS
                    stamp_a(row, a, -g)
                    stamp_a(row, b, +g)
        elif c.kind == "C":
            for a, b in ((c.n1, c.n2), (c.n2, c.n1)):
                if a in kcl_row:
                    row = kcl_row[a]
                    stamp_e(row, a, +c.value)
                    stamp_e(row, b, -c.value)
        elif c.kind == "L":
            idx = current_of[c.name]
            if c.n1 in kcl_row:
                A[kcl_row[c.n1], idx] -= 1.0
            if c.n2 in kcl_row:
                A[kcl_row[c.n2], idx] += 1.0
            E[idx, idx] = c.value  # L di/dt = v(n1) - v(n2)
            stamp_a(idx, c.n1, +1.0)
            stamp_a(idx, c.n2, -1.0)
        elif c.kind == "V":
            if c.name in eliminated:
                continue
            idx = current_of[c.name]
            if c.n1 in kcl_row:
                A[kcl_row[c.n1], idx] -= 1.0
            if c.n2 in kcl_row:
                A[kcl_row[c.n2], idx] += 1.0
            # constraint row: 0 = v(n+) - v(n-) - u
            stamp_a(idx, c.n1, +1.0)
            stamp_a(idx, c.n2, -1.0)
            B[idx, src_index[c.name]] -= 1.0
        elif c.kind == "I":
            s = src_index[c.name]
            if c.n1 in kcl_row:
                B[kcl_row[c.n1], s] -= 1.0
            if c.n2 in kcl_row:
                B[kcl_row[c.n2], s] += 1.0

    zero_rows = [
        i
        for i in range(n)
        if not E[i].any() and not A[i].any()
    ]
    if zero_rows:
        raise ValidationError(
            f"stamping produced identically-zero pencil rows {zero_rows}"
        )

    if out_plus not in node_idx:
        raise ValidationError(f"output node {out_plus!r} is not a circuit state")
    output_index = node_idx[out_plus]

    inp = combine_inputs([model for _, model in source_models(net)])
    all_names = list(state_names) + list(inp.names)
    if len(set(all_names)) != len(all_names):
        dupes = sorted({nm for nm in all_names if all_names.count(nm) > 1})
        raise ValidationError(f"state/input name collision: {', '.join(dupes)}")

    sys = DaeSystem(E, A, B, tuple(state_names), output_index)
    return sys, inp
