"""End-to-end wiring: netlist -> DAE -> rails -> union CRN -> measurements.

The compiled network is the union of one circuit block and one block per
source.  The circuit block holds the reactions of the shifted (or, when E
is invertible, the exact) circuit ODE with the source rails acting as
catalysts; it depends only on the circuit and h, never on the waveforms.
Each input block holds the reactions of that source's own generator ODE.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Fourier, Netlist, build_dae, source_models
from .crn import Crn, emit_crn, format_reaction, mass_action_field, union
from .dae import (
    AffineOde,
    DaeSystem,
    InputModel,
    Trajectory,
    check_regularity,
    consistent_project,
    coupled_euler_map,
    default_h_probes,
    direct_map,
    e_invertible,
    reference_solve,
)
from .errors import SingularMatrix, ValidationError
from .positivation import hungarize, positivate, split_initial
from .sim import fit_sinusoid, integrate, recover_difference, sup_error

CIRCUIT_MARKER = "# circuit reactions"
INPUT_MARKER = "# input reactions"


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by every command; `auto` resolves against h."""

    h: float = 0.01
    gamma: float | str = "auto"  # auto -> 1/h
    dt: float | str = "auto"  # auto -> h/20
    T: float = 50.0
    transient_discard: float = 20.0
    seed: int | None = None

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("h must be positive")
        if not (self.T > self.transient_discard >= 0.0):
            raise ValueError("need T > transient_discard >= 0")
        if self.gamma != "auto" and float(self.gamma) < 0.0:
            raise ValueError("gamma must be nonnegative or 'auto'")
        if self.dt != "auto" and float(self.dt) <= 0.0:
            raise ValueError("dt must be positive or 'auto'")

    def resolve_gamma(self) -> float:
        return 1.0 / self.h if self.gamma == "auto" else float(self.gamma)

    def resolve_dt(self) -> float:
        return self.h / 20.0 if self.dt == "auto" else float(self.dt)


@dataclass(frozen=True)
class CompiledCircuit:
    net: Netlist
    sys: DaeSystem
    inp: InputModel
    x0: np.ndarray
    x0_was_projected: bool
    direct: bool
    h: float
    gamma: float
    circuit_crn: Crn
    input_crns: tuple[tuple[str, Crn], ...]
    crn: Crn  # the union, with meta and diff annotations


def compile_circuit(net: Netlist, cfg: RunConfig) -> CompiledCircuit:
    """Compile a parsed netlist into its union CRN.

    Raises SingularMatrix when the pencil fails the regularity probes and
    ValidationError for structural problems; emits RuntimeWarnings for
    projected initial conditions and for the gamma = 0 diagnostic mode.
    """
    sys, inp = build_dae(net)
    if not check_regularity(sys, default_h_probes(cfg.seed)):
        raise SingularMatrix("singular pencil: the circuit DAE is not regular")
    gamma = cfg.resolve_gamma()
    if gamma == 0.0:
        warnings.warn(
            "gamma = 0 disables annihilation: rails will grow without bound",
            RuntimeWarning,
            stacklevel=2,
        )
    direct = e_invertible(sys)
    if direct:
        ax, bx = direct_map(sys)
    else:
        ax, bx = coupled_euler_map(sys, cfg.h)

    x0, flagged = consistent_project(sys, sys.B @ inp.u0, np.zeros(sys.n))
    if flagged:
        warnings.warn(
            "default initial state was inconsistent and has been projected",
            RuntimeWarning,
            stacklevel=2,
        )

    circuit_ode = AffineOde(ax, np.zeros(sys.n), sys.state_names, sys.output_index)
    circuit_hs = hungarize(
        positivate(circuit_ode, coupling=(bx, inp.input_names)), gamma
    )
    circuit_crn = emit_crn(circuit_hs, *split_initial(x0))

    input_crns = []
    for name, model in source_models(net):
        ode = AffineOde(model.D, model.d, model.names, 0)
        net_in = emit_crn(hungarize(positivate(ode), gamma), *split_initial(model.init))
        input_crns.append((name, net_in))

    merged = circuit_crn
    for _, net_in in input_crns:
        merged = union(merged, net_in)
    meta = {
        "h": f"{cfg.h:.17g}",
        "gamma": f"{gamma:.17g}",
        "mode": "direct" if direct else "euler",
    }
    diffs = tuple(
        (nm, f"{nm}_p", f"{nm}_m") for nm in sys.state_names + inp.names
    )
    merged = Crn(merged.species, merged.reactions, merged.init, meta, diffs)
    return CompiledCircuit(
        net, sys, inp, x0, flagged, direct, cfg.h, gamma,
        circuit_crn, tuple(input_crns), merged,
    )


def compiled_crn_text(compiled: CompiledCircuit) -> str:
    """Serialized union CRN with marked circuit/input reaction blocks."""
    net = compiled.crn
    lines = ["# circ2crn compiled network"]
    for key in sorted(net.meta):
        lines.append(f"# meta {key} {net.meta[key]}")
    if net.species:
        lines.append("species " + " ".join(net.species))
    for sp in net.species:
        if sp in net.init:
            lines.append(f"init {sp} {net.init[sp]:.17g}")
    lines.append(CIRCUIT_MARKER)
    for rx in compiled.circuit_crn.reactions:
        lines.append(format_reaction(rx))
    for name, net_in in compiled.input_crns:
        lines.append(f"{INPUT_MARKER} {name}")
        for rx in net_in.reactions:
            lines.append(format_reaction(rx))
    for out, plus, minus in net.diffs:
        lines.append(f"# diff {out} {plus} {minus}")
    return "\n".join(lines) + "\n"


def circuit_block(text: str) -> str:
    """The circuit-reaction block of a compiled file, byte for byte."""
    lines = text.splitlines()
    try:
        start = lines.index(CIRCUIT_MARKER) + 1
    except ValueError:
        raise ValidationError("no circuit-reaction block marker found") from None
    block = []
    for line in lines[start:]:
        if line.startswith("#"):
            break
        block.append(line)
    return "\n".join(block) + "\n"


def simulate_crn(net: Crn, T: float, dt: float) -> Trajectory:
    """Integrate a CRN from its declared initial concentrations.

    Returns the species trajectory with any annotated rail differences
    appended as extra columns.
    """
    if not net.species:
        steps = int(np.ceil(T / dt - 1e-12))
        return Trajectory(np.arange(steps + 1) * dt, (), np.zeros((steps + 1, 0)))
    traj = integrate(mass_action_field(net), net.initial_state(), T, dt, net.species)
    if net.diffs:
        extra = recover_difference(traj, [(p, m, out) for out, p, m in net.diffs])
        values = np.column_stack([traj.values, extra.values])
        traj = Trajectory(traj.times, traj.names + extra.names, values)
    return traj


def verify_circuit(
    net: Netlist, cfg: RunConfig, T: float, h_ref: float | None = None
) -> float:
    """Sup error of the compiled union CRN against the backward-Euler oracle.

    This certifies the artifact that `compile` emits: the CRN is simulated
    under mass-action kinetics, the circuit variables are recovered as rail
    differences, and the result is compared with reference_solve on the
    exact stacked pencil.
    """
    compiled = compile_circuit(net, cfg)
    traj = simulate_crn(compiled.crn, T, cfg.resolve_dt())
    if h_ref is None:
        h_ref = cfg.h / 100.0
    reference = reference_solve(
        compiled.sys, compiled.inp, compiled.x0, T, h_ref, max_points=400_000
    )
    return sup_error(traj, reference, compiled.sys.state_names)


def frequency_response(
    net: Netlist, omegas, cfg: RunConfig
) -> list[tuple[float, float, float]]:
    """Gain and phase (degrees) of the compiled CRN at each drive frequency.

    The single source is replaced by a unit sine of the requested frequency,
    the union CRN is simulated, and both the recovered input and output are
    fitted over the post-transient window.
    """
    sources = net.sources()
    if len(sources) != 1:
        raise ValidationError("frequency sweep needs exactly one source")
    src = sources[0].name
    rows = []
    for omega in omegas:
        if omega <= 0.0:
            raise ValueError("omega must be positive")
        drive = Fourier(0.0, ((1.0, float(omega), 0.0),))
        net_w = replace(net, source_waveforms={src: drive})
        compiled = compile_circuit(net_w, cfg)
        period = 2.0 * np.pi / omega
        T = max(cfg.T, cfg.transient_discard + 2.2 * period)
        traj = simulate_crn(compiled.crn, T, cfg.resolve_dt())
        window = (cfg.transient_discard, T)
        out_name = compiled.sys.state_names[compiled.sys.output_index]
        fit_out = fit_sinusoid(traj, out_name, omega, window)
        fit_in = fit_sinusoid(traj, src, omega, window)
        gain = fit_out.amplitude / fit_in.amplitude
        phase = np.degrees(fit_out.phase - fit_in.phase)
        phase = (phase + 180.0) % 360.0 - 180.0
        rows.append((float(omega), float(gain), float(phase)))
    return rows


def freq_to_csv(rows) -> str:
    lines = ["omega,gain,phase_deg"]
    for omega, gain, phase in rows:
        lines.append(f"{omega:.17g},{gain:.17g},{phase:.17g}")
    return "\n".join(lines) + "\n"


__all__ = [
    "CIRCUIT_MARKER",
    "INPUT_MARKER",
    "CompiledCircuit",
    "RunConfig",
    "circuit_block",
    "compile_circuit",
    "compiled_crn_text",
    "freq_to_csv",
    "frequency_response",
    "simulate_crn",
    "verify_circuit",
]
