"""Shared fixtures: the three reference circuits and their hand-derived forms."""

import numpy as np
import pytest

from circ2crn.circuit import build_dae, parse_netlist
from circ2crn.dae import DaeSystem, InputModel

# High-pass RL filter (R = L = 1), DC and unit-sine drive variants.
RL_DC = "V vin 1 0 DC 1\nR r1 1 2 1\nL l1 2 0 1\nOUT 2\n"
RL_SINE = "V vin 1 0 FOURIER 0 1 1 0\nR r1 1 2 1\nL l1 2 0 1\nOUT 2\n"

# Two-capacitor circuit whose DAE is not semi-explicit (C1 = C2 = R = 1).
TWO_CAP = "I is 0 1 DC 1\nC c1 1 0 1\nC c2 1 2 1\nR r1 2 0 1\nOUT 2\n"

# Low-pass variant: the inductor replaced by a capacitor (RC = 1).
RC_LOWPASS = "V vin 1 0 DC 1\nR r1 1 2 1\nC c1 2 0 1\nOUT 2\n"


def hand_rl_pencil() -> DaeSystem:
    """The textbook 2-state form of the RL filter over (i, vout):

    di/dt = vout / L,    0 = i + vout/R - vin/R
    with b = B vin routing -vin/R into the algebraic row.
    """
    E = np.array([[1.0, 0.0], [0.0, 0.0]])
    A = np.array([[0.0, 1.0], [1.0, 1.0]])
    B = np.array([[0.0], [-1.0]])
    return DaeSystem(E, A, B, ("i", "vout"), 1)


def hand_rl_input_dc(level: float = 1.0) -> InputModel:
    return InputModel(
        np.zeros((1, 1)), np.zeros(1), np.array([level]), np.zeros(0), ("vin",), ()
    )


def sine_input_2state() -> InputModel:
    """The rotation system d(u,z)/dt = [[0,1],[-1,0]](u,z), u(0)=0, z(0)=1."""
    D = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return InputModel(D, np.zeros(2), np.array([0.0]), np.array([1.0]), ("u",), ("z",))


@pytest.fixture(scope="session")
def rl_dc():
    net = parse_netlist(RL_DC)
    sys, inp = build_dae(net)
    return net, sys, inp


@pytest.fixture(scope="session")
def rl_sine():
    net = parse_netlist(RL_SINE)
    sys, inp = build_dae(net)
    return net, sys, inp


@pytest.fixture(scope="session")
def two_cap():
    net = parse_netlist(TWO_CAP)
    sys, inp = build_dae(net)
    return net, sys, inp


@pytest.fixture(scope="session")
def rc_lowpass():
    net = parse_netlist(RC_LOWPASS)
    sys, inp = build_dae(net)
    return net, sys, inp
