"""Composite conditional-phase gate on the two-spin system."""

import numpy as np
import pytest

from sicluster.pulse import (
    DEFAULT_HYPERFINE,
    DEFAULT_RABI,
    TWO_PI,
    CompositeSequence,
    Delay,
    Pulse,
    TwoSpinSystem,
    composite_cphase,
    cphase_target,
    fidelity_sweep,
    gate_fidelity,
    propagator,
    selectivity_trend,
    sweep_csv,
)

# Regression constant: finite-amplitude composite at theta=pi at the 40 ns
# operating point (omega1 = 2pi*25 MHz, A = 2pi*120 MHz).  No reference
# value exists; computed once by this integrator and frozen.
PINNED_FINITE_FIDELITY = 0.9853403777353125

SYS0 = TwoSpinSystem.resonant_electron()


class TestPropagator:
    def test_empty_sequence_identity(self):
        u = propagator(SYS0, CompositeSequence([]))
        assert np.allclose(u, np.eye(4), atol=1e-12)

    def test_instantaneous_pi_is_selective_x(self):
        u = propagator(SYS0, CompositeSequence([Pulse("electron", 0.0, np.pi)]))
        # resonant (nuclear-up) manifold flips; the other is untouched
        expect = np.eye(4, dtype=complex)
        expect[0, 0] = expect[2, 2] = 0
        expect[0, 2] = expect[2, 0] = -1j
        assert np.allclose(u, expect, atol=1e-12)

    def test_unitary_for_random_finite_sequences(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            items = []
            for _ in range(int(rng.integers(1, 5))):
                if rng.random() < 0.3:
                    items.append(Delay(float(rng.uniform(0, 50e-9))))
                else:
                    items.append(Pulse("electron" if rng.random() < 0.7 else "nuclear",
                                       float(rng.uniform(0, TWO_PI)),
                                       float(rng.uniform(0, np.pi)),
                                       float(TWO_PI * rng.uniform(1e6, 50e6))))
            u = propagator(SYS0, CompositeSequence(items))
            assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-10

    def test_detuned_instantaneous_pulse_rejected(self):
        sys_off = TwoSpinSystem(DEFAULT_HYPERFINE, delta_e=DEFAULT_HYPERFINE)
        with pytest.raises(ValueError):
            propagator(sys_off, CompositeSequence([Pulse("electron", 0.0, np.pi)]))


class TestCompositeGate:
    def test_theta_zero_is_identity(self):
        u = propagator(SYS0, composite_cphase(0.0))
        assert gate_fidelity(u, 0.0) > 1 - 1e-12
        assert np.allclose(np.abs(np.diagonal(u)), 1, atol=1e-12)

    def test_instantaneous_limit_20_random_thetas(self):
        rng = np.random.default_rng(2)
        for theta in rng.uniform(0, TWO_PI, 20):
            u = propagator(SYS0, composite_cphase(float(theta)))
            assert gate_fidelity(u, float(theta)) > 1 - 1e-10

    def test_conditional_z_closed_form(self):
        # (pi/2)_x (theta)_y (pi/2)_-x == R_z(-theta) on the driven manifold.
        theta = 0.7337
        u = propagator(SYS0, composite_cphase(theta))
        expect = np.diag([np.exp(0.5j * theta), 1.0, np.exp(-0.5j * theta), 1.0])
        assert np.allclose(u, expect, atol=1e-10)

    def test_forty_ns_gate_time(self):
        seq = composite_cphase(np.pi, DEFAULT_RABI)
        assert seq.total_duration == pytest.approx(40e-9, rel=1e-12)

    def test_finite_fidelity_regression(self):
        u = propagator(SYS0, composite_cphase(np.pi, DEFAULT_RABI))
        assert gate_fidelity(u, np.pi) == pytest.approx(PINNED_FINITE_FIDELITY, abs=1e-9)

    def test_selective_limit(self):
        f = []
        for scale in (1.0, 0.1, 0.01):
            u = propagator(SYS0, composite_cphase(np.pi, DEFAULT_RABI * scale))
            f.append(gate_fidelity(u, np.pi))
        assert f[0] < f[1] < f[2]
        assert f[2] > 1 - 1e-4

    def test_theta_out_of_range(self):
        with pytest.raises(ValueError):
            composite_cphase(-0.5)


class TestFidelityMetric:
    def test_exact_target_scores_one(self):
        for theta in (0.0, 0.3, np.pi, 5.0):
            assert gate_fidelity(cphase_target(theta), theta) > 1 - 1e-12

    def test_invariant_under_global_phase_and_local_z(self):
        theta = 1.1
        u = propagator(SYS0, composite_cphase(theta, DEFAULT_RABI))
        base = gate_fidelity(u, theta)
        assert gate_fidelity(np.exp(0.4j) * u, theta) == pytest.approx(base, abs=1e-9)
        ze = np.diag([1, 1, np.exp(0.9j), np.exp(0.9j)])
        zn = np.diag([1, np.exp(-0.2j), 1, np.exp(-0.2j)])
        assert gate_fidelity(ze @ zn @ u, theta) == pytest.approx(base, abs=1e-9)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            gate_fidelity(np.ones((4, 4)), 0.0)


class TestFrameConsistency:
    def test_secular_vs_isotropic_high_field(self):
        # Emulate A << electron Zeeman: the flip-flop term is static in a
        # common rotating frame with the full Zeeman mismatch W on the
        # nuclear offset; the fidelity metric absorbs the frame Z rotations.
        w_mismatch = TWO_PI * 5e13
        seq = composite_cphase(np.pi, DEFAULT_RABI)
        f_sec = gate_fidelity(propagator(SYS0, seq), np.pi)
        iso = TwoSpinSystem(DEFAULT_HYPERFINE, -0.5 * DEFAULT_HYPERFINE,
                            -w_mismatch, secular=False)
        f_iso = gate_fidelity(propagator(iso, seq), np.pi)
        assert abs(f_sec - f_iso) < 1e-6


class TestSweep:
    def test_rows_and_csv(self):
        rows = fidelity_sweep([np.pi], [None, DEFAULT_RABI])
        assert rows[0]["omega1_hz"] == float("inf")
        assert rows[0]["fidelity"] > 1 - 1e-10
        assert rows[0]["duration_s"] == 0.0
        assert rows[1]["omega1_hz"] == pytest.approx(25e6)
        assert rows[1]["duration_s"] == pytest.approx(40e-9, rel=1e-12)
        csv = sweep_csv(rows)
        lines = csv.strip().split("\n")
        assert lines[0] == "theta,omega1_hz,fidelity,duration_s"
        assert len(lines) == 3
        assert "inf" in lines[1]

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            fidelity_sweep([], [None])

    def test_trend_summary(self):
        rows = fidelity_sweep([np.pi], [DEFAULT_RABI, DEFAULT_RABI * 0.05])
        assert "improves" in selectivity_trend(rows)
