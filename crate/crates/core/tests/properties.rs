use std::f64::consts::PI;

use nmrgate::compiler::{GateKind, GateSequence};
use nmrgate::gates::{self, UnitaryGate};
use nmrgate::linalg::{self, CMatrix};
use nmrgate::pulse::{Event, Pulse, PulseProgram, Rotation, Shape};
use nmrgate::states::{self, DensityMatrix};
use nmrgate::{BasisIndex, ControlPattern, SpinSystem};
use num_complex::Complex64;
use proptest::prelude::*;

fn z_on(k: usize, n: usize) -> CMatrix {
    (0..n).fold(linalg::identity(1), |acc, j| {
        let f = if j == k {
            linalg::pauli_z()
        } else {
            linalg::identity(2)
        };
        linalg::kron(&acc, &f)
    })
}

/// Weak-coupling Hamiltonian assembled from Kronecker products.
fn kron_hamiltonian(offsets: &[f64], j: &[Vec<f64>]) -> CMatrix {
    let n = offsets.len();
    let d = 1 << n;
    let mut h = CMatrix::zeros(d, d);
    for k in 0..n {
        h += z_on(k, n) * Complex64::from(-0.5 * 2.0 * PI * offsets[k]);
        for m in 0..k {
            h += (z_on(m, n) * z_on(k, n)) * Complex64::from(-0.5 * PI * j[m][k]);
        }
    }
    h
}

fn system_strategy(max_n: usize) -> impl Strategy<Value = SpinSystem> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-3000.0..3000.0f64, n),
            prop::collection::vec(-200.0..200.0f64, n * n),
        )
            .prop_map(move |(mut offsets, js)| {
                offsets.sort_by(f64::total_cmp);
                let mut j = vec![vec![0.0; n]; n];
                for k in 0..n {
                    for m in 0..k {
                        j[m][k] = js[m * n + k];
                        j[k][m] = js[m * n + k];
                    }
                }
                SpinSystem::new(offsets, j).unwrap()
            })
    })
}

fn random_hermitian(d: usize, values: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            h[(r, c)] = Complex64::new(values[2 * (r * d + c)], values[2 * (r * d + c) + 1]);
        }
    }
    (h.clone() + h.adjoint()) * Complex64::from(0.5)
}

fn random_unitary(d: usize, values: &[f64]) -> UnitaryGate {
    UnitaryGate::new(linalg::expm_hermitian(&random_hermitian(d, values), 1.0)).unwrap()
}

fn random_density(d: usize, values: &[f64]) -> DensityMatrix {
    let a = random_hermitian(d, values);
    let m = &a * a.adjoint() + linalg::identity(d) * Complex64::from(1e-3);
    let tr = linalg::trace(&m);
    DensityMatrix::new(m / tr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_energy_matches_kronecker_diagonal(sys in system_strategy(5)) {
        let h = kron_hamiltonian(sys.offsets_hz(), sys.couplings_hz());
        prop_assert!(linalg::is_diagonal(&h));
        for i in 0..sys.dim() {
            let e = sys.basis_energy(BasisIndex(i)).unwrap();
            prop_assert!((e - h[(i, i)].re).abs() <= 1e-9 * (1.0 + e.abs()));
        }
        prop_assert!(linalg::max_abs_diff(&h, &sys.hamiltonian()) < 1e-8);
    }

    #[test]
    fn flipping_a_control_shifts_the_line_by_j(sys in system_strategy(5), seed in any::<u64>()) {
        let n = sys.n_spins();
        prop_assume!(n >= 2);
        let target = (seed as usize) % n;
        let width = n - 1;
        let pattern_bits: Vec<bool> = (0..width).map(|b| (seed >> (8 + b)) & 1 == 1).collect();
        let controls: Vec<usize> = (0..n).filter(|&k| k != target).collect();
        let base = sys.transition_frequency(target, &ControlPattern::new(pattern_bits.clone())).unwrap();
        for (slot, &spin) in controls.iter().enumerate() {
            let mut bits = pattern_bits.clone();
            bits[slot] = !bits[slot];
            let f = sys.transition_frequency(target, &ControlPattern::new(bits)).unwrap();
            let j = sys.coupling_hz(spin, target);
            prop_assert!(((f - base).abs() - j.abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn multiplet_sums_to_the_offset(sys in system_strategy(5), seed in any::<u64>()) {
        let n = sys.n_spins();
        let target = (seed as usize) % n;
        let lines = sys.target_lines(target).unwrap();
        prop_assert_eq!(lines.len(), 1 << (n - 1));
        let sum: f64 = lines.iter().map(|(_, f)| f).sum();
        let expected = -((1 << (n - 1)) as f64) * sys.offsets_hz()[target];
        prop_assert!((sum - expected).abs() < 1e-8 * (1.0 + expected.abs()));
    }

    #[test]
    fn gates_preserve_trace_and_spectrum(
        n in 1usize..=3,
        hv in prop::collection::vec(-1.0..1.0f64, 128),
        rv in prop::collection::vec(-1.0..1.0f64, 128),
    ) {
        let d = 1 << n;
        let u = random_unitary(d, &hv);
        prop_assert!(u.unitarity_error() < 1e-8);
        let rho = random_density(d, &rv);
        let out = states::apply_gate(&rho, &u).unwrap();
        prop_assert!((linalg::trace(out.matrix()) - Complex64::from(1.0)).norm() < 1e-9);
        for (a, b) in rho.eigenvalues().iter().zip(out.eigenvalues()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_ignores_global_phase(
        n in 1usize..=3,
        hv in prop::collection::vec(-1.0..1.0f64, 128),
        phase in -PI..PI,
    ) {
        let d = 1 << n;
        let u = random_unitary(d, &hv);
        let v = UnitaryGate::new(u.matrix() * Complex64::from_polar(1.0, phase)).unwrap();
        prop_assert!((gates::gate_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((gates::phase_stripped_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_stripping_removes_diagonal_phases(
        n in 1usize..=3,
        hv in prop::collection::vec(-1.0..1.0f64, 128),
        phases in prop::collection::vec(-PI..PI, 8),
    ) {
        let d = 1 << n;
        let u = random_unitary(d, &hv);
        let dmat = linalg::diag(&phases[..d].iter().map(|p| Complex64::from_polar(1.0, *p)).collect::<Vec<_>>());
        let v = UnitaryGate::new(dmat * u.matrix()).unwrap();
        prop_assert!((gates::phase_stripped_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(gates::gate_fidelity(&u, &v).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn sequence_text_round_trips(ops in prop::collection::vec((0usize..6, 0usize..4, 1usize..4, -3.0..3.0f64), 0..20)) {
        let mut seq = GateSequence::new(4);
        for (kind, a, shift, x) in ops {
            let b = (a + shift) % 4;
            let _ = match kind {
                0 => seq.push(GateKind::X, &[a]),
                1 => seq.push(GateKind::Rx(x), &[a]),
                2 => seq.push(GateKind::Ry(x), &[a]),
                3 => seq.push(GateKind::Rz(x), &[a]),
                4 => seq.push(GateKind::Cnot, &[a, b]),
                _ => seq.push(GateKind::ControlledXPower(x), &[a, b]),
            };
        }
        let back = GateSequence::from_text(&seq.to_text()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn pulse_text_round_trips(
        events in prop::collection::vec((0u8..3, 0.001..1.0f64, 0.1..50.0f64, -PI..PI, 0usize..3, any::<bool>()), 1..8),
    ) {
        let events: Vec<Event> = events.into_iter().map(|(k, t, a, phi, spin, gauss)| match k {
            0 => Event::Delay { duration_s: t },
            1 => Event::Pulse(Pulse {
                carrier_hz: a - 25.0,
                amplitude_hz: a,
                phase_rad: phi,
                duration_s: t,
                shape: if gauss { Shape::Gaussian } else { Shape::Rectangular },
            }),
            _ => Event::Rotation(Rotation { spin, angle_rad: a, phase_rad: phi, carrier_hz: -a }),
        }).collect();
        let program = PulseProgram::new(events).unwrap();
        let back = PulseProgram::from_text(&program.to_text()).unwrap();
        prop_assert_eq!(back, program);
    }

    #[test]
    fn density_text_round_trips(n in 1usize..=3, rv in prop::collection::vec(-1.0..1.0f64, 128)) {
        let rho = random_density(1 << n, &rv);
        let back = DensityMatrix::from_text(&rho.to_text()).unwrap();
        prop_assert_eq!(back.matrix(), rho.matrix());
    }
}

#[test]
fn lambda_not_is_an_involution() {
    for n in 1..=5 {
        let g = gates::lambda_not(n);
        let sq = g.after(&g).unwrap();
        assert_eq!(sq.matrix(), UnitaryGate::identity(n + 1).matrix(), "n={n}");
    }
}

#[test]
fn lambda_not_truth_table() {
    for n in 1..=4 {
        let g = gates::lambda_not(n);
        let d = 1usize << (n + 1);
        for input in 0..d {
            let controls_on = input >> 1 == (1 << n) - 1;
            let expected = if controls_on { input ^ 1 } else { input };
            for out in 0..d {
                let want = if out == expected { 1.0 } else { 0.0 };
                assert_eq!(
                    g.matrix()[(out, input)],
                    Complex64::from(want),
                    "n={n} {input}->{out}"
                );
            }
        }
    }
}

#[test]
fn thermal_state_matches_boltzmann_oracle() {
    for name in ["chlorostyrene3", "alanine4"] {
        let sys = SpinSystem::preset(name).unwrap();
        let lab: Vec<f64> = sys
            .offsets_hz()
            .iter()
            .zip(sys.larmor_hz())
            .map(|(o, l)| o + l)
            .collect();
        let h = kron_hamiltonian(&lab, sys.couplings_hz());
        let omega_ref = lab.iter().map(|f| 2.0 * PI * f.abs()).fold(0.0, f64::max);
        for beta in [1e-5, 1e-2, 1.0] {
            let w: Vec<f64> = (0..sys.dim())
                .map(|i| (-beta * h[(i, i)].re / omega_ref).exp())
                .collect();
            let z: f64 = w.iter().sum();
            let rho = states::thermal_state(&sys, beta).unwrap();
            for i in 0..sys.dim() {
                assert!(
                    (rho.matrix()[(i, i)].re - w[i] / z).abs() < 1e-10,
                    "{name} beta={beta}"
                );
            }
            assert!(linalg::is_diagonal(rho.matrix()));
        }
    }
}

#[test]
fn deviation_state_linearises_the_thermal_state() {
    // Doubling beta doubles the deviation; the residual is second order.
    let sys = SpinSystem::preset("chlorostyrene3").unwrap();
    let err = |beta: f64| {
        let rho = states::thermal_state(&sys, beta).unwrap();
        let dev = states::deviation_state(&sys, beta).unwrap();
        let d = sys.dim() as f64;
        (0..sys.dim())
            .map(|i| (rho.matrix()[(i, i)].re - (1.0 + dev.matrix()[(i, i)].re) / d).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}
