// SPDX-License-Identifier: Apache-2.0

//! Oracle semantics on states, and the catalyst gadget that turns one
//! uncontrolled in-place query into a controlled one.

use alloc::vec::Vec;

use crate::circuit::{CircuitProgram, Control, Gate};
use crate::error::Result;
use crate::perm::Permutation;
use crate::statevec::{RegisterLayout, StateVector};

fn run_single(p: &Permutation, s: StateVector, gate: Gate) -> Result<StateVector> {
    let program = CircuitProgram::from_gates(s.layout().clone(), alloc::vec![gate])?;
    Ok(program.execute(p, s)?.0)
}

/// `|x> -> |π(x)>` on register `reg`.
pub fn apply_inplace(p: &Permutation, s: StateVector, reg: &str) -> Result<StateVector> {
    run_single(p, s, Gate::query_in_place(reg))
}

/// `|x> -> |π⁻¹(x)>` on register `reg`.
pub fn apply_inplace_inverse(p: &Permutation, s: StateVector, reg: &str) -> Result<StateVector> {
    run_single(p, s, Gate::query_in_place_inverse(reg))
}

/// `|x>|y> -> |x>|y XOR π(x)>`.
pub fn apply_xor(p: &Permutation, s: StateVector, src: &str, dst: &str) -> Result<StateVector> {
    run_single(p, s, Gate::query_xor(src, dst))
}

/// `|x> -> exp(2πi π(x) / N) |x>`.
pub fn apply_phase(p: &Permutation, s: StateVector, reg: &str) -> Result<StateVector> {
    run_single(p, s, Gate::query_phase(reg))
}

/// Gate sequence applying `QueryInPlace(target)` under `controls` with a
/// single uncontrolled query. `catalyst` must hold `|π(0)>` and `aux` must
/// be zero; both are restored.
///
/// With several controls the catalyst XOR must fire when *not all* controls
/// hold, which is emitted as an unconditional XOR followed by one controlled
/// on all of them.
pub fn gadget_gates(target: &str, controls: &[Control], catalyst: &str, aux: &str) -> Vec<Gate> {
    if controls.is_empty() {
        return alloc::vec![Gate::query_in_place(target)];
    }
    let mut gates = alloc::vec![
        Gate::swap(target, aux).with_controls(controls),
        Gate::query_in_place(aux),
    ];
    if let [single] = controls {
        gates.push(Gate::xor(catalyst, aux).with_control(single.negated()));
    } else {
        gates.push(Gate::xor(catalyst, aux));
        gates.push(Gate::xor(catalyst, aux).with_controls(controls));
    }
    gates.push(Gate::swap(target, aux).with_controls(controls));
    gates
}

/// Layout used by [`controlled_inplace_gadget`]: control qubit, query
/// register, catalyst and auxiliary, in that bit order.
pub fn gadget_layout(n: usize) -> Result<RegisterLayout> {
    RegisterLayout::new(&[("ctrl", 1), ("target", n), ("catalyst", n), ("aux", n)])
}

/// The four-gate controlled in-place query on [`gadget_layout`].
pub fn controlled_inplace_gadget(n: usize) -> Result<CircuitProgram> {
    CircuitProgram::from_gates(
        gadget_layout(n)?,
        gadget_gates("target", &[Control::one("ctrl", 0)], "catalyst", "aux"),
    )
}

/// Prepares the catalyst with one in-place query on a zeroed register.
pub fn prepare_catalyst(p: &Permutation, s: StateVector, catalyst: &str) -> Result<StateVector> {
    apply_inplace(p, s, catalyst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ExecOptions;
    use crate::circuit::GadgetRegisters;
    use crate::linalg::Matrix;
    use crate::perm::sample_uniform;
    use crate::statevec::RegisterLayout;
    use alloc::string::ToString;
    use core::f64::consts::PI;
    use num_complex::Complex64;

    fn all_perms(n: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, n: usize, out: &mut Vec<Permutation>) {
            if left.is_empty() {
                out.push(Permutation::new(n, prefix.clone()).unwrap());
                return;
            }
            for i in 0..left.len() {
                let v = left.remove(i);
                prefix.push(v);
                rec(prefix, left, n, out);
                prefix.pop();
                left.insert(i, v);
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut (0..1 << n).collect(), n, &mut out);
        out
    }

    #[test]
    fn in_place_on_cycle() {
        let layout = RegisterLayout::new(&[("A", 2)]).unwrap();
        let p = Permutation::new(2, alloc::vec![1, 2, 3, 0]).unwrap();
        let s = StateVector::basis(layout.clone(), &[("A", 2)]).unwrap();
        let out = apply_inplace(&p, s.clone(), "A").unwrap();
        assert_eq!(out.amplitude_of(&[("A", 3)]).unwrap(), Complex64::new(1.0, 0.0));
        let id = Permutation::identity(2).unwrap();
        assert_eq!(apply_inplace(&id, s.clone(), "A").unwrap().amplitudes(), s.amplitudes());
    }

    #[test]
    fn in_place_then_inverse_oracle_restores() {
        let layout = RegisterLayout::new(&[("A", 3), ("B", 1)]).unwrap();
        let p = sample_uniform(3, 2).unwrap();
        let s = StateVector::from_amplitudes(
            layout,
            (0..16u64).map(|i| (i, Complex64::new(i as f64 + 1.0, 0.5 * i as f64))),
        )
        .unwrap();
        let once = apply_inplace(&p, s.clone(), "A").unwrap();
        let back = apply_inplace(&p.inverse(), once, "A").unwrap();
        assert!(back.trace_distance(&s).unwrap() < 1e-12);
    }

    #[test]
    fn xor_examples() {
        let layout = RegisterLayout::new(&[("X", 3), ("Y", 3)]).unwrap();
        let p = sample_uniform(3, 9).unwrap();
        for x in 0..8u64 {
            let fx = p.apply(x as usize) as u64;
            let s = StateVector::basis(layout.clone(), &[("X", x)]).unwrap();
            let out = apply_xor(&p, s, "X", "Y").unwrap();
            assert_eq!(out.amplitudes()[0].0, layout.basis_index(&[("X", x), ("Y", fx)]).unwrap());
            let back = apply_xor(&p, out, "X", "Y").unwrap();
            assert_eq!(back.amplitudes()[0].0, x);
        }
        let s = StateVector::basis(layout, &[]).unwrap();
        assert!(apply_xor(&p, s, "X", "X").is_err());
    }

    #[test]
    fn phase_on_identity_and_period() {
        let layout = RegisterLayout::new(&[("A", 2)]).unwrap();
        let id = Permutation::identity(2).unwrap();
        let s = StateVector::uniform(layout.clone(), "A", &[]).unwrap();
        let out = apply_phase(&id, s.clone(), "A").unwrap();
        for x in 0..4u64 {
            let angle = 2.0 * PI * x as f64 / 4.0;
            let want = Complex64::new(angle.cos(), angle.sin()) * 0.5;
            assert!((out.amplitude(x) - want).norm() < 1e-12);
        }
        let p = sample_uniform(3, 4).unwrap();
        let layout3 = RegisterLayout::new(&[("A", 3)]).unwrap();
        let s3 = StateVector::uniform(layout3, "A", &[]).unwrap();
        let mut cur = s3.clone();
        for _ in 0..8 {
            cur = apply_phase(&p, cur, "A").unwrap();
        }
        for (i, a) in s3.amplitudes() {
            assert!((cur.amplitude(i) - a).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_unitary_is_diagonal() {
        for n in 1..=3 {
            let p = sample_uniform(n, n as u64).unwrap();
            let layout = RegisterLayout::new(&[("A", n)]).unwrap();
            let prog = CircuitProgram::from_gates(layout, alloc::vec![Gate::query_phase("A")]).unwrap();
            let u = prog.extract_unitary(&p).unwrap();
            let size = 1usize << n;
            for i in 0..size {
                for j in 0..size {
                    if i == j {
                        let angle = 2.0 * PI * p.apply(i) as f64 / size as f64;
                        assert!((u[(i, i)] - Complex64::new(angle.cos(), angle.sin())).norm() < 1e-12);
                    } else {
                        assert_eq!(u[(i, j)], Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    fn unitary_of(layout: &RegisterLayout, gates: Vec<Gate>, p: &Permutation) -> Matrix {
        CircuitProgram::from_gates(layout.clone(), gates)
            .unwrap()
            .extract_unitary(p)
            .unwrap()
    }

    #[test]
    fn oracle_algebra_on_dense_unitaries() {
        for n in 1..=4 {
            let p = sample_uniform(n, 77 + n as u64).unwrap();
            let layout = RegisterLayout::new(&[("X", n), ("Y", n)]).unwrap();
            let dim = 1usize << (2 * n);
            let s = unitary_of(&layout, alloc::vec![Gate::query_xor("X", "Y")], &p);
            assert_eq!(s.matmul(&s).unwrap(), Matrix::identity(dim));

            let fwd = unitary_of(&layout, alloc::vec![Gate::query_in_place("X")], &p);
            let inv = unitary_of(&layout, alloc::vec![Gate::query_in_place("X")], &p.inverse());
            assert_eq!(fwd.adjoint(), inv);

            // The XOR oracle from one forward and one inverse in-place query.
            let built = unitary_of(
                &layout,
                alloc::vec![
                    Gate::query_in_place("X"),
                    Gate::xor("X", "Y"),
                    Gate::query_in_place_inverse("X"),
                ],
                &p,
            );
            assert_eq!(built, s);
        }
    }

    fn check_gadget_against_ground_truth(p: &Permutation) {
        let n = p.qubits();
        let layout = gadget_layout(n).unwrap();
        let gadget = controlled_inplace_gadget(n).unwrap();
        assert_eq!(gadget.query_count(), 1);
        let ideal = CircuitProgram::from_gates(
            layout.clone(),
            alloc::vec![Gate::query_in_place("target").with_control(Control::one("ctrl", 0))],
        )
        .unwrap();
        let cat = p.apply(0) as u64;
        for a in 0..2u64 {
            for x in 0..(1u64 << n) {
                let s = StateVector::basis(layout.clone(), &[("ctrl", a), ("target", x), ("catalyst", cat)]).unwrap();
                let (got, _) = gadget.execute(p, s.clone()).unwrap();
                let (want, _) = ideal.execute(p, s).unwrap();
                assert_eq!(got.amplitudes(), want.amplitudes(), "a={a} x={x}");
            }
        }
    }

    #[test]
    fn gadget_matches_controlled_query_for_all_small_permutations() {
        for n in 1..=2 {
            for p in all_perms(n) {
                check_gadget_against_ground_truth(&p);
            }
        }
        for seed in 0..30 {
            check_gadget_against_ground_truth(&sample_uniform(3, seed).unwrap());
        }
        for n in 4..=6 {
            for seed in 0..3 {
                check_gadget_against_ground_truth(&sample_uniform(n, 500 + seed).unwrap());
            }
        }
    }

    #[test]
    fn gadget_leaves_catalyst_unentangled() {
        let n = 3;
        let p = sample_uniform(n, 31).unwrap();
        let layout = gadget_layout(n).unwrap();
        let cat = p.apply(0) as u64;
        let gadget = controlled_inplace_gadget(n).unwrap();
        let input = StateVector::from_amplitudes(
            layout.clone(),
            (0..16u64).map(|k| {
                let (a, x) = (k & 1, k >> 1);
                let idx = layout
                    .basis_index(&[("ctrl", a), ("target", x), ("catalyst", cat)])
                    .unwrap();
                (idx, Complex64::new(1.0 + k as f64, -(k as f64) * 0.25))
            }),
        )
        .unwrap();
        let (out, _) = gadget.execute(&p, input).unwrap();
        assert!((out.probability("catalyst", cat).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.probability("aux", 0).unwrap() - 1.0).abs() < 1e-12);

        // Plus-state control on a fixed x gives (|0>|x> + |1>|π(x)>)/√2.
        let x = 5u64;
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(
            layout.clone(),
            [0u64, 1].map(|a| {
                (
                    layout.basis_index(&[("ctrl", a), ("target", x), ("catalyst", cat)]).unwrap(),
                    Complex64::new(h, 0.0),
                )
            }),
        )
        .unwrap();
        let (out, _) = gadget.execute(&p, plus).unwrap();
        let fx = p.apply(x as usize) as u64;
        let want = StateVector::from_amplitudes(
            layout.clone(),
            [(0u64, x), (1, fx)].map(|(a, t)| {
                (
                    layout.basis_index(&[("ctrl", a), ("target", t), ("catalyst", cat)]).unwrap(),
                    Complex64::new(h, 0.0),
                )
            }),
        )
        .unwrap();
        assert!(out.trace_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn wrong_catalyst_leaves_aux_dirty() {
        let p = Permutation::new(2, alloc::vec![2, 0, 3, 1]).unwrap();
        let layout = gadget_layout(2).unwrap();
        let s = StateVector::basis(layout, &[("ctrl", 0), ("target", 1), ("catalyst", 0)]).unwrap();
        let (out, _) = controlled_inplace_gadget(2).unwrap().execute(&p, s).unwrap();
        assert!(out.probability("aux", 0).unwrap() < 1e-12);
    }

    #[test]
    fn honest_mode_agrees_with_direct_mode_for_multiple_controls() {
        let n = 2;
        let layout = RegisterLayout::new(&[("c", 2), ("t", n), ("cat", n), ("aux", n)]).unwrap();
        let gate = Gate::query_in_place("t").with_controls(&[Control::one("c", 0), Control::zero("c", 1)]);
        let prog = CircuitProgram::from_gates(layout.clone(), alloc::vec![gate]).unwrap();
        let honest = ExecOptions {
            honest_gadget: Some(GadgetRegisters {
                catalyst: "cat".to_string(),
                aux: "aux".to_string(),
            }),
        };
        for p in all_perms(n) {
            let cat = p.apply(0) as u64;
            for c in 0..4u64 {
                for x in 0..4u64 {
                    let s = StateVector::basis(layout.clone(), &[("c", c), ("t", x), ("cat", cat)]).unwrap();
                    let (direct, q1) = prog.execute(&p, s.clone()).unwrap();
                    let (via, q2) = prog.execute_with(&p, s, &honest).unwrap();
                    assert_eq!(direct.amplitudes(), via.amplitudes());
                    assert_eq!((q1, q2), (1, 1));
                }
            }
        }
    }
}
