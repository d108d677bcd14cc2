// SPDX-License-Identifier: Apache-2.0

//! Inverting a permutation with in-place queries, plus the XOR-oracle
//! Grover decider used as a baseline.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::analytic::optimal_iterations;
use crate::circuit::{CircuitProgram, Control, Executor, Gate, Qubit, Reference};
use crate::error::{Error, Result};
use crate::perm::{seeded_rng, Permutation};
use crate::statevec::{RegisterLayout, StateVector};

/// How the flag qubit is treated between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Measure the flag after every iteration and abort on `1`.
    Trajectory,
    /// Never measure the flag.
    Deferred,
    /// Condition on the flag reading `0` after every iteration.
    PostselectExact,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Trajectory, Mode::Deferred, Mode::PostselectExact];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Trajectory => "trajectory",
            Mode::Deferred => "deferred",
            Mode::PostselectExact => "postselect-exact",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidProblem(alloc::format!("unknown mode `{s}`")))
    }
}

/// State diagnostics after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics {
    /// Real part of the amplitude on `|x*>|0>|0>`.
    pub alpha: f64,
    /// Real part of the amplitude on some `|x>|0>|0>` with `x != x*`.
    pub beta: f64,
    /// Probability that the flag reads `1` at the end of the iteration.
    pub abort_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub target: u64,
    /// The true preimage `π⁻¹(target)`.
    pub preimage: u64,
    pub mode: Mode,
    pub iterations_planned: u64,
    pub iterations_run: u64,
    pub query_count: u64,
    /// Measured answer; `None` after an abort.
    pub output: Option<u64>,
    pub aborted: bool,
    /// Whether the classical check at the start already answered.
    pub early_exit: bool,
    pub success: bool,
    /// Probability that the final measurement returns the preimage, given
    /// the state reached.
    pub success_probability: f64,
    /// Product of the probabilities of the flag outcomes taken (measured or
    /// postselected); 1 in deferred mode.
    pub branch_probability: f64,
    pub diagnostics: Vec<IterationDiagnostics>,
}

/// Registers `A` (search), `B` (scratch) and the flag `C`.
pub fn iteration_layout(n: usize) -> Result<RegisterLayout> {
    RegisterLayout::new(&[("A", n), ("B", n), ("C", 1)])
}

/// One Mark / Shift / Diffuse iteration looking for `π⁻¹(target)`.
///
/// For target 0 this is exactly eight gates. A nonzero target adds
/// query-free `B ^= target` gates on the flagged branch so that `B` is zero
/// in both branches before they are interfered.
pub fn iteration_circuit_for(layout: &RegisterLayout, target: u64) -> Result<CircuitProgram> {
    let flag = Qubit::new("C", 0);
    let unflagged = [Control::zero("C", 0)];
    let flagged = [Control::one("C", 0)];
    let mut prog = CircuitProgram::new(layout.clone());
    // Mark
    prog.push(Gate::xor("A", "B"))?;
    prog.push(Gate::query_in_place("B"))?;
    prog.push(Gate::compare("B", Reference::Constant(target), flag.clone()))?;
    // Shift and clean up
    prog.push(Gate::query_in_place("A").with_controls(&unflagged))?;
    prog.push(Gate::xor("A", "B").with_controls(&unflagged))?;
    prog.push_xor_constant("B", target, &flagged)?;
    // Diffuse the difference
    prog.push(Gate::new(crate::circuit::GateKind::Hadamard(flag.clone())))?;
    prog.push(Gate::diffusion("A").with_controls(&flagged))?;
    prog.push(Gate::new(crate::circuit::GateKind::Hadamard(flag)))?;
    Ok(prog)
}

/// The target-0 iteration on [`iteration_layout`].
pub fn iteration_circuit(n: usize) -> Result<CircuitProgram> {
    iteration_circuit_for(&iteration_layout(n)?, 0)
}

fn check_target(p: &Permutation, target: u64) -> Result<()> {
    if target >= p.size() as u64 {
        return Err(Error::ValueOutOfRange {
            register: alloc::string::String::from("target"),
            value: target,
        });
    }
    Ok(())
}

fn diagnostics(state: &StateVector, preimage: u64, size: u64) -> Result<IterationDiagnostics> {
    let other = (preimage + 1) % size;
    Ok(IterationDiagnostics {
        alpha: state.amplitude_of(&[("A", preimage)])?.re,
        beta: state.amplitude_of(&[("A", other)])?.re,
        abort_probability: state.probability("C", 1)?,
    })
}

/// Finds `π⁻¹(target)` with in-place queries only.
pub fn invert(p: &Permutation, target: u64, mode: Mode, seed: u64) -> Result<InversionReport> {
    check_target(p, target)?;
    let size = p.size() as u64;
    let preimage = p.preimage(target as usize) as u64;
    let iterations_planned = optimal_iterations(size);
    let mut report = InversionReport {
        target,
        preimage,
        mode,
        iterations_planned,
        iterations_run: 0,
        query_count: 1,
        output: None,
        aborted: false,
        early_exit: false,
        success: false,
        success_probability: 0.0,
        branch_probability: 1.0,
        diagnostics: Vec::new(),
    };
    if p.apply(target as usize) as u64 == target {
        report.early_exit = true;
        report.output = Some(target);
        report.success = true;
        report.success_probability = 1.0;
        return Ok(report);
    }

    let layout = iteration_layout(p.qubits())?;
    let exec = iteration_circuit_for(&layout, target)?.compile(p, &Default::default())?;
    let mut rng = seeded_rng(seed);
    let mut state = StateVector::uniform(layout, "A", &[])?;
    for _ in 0..iterations_planned {
        report.query_count += exec.run(&mut state) as u64;
        report.iterations_run += 1;
        let abort_probability = state.probability("C", 1)?;
        match mode {
            Mode::Deferred => {}
            Mode::PostselectExact => {
                let (prob, kept) = state.postselect("C", 0)?;
                report.branch_probability *= prob;
                state = kept;
            }
            Mode::Trajectory => {
                let (outcome, kept) = state.measure("C", &mut rng)?;
                let prob = if outcome == 0 {
                    1.0 - abort_probability
                } else {
                    abort_probability
                };
                report.branch_probability *= prob;
                state = kept;
                if outcome == 1 {
                    report.aborted = true;
                }
            }
        }
        let mut diag = diagnostics(&state, preimage, size)?;
        diag.abort_probability = abort_probability;
        report.diagnostics.push(diag);
        if report.aborted {
            return Ok(report);
        }
    }
    report.success_probability = state.probability("A", preimage)?;
    let (answer, _) = state.measure("A", &mut rng)?;
    report.output = Some(answer);
    report.success = answer == preimage;
    Ok(report)
}

/// [`invert`] with target 0.
pub fn invert_zero(p: &Permutation, mode: Mode, seed: u64) -> Result<InversionReport> {
    invert(p, 0, mode, seed)
}

/// Runs every iteration without measuring, copying the flag into a fresh
/// history qubit after each one. Returns the final state on the layout
/// `A, B, C, H` where `H` has one qubit per iteration.
///
/// Returns `None` when the classical check answers without iterating.
pub fn deferred_with_history(p: &Permutation, target: u64) -> Result<Option<StateVector>> {
    check_target(p, target)?;
    if p.apply(target as usize) as u64 == target {
        return Ok(None);
    }
    let n = p.qubits();
    let iterations = optimal_iterations(p.size() as u64) as usize;
    let layout = RegisterLayout::new(&[("A", n), ("B", n), ("C", 1), ("H", iterations)])?;
    let base = iteration_circuit_for(&layout, target)?;
    let mut prog = CircuitProgram::new(layout.clone());
    for t in 0..iterations {
        prog.append(&base)?;
        prog.push(Gate::not("H", t).with_control(Control::one("C", 0)))?;
    }
    let state = StateVector::uniform(layout, "A", &[])?;
    Ok(Some(prog.execute(p, state)?.0))
}

/// Conditions a [`deferred_with_history`] state on an all-zero history and
/// drops the history register. Returns the probability and the state on
/// [`iteration_layout`].
pub fn postselect_history(state: &StateVector) -> Result<(f64, StateVector)> {
    let (prob, kept) = state.postselect("H", 0)?;
    let a = kept.layout().register("A")?.width();
    let base = iteration_layout(a)?;
    let low = (1u64 << base.width()) - 1;
    let entries: Vec<_> = kept.amplitudes().into_iter().map(|(i, amp)| (i & low, amp)).collect();
    Ok((prob, StateVector::from_amplitudes(base, entries)?))
}

/// Final state of postselect-exact mode, before the last measurement.
pub fn postselected_final_state(p: &Permutation, target: u64) -> Result<(f64, StateVector)> {
    check_target(p, target)?;
    let layout = iteration_layout(p.qubits())?;
    let exec: Executor = iteration_circuit_for(&layout, target)?.compile(p, &Default::default())?;
    let mut state = StateVector::uniform(layout, "A", &[])?;
    let mut branch = 1.0;
    for _ in 0..optimal_iterations(p.size() as u64) {
        exec.run(&mut state);
        let (prob, kept) = state.postselect("C", 0)?;
        branch *= prob;
        state = kept;
    }
    Ok((branch, state))
}

/// Grover iteration count over a domain of `size` with one marked element.
pub fn grover_iterations(size: u64) -> u64 {
    let theta = (1.0 / (size as f64).sqrt()).asin();
    (PI / (4.0 * theta) + 1e-9).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeciderReport {
    pub answer: bool,
    /// Exact probability that the Grover stage lands on a preimage of 0
    /// inside the small half of the domain.
    pub success_probability: f64,
    pub grover_iterations: u64,
    /// XOR queries, counting the classical verification.
    pub xor_queries: u64,
}

/// Layout for the decider on an instance over `2n` qubits.
pub fn decider_layout(n: usize) -> Result<RegisterLayout> {
    RegisterLayout::new(&[("Xlo", n), ("Xhi", n), ("Y", 2 * n), ("F", 1)])?.with_view("X", &["Xlo", "Xhi"])
}

/// The Grover stage of the decider for instances over `2n` qubits: uniform
/// superposition on `Xlo`, then rounds of compute / phase-mark / uncompute /
/// diffuse.
pub fn decider_circuit(n: usize) -> Result<CircuitProgram> {
    let layout = decider_layout(n)?;
    let mut prog = CircuitProgram::new(layout);
    prog.push_hadamards("Xlo", &[])?;
    prog.push(Gate::not("F", 0))?;
    prog.push(Gate::hadamard("F", 0))?;
    for _ in 0..grover_iterations(1u64 << n) {
        prog.push(Gate::query_xor("X", "Y"))?;
        prog.push(Gate::compare("Y", Reference::Constant(0), Qubit::new("F", 0)))?;
        prog.push(Gate::query_xor("X", "Y"))?;
        prog.push(Gate::diffusion("Xlo"))?;
    }
    Ok(prog)
}

/// Grover search over `[N]` for a preimage of 0 under `f`, a permutation of
/// `[N^2]`, using XOR queries. Answers true iff the measured candidate is
/// verified by one more query.
pub fn grover_xor_decider(f: &Permutation, seed: u64) -> Result<DeciderReport> {
    if f.qubits() % 2 != 0 {
        return Err(Error::InvalidProblem(alloc::format!(
            "instance acts on {} qubits, expected an even count",
            f.qubits()
        )));
    }
    let n = f.qubits() / 2;
    let size = 1u64 << n;
    let k = grover_iterations(size);
    let prog = decider_circuit(n)?;
    let (state, queries) = prog.execute(f, StateVector::basis(prog.layout().clone(), &[])?)?;

    let hole = f.preimage(0) as u64;
    let success_probability = if hole < size {
        state.probability("Xlo", hole)?
    } else {
        0.0
    };
    let mut rng = seeded_rng(seed);
    let (candidate, _) = state.measure("Xlo", &mut rng)?;
    let answer = f.apply(candidate as usize) == 0;
    Ok(DeciderReport {
        answer,
        success_probability,
        grover_iterations: k,
        xor_queries: queries as u64 + 1,
    })
}

/// Accuracy of [`grover_xor_decider`] over `count` instances with uniformly
/// random answers, all derived from `seed`.
pub fn decider_accuracy(n: usize, count: usize, seed: u64) -> Result<f64> {
    let mut rng = seeded_rng(seed);
    let mut correct = 0usize;
    for _ in 0..count {
        let answer = rng.gen_bool(0.5);
        let f = crate::perm::sample_garb_instance(n, answer, rng.gen())?;
        let report = grover_xor_decider(&f, rng.gen())?;
        correct += (report.answer == answer) as usize;
    }
    Ok(correct as f64 / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{alpha_closed_form, recurrence_step, AmplitudePair};
    use crate::linalg::Matrix;
    use crate::perm::{sample_garb_instance, sample_uniform};
    use num_complex::Complex64;

    fn non_degenerate(n: usize, seed: u64) -> Permutation {
        (seed..)
            .map(|s| sample_uniform(n, s).unwrap())
            .find(|p| p.apply(0) != 0)
            .unwrap()
    }

    #[test]
    fn early_exit_on_fixed_zero() {
        let p = Permutation::new(2, alloc::vec![0, 2, 3, 1]).unwrap();
        for mode in Mode::ALL {
            let r = invert_zero(&p, mode, 1).unwrap();
            assert!(r.early_exit && r.success);
            assert_eq!((r.output, r.query_count), (Some(0), 1));
        }
    }

    #[test]
    fn four_elements_are_found_with_certainty() {
        let p = non_degenerate(2, 0);
        let r = invert_zero(&p, Mode::PostselectExact, 3).unwrap();
        assert_eq!(r.iterations_run, 2);
        assert!((r.success_probability - 1.0).abs() < 1e-12);
        assert!(r.success);
        assert_eq!(r.query_count, 5);
    }

    #[test]
    fn iteration_circuit_shape() {
        let prog = iteration_circuit(3).unwrap();
        assert_eq!(prog.len(), 8);
        assert_eq!(prog.query_count(), 2);
        let layout = iteration_layout(3).unwrap();
        assert_eq!(iteration_circuit_for(&layout, 5).unwrap().query_count(), 2);
    }

    #[test]
    fn diffuse_step_equals_minus_controlled_diffusion() {
        for n in 1..=3 {
            let layout = RegisterLayout::new(&[("A", n), ("C", 1)]).unwrap();
            let mut prog = CircuitProgram::new(layout);
            prog.push(Gate::hadamard("C", 0)).unwrap();
            prog.push(Gate::diffusion("A").with_control(Control::one("C", 0))).unwrap();
            prog.push(Gate::hadamard("C", 0)).unwrap();
            let p = Permutation::identity(n).unwrap();
            let got = prog.extract_unitary(&p).unwrap();

            // D ⊗ |−><−| + I ⊗ |+><+| built independently.
            let dim = 1usize << n;
            let diffusion = Matrix::from_fn(dim, dim, |i, j| {
                let v = 2.0 / dim as f64 - if i == j { 1.0 } else { 0.0 };
                Complex64::new(v, 0.0)
            });
            let minus = [[0.5, -0.5], [-0.5, 0.5]];
            let plus = [[0.5, 0.5], [0.5, 0.5]];
            let want = Matrix::from_fn(2 * dim, 2 * dim, |r, c| {
                let (ra, rc) = (r % dim, r / dim);
                let (ca, cc) = (c % dim, c / dim);
                let id = if ra == ca { 1.0 } else { 0.0 };
                diffusion[(ra, ca)] * minus[rc][cc] + Complex64::new(id * plus[rc][cc], 0.0)
            });
            assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
        }
    }

    #[test]
    fn postselected_state_keeps_two_amplitude_form() {
        for n in 2..=6 {
            let p = non_degenerate(n, 10 * n as u64);
            let size = p.size() as u64;
            let x = p.preimage(0) as u64;
            let layout = iteration_layout(n).unwrap();
            let exec = iteration_circuit(n).unwrap().compile(&p, &Default::default()).unwrap();
            let mut state = StateVector::uniform(layout, "A", &[]).unwrap();
            let mut pair = AmplitudePair::uniform(size).unwrap();
            for t in 1..=optimal_iterations(size) {
                exec.run(&mut state);
                assert!((state.probability("C", 1).unwrap() - 1.0 / size as f64).abs() < 1e-12);
                state = state.postselect("C", 0).unwrap().1;
                assert!((state.probability("B", 0).unwrap() - 1.0).abs() < 1e-12);
                pair = recurrence_step(pair).unwrap();
                for (index, amp) in state.amplitudes() {
                    let want = if index == x { pair.alpha } else { pair.beta };
                    assert!((amp - Complex64::new(want, 0.0)).norm() < 1e-10, "t={t}");
                }
                assert!((pair.alpha - alpha_closed_form(t, size)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fixed_zero_needs_no_special_case() {
        // Skip the classical check and iterate anyway: the amplitudes and
        // abort rates are the same as for any other permutation.
        for n in 2..=5 {
            let mut images = sample_uniform(n, 3).unwrap().images().to_vec();
            let z = images.iter().position(|&v| v == 0).unwrap();
            images.swap(0, z);
            let p = Permutation::new(n, images).unwrap();
            let size = p.size() as u64;
            let exec = iteration_circuit(n).unwrap().compile(&p, &Default::default()).unwrap();
            let mut state = StateVector::uniform(iteration_layout(n).unwrap(), "A", &[]).unwrap();
            for t in 1..=optimal_iterations(size) {
                exec.run(&mut state);
                assert!((state.probability("C", 1).unwrap() - 1.0 / size as f64).abs() < 1e-12);
                state = state.postselect("C", 0).unwrap().1;
                let alpha = alpha_closed_form(t, size);
                assert!((state.probability("A", 0).unwrap() - alpha * alpha).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nonzero_targets_follow_the_same_amplitudes() {
        let p = sample_uniform(4, 21).unwrap();
        for target in 0..16u64 {
            if p.apply(target as usize) as u64 == target {
                continue;
            }
            let r = invert(&p, target, Mode::PostselectExact, 0).unwrap();
            let alpha = alpha_closed_form(r.iterations_run, 16);
            assert!((r.success_probability - alpha * alpha).abs() < 1e-10, "target {target}");
            for d in &r.diagnostics {
                assert!((d.abort_probability - 1.0 / 16.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn history_postselection_matches_exact_mode() {
        for n in 2..=5 {
            let p = non_degenerate(n, 3 * n as u64);
            let (branch, exact) = postselected_final_state(&p, 0).unwrap();
            let history = deferred_with_history(&p, 0).unwrap().unwrap();
            let (prob, via) = postselect_history(&history).unwrap();
            assert!(via.trace_distance(&exact).unwrap() < 1e-9);
            assert!((prob - branch).abs() < 1e-9);
        }
    }

    #[test]
    fn query_budget_and_modes() {
        let p = non_degenerate(5, 1);
        let t = optimal_iterations(32);
        for mode in Mode::ALL {
            let r = invert_zero(&p, mode, 8).unwrap();
            if !r.aborted {
                assert_eq!(r.query_count, 2 * t + 1);
                assert_eq!(r.iterations_run, t);
            } else {
                assert_eq!(r.query_count, 2 * r.iterations_run + 1);
            }
        }
        assert_eq!("deferred".parse::<Mode>().unwrap(), Mode::Deferred);
        assert!("other".parse::<Mode>().is_err());
        assert!(invert(&p, 32, Mode::Deferred, 0).is_err());
    }

    #[test]
    fn trajectories_are_seeded() {
        let p = non_degenerate(4, 2);
        let a = invert_zero(&p, Mode::Trajectory, 42).unwrap();
        let b = invert_zero(&p, Mode::Trajectory, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grover_counts() {
        assert_eq!(grover_iterations(4), 1);
        assert_eq!(grover_iterations(8), 2);
    }

    #[test]
    fn decider_is_exact_for_two_qubit_halves() {
        for seed in 0..20 {
            let yes = sample_garb_instance(2, true, seed).unwrap();
            let r = grover_xor_decider(&yes, seed).unwrap();
            assert!((r.success_probability - 1.0).abs() < 1e-12);
            assert!(r.answer);
            assert_eq!(r.xor_queries, 3);
            let no = sample_garb_instance(2, false, seed).unwrap();
            assert!(!grover_xor_decider(&no, seed).unwrap().answer);
        }
    }

    #[test]
    fn decider_rejects_odd_width() {
        let f = sample_uniform(3, 0).unwrap();
        assert!(grover_xor_decider(&f, 0).is_err());
    }
}
