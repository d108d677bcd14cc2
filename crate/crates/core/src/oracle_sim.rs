// SPDX-License-Identifier: Apache-2.0

//! Approximate simulation of other oracles from in-place queries, and
//! function erasure in both directions.
//!
//! Every construction shares one layout, [`sim_layout`]:
//!
//! | register   | width | role                                  |
//! |------------|-------|---------------------------------------|
//! | `X`        | n     | input                                 |
//! | `Y`        | n     | output / second input                 |
//! | `A`        | n     | search register of the inverter       |
//! | `B`        | n     | scratch of the inverter               |
//! | `C`        | 1     | flag of the inverter                  |
//! | `G`        | 1     | set when `π(0)` already is the target |
//! | `D`        | n     | gadget auxiliary                      |
//! | `catalyst` | n     | holds `π(0)` while the inverter runs  |
//!
//! Where the measured algorithm would read the flag and abort, the inverter
//! ends each round with a [`Gate::halt`] on the flag: the flag is copied to
//! a fresh ancilla that nothing else touches, so a flagged branch is frozen
//! for good. Each copy loses about `T/N` probability this way and the lost
//! part can never interfere with the rest.

use alloc::string::ToString;
use alloc::vec::Vec;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::analytic::optimal_iterations;
use crate::circuit::{CircuitProgram, Control, Executor, Gate, QuerySubstitution, Qubit, Reference};
use crate::error::{Error, Result};
use crate::oracle::gadget_gates;
use crate::perm::Permutation;
use crate::statevec::{RegisterLayout, StateVector};

/// Probability allowed outside `span{|x>|π(x)>}` before the exact function
/// eraser refuses its input.
pub const PROMISE_TOLERANCE: f64 = 1e-10;

pub fn sim_layout(n: usize) -> Result<RegisterLayout> {
    RegisterLayout::new(&[
        ("X", n),
        ("Y", n),
        ("A", n),
        ("B", n),
        ("C", 1),
        ("G", 1),
        ("D", n),
        ("catalyst", n),
    ])
}

fn n_of(layout: &RegisterLayout) -> Result<usize> {
    Ok(layout.register("X")?.width())
}

/// Coherent inverter: `|t>|0>_A -> ≈ |t>|π⁻¹(t)>_A` where `t` is the value
/// of `target` (register `X` or a constant), with the catalyst holding
/// `π(0)` and `B, C, G, D` zero. Uses `2T` in-place queries.
///
/// When `π(0) = t` the answer is already known to be 0. `G` records that
/// case by comparing the catalyst with the target, every other gate is
/// controlled on `G = 0`, and a second comparison clears `G` again.
/// Every round ends with a halt on the flag.
pub fn coherent_inverter(layout: &RegisterLayout, target: &Reference) -> Result<CircuitProgram> {
    let n = n_of(layout)?;
    let iterations = optimal_iterations(1u64 << n);
    let flag = Qubit::new("C", 0);
    let known = Qubit::new("G", 0);
    let live = [Control::zero("G", 0)];
    let unflagged = [Control::zero("C", 0), live[0].clone()];
    let flagged = [Control::one("C", 0), live[0].clone()];
    let check = Gate::compare("catalyst", target.clone(), known);
    let mut prog = CircuitProgram::new(layout.clone());
    prog.push(check.clone())?;
    prog.push_hadamards("A", &live)?;
    for _ in 0..iterations {
        prog.push(Gate::xor("A", "B").with_controls(&live))?;
        for gate in gadget_gates("B", &live, "catalyst", "D") {
            prog.push(gate)?;
        }
        prog.push(Gate::compare("B", target.clone(), flag.clone()).with_controls(&live))?;
        for gate in gadget_gates("A", &unflagged, "catalyst", "D") {
            prog.push(gate)?;
        }
        prog.push(Gate::xor("A", "B").with_controls(&unflagged))?;
        match target {
            Reference::Register(r) => prog.push(Gate::xor(r, "B").with_controls(&flagged))?,
            Reference::Constant(c) => prog.push_xor_constant("B", *c, &flagged)?,
        }
        prog.push(Gate::hadamard("C", 0).with_controls(&live))?;
        prog.push(Gate::diffusion("A").with_controls(&flagged))?;
        prog.push(Gate::hadamard("C", 0).with_controls(&live))?;
        prog.push(Gate::halt("C", 0).with_controls(&live))?;
    }
    prog.push(check)?;
    Ok(prog)
}

/// The inverter with `X` as target.
pub fn build_coherent_inverter(n: usize) -> Result<CircuitProgram> {
    coherent_inverter(&sim_layout(n)?, &Reference::Register("X".to_string()))
}

/// `(A_{π⁻¹})†` written with forward queries: the inverted inverter with
/// every inverse query replaced by a forward one. Maps
/// `|t>|π(t)>_A -> ≈ |t>|0>_A` when the catalyst holds `π⁻¹(0)`.
pub fn uncompute_inverter(layout: &RegisterLayout, target: &Reference) -> Result<CircuitProgram> {
    Ok(coherent_inverter(layout, target)?
        .invert()
        .substitute_queries(&QuerySubstitution::inverse_to_forward()))
}

fn erase_catalyst_on(layout: &RegisterLayout) -> Result<CircuitProgram> {
    let zero = Reference::Constant(0);
    let mut prog = coherent_inverter(layout, &zero)?;
    prog.push(Gate::swap("A", "catalyst"))?;
    prog.append(&uncompute_inverter(layout, &zero)?)?;
    prog.push(Gate::query_in_place("catalyst"))?;
    Ok(prog)
}

/// Takes `|π(0)>` in the catalyst (everything else zero) to `≈ |0...0>`.
pub fn erase_catalyst(n: usize) -> Result<CircuitProgram> {
    erase_catalyst_on(&sim_layout(n)?)
}

/// `|x>|y> -> ≈ |x>|y XOR π⁻¹(x)>` with all workspace, catalyst included,
/// starting and ending at zero. `6T + 3` queries.
pub fn simulate_xor_inverse(n: usize) -> Result<CircuitProgram> {
    let layout = sim_layout(n)?;
    let mut prog = CircuitProgram::new(layout.clone());
    prog.push(Gate::query_in_place("catalyst"))?;
    prog.append(&coherent_inverter(&layout, &Reference::Register("X".to_string()))?)?;
    prog.push(Gate::xor("A", "Y"))?;
    prog.push(Gate::query_in_place("A"))?;
    prog.push(Gate::xor("X", "A"))?;
    prog.append(&erase_catalyst_on(&layout)?)?;
    Ok(prog)
}

/// `|x>|y> -> ≈ |x>|y XOR π(x)>`, obtained mechanically from
/// [`simulate_xor_inverse`].
pub fn simulate_xor(n: usize) -> Result<CircuitProgram> {
    Ok(simulate_xor_inverse(n)?
        .invert()
        .substitute_queries(&QuerySubstitution::inverse_to_forward()))
}

/// `|x>|0> -> ≈ |π⁻¹(x)>|0>` on `(X, Y)`.
pub fn simulate_inplace_inverse(n: usize) -> Result<CircuitProgram> {
    let mut prog = simulate_xor_inverse(n)?;
    prog.push(Gate::swap("X", "Y"))?;
    prog.append(&simulate_xor(n)?)?;
    Ok(prog)
}

/// `sum a_x |x>|π(x)> -> ≈ sum a_x |x>|0>` on `(X, Y)`.
pub fn function_erasure(n: usize) -> Result<CircuitProgram> {
    simulate_xor(n)
}

/// Exact function erasure on `(src, dst)`: `|x>|π(x)> -> |x>|0>`.
///
/// Not a circuit. Amplitude outside the promise subspace is dropped, and
/// more than [`PROMISE_TOLERANCE`] of it is an error.
pub fn magic_function_erasure(
    p: &Permutation,
    state: &StateVector,
    src: &str,
    dst: &str,
) -> Result<StateVector> {
    let layout = state.layout();
    let (s, d) = (layout.register(src)?, layout.register(dst)?);
    for reg in [s, d] {
        if reg.width() != p.qubits() {
            return Err(Error::WidthMismatch {
                expected: p.qubits(),
                found: reg.width(),
            });
        }
    }
    if s.mask() & d.mask() != 0 {
        return Err(Error::AliasedOperands(alloc::format!("{src} and {dst}")));
    }
    let mut off = 0.0;
    let mut kept = Vec::new();
    for (index, amp) in state.amplitudes() {
        if d.read(index) == p.apply(s.read(index) as usize) as u64 {
            kept.push((d.write(index, 0), amp));
        } else {
            off += amp.norm_sqr();
        }
    }
    if off > PROMISE_TOLERANCE {
        return Err(Error::PromiseViolation {
            off_promise_probability: off,
        });
    }
    StateVector::from_amplitudes(layout.clone(), kept)
}

/// The XOR oracle on `(x_reg, y_reg)` from one in-place query and one exact
/// function erasure, using the zeroed register `anc`. Returns the state and
/// the number of in-place queries (always 1).
pub fn xor_from_fe(
    p: &Permutation,
    state: StateVector,
    x_reg: &str,
    y_reg: &str,
    anc: &str,
) -> Result<(StateVector, usize)> {
    let prog = CircuitProgram::from_gates(
        state.layout().clone(),
        alloc::vec![
            Gate::xor(x_reg, anc),
            Gate::query_in_place(anc),
            Gate::xor(anc, y_reg),
        ],
    )?;
    let (state, queries) = prog.execute(p, state)?;
    Ok((magic_function_erasure(p, &state, x_reg, anc)?, queries))
}

/// The oracle constructions measured against their exact targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    XorInverse,
    Xor,
    InplaceInverse,
    EraseCatalyst,
    FunctionErasure,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::XorInverse,
        Construction::Xor,
        Construction::InplaceInverse,
        Construction::EraseCatalyst,
        Construction::FunctionErasure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::XorInverse => "xor-inverse",
            Construction::Xor => "xor",
            Construction::InplaceInverse => "inplace-inverse",
            Construction::EraseCatalyst => "erase-catalyst",
            Construction::FunctionErasure => "fe",
        }
    }

    pub fn build(self, n: usize) -> Result<CircuitProgram> {
        match self {
            Construction::XorInverse => simulate_xor_inverse(n),
            Construction::Xor => simulate_xor(n),
            Construction::InplaceInverse => simulate_inplace_inverse(n),
            Construction::EraseCatalyst => erase_catalyst(n),
            Construction::FunctionErasure => function_erasure(n),
        }
    }

    /// Basis inputs `(x, y)` to sweep. Only the XOR constructions read `y`;
    /// with `all_y` false they use `y = 0` and `y = N - 1`.
    pub fn inputs(self, n: usize, all_y: bool) -> Vec<(u64, u64)> {
        let size = 1u64 << n;
        match self {
            Construction::XorInverse | Construction::Xor => {
                let ys: Vec<u64> = if all_y {
                    (0..size).collect()
                } else {
                    alloc::vec![0, size - 1]
                };
                (0..size)
                    .flat_map(|x| ys.iter().map(move |&y| (x, y)))
                    .collect()
            }
            Construction::InplaceInverse | Construction::FunctionErasure => {
                (0..size).map(|x| (x, 0)).collect()
            }
            Construction::EraseCatalyst => alloc::vec![(0, 0)],
        }
    }

    /// Input state and exact target state for basis input `(x, y)`.
    pub fn case(self, p: &Permutation, x: u64, y: u64) -> Result<(StateVector, StateVector)> {
        let layout = sim_layout(p.qubits())?;
        let fwd = |v: u64| p.apply(v as usize) as u64;
        let back = |v: u64| p.preimage(v as usize) as u64;
        let (input, output): (Vec<(&str, u64)>, Vec<(&str, u64)>) = match self {
            Construction::XorInverse => (
                alloc::vec![("X", x), ("Y", y)],
                alloc::vec![("X", x), ("Y", y ^ back(x))],
            ),
            Construction::Xor => (
                alloc::vec![("X", x), ("Y", y)],
                alloc::vec![("X", x), ("Y", y ^ fwd(x))],
            ),
            Construction::InplaceInverse => (alloc::vec![("X", x)], alloc::vec![("X", back(x))]),
            Construction::EraseCatalyst => (alloc::vec![("catalyst", fwd(0))], Vec::new()),
            Construction::FunctionErasure => {
                (alloc::vec![("X", x), ("Y", fwd(x))], alloc::vec![("X", x)])
            }
        };
        Ok((
            StateVector::basis(layout.clone(), &input)?,
            StateVector::basis(layout, &output)?,
        ))
    }
}

impl core::str::FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Construction::ALL
            .into_iter()
            .find(|c| c.name() == s || (s == "function-erasure" && *c == Construction::FunctionErasure))
            .ok_or_else(|| Error::InvalidProblem(alloc::format!("unknown construction `{s}`")))
    }
}

/// Trace-distance summary of one construction on one permutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub construction: Construction,
    pub n: usize,
    pub queries: usize,
    pub max_trace_distance: f64,
    pub mean_trace_distance: f64,
    pub inputs: usize,
}

/// `2 sqrt(T/N)`, the tolerance used for the simulations.
pub fn error_envelope(n: usize) -> f64 {
    let size = 1u64 << n;
    2.0 * (optimal_iterations(size) as f64 / size as f64).sqrt()
}

/// A construction compiled against one permutation, scoring basis inputs.
#[derive(Debug, Clone)]
pub struct Evaluator {
    construction: Construction,
    permutation: Permutation,
    exec: Executor,
    queries: usize,
}

impl Evaluator {
    pub fn new(construction: Construction, p: &Permutation) -> Result<Self> {
        let program = construction.build(p.qubits())?;
        Ok(Evaluator {
            construction,
            permutation: p.clone(),
            exec: program.compile(p, &Default::default())?,
            queries: program.query_count(),
        })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Trace distance between the output on basis input `(x, y)` and the
    /// exact target. The target is a basis state, so this is
    /// `sqrt(1 - |<target|out>|^2)`, computed with
    /// [`Executor::overlap`]; values near zero carry an absolute error of
    /// about `1e-8`.
    pub fn trace_distance(&self, x: u64, y: u64) -> Result<f64> {
        let (state, want) = self.construction.case(&self.permutation, x, y)?;
        let o = self.exec.overlap(&state, &want)?.norm().min(1.0);
        Ok(((1.0 - o) * (1.0 + o)).sqrt())
    }
}

/// Runs `construction` on every input in `inputs` and compares with the
/// exact target.
pub fn evaluate(construction: Construction, p: &Permutation, inputs: &[(u64, u64)]) -> Result<SimulationSummary> {
    let evaluator = Evaluator::new(construction, p)?;
    let distances = inputs
        .iter()
        .map(|&(x, y)| evaluator.trace_distance(x, y))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SimulationSummary::from_distances(construction, p.qubits(), evaluator.queries(), &distances))
}

impl SimulationSummary {
    /// Aggregates per-input trace distances, in input order.
    pub fn from_distances(construction: Construction, n: usize, queries: usize, distances: &[f64]) -> Self {
        let sum: f64 = distances.iter().sum();
        SimulationSummary {
            construction,
            n,
            queries,
            max_trace_distance: distances.iter().copied().fold(0.0, f64::max),
            mean_trace_distance: if distances.is_empty() {
                0.0
            } else {
                sum / distances.len() as f64
            },
            inputs: distances.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::QueryKind;
    use crate::oracle::apply_xor;
    use crate::perm::sample_uniform;
    use num_complex::Complex64;

    fn fixed_point_free(n: usize, seed: u64) -> Permutation {
        (seed..)
            .map(|s| sample_uniform(n, s).unwrap())
            .find(|p| !p.has_fixed_point())
            .unwrap()
    }

    #[test]
    fn query_counts() {
        for n in 2..=5 {
            let t = optimal_iterations(1 << n) as usize;
            assert_eq!(build_coherent_inverter(n).unwrap().query_count(), 2 * t);
            assert_eq!(erase_catalyst(n).unwrap().query_count(), 4 * t + 1);
            let inv = simulate_xor_inverse(n).unwrap();
            assert_eq!(inv.query_count(), 6 * t + 3);
            let fwd = simulate_xor(n).unwrap();
            assert_eq!(fwd.query_count(), inv.query_count());
            assert_eq!(fwd.query_count_of(QueryKind::InPlaceInverse), 0);
            assert_eq!(simulate_inplace_inverse(n).unwrap().query_count(), 12 * t + 6);
            assert_eq!(sim_layout(n).unwrap().width(), 6 * n + 2);
        }
    }

    #[test]
    fn inverter_finds_preimages_of_register_input() {
        let n = 3;
        let p = fixed_point_free(n, 0);
        let layout = sim_layout(n).unwrap();
        let exec = build_coherent_inverter(n).unwrap().compile(&p, &Default::default()).unwrap();
        for x in 0..8u64 {
            let mut s = StateVector::basis(layout.clone(), &[("X", x), ("catalyst", p.apply(0) as u64)]).unwrap();
            exec.run(&mut s);
            let want = layout
                .basis_index(&[("X", x), ("A", p.preimage(x as usize) as u64), ("catalyst", p.apply(0) as u64)])
                .unwrap();
            assert!(s.trace_distance_to_basis(want) <= error_envelope(n) / 2.0 + 1e-12, "x={x}");
        }
    }

    #[test]
    fn every_query_in_the_inverter_is_uncontrolled() {
        let prog = build_coherent_inverter(3).unwrap();
        assert!(prog.gates().iter().filter(|g| g.is_query()).all(|g| g.controls.is_empty()));
    }

    #[test]
    fn inverter_on_identity_stays_near_diagonal() {
        let n = 3;
        let p = Permutation::identity(n).unwrap();
        let layout = sim_layout(n).unwrap();
        let exec = build_coherent_inverter(n).unwrap().compile(&p, &Default::default()).unwrap();
        for x in 0..8u64 {
            let mut s = StateVector::basis(layout.clone(), &[("X", x)]).unwrap();
            exec.run(&mut s);
            let want = layout.basis_index(&[("X", x), ("A", x)]).unwrap();
            let d = s.trace_distance_to_basis(want);
            if x == 0 {
                assert!(d < 1e-12);
            } else {
                assert!(d <= error_envelope(n));
            }
        }
    }

    #[test]
    fn uncomputer_clears_forward_values() {
        let n = 3;
        let p = fixed_point_free(n, 4);
        let layout = sim_layout(n).unwrap();
        let b = uncompute_inverter(&layout, &Reference::Register("X".to_string())).unwrap();
        let exec = b.compile(&p, &Default::default()).unwrap();
        let cat = p.preimage(0) as u64;
        for x in 0..8u64 {
            let fx = p.apply(x as usize) as u64;
            let mut s = StateVector::basis(layout.clone(), &[("X", x), ("A", fx), ("catalyst", cat)]).unwrap();
            exec.run(&mut s);
            let want = layout.basis_index(&[("X", x), ("catalyst", cat)]).unwrap();
            assert!(s.trace_distance_to_basis(want) <= error_envelope(n) / 2.0 + 1e-12);
        }
    }

    #[test]
    fn catalyst_erasure() {
        let p = fixed_point_free(3, 7);
        let s = evaluate(Construction::EraseCatalyst, &p, &[(0, 0)]).unwrap();
        assert!(s.max_trace_distance <= error_envelope(3));
        // With π(0) = 0 both inverters are switched off by the catalyst check.
        let mut images = p.images().to_vec();
        let z = p.preimage(0);
        images.swap(0, z);
        for q in [Permutation::identity(3).unwrap(), Permutation::new(3, images).unwrap()] {
            let exact = evaluate(Construction::EraseCatalyst, &q, &[(0, 0)]).unwrap();
            assert!(exact.max_trace_distance < 1e-7);
        }
    }

    #[test]
    fn simulations_stay_inside_envelope_for_three_qubits() {
        let p = fixed_point_free(3, 11);
        for c in Construction::ALL {
            let s = evaluate(c, &p, &c.inputs(3, true)).unwrap();
            assert!(s.max_trace_distance <= error_envelope(3), "{} {}", c.name(), s.max_trace_distance);
        }
    }

    #[test]
    fn xor_simulation_cancels_on_matching_y() {
        let p = fixed_point_free(3, 2);
        for x in 0..8u64 {
            let (input, _) = Construction::XorInverse.case(&p, x, p.preimage(x as usize) as u64).unwrap();
            let (out, _) = simulate_xor_inverse(3).unwrap().execute(&p, input).unwrap();
            let want = out.layout().basis_index(&[("X", x)]).unwrap();
            assert!(out.trace_distance_to_basis(want) <= error_envelope(3));
        }
    }

    #[test]
    fn xor_simulation_twice_is_near_identity() {
        let n = 3;
        let p = fixed_point_free(n, 5);
        let mut twice = simulate_xor(n).unwrap();
        twice.append(&simulate_xor(n).unwrap()).unwrap();
        let exec = twice.compile(&p, &Default::default()).unwrap();
        for x in 0..8u64 {
            let (mut s, _) = Construction::Xor.case(&p, x, 3).unwrap();
            let start = s.clone();
            exec.run(&mut s);
            assert!(s.trace_distance(&start).unwrap() <= 2.0 * error_envelope(n));
        }
    }

    #[test]
    fn inplace_inverse_then_forward_query() {
        let n = 3;
        let p = fixed_point_free(n, 9);
        let mut prog = simulate_inplace_inverse(n).unwrap();
        prog.push(Gate::query_in_place("X")).unwrap();
        let exec = prog.compile(&p, &Default::default()).unwrap();
        for x in 0..8u64 {
            let mut s = StateVector::basis(sim_layout(n).unwrap(), &[("X", x)]).unwrap();
            let start = s.clone();
            exec.run(&mut s);
            assert!(s.trace_distance(&start).unwrap() <= error_envelope(n));
        }
    }

    #[test]
    fn erasure_of_a_promise_superposition() {
        let n = 3;
        let p = fixed_point_free(n, 13);
        let layout = sim_layout(n).unwrap();
        let amps: Vec<Complex64> = (0..8).map(|k| Complex64::new(1.0 + k as f64, 0.3 * k as f64)).collect();
        let input = StateVector::from_amplitudes(
            layout.clone(),
            (0..8u64).map(|x| {
                let i = layout.basis_index(&[("X", x), ("Y", p.apply(x as usize) as u64)]).unwrap();
                (i, amps[x as usize])
            }),
        )
        .unwrap();
        let want = StateVector::from_amplitudes(
            layout.clone(),
            (0..8u64).map(|x| (layout.basis_index(&[("X", x)]).unwrap(), amps[x as usize])),
        )
        .unwrap();
        let (out, _) = function_erasure(n).unwrap().execute(&p, input).unwrap();
        assert!(out.trace_distance(&want).unwrap() <= error_envelope(n));
    }

    #[test]
    fn fe_reduction_reproduces_xor_oracle() {
        for n in 1..=4 {
            let p = sample_uniform(n, 60 + n as u64).unwrap();
            let layout = RegisterLayout::new(&[("X", n), ("Y", n), ("anc", n)]).unwrap();
            for x in 0..(1u64 << n) {
                for y in 0..(1u64 << n) {
                    let s = StateVector::basis(layout.clone(), &[("X", x), ("Y", y)]).unwrap();
                    let (got, q) = xor_from_fe(&p, s.clone(), "X", "Y", "anc").unwrap();
                    let want = apply_xor(&p, s, "X", "Y").unwrap();
                    assert_eq!(q, 1);
                    assert_eq!(got.amplitudes().len(), 1);
                    assert_eq!(got.amplitudes()[0].0, want.amplitudes()[0].0);
                    assert!((got.amplitudes()[0].1 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn magic_erasure_rejects_off_promise_input() {
        let p = sample_uniform(2, 1).unwrap();
        let layout = RegisterLayout::new(&[("X", 2), ("Y", 2)]).unwrap();
        let bad = (p.apply(1) as u64 + 1) % 4;
        let s = StateVector::basis(layout, &[("X", 1), ("Y", bad)]).unwrap();
        assert!(matches!(
            magic_function_erasure(&p, &s, "X", "Y"),
            Err(Error::PromiseViolation { .. })
        ));
    }

    #[test]
    fn construction_names_round_trip() {
        for c in Construction::ALL {
            assert_eq!(c.name().parse::<Construction>().unwrap(), c);
        }
        assert!("nope".parse::<Construction>().is_err());
    }
}
