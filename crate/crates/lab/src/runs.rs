// SPDX-License-Identifier: Apache-2.0

//! Experiment drivers. Each returns serializable rows whose field order is
//! the CSV column order.
//!
//! Work is spread over the current rayon pool; rows and every derived seed
//! depend only on the arguments, never on scheduling.

use anyhow::{ensure, Context, Result};
use permquery_core::adversary::{
    block_hadamard, build_delta_witnesses, build_oracle_matrix, random_search_optimizer, sample_adversary,
    DecisionProblem, OracleKind,
};
use permquery_core::analytic::sweep_row;
use permquery_core::inversion::{grover_xor_decider, invert, Mode};
use permquery_core::linalg::{lambda_max, operator_norm, Matrix};
use permquery_core::oracle::apply_xor;
use permquery_core::oracle_sim::{error_envelope, xor_from_fe, Construction, Evaluator, SimulationSummary};
use permquery_core::perm::{derive_seed, sample_garb_instance, sample_uniform, seeded_rng};
use permquery_core::{Permutation, RegisterLayout, StateVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// One run of the inversion algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertRow {
    pub n: usize,
    pub seed: u64,
    pub mode: &'static str,
    pub target: u64,
    #[serde(rename = "T")]
    pub iterations: u64,
    pub queries: u64,
    pub aborted: bool,
    pub success: bool,
    /// Real amplitude on the preimage after the last iteration; empty when
    /// the classical check answered.
    #[serde(rename = "alpha_T")]
    pub alpha_final: Option<f64>,
    pub success_prob: f64,
    pub branch_prob: f64,
    /// Empty after an abort.
    pub output: Option<u64>,
    pub preimage: u64,
}

/// Runs the inverter on `p`; measurements draw from `seed`.
pub fn invert_run(p: &Permutation, target: u64, mode: Mode, seed: u64) -> Result<InvertRow> {
    let report = invert(p, target, mode, seed)?;
    Ok(InvertRow {
        n: p.qubits(),
        seed,
        mode: mode.name(),
        target,
        iterations: report.iterations_planned,
        queries: report.query_count,
        aborted: report.aborted,
        success: report.success,
        alpha_final: report.diagnostics.last().map(|d| d.alpha),
        success_prob: report.success_probability,
        branch_prob: report.branch_probability,
        output: report.output,
        preimage: report.preimage,
    })
}

/// Analytic values for one `n` next to an empirical trajectory-mode rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: u64,
    #[serde(rename = "T")]
    pub iterations: u64,
    #[serde(rename = "alpha_T")]
    pub alpha_final: f64,
    /// Probability of finishing without abort and measuring the preimage.
    pub success_prob: f64,
    pub abort_total: f64,
    /// `success_prob` mixed with the `1/N` chance that the classical check
    /// answers outright.
    pub expected_success: f64,
    pub trials: usize,
    pub successes: usize,
    pub empirical_success: f64,
    /// Binomial standard error at `expected_success`.
    pub stderr: f64,
    pub within_3sigma: bool,
    pub seed: u64,
}

/// `trials` trajectory runs at each `n`, target 0, each on a fresh uniform
/// permutation.
pub fn sweep(ns: &[usize], trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    ns.iter()
        .map(|&n| {
            let analytic = sweep_row(1u64 << n)?;
            let family = derive_seed(seed, n as u64);
            let successes = (0..trials as u64)
                .into_par_iter()
                .map(|i| -> Result<bool> {
                    let p = sample_uniform(n, derive_seed(family, 2 * i))?;
                    Ok(invert(&p, 0, Mode::Trajectory, derive_seed(family, 2 * i + 1))?.success)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&s| s)
                .count();
            let size = analytic.size as f64;
            let expected = 1.0 / size + (1.0 - 1.0 / size) * analytic.success_probability;
            let empirical = successes as f64 / trials as f64;
            let stderr = (expected * (1.0 - expected) / trials as f64).sqrt();
            Ok(SweepRow {
                n,
                size: analytic.size,
                iterations: analytic.iterations,
                alpha_final: analytic.alpha_final,
                success_prob: analytic.success_probability,
                abort_total: analytic.abort_total,
                expected_success: expected,
                trials,
                successes,
                empirical_success: empirical,
                stderr,
                within_3sigma: (empirical - expected).abs() <= 3.0 * stderr + 1e-12,
                seed,
            })
        })
        .collect()
}

/// Worst and mean trace distance of one construction over all basis inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub construction: &'static str,
    pub n: usize,
    pub seed: u64,
    pub queries: usize,
    pub inputs: usize,
    pub max_trace_distance: f64,
    pub mean_trace_distance: f64,
    /// `2 sqrt(T/N)`.
    pub envelope: f64,
    pub within_envelope: bool,
}

/// Scores `construction` at width `n` on the permutation sampled from
/// `seed`, over every basis input.
pub fn simulate(construction: Construction, n: usize, seed: u64) -> Result<SimulationRow> {
    let p = sample_uniform(n, seed)?;
    let evaluator = Evaluator::new(construction, &p)?;
    let inputs = construction.inputs(n, true);
    let distances = inputs
        .par_iter()
        .map(|&(x, y)| evaluator.trace_distance(x, y))
        .collect::<permquery_core::Result<Vec<f64>>>()?;
    let summary = SimulationSummary::from_distances(construction, n, evaluator.queries(), &distances);
    let envelope = error_envelope(n);
    Ok(SimulationRow {
        construction: construction.name(),
        n,
        seed,
        queries: summary.queries,
        inputs: summary.inputs,
        max_trace_distance: summary.max_trace_distance,
        mean_trace_distance: summary.mean_trace_distance,
        envelope,
        within_envelope: summary.max_trace_distance <= envelope,
    })
}

/// Function erasure by circuit, and the XOR oracle rebuilt from exact
/// erasure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EraseRow {
    pub n: usize,
    pub seed: u64,
    pub queries: usize,
    pub inputs: usize,
    pub max_trace_distance: f64,
    pub mean_trace_distance: f64,
    pub envelope: f64,
    pub within_envelope: bool,
    /// Largest amplitude difference between the rebuilt and the true XOR
    /// oracle over all basis inputs.
    pub reduction_max_error: f64,
    /// In-place queries made by the rebuilt oracle per input.
    pub reduction_queries: usize,
}

/// Largest `|a_i - b_i|` over the union of both supports.
fn amplitude_gap(a: &StateVector, b: &StateVector) -> f64 {
    let mut gaps: std::collections::BTreeMap<u64, Complex64> = a.dump(0.0).into_iter().collect();
    for (i, amp) in b.dump(0.0) {
        *gaps.entry(i).or_default() -= amp;
    }
    gaps.values().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Runs the XOR oracle rebuilt from exact erasure on every basis input and
/// returns the largest amplitude error and the per-input query count.
pub fn reduction_error(p: &Permutation) -> Result<(f64, usize)> {
    let n = p.qubits();
    let layout = RegisterLayout::new(&[("X", n), ("Y", n), ("anc", n)])?;
    let size = p.size() as u64;
    let results = (0..size * size)
        .into_par_iter()
        .map(|k| -> Result<(f64, usize)> {
            let (x, y) = (k / size, k % size);
            let input = StateVector::basis(layout.clone(), &[("X", x), ("Y", y)])?;
            let (got, queries) = xor_from_fe(p, input.clone(), "X", "Y", "anc")?;
            let want = apply_xor(p, input, "X", "Y")?;
            Ok((amplitude_gap(&got, &want), queries))
        })
        .collect::<Result<Vec<_>>>()?;
    let err = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let queries = results.iter().map(|r| r.1).max().unwrap_or(0);
    ensure!(
        results.iter().all(|r| r.1 == queries),
        "query count varies across inputs"
    );
    Ok((err, queries))
}

pub fn erase(n: usize, seed: u64) -> Result<EraseRow> {
    let fe = simulate(Construction::FunctionErasure, n, seed)?;
    let (reduction_max_error, reduction_queries) = reduction_error(&sample_uniform(n, seed)?)?;
    Ok(EraseRow {
        n,
        seed,
        queries: fe.queries,
        inputs: fe.inputs,
        max_trace_distance: fe.max_trace_distance,
        mean_trace_distance: fe.mean_trace_distance,
        envelope: fe.envelope,
        within_envelope: fe.within_envelope,
        reduction_max_error,
        reduction_queries,
    })
}

/// Decider accuracy over random PermInvGarb instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarbRow {
    pub n: usize,
    pub seed: u64,
    pub instances: usize,
    pub yes_instances: usize,
    pub accuracy: f64,
    /// Over yes-instances: the exact probability that the search stage
    /// finds the preimage. Empty when there are none.
    pub min_success_prob: Option<f64>,
    pub mean_success_prob: Option<f64>,
    pub grover_iterations: u64,
    /// Per instance, including the verification query.
    pub xor_queries: u64,
}

/// Instance `i` has answer bit, permutation seed and measurement seed drawn
/// from streams `3i`, `3i+1`, `3i+2` of `seed`.
pub fn garb(n: usize, instances: usize, seed: u64) -> Result<GarbRow> {
    ensure!(instances > 0, "at least one instance is required");
    let reports = (0..instances as u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, permquery_core::inversion::DeciderReport)> {
            let answer = derive_seed(seed, 3 * i) & 1 == 1;
            let f = sample_garb_instance(n, answer, derive_seed(seed, 3 * i + 1))?;
            Ok((answer, grover_xor_decider(&f, derive_seed(seed, 3 * i + 2))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let correct = reports.iter().filter(|(a, r)| *a == r.answer).count();
    let yes: Vec<f64> = reports
        .iter()
        .filter(|(a, _)| *a)
        .map(|(_, r)| r.success_probability)
        .collect();
    let first = &reports[0].1;
    Ok(GarbRow {
        n,
        seed,
        instances,
        yes_instances: yes.len(),
        accuracy: correct as f64 / instances as f64,
        min_success_prob: yes.iter().copied().reduce(f64::min),
        mean_success_prob: (!yes.is_empty()).then(|| yes.iter().sum::<f64>() / yes.len() as f64),
        grover_iterations: first.grover_iterations,
        xor_queries: first.xor_queries,
    })
}

/// Random dense matrices used for the Schur-multiplier check.
pub const SCHUR_SAMPLES: usize = 20;

/// Outcome of the structural checks on one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Invariants {
    /// `Δ_phase = Δ_phase ∘ Δ_inplace` entrywise.
    pub support_lemma: bool,
    /// `λ_max(Γ∘Δ_phase) <= 3 λ_max(Γ∘Δ_inplace) + 1e-9` for every sampled
    /// non-extended `Γ`.
    pub three_times_bound: bool,
    /// `λ_max` equals the operator norm for those products, within `1e-9`.
    pub bipartite_spectrum: bool,
    /// `||G∘(Δ_phase∘E)|| <= 3 ||G||` for random dense `G`.
    pub schur_envelope: bool,
}

impl Invariants {
    pub fn all(&self) -> bool {
        self.support_lemma && self.three_times_bound && self.bipartite_spectrum && self.schur_envelope
    }
}

/// Runs the structural checks with `samples` adversary matrices drawn from
/// `seed`.
pub fn check_invariants(problem: &DecisionProblem, samples: usize, seed: u64) -> Result<Invariants> {
    let phase = build_oracle_matrix(problem, OracleKind::Phase)?;
    let perm = build_oracle_matrix(problem, OracleKind::InPlace)?;
    let support_lemma = phase.matrix().hadamard(perm.matrix())?.max_abs_diff(phase.matrix())? <= 1e-12
        && phase
            .matrix()
            .entries()
            .iter()
            .zip(perm.matrix().entries())
            .all(|(a, b)| a.norm() <= 1e-12 || (b.re - 1.0).abs() <= 1e-12 && b.im.abs() <= 1e-12);

    let outcomes = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool)> {
            let mut rng = seeded_rng(derive_seed(seed, i));
            let gamma = sample_adversary(problem, false, &mut rng);
            let a = block_hadamard(&gamma, &phase)?;
            let b = block_hadamard(&gamma, &perm)?;
            let (la, lb) = (lambda_max(&a)?, lambda_max(&b)?);
            let bipartite = (la - operator_norm(&a)?).abs() <= 1e-9 && (lb - operator_norm(&b)?).abs() <= 1e-9;
            Ok((la <= 3.0 * lb + 1e-9, bipartite))
        })
        .collect::<Result<Vec<_>>>()?;

    let decomposition = build_delta_witnesses(problem)?;
    let masked = decomposition.identity_part.sub(&decomposition.oracle_part)?;
    let dim = masked.rows();
    let schur = (0..SCHUR_SAMPLES as u64)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let mut rng = seeded_rng(derive_seed(seed, samples as u64 + i));
            let g = Matrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            Ok(operator_norm(&g.hadamard(&masked)?)? <= 3.0 * operator_norm(&g)? + 1e-9)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Invariants {
        support_lemma,
        three_times_bound: outcomes.iter().all(|o| o.0),
        bipartite_spectrum: outcomes.iter().all(|o| o.1),
        schur_envelope: schur.iter().all(|&ok| ok),
    })
}

/// Best relative γ₂ value found, with the structural checks on the problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryRow {
    pub kind: &'static str,
    pub extended: bool,
    pub instances: usize,
    pub n: usize,
    pub seed: u64,
    pub budget: usize,
    pub samples: usize,
    pub best_value: f64,
    pub support_lemma: bool,
    pub three_times_bound: bool,
    pub bipartite_spectrum: bool,
    pub schur_envelope: bool,
}

pub fn adversary(
    problem: &DecisionProblem,
    kind: OracleKind,
    extended: bool,
    budget: usize,
    samples: usize,
    seed: u64,
) -> Result<AdversaryRow> {
    let delta = build_oracle_matrix(problem, kind)?;
    let search = random_search_optimizer(problem, &delta, extended, budget, seed)
        .context("adversary search failed")?;
    let invariants = check_invariants(problem, samples, derive_seed(seed, 1))?;
    Ok(AdversaryRow {
        kind: kind.name(),
        extended,
        instances: problem.len(),
        n: problem.qubits(),
        seed,
        budget,
        samples,
        best_value: search.value,
        support_lemma: invariants.support_lemma,
        three_times_bound: invariants.three_times_bound,
        bipartite_spectrum: invariants.bipartite_spectrum,
        schur_envelope: invariants.schur_envelope,
    })
}
