// SPDX-License-Identifier: Apache-2.0

//! Closed-form amplitudes of the inversion algorithm.
//!
//! Conditioned on never aborting, the search register always has the form
//! `alpha |x*> + beta sum_{x != x*} |x>` with real `alpha`, `beta`. Everything
//! here is plain double-precision arithmetic and scales to any `N`.

use core::f64::consts::FRAC_PI_2;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Added to `t*` before flooring. At `N = 2` and `N = 4` the exact value is an
/// integer and rounding in `atan` would otherwise drop one iteration; the
/// nearest non-integer `t*` for `N <= 2^40` is much further than this away.
const FLOOR_GUARD: f64 = 1e-9;

/// Amplitude on the marked element and on each of the other `size - 1`
/// basis states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub alpha: f64,
    pub beta: f64,
    pub size: u64,
}

impl AmplitudePair {
    /// The uniform starting point `alpha = beta = 1/sqrt(N)`.
    pub fn uniform(size: u64) -> Result<Self> {
        check_size(size)?;
        let a = 1.0 / (size as f64).sqrt();
        Ok(AmplitudePair {
            alpha: a,
            beta: a,
            size,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha * self.alpha + (self.size - 1) as f64 * self.beta * self.beta
    }
}

fn check_size(size: u64) -> Result<()> {
    if size < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: size as usize,
        });
    }
    Ok(())
}

/// One Mark / Shift / Diffuse round followed by renormalization on the
/// no-abort branch.
pub fn recurrence_step(a: AmplitudePair) -> Result<AmplitudePair> {
    check_size(a.size)?;
    let n = a.size as f64;
    let keep = ((n - 1.0) / n).sqrt();
    Ok(AmplitudePair {
        alpha: keep * (a.beta + a.alpha),
        beta: keep * a.beta - a.alpha / (n.sqrt() * (n - 1.0).sqrt()),
        size: a.size,
    })
}

/// Rotation angle per iteration, `atan(1/sqrt(N-1))`.
pub fn rotation_angle(size: u64) -> f64 {
    (1.0 / ((size - 1) as f64).sqrt()).atan()
}

/// `alpha_t = sin((t+1) atan(1/sqrt(N-1)))`.
pub fn alpha_closed_form(t: u64, size: u64) -> f64 {
    ((t + 1) as f64 * rotation_angle(size)).sin()
}

/// The real `t*` with `alpha_{t*} = 1`.
pub fn ideal_iterations(size: u64) -> f64 {
    FRAC_PI_2 / rotation_angle(size) - 1.0
}

/// `T = floor(t*)`.
pub fn optimal_iterations(size: u64) -> u64 {
    (ideal_iterations(size) + FLOOR_GUARD).floor() as u64
}

/// Probability that a single measurement of the flag qubit aborts. The
/// branch norm works out to exactly `1/N` whatever the amplitudes.
pub fn abort_probability(size: u64) -> f64 {
    1.0 / size as f64
}

/// Probability of never aborting in `T` iterations.
pub fn survival_probability(size: u64) -> f64 {
    (1.0 - abort_probability(size)).powi(optimal_iterations(size) as i32)
}

/// Probability of aborting at some point in `T` iterations.
pub fn abort_total(size: u64) -> f64 {
    1.0 - survival_probability(size)
}

/// Probability that the whole run (measure each round, then measure the
/// search register) returns the marked element.
pub fn success_probability(size: u64) -> f64 {
    let alpha = alpha_closed_form(optimal_iterations(size), size);
    survival_probability(size) * alpha * alpha
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub size: u64,
    pub iterations: u64,
    pub alpha_final: f64,
    pub success_probability: f64,
    pub abort_total: f64,
}

pub fn sweep_row(size: u64) -> Result<SweepRow> {
    check_size(size)?;
    let iterations = optimal_iterations(size);
    Ok(SweepRow {
        size,
        iterations,
        alpha_final: alpha_closed_form(iterations, size),
        success_probability: success_probability(size),
        abort_total: abort_total(size),
    })
}
