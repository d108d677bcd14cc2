// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A permutation was requested or supplied with zero qubits.
    ZeroQubits,
    /// The image list is not a bijection on `[2^n]`.
    NotABijection { n: usize },
    /// Two permutations (or a permutation and a register) disagree on width.
    WidthMismatch { expected: usize, found: usize },
    UnknownRegister(String),
    DuplicateRegister(String),
    InvalidLayout(String),
    LayoutMismatch,
    /// A basis value does not fit in the register it addresses.
    ValueOutOfRange { register: String, value: u64 },
    /// Two operands of a gate overlap where the gate needs them disjoint.
    AliasedOperands(String),
    /// Postselection onto an outcome whose probability is numerically zero.
    EmptyBranch { probability: f64 },
    WidthCapExceeded { width: usize, cap: usize },
    /// A state handed to the exact function-erasure primitive is not in
    /// `span{|x>|pi(x)>}`.
    PromiseViolation { off_promise_probability: f64 },
    /// `lambda_max` of the denominator matrix is below the degeneracy threshold.
    DegenerateDirection { lambda_max: f64 },
    DimensionMismatch { expected: usize, found: usize },
    /// A dense matrix would exceed the eigensolver's dimension cap.
    DimensionCapExceeded { dimension: usize, cap: usize },
    /// A matrix required to be Hermitian is not, or is zero where nonzero is required.
    InvalidAdversary(String),
    InvalidProblem(String),
    /// A query substitution maps between kinds with different operand counts.
    InvalidRule(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroQubits => write!(f, "qubit count must be at least 1"),
            Error::NotABijection { n } => {
                write!(f, "images are not a permutation of [2^{n}]")
            }
            Error::WidthMismatch { expected, found } => {
                write!(f, "width mismatch: expected {expected} qubits, found {found}")
            }
            Error::UnknownRegister(name) => write!(f, "unknown register `{name}`"),
            Error::DuplicateRegister(name) => write!(f, "duplicate register `{name}`"),
            Error::InvalidLayout(msg) => write!(f, "invalid layout: {msg}"),
            Error::LayoutMismatch => write!(f, "states or program use different layouts"),
            Error::ValueOutOfRange { register, value } => {
                write!(f, "value {value} does not fit in register `{register}`")
            }
            Error::AliasedOperands(msg) => write!(f, "aliased operands: {msg}"),
            Error::EmptyBranch { probability } => {
                write!(f, "empty branch: outcome probability {probability:e}")
            }
            Error::WidthCapExceeded { width, cap } => {
                write!(f, "total width {width} exceeds the cap of {cap} qubits")
            }
            Error::PromiseViolation {
                off_promise_probability,
            } => write!(
                f,
                "state has {off_promise_probability:e} probability outside span{{|x>|pi(x)>}}"
            ),
            Error::DegenerateDirection { lambda_max } => write!(
                f,
                "degenerate direction: lambda_max of the oracle side is {lambda_max:e}"
            ),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::DimensionCapExceeded { dimension, cap } => {
                write!(f, "matrix dimension {dimension} exceeds the cap of {cap}")
            }
            Error::InvalidAdversary(msg) => write!(f, "invalid adversary matrix: {msg}"),
            Error::InvalidProblem(msg) => write!(f, "invalid decision problem: {msg}"),
            Error::InvalidRule(msg) => write!(f, "invalid substitution rule: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
