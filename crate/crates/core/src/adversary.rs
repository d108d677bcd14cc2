// SPDX-License-Identifier: Apache-2.0

//! Adversary-matrix workbench: problem and oracle matrices, block Hadamard
//! products, the relative γ₂ objective, vector factorization witnesses and
//! a seeded heuristic search over adversary matrices.
//!
//! Instances are indexed in the order they appear in a [`DecisionProblem`];
//! oracle matrices are `|D| x |D|` grids of `N x N` blocks, row block `f`
//! and column block `g` holding `I - O_f† O_g`.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{lambda_max, Matrix};
use crate::perm::{seeded_rng, Permutation};

/// Largest oracle-matrix dimension `|D| * N` handed to the eigensolver.
pub const MAX_ORACLE_DIMENSION: usize = 512;
/// Denominators `lambda_max(Γ∘Δ)` at or below this are rejected.
pub const DEGENERATE_THRESHOLD: f64 = 1e-10;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Same-label entries of magnitude at most this count as zero.
pub const EXTENDED_TOLERANCE: f64 = 1e-12;
pub const FACTORIZATION_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A boolean function on a finite set of permutations of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    instances: Vec<Permutation>,
    labels: Vec<bool>,
}

impl DecisionProblem {
    pub fn new(instances: Vec<Permutation>, labels: Vec<bool>) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::InvalidProblem(alloc::format!(
                "{} instances but {} labels",
                instances.len(),
                labels.len()
            )));
        }
        if !labels.contains(&true) || !labels.contains(&false) {
            return Err(Error::InvalidProblem("both labels must occur".to_string()));
        }
        let n = instances[0].qubits();
        if let Some(p) = instances.iter().find(|p| p.qubits() != n) {
            return Err(Error::WidthMismatch {
                expected: n,
                found: p.qubits(),
            });
        }
        for (i, p) in instances.iter().enumerate() {
            if instances[..i].contains(p) {
                return Err(Error::InvalidProblem(alloc::format!("instance {i} is repeated")));
            }
        }
        Ok(DecisionProblem { instances, labels })
    }

    /// Number of instances `|D|`.
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn qubits(&self) -> usize {
        self.instances[0].qubits()
    }

    /// Domain size `N` of every instance.
    pub fn size(&self) -> usize {
        self.instances[0].size()
    }

    pub fn instances(&self) -> &[Permutation] {
        &self.instances
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// `E[f, g] = 1` iff the labels of `f` and `g` differ.
    pub fn problem_matrix(&self) -> ProblemMatrix {
        let d = self.len();
        ProblemMatrix(Matrix::from_fn(d, d, |f, g| {
            if self.labels[f] != self.labels[g] {
                ONE
            } else {
                ZERO
            }
        }))
    }
}

/// The 0/1 label-disagreement matrix of a [`DecisionProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMatrix(Matrix);

impl ProblemMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Which unitary represents an instance `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    /// `|x> -> ω^{f(x)} |x>` with `ω = exp(2πi / N)`.
    Phase,
    /// `|x> -> |f(x)>`.
    InPlace,
}

impl OracleKind {
    pub const ALL: [OracleKind; 2] = [OracleKind::Phase, OracleKind::InPlace];

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Phase => "phase",
            OracleKind::InPlace => "inplace",
        }
    }

    /// Dense `N x N` unitary of instance `p`.
    pub fn unitary(self, p: &Permutation) -> Matrix {
        let size = p.size();
        match self {
            OracleKind::Phase => Matrix::from_fn(size, size, |r, c| if r == c { root(size, p.apply(c)) } else { ZERO }),
            OracleKind::InPlace => Matrix::from_fn(size, size, |r, c| if r == p.apply(c) { ONE } else { ZERO }),
        }
    }
}

impl core::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidProblem(alloc::format!("unknown oracle kind `{s}`")))
    }
}

/// `ω^k` with `ω = exp(2πi / size)`.
fn root(size: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k % size) as f64 / size as f64)
}

/// Block matrix with blocks `I - O_f† O_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatrix {
    kind: OracleKind,
    size: usize,
    count: usize,
    matrix: Matrix,
}

impl OracleMatrix {
    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    /// Block size `N`.
    pub fn block_size(&self) -> usize {
        self.size
    }

    /// Number of instances `|D|`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn block(&self, f: usize, g: usize) -> Matrix {
        self.matrix.block(f * self.size, g * self.size, self.size, self.size)
    }
}

fn check_dimension(dimension: usize) -> Result<()> {
    if dimension > MAX_ORACLE_DIMENSION {
        return Err(Error::DimensionCapExceeded {
            dimension,
            cap: MAX_ORACLE_DIMENSION,
        });
    }
    Ok(())
}

pub fn build_oracle_matrix(problem: &DecisionProblem, kind: OracleKind) -> Result<OracleMatrix> {
    let (count, size) = (problem.len(), problem.size());
    check_dimension(count * size)?;
    let unitaries: Vec<Matrix> = problem.instances().iter().map(|p| kind.unitary(p)).collect();
    let mut matrix = Matrix::zeros(count * size, count * size);
    for f in 0..count {
        for g in 0..count {
            if f == g {
                continue;
            }
            let block = Matrix::identity(size).sub(&unitaries[f].adjoint().matmul(&unitaries[g])?)?;
            matrix.set_block(f * size, g * size, &block);
        }
    }
    Ok(OracleMatrix {
        kind,
        size,
        count,
        matrix,
    })
}

/// A nonzero Hermitian matrix indexed by instances.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryMatrix(Matrix);

impl AdversaryMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if !matrix.is_hermitian(HERMITIAN_TOLERANCE) {
            return Err(Error::InvalidAdversary("not Hermitian".to_string()));
        }
        if matrix.max_abs() == 0.0 {
            return Err(Error::InvalidAdversary("zero matrix".to_string()));
        }
        Ok(AdversaryMatrix(matrix))
    }

    /// `Γ = E_φ`, the all-ones adversary on label-disagreeing pairs.
    pub fn from_problem(problem: &DecisionProblem) -> Self {
        AdversaryMatrix(problem.problem_matrix().0)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// `(Γ∘Δ)[f, g] = Γ[f, g] · Δ[f, g]`, each `N x N` block scaled by a scalar.
pub fn block_hadamard(gamma: &AdversaryMatrix, delta: &OracleMatrix) -> Result<Matrix> {
    let g = gamma.matrix();
    if g.rows() != delta.count {
        return Err(Error::DimensionMismatch {
            expected: delta.count,
            found: g.rows(),
        });
    }
    let size = delta.size;
    Ok(Matrix::from_fn(delta.matrix.rows(), delta.matrix.cols(), |r, c| {
        g[(r / size, c / size)] * delta.matrix[(r, c)]
    }))
}

/// `lambda_max(Γ∘E) / lambda_max(Γ∘Δ)`.
pub fn rel_gamma2_value(gamma: &AdversaryMatrix, problem: &ProblemMatrix, delta: &OracleMatrix) -> Result<f64> {
    let numerator = lambda_max(&gamma.matrix().hadamard(problem.matrix())?)?;
    let denominator = lambda_max(&block_hadamard(gamma, delta)?)?;
    if denominator <= DEGENERATE_THRESHOLD {
        return Err(Error::DegenerateDirection {
            lambda_max: denominator,
        });
    }
    Ok(numerator / denominator)
}

/// Whether `Γ` has a nonzero entry on a pair of instances with equal labels.
pub fn is_extended(gamma: &AdversaryMatrix, problem: &DecisionProblem) -> bool {
    let labels = problem.labels();
    let g = gamma.matrix();
    (0..g.rows()).any(|f| (0..g.cols()).any(|h| labels[f] == labels[h] && g[(f, h)].norm() > EXTENDED_TOLERANCE))
}

/// Vectors with `A[i, j] = <left_i | right_j>`; their largest norm product
/// bounds the Schur-multiplier norm of `A` by `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationWitness {
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
    pub bound: f64,
}

impl FactorizationWitness {
    /// `max_{i,j} ||left_i|| ||right_j||`.
    pub fn norm_product(&self) -> f64 {
        let largest = |vs: &[Vec<Complex64>]| {
            vs.iter()
                .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max)
        };
        largest(&self.left) * largest(&self.right)
    }
}

/// Checks that `witness` reproduces `a` entrywise within
/// [`FACTORIZATION_TOLERANCE`] and that its norm product is within `bound`.
pub fn verify_factorization(a: &Matrix, witness: &FactorizationWitness) -> bool {
    if witness.left.len() != a.rows() || witness.right.len() != a.cols() {
        return false;
    }
    let dim = witness.left.first().or(witness.right.first()).map_or(0, Vec::len);
    if witness.left.iter().chain(&witness.right).any(|v| v.len() != dim) {
        return false;
    }
    let reproduces = witness.left.iter().enumerate().all(|(i, u)| {
        witness.right.iter().enumerate().all(|(j, v)| {
            let inner: Complex64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            (inner - a[(i, j)]).norm() <= FACTORIZATION_TOLERANCE
        })
    });
    reproduces && witness.norm_product() <= witness.bound + FACTORIZATION_TOLERANCE
}

/// The split `Δ_phase∘E = identity_part - oracle_part` with witnesses.
///
/// On label-disagreeing pairs `identity_part` has blocks `I` and
/// `oracle_part` has blocks `O_f† O_g`; all other blocks are zero.
/// `disagreement_part` keeps only the entries of `oracle_part` at positions
/// `j` with `f(j) != g(j)`, and `disagreement_witness` is the construction
/// with the extra basis vector `|N>` that reproduces it with bound 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDecomposition {
    pub identity_part: Matrix,
    pub oracle_part: Matrix,
    pub identity_witness: FactorizationWitness,
    pub oracle_witness: FactorizationWitness,
    pub disagreement_part: Matrix,
    pub disagreement_witness: FactorizationWitness,
}

pub fn build_delta_witnesses(problem: &DecisionProblem) -> Result<DeltaDecomposition> {
    let (count, size) = (problem.len(), problem.size());
    let dim = count * size;
    check_dimension(dim)?;
    let labels = problem.labels();
    let image = |f: usize, j: usize| problem.instances()[f].apply(j);
    let disagree = |f: usize, g: usize| labels[f] != labels[g];
    let phase = |f: usize, g: usize, j: usize| root(size, image(g, j)) * root(size, image(f, j)).conj();

    let mut identity_part = Matrix::zeros(dim, dim);
    let mut oracle_part = Matrix::zeros(dim, dim);
    let mut disagreement_part = Matrix::zeros(dim, dim);
    for f in 0..count {
        for g in (0..count).filter(|&g| disagree(f, g)) {
            for j in 0..size {
                let (r, c) = (f * size + j, g * size + j);
                identity_part[(r, c)] = ONE;
                oracle_part[(r, c)] = phase(f, g, j);
                if image(f, j) != image(g, j) {
                    disagreement_part[(r, c)] = phase(f, g, j);
                }
            }
        }
    }

    // |j>|b> at index 2j + b.
    let bit = |j: usize, b: bool| 2 * j + b as usize;
    let basis = |len: usize, at: usize, amp: Complex64| {
        let mut v = alloc::vec![ZERO; len];
        v[at] = amp;
        v
    };
    let rows = || (0..count).flat_map(|f| (0..size).map(move |j| (f, j)));

    let identity_witness = FactorizationWitness {
        left: rows().map(|(f, j)| basis(2 * size, bit(j, labels[f]), ONE)).collect(),
        right: rows().map(|(f, j)| basis(2 * size, bit(j, !labels[f]), ONE)).collect(),
        bound: 1.0,
    };
    let oracle_witness = FactorizationWitness {
        left: rows()
            .map(|(f, j)| basis(2 * size, bit(j, labels[f]), root(size, image(f, j))))
            .collect(),
        right: rows()
            .map(|(f, j)| basis(2 * size, bit(j, !labels[f]), root(size, image(f, j))))
            .collect(),
        bound: 1.0,
    };
    // |j>|b>|k> with k in 0..=N, where k = N is the extra vector.
    let wide = size + 1;
    let slot = |j: usize, b: bool, k: usize| bit(j, b) * wide + k;
    let spread = |j: usize, b: bool, value: usize, sign: f64, amp: Complex64| {
        let mut v = alloc::vec![ZERO; 2 * size * wide];
        v[slot(j, b, size)] = amp;
        v[slot(j, b, value)] = amp * sign;
        v
    };
    let disagreement_witness = FactorizationWitness {
        left: rows()
            .map(|(f, j)| spread(j, labels[f], image(f, j), 1.0, root(size, image(f, j))))
            .collect(),
        right: rows()
            .map(|(f, j)| spread(j, !labels[f], image(f, j), -1.0, root(size, image(f, j))))
            .collect(),
        bound: 2.0,
    };

    Ok(DeltaDecomposition {
        identity_part,
        oracle_part,
        identity_witness,
        oracle_witness,
        disagreement_part,
        disagreement_witness,
    })
}

/// Random Hermitian adversary matrix: entries uniform in the unit square
/// (real on the diagonal), zero on same-label pairs unless `extended`.
pub fn sample_adversary<R: Rng + ?Sized>(problem: &DecisionProblem, extended: bool, rng: &mut R) -> AdversaryMatrix {
    let d = problem.len();
    let labels = problem.labels();
    loop {
        let mut m = Matrix::zeros(d, d);
        for f in 0..d {
            for g in f..d {
                if labels[f] == labels[g] && !extended {
                    continue;
                }
                let z = if f == g {
                    Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                };
                m[(f, g)] = z;
                m[(g, f)] = z.conj();
            }
        }
        if m.max_abs() > 0.0 {
            return AdversaryMatrix(m);
        }
    }
}

/// Best adversary matrix found by [`random_search_optimizer`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub gamma: AdversaryMatrix,
    pub value: f64,
    /// Candidates scored, degenerate ones included.
    pub evaluations: usize,
}

/// Seeded random search with local refinement for a large relative γ₂
/// value. Heuristic: the result is a lower estimate of the optimum.
///
/// Starts from `Γ = E_φ`; each of the remaining `budget - 1` candidates is
/// either a fresh random matrix or a perturbation of the incumbent with a
/// step that shrinks over the run. With `extended_allowed`, the standard
/// search runs first with the same budget and seed, and a second phase of
/// `budget` candidates refines its optimum over all Hermitian matrices, so
/// the result is never worse than the standard one.
pub fn random_search_optimizer(
    problem: &DecisionProblem,
    delta: &OracleMatrix,
    extended_allowed: bool,
    budget: usize,
    seed: u64,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::InvalidProblem("search budget must be at least 1".to_string()));
    }
    let e = problem.problem_matrix();
    let start = AdversaryMatrix::from_problem(problem);
    let value = rel_gamma2_value(&start, &e, delta)?;
    let mut rng = seeded_rng(seed);
    let standard = refine(problem, &e, delta, false, budget - 1, (start, value), &mut rng)?;
    let mut result = SearchResult {
        gamma: standard.0,
        value: standard.1,
        evaluations: budget,
    };
    if extended_allowed {
        let extended = refine(problem, &e, delta, true, budget, (result.gamma.clone(), result.value), &mut rng)?;
        result = SearchResult {
            gamma: extended.0,
            value: extended.1,
            evaluations: 2 * budget,
        };
    }
    Ok(result)
}

fn refine<R: Rng + ?Sized>(
    problem: &DecisionProblem,
    e: &ProblemMatrix,
    delta: &OracleMatrix,
    extended: bool,
    steps: usize,
    (mut best, mut best_value): (AdversaryMatrix, f64),
    rng: &mut R,
) -> Result<(AdversaryMatrix, f64)> {
    for t in 0..steps {
        let fresh = sample_adversary(problem, extended, rng);
        let candidate = if rng.gen_bool(0.5) {
            fresh
        } else {
            let step = 0.5 * (1.0 - t as f64 / steps as f64) + 0.01;
            let scale = best.matrix().max_abs();
            let moved = best.matrix().add(&fresh.matrix().scale(Complex64::new(step * scale, 0.0)))?;
            match AdversaryMatrix::new(moved) {
                Ok(g) => g,
                Err(_) => continue,
            }
        };
        match rel_gamma2_value(&candidate, e, delta) {
            Ok(v) if v > best_value => {
                best = candidate;
                best_value = v;
            }
            Ok(_) | Err(Error::DegenerateDirection { .. }) => {}
            Err(other) => return Err(other),
        }
    }
    Ok((best, best_value))
}
