// SPDX-License-Identifier: Apache-2.0

//! Reversible circuit IR with abstract oracle queries.
//!
//! A [`CircuitProgram`] is a layout plus an ordered gate list. Query gates
//! are resolved against a [`Permutation`] only at execution time, which is
//! what lets a program be inverted gate-by-gate and have its query kinds
//! rewritten without ever touching the oracle.
//!
//! Every gate is unitary except [`GateKind::Halt`], a deferred measurement:
//! it copies a qubit into a fresh ancilla that no other gate reads, and the
//! executor retires the copied branch instead of storing the ancilla.
//! [`CircuitProgram::invert`] keeps a halt in place (with its own fresh
//! ancilla), so programs containing one are inverted only on the unhalted
//! subspace.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::perm::Permutation;
use crate::statevec::{Register, RegisterLayout, StateVector};

/// Width cap for [`CircuitProgram::extract_unitary`] (a 4096 x 4096 matrix).
pub const MAX_UNITARY_WIDTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Qubit {
    pub register: String,
    pub index: usize,
}

impl Qubit {
    pub fn new(register: &str, index: usize) -> Self {
        Qubit {
            register: register.to_string(),
            index,
        }
    }
}

/// Fires when `qubit` reads `on`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: Qubit,
    pub on: bool,
}

impl Control {
    pub fn one(register: &str, index: usize) -> Self {
        Control {
            qubit: Qubit::new(register, index),
            on: true,
        }
    }

    pub fn zero(register: &str, index: usize) -> Self {
        Control {
            qubit: Qubit::new(register, index),
            on: false,
        }
    }

    pub fn negated(&self) -> Self {
        Control {
            qubit: self.qubit.clone(),
            on: !self.on,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Reference {
    Register(String),
    Constant(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryKind {
    InPlace,
    InPlaceInverse,
    Xor,
    Phase,
    PhaseInverse,
}

impl QueryKind {
    /// Number of register operands.
    pub fn arity(self) -> usize {
        match self {
            QueryKind::Xor => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GateKind {
    Not(Qubit),
    Hadamard(Qubit),
    /// `|x>|y> -> |x>|y XOR x>`.
    RegisterXor { src: String, dst: String },
    RegisterSwap { a: String, b: String },
    /// Flips `flag` iff `register` equals `reference`.
    CompareFlag {
        register: String,
        reference: Reference,
        flag: Qubit,
    },
    /// `2 H|0><0|H - I` on the register.
    Diffusion(String),
    /// `|x> -> |π(x)>`.
    QueryInPlace(String),
    /// `|x> -> |π⁻¹(x)>`.
    QueryInPlaceInverse(String),
    /// `|x>|y> -> |x>|y XOR π(x)>`.
    QueryXor { src: String, dst: String },
    /// `|x> -> ω_N^{π(x)} |x>`.
    QueryPhase(String),
    /// `|x> -> ω_N^{-π(x)} |x>`.
    QueryPhaseInverse(String),
    /// Retires every branch with the qubit set.
    Halt(Qubit),
}

impl GateKind {
    pub fn query_kind(&self) -> Option<QueryKind> {
        match self {
            GateKind::QueryInPlace(_) => Some(QueryKind::InPlace),
            GateKind::QueryInPlaceInverse(_) => Some(QueryKind::InPlaceInverse),
            GateKind::QueryXor { .. } => Some(QueryKind::Xor),
            GateKind::QueryPhase(_) => Some(QueryKind::Phase),
            GateKind::QueryPhaseInverse(_) => Some(QueryKind::PhaseInverse),
            _ => None,
        }
    }

    fn query_registers(&self) -> Vec<String> {
        match self {
            GateKind::QueryInPlace(r)
            | GateKind::QueryInPlaceInverse(r)
            | GateKind::QueryPhase(r)
            | GateKind::QueryPhaseInverse(r) => alloc::vec![r.clone()],
            GateKind::QueryXor { src, dst } => alloc::vec![src.clone(), dst.clone()],
            _ => Vec::new(),
        }
    }

    fn query_from(kind: QueryKind, mut regs: Vec<String>) -> GateKind {
        match kind {
            QueryKind::InPlace => GateKind::QueryInPlace(regs.remove(0)),
            QueryKind::InPlaceInverse => GateKind::QueryInPlaceInverse(regs.remove(0)),
            QueryKind::Phase => GateKind::QueryPhase(regs.remove(0)),
            QueryKind::PhaseInverse => GateKind::QueryPhaseInverse(regs.remove(0)),
            QueryKind::Xor => {
                let dst = regs.remove(1);
                GateKind::QueryXor {
                    src: regs.remove(0),
                    dst,
                }
            }
        }
    }

    fn inverse(&self) -> GateKind {
        match self {
            GateKind::QueryInPlace(r) => GateKind::QueryInPlaceInverse(r.clone()),
            GateKind::QueryInPlaceInverse(r) => GateKind::QueryInPlace(r.clone()),
            GateKind::QueryPhase(r) => GateKind::QueryPhaseInverse(r.clone()),
            GateKind::QueryPhaseInverse(r) => GateKind::QueryPhase(r.clone()),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind) -> Self {
        Gate {
            kind,
            controls: Vec::new(),
        }
    }

    pub fn with_control(mut self, control: Control) -> Self {
        self.controls.push(control);
        self
    }

    pub fn with_controls(mut self, controls: &[Control]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    pub fn not(register: &str, index: usize) -> Self {
        Gate::new(GateKind::Not(Qubit::new(register, index)))
    }

    pub fn halt(register: &str, index: usize) -> Self {
        Gate::new(GateKind::Halt(Qubit::new(register, index)))
    }

    pub fn hadamard(register: &str, index: usize) -> Self {
        Gate::new(GateKind::Hadamard(Qubit::new(register, index)))
    }

    pub fn xor(src: &str, dst: &str) -> Self {
        Gate::new(GateKind::RegisterXor {
            src: src.to_string(),
            dst: dst.to_string(),
        })
    }

    pub fn swap(a: &str, b: &str) -> Self {
        Gate::new(GateKind::RegisterSwap {
            a: a.to_string(),
            b: b.to_string(),
        })
    }

    pub fn compare(register: &str, reference: Reference, flag: Qubit) -> Self {
        Gate::new(GateKind::CompareFlag {
            register: register.to_string(),
            reference,
            flag,
        })
    }

    pub fn diffusion(register: &str) -> Self {
        Gate::new(GateKind::Diffusion(register.to_string()))
    }

    pub fn query_in_place(register: &str) -> Self {
        Gate::new(GateKind::QueryInPlace(register.to_string()))
    }

    pub fn query_in_place_inverse(register: &str) -> Self {
        Gate::new(GateKind::QueryInPlaceInverse(register.to_string()))
    }

    pub fn query_xor(src: &str, dst: &str) -> Self {
        Gate::new(GateKind::QueryXor {
            src: src.to_string(),
            dst: dst.to_string(),
        })
    }

    pub fn query_phase(register: &str) -> Self {
        Gate::new(GateKind::QueryPhase(register.to_string()))
    }

    pub fn is_query(&self) -> bool {
        self.kind.query_kind().is_some()
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            controls: self.controls.clone(),
        }
    }
}

/// Rewrite rule for [`CircuitProgram::substitute_queries`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySubstitution {
    map: Vec<(QueryKind, QueryKind)>,
}

impl QuerySubstitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(mut self, from: QueryKind, to: QueryKind) -> Result<Self> {
        if from.arity() != to.arity() {
            return Err(Error::InvalidRule(alloc::format!(
                "{from:?} and {to:?} take different operand counts"
            )));
        }
        self.map.retain(|(f, _)| *f != from);
        self.map.push((from, to));
        Ok(self)
    }

    /// `InPlaceInverse -> InPlace`, the rewrite used to turn an inverted
    /// circuit back into one that queries π.
    pub fn inverse_to_forward() -> Self {
        QuerySubstitution {
            map: alloc::vec![(QueryKind::InPlaceInverse, QueryKind::InPlace)],
        }
    }

    fn lookup(&self, kind: QueryKind) -> Option<QueryKind> {
        self.map.iter().find(|(f, _)| *f == kind).map(|(_, t)| *t)
    }
}

/// Registers holding the catalyst `|π(0)>` and a zeroed auxiliary, used when
/// controlled in-place queries are executed through the catalyst gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetRegisters {
    pub catalyst: String,
    pub aux: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecOptions {
    /// When set, controlled `QueryInPlace` gates run as the swap / query /
    /// catalyst-XOR / swap sequence instead of the ideal controlled unitary.
    pub honest_gadget: Option<GadgetRegisters>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitProgram {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl CircuitProgram {
    pub fn new(layout: RegisterLayout) -> Self {
        CircuitProgram {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(layout: RegisterLayout, gates: Vec<Gate>) -> Result<Self> {
        let mut program = CircuitProgram::new(layout);
        for gate in gates {
            program.push(gate)?;
        }
        Ok(program)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking it against the layout.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        validate(&self.layout, &gate)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Hadamard on every qubit of `register`, each under `controls`.
    pub fn push_hadamards(&mut self, register: &str, controls: &[Control]) -> Result<()> {
        let width = self.layout.register(register)?.width();
        for i in 0..width {
            self.push(Gate::hadamard(register, i).with_controls(controls))?;
        }
        Ok(())
    }

    /// `register ^= value` as `Not` gates on the set bits, each under
    /// `controls`.
    pub fn push_xor_constant(&mut self, register: &str, value: u64, controls: &[Control]) -> Result<()> {
        let reg = self.layout.register(register)?;
        if value >= reg.dim() {
            return Err(Error::ValueOutOfRange {
                register: register.to_string(),
                value,
            });
        }
        for i in 0..reg.width() {
            if value >> i & 1 == 1 {
                self.push(Gate::not(register, i).with_controls(controls))?;
            }
        }
        Ok(())
    }

    /// Appends every gate of `other`, which must share this layout.
    pub fn append(&mut self, other: &CircuitProgram) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::LayoutMismatch);
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Number of query gates; a controlled query counts once.
    pub fn query_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_query()).count()
    }

    pub fn query_count_of(&self, kind: QueryKind) -> usize {
        self.gates
            .iter()
            .filter(|g| g.kind.query_kind() == Some(kind))
            .count()
    }

    /// Reverses the gate list and inverts every gate.
    pub fn invert(&self) -> CircuitProgram {
        CircuitProgram {
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Rewrites query kinds according to `rule`; every other gate, operand
    /// and control is kept as is.
    pub fn substitute_queries(&self, rule: &QuerySubstitution) -> CircuitProgram {
        let gates = self
            .gates
            .iter()
            .map(|g| match g.kind.query_kind().and_then(|k| rule.lookup(k)) {
                Some(to) => Gate {
                    kind: GateKind::query_from(to, g.kind.query_registers()),
                    controls: g.controls.clone(),
                },
                None => g.clone(),
            })
            .collect();
        CircuitProgram {
            layout: self.layout.clone(),
            gates,
        }
    }

    /// Resolves the program against `p` for repeated execution.
    pub fn compile(&self, p: &Permutation, options: &ExecOptions) -> Result<Executor> {
        Executor::new(self, p, options)
    }

    /// Runs the program on `state`, returning the output and the number of
    /// query gates applied.
    pub fn execute(&self, p: &Permutation, state: StateVector) -> Result<(StateVector, usize)> {
        self.execute_with(p, state, &ExecOptions::default())
    }

    pub fn execute_with(
        &self,
        p: &Permutation,
        mut state: StateVector,
        options: &ExecOptions,
    ) -> Result<(StateVector, usize)> {
        if state.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        let exec = self.compile(p, options)?;
        let count = exec.run(&mut state);
        Ok((state, count))
    }

    /// Dense unitary of the program for oracle `p`: column `k` is the output
    /// on basis state `k`.
    pub fn extract_unitary(&self, p: &Permutation) -> Result<Matrix> {
        self.extract_unitary_with(p, &ExecOptions::default())
    }

    pub fn extract_unitary_with(&self, p: &Permutation, options: &ExecOptions) -> Result<Matrix> {
        let width = self.layout.width();
        if width > MAX_UNITARY_WIDTH {
            return Err(Error::WidthCapExceeded {
                width,
                cap: MAX_UNITARY_WIDTH,
            });
        }
        let dim = 1usize << width;
        let exec = self.compile(p, options)?;
        let mut u = Matrix::zeros(dim, dim);
        for k in 0..dim as u64 {
            let mut s = StateVector::from_amplitudes(self.layout.clone(), [(k, Complex64::new(1.0, 0.0))])?;
            exec.run(&mut s);
            for (i, a) in s.amplitudes() {
                u[(i as usize, k as usize)] = a;
            }
        }
        Ok(u)
    }
}

fn register_mask(layout: &RegisterLayout, name: &str) -> Result<u64> {
    Ok(layout.register(name)?.mask())
}

fn qubit_mask(layout: &RegisterLayout, q: &Qubit) -> Result<u64> {
    Ok(1u64 << layout.qubit(&q.register, q.index)?)
}

fn disjoint(masks: &[u64], what: &str) -> Result<()> {
    let mut seen = 0u64;
    for &m in masks {
        if seen & m != 0 {
            return Err(Error::AliasedOperands(what.to_string()));
        }
        seen |= m;
    }
    Ok(())
}

fn same_width(layout: &RegisterLayout, a: &str, b: &str) -> Result<()> {
    let (wa, wb) = (layout.register(a)?.width(), layout.register(b)?.width());
    if wa != wb {
        return Err(Error::WidthMismatch {
            expected: wa,
            found: wb,
        });
    }
    Ok(())
}

fn validate(layout: &RegisterLayout, gate: &Gate) -> Result<()> {
    let mut masks: Vec<u64> = match &gate.kind {
        GateKind::Not(q) | GateKind::Hadamard(q) | GateKind::Halt(q) => {
            alloc::vec![qubit_mask(layout, q)?]
        }
        GateKind::RegisterXor { src, dst }
        | GateKind::QueryXor { src, dst } => {
            same_width(layout, src, dst)?;
            alloc::vec![register_mask(layout, src)?, register_mask(layout, dst)?]
        }
        GateKind::RegisterSwap { a, b } => {
            same_width(layout, a, b)?;
            alloc::vec![register_mask(layout, a)?, register_mask(layout, b)?]
        }
        GateKind::CompareFlag {
            register,
            reference,
            flag,
        } => {
            let mut m = alloc::vec![register_mask(layout, register)?, qubit_mask(layout, flag)?];
            match reference {
                Reference::Register(r) => {
                    same_width(layout, register, r)?;
                    m.push(register_mask(layout, r)?);
                }
                Reference::Constant(c) => {
                    let reg = layout.register(register)?;
                    if *c >= reg.dim() {
                        return Err(Error::ValueOutOfRange {
                            register: register.clone(),
                            value: *c,
                        });
                    }
                }
            }
            m
        }
        GateKind::Diffusion(r)
        | GateKind::QueryInPlace(r)
        | GateKind::QueryInPlaceInverse(r)
        | GateKind::QueryPhase(r)
        | GateKind::QueryPhaseInverse(r) => alloc::vec![register_mask(layout, r)?],
    };
    for c in &gate.controls {
        masks.push(qubit_mask(layout, &c.qubit)?);
    }
    disjoint(&masks, &alloc::format!("{:?}", gate.kind))
}

#[derive(Debug, Clone, Copy)]
struct Span {
    offset: usize,
    mask: u64,
    low: u64,
}

impl Span {
    fn of(reg: &Register) -> Self {
        Span {
            offset: reg.offset(),
            mask: reg.mask(),
            low: reg.dim() - 1,
        }
    }

    #[inline]
    fn read(self, b: u64) -> u64 {
        (b >> self.offset) & self.low
    }

    #[inline]
    fn write(self, b: u64, v: u64) -> u64 {
        (b & !self.mask) | (v << self.offset)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Flip(u64),
    Halt(u64),
    Hadamard(usize),
    Xor { src: Span, dst: Span },
    Swap { a: Span, b: Span },
    CompareConst { reg: Span, value: u64, flag: u64 },
    CompareReg { reg: Span, other: Span, flag: u64 },
    Diffuse { offset: usize, width: usize },
    /// `H(flag)`, diffusion controlled on the flag, `H(flag)`, as one pass.
    FlagDiffuse { flag: usize, offset: usize, width: usize },
    /// Hadamard on every qubit of a contiguous range.
    Walsh { offset: usize, width: usize },
    InPlace { reg: Span, inverse: bool },
    QueryXor { src: Span, dst: Span },
    Phase { reg: Span, inverse: bool },
}

impl Kernel {
    /// Qubits whose value this kernel can change.
    fn writes(&self) -> u64 {
        match *self {
            Kernel::Flip(mask) => mask,
            Kernel::Halt(_) | Kernel::Phase { .. } => 0,
            Kernel::Hadamard(bit) => 1 << bit,
            Kernel::Xor { dst, .. } | Kernel::QueryXor { dst, .. } => dst.mask,
            Kernel::Swap { a, b } => a.mask | b.mask,
            Kernel::CompareConst { flag, .. } | Kernel::CompareReg { flag, .. } => flag,
            Kernel::Diffuse { offset, width } | Kernel::Walsh { offset, width } => ((1u64 << width) - 1) << offset,
            Kernel::FlagDiffuse { flag, offset, width } => (((1u64 << width) - 1) << offset) | 1 << flag,
            Kernel::InPlace { reg, .. } => reg.mask,
        }
    }

    /// Maps basis states to basis states (up to a phase), or retires them.
    fn is_classical(&self) -> bool {
        !matches!(
            self,
            Kernel::Hadamard(_) | Kernel::Diffuse { .. } | Kernel::FlagDiffuse { .. } | Kernel::Walsh { .. }
        )
    }

    /// Qubits whose value this kernel reads, controls excluded.
    fn reads(&self) -> u64 {
        match *self {
            Kernel::Flip(_)
            | Kernel::Halt(_)
            | Kernel::Hadamard(_)
            | Kernel::Diffuse { .. }
            | Kernel::FlagDiffuse { .. }
            | Kernel::Walsh { .. } => 0,
            Kernel::Xor { src, .. } | Kernel::QueryXor { src, .. } => src.mask,
            Kernel::Swap { a, b } => a.mask | b.mask,
            Kernel::CompareConst { reg, .. } => reg.mask,
            Kernel::CompareReg { reg, other, .. } => reg.mask | other.mask,
            Kernel::InPlace { reg, .. } | Kernel::Phase { reg, .. } => reg.mask,
        }
    }
}

/// Replaces every `H(f)`, `Diffuse` controlled on `f = 1`, `H(f)` triple
/// sharing the other controls by a single [`Kernel::FlagDiffuse`].
fn fuse_flag_diffusions(steps: Vec<Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::with_capacity(steps.len());
    let mut i = 0;
    while i < steps.len() {
        if let [first, middle, last, ..] = &steps[i..] {
            if let (Kernel::Hadamard(f), Kernel::Diffuse { offset, width }, Kernel::Hadamard(g)) =
                (first.kernel, middle.kernel, last.kernel)
            {
                let bit = 1u64 << f;
                let same_outer = first.ctrl_mask == last.ctrl_mask && first.ctrl_value == last.ctrl_value;
                if f == g
                    && same_outer
                    && first.ctrl_mask & bit == 0
                    && middle.ctrl_mask == first.ctrl_mask | bit
                    && middle.ctrl_value == first.ctrl_value | bit
                {
                    out.push(Step {
                        kernel: Kernel::FlagDiffuse {
                            flag: f,
                            offset,
                            width,
                        },
                        ctrl_mask: first.ctrl_mask,
                        ctrl_value: first.ctrl_value,
                        is_query: false,
                    });
                    i += 3;
                    continue;
                }
            }
        }
        out.push(steps[i].clone());
        i += 1;
    }
    out
}

/// Replaces every run of Hadamards that share
/// controls and cover a contiguous range of qubits by one [`Kernel::Walsh`].
fn fuse_hadamards(steps: Vec<Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::with_capacity(steps.len());
    let mut i = 0;
    while i < steps.len() {
        let first = &steps[i];
        let mut bits = 0u64;
        let mut j = i;
        while let Some(step) = steps.get(j) {
            match step.kernel {
                Kernel::Hadamard(q)
                    if step.ctrl_mask == first.ctrl_mask
                        && step.ctrl_value == first.ctrl_value
                        && (bits | first.ctrl_mask) & 1 << q == 0 =>
                {
                    bits |= 1 << q;
                    j += 1;
                }
                _ => break,
            }
        }
        let offset = bits.trailing_zeros() as usize;
        let width = bits.count_ones() as usize;
        if width >= 2 && bits >> offset == (1u64 << width) - 1 {
            out.push(Step {
                kernel: Kernel::Walsh { offset, width },
                ctrl_mask: first.ctrl_mask,
                ctrl_value: first.ctrl_value,
                is_query: false,
            });
            i = j;
        } else {
            out.push(first.clone());
            i += 1;
        }
    }
    out
}

/// Output of the backward pass in [`Executor::run_toward`]: `(mask, value)`
/// pairs a branch must satisfy at the start and after each step.
struct Requirements {
    start: (u64, u64),
    after: Vec<Option<(u64, u64)>>,
}

fn swap_fields(b: u64, x: Span, y: Span) -> u64 {
    let (vx, vy) = (x.read(b), y.read(b));
    y.write(x.write(b, vy), vx)
}

#[derive(Debug, Clone)]
struct Step {
    kernel: Kernel,
    ctrl_mask: u64,
    ctrl_value: u64,
    is_query: bool,
}

/// A program resolved against one permutation. Cheap to run many times.
#[derive(Debug, Clone)]
pub struct Executor {
    segments: Vec<(usize, usize)>,
    layout: RegisterLayout,
    steps: Vec<Step>,
    forward: Vec<u64>,
    backward: Vec<u64>,
    roots: Vec<Complex64>,
}

impl Executor {
    fn new(program: &CircuitProgram, p: &Permutation, options: &ExecOptions) -> Result<Self> {
        let layout = program.layout.clone();
        let mut steps = Vec::with_capacity(program.gates.len());
        for gate in &program.gates {
            let expanded = match (&gate.kind, &options.honest_gadget) {
                (GateKind::QueryInPlace(target), Some(regs)) if !gate.controls.is_empty() => {
                    crate::oracle::gadget_gates(target, &gate.controls, &regs.catalyst, &regs.aux)
                }
                _ => alloc::vec![gate.clone()],
            };
            for g in expanded {
                validate(&layout, &g)?;
                steps.push(compile_gate(&layout, &g, p)?);
            }
        }
        let steps = fuse_hadamards(fuse_flag_diffusions(steps));
        let size = p.size();
        let roots = (0..size)
            .map(|k| {
                let angle = 2.0 * PI * k as f64 / size as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let inverse = p.inverse();
        Ok(Executor {
            segments: segment(&steps),
            layout,
            steps,
            forward: p.images().iter().map(|&v| v as u64).collect(),
            backward: inverse.images().iter().map(|&v| v as u64).collect(),
            roots,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// Applies every step to `state` in order and returns the number of
    /// query applications.
    pub fn run(&self, state: &mut StateVector) -> usize {
        for &seg in &self.segments {
            self.run_segment(state, None, seg);
        }
        self.query_count()
    }

    /// Query steps in the program.
    pub fn query_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_query).count()
    }

    /// Runs toward a known basis-state `target` and keeps only what can
    /// still overlap with it.
    ///
    /// A backward pass over the steps finds, at every point, a set of qubits
    /// whose final values are fixed by their current values alone, and the
    /// current values those qubits need for the final state to match
    /// `target`. Steps that only read such qubits, uncontrolled swaps, and
    /// classical steps confined to them keep them in the set; a step that
    /// writes one of them from outside removes it. A branch that already
    /// disagrees with the requirement can never reach `target`, so it is
    /// moved to the retired part. The overlap with `target`, and so the
    /// trace distance to it, is the same as after [`Executor::run`];
    /// everything else about the result is not.
    pub fn run_toward(&self, state: &mut StateVector, target: &StateVector) -> Result<usize> {
        let goal = self.basis_target(state, target)?;
        let plan = self.backward_requirements(goal);
        state.retire_mismatch(plan.start.0, plan.start.1);
        for &seg in &self.segments {
            self.run_segment(state, Some(&plan), seg);
        }
        Ok(self.query_count())
    }

    /// `<target| U |input>` for basis states `input` and `target`, where `U`
    /// is this executor with halts acting as projections.
    ///
    /// One state runs forward from `input` and another runs backward from
    /// `target` through the adjoint, each pruned as in
    /// [`Executor::run_toward`] against the other end. The side with the
    /// smaller support takes the next step until the two meet. Both
    /// prunings only drop components orthogonal to everything the other
    /// side can produce, so the inner product at the meeting point is
    /// exact.
    pub fn overlap(&self, input: &StateVector, target: &StateVector) -> Result<Complex64> {
        let goal = self.basis_target(input, target)?;
        let start = self.basis_target(target, input)?;
        let back = self.inverted();
        let ahead = self.backward_requirements(goal);
        let behind = back.backward_requirements(start);
        let mut forward = input.clone();
        let mut backward = target.clone();
        forward.retire_mismatch(ahead.start.0, ahead.start.1);
        backward.retire_mismatch(behind.start.0, behind.start.1);
        let (mut done_forward, mut done_backward) = (0, 0);
        while done_forward + done_backward < self.segments.len() {
            if forward.support_len() <= backward.support_len() {
                self.run_segment(&mut forward, Some(&ahead), self.segments[done_forward]);
                done_forward += 1;
            } else {
                back.run_segment(&mut backward, Some(&behind), back.segments[done_backward]);
                done_backward += 1;
            }
        }
        backward.inner(&forward)
    }

    fn basis_target(&self, state: &StateVector, target: &StateVector) -> Result<u64> {
        if state.layout() != &self.layout || target.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        match target.amplitudes().as_slice() {
            [(index, _)] => Ok(*index),
            _ => Err(Error::InvalidLayout("target must be a basis state".to_string())),
        }
    }

    /// The adjoint: steps reversed, queries inverted. A halt is its own
    /// adjoint.
    fn inverted(&self) -> Executor {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| {
                let mut s = s.clone();
                match &mut s.kernel {
                    Kernel::InPlace { inverse, .. } | Kernel::Phase { inverse, .. } => *inverse = !*inverse,
                    _ => {}
                }
                s
            })
            .collect::<Vec<_>>();
        Executor {
            layout: self.layout.clone(),
            segments: segment(&steps),
            steps,
            forward: self.forward.clone(),
            backward: self.backward.clone(),
            roots: self.roots.clone(),
        }
    }

    fn backward_requirements(&self, goal: u64) -> Requirements {
        let mut known = u64::MAX >> (64 - self.layout.width());
        let mut need = goal;
        let mut after = alloc::vec![None; self.steps.len()];
        for (i, step) in self.steps.iter().enumerate().rev() {
            let writes = step.kernel.writes();
            if writes == 0 {
                continue;
            }
            if let (Kernel::Swap { a, b }, 0) = (step.kernel, step.ctrl_mask) {
                known = swap_fields(known, a, b);
                need = swap_fields(need, a, b);
                continue;
            }
            let touched = writes | step.kernel.reads() | step.ctrl_mask;
            match self.undo_classical(step, need) {
                Some(prev) if touched & !known == 0 => need = prev,
                _ => {
                    // The written qubits are free before this step, so the
                    // requirement on them is checked right after it.
                    if writes & known != 0 {
                        after[i] = Some((known, need));
                    }
                    known &= !writes;
                    need &= known;
                }
            }
        }
        Requirements {
            start: (known, need),
            after,
        }
    }

    /// The basis index a classical step maps to `b`, or `None` for steps
    /// that create superpositions.
    fn undo_classical(&self, step: &Step, b: u64) -> Option<u64> {
        if !step.kernel.is_classical() {
            return None;
        }
        if b & step.ctrl_mask != step.ctrl_value {
            return Some(b);
        }
        Some(match step.kernel {
            Kernel::Flip(mask) => b ^ mask,
            Kernel::Xor { src, dst } => b ^ (src.read(b) << dst.offset),
            Kernel::Swap { a, b: other } => swap_fields(b, a, other),
            Kernel::CompareConst { reg, value, flag } => b ^ if reg.read(b) == value { flag } else { 0 },
            Kernel::CompareReg { reg, other, flag } => {
                b ^ if reg.read(b) == other.read(b) { flag } else { 0 }
            }
            Kernel::InPlace { reg, inverse } => {
                let table = if inverse { &self.forward } else { &self.backward };
                reg.write(b, table[reg.read(b) as usize])
            }
            Kernel::QueryXor { src, dst } => b ^ (self.forward[src.read(b) as usize] << dst.offset),
            Kernel::Halt(_)
            | Kernel::Phase { .. }
            | Kernel::Hadamard(_)
            | Kernel::Diffuse { .. }
            | Kernel::FlagDiffuse { .. }
            | Kernel::Walsh { .. } => b,
        })
    }

    /// Applies a classical step to one basis entry. `None` means the entry
    /// is retired by a halt.
    #[inline]
    fn classical(&self, step: &Step, b: u64, a: Complex64) -> Option<(u64, Complex64)> {
        if b & step.ctrl_mask != step.ctrl_value {
            return Some((b, a));
        }
        let b = match step.kernel {
            Kernel::Flip(mask) => b ^ mask,
            Kernel::Halt(bit) => {
                if b & bit != 0 {
                    return None;
                }
                b
            }
            Kernel::Xor { src, dst } => b ^ (src.read(b) << dst.offset),
            Kernel::Swap { a: x, b: y } => swap_fields(b, x, y),
            Kernel::CompareConst { reg, value, flag } => b ^ if reg.read(b) == value { flag } else { 0 },
            Kernel::CompareReg { reg, other, flag } => {
                b ^ if reg.read(b) == other.read(b) { flag } else { 0 }
            }
            Kernel::InPlace { reg, inverse } => {
                let table = if inverse { &self.backward } else { &self.forward };
                reg.write(b, table[reg.read(b) as usize])
            }
            Kernel::QueryXor { src, dst } => b ^ (self.forward[src.read(b) as usize] << dst.offset),
            Kernel::Phase { reg, inverse } => {
                let w = self.roots[self.forward[reg.read(b) as usize] as usize];
                return Some((b, a * if inverse { w.conj() } else { w }));
            }
            Kernel::Hadamard(_) | Kernel::Diffuse { .. } | Kernel::FlagDiffuse { .. } | Kernel::Walsh { .. } => {
                unreachable!("not a classical kernel")
            }
        };
        Some((b, a))
    }

    /// Runs steps `lo..hi`, checking `plan` after each one. A segment is
    /// either one mixing step or a run of classical steps, which is done in
    /// a single pass over the entries.
    fn run_segment(&self, state: &mut StateVector, plan: Option<&Requirements>, (lo, hi): (usize, usize)) {
        let check = |i: usize| plan.and_then(|p| p.after[i]);
        let step = &self.steps[lo];
        if !step.kernel.is_classical() {
            let (cm, cv) = (step.ctrl_mask, step.ctrl_value);
            match step.kernel {
                Kernel::Hadamard(bit) => state.hadamard(bit, cm, cv),
                Kernel::Diffuse { offset, width } => state.diffuse(offset, width, cm, cv),
                Kernel::FlagDiffuse { flag, offset, width } => state.flag_diffuse(flag, offset, width, cm, cv),
                Kernel::Walsh { offset, width } => state.walsh(offset, width, cm, cv),
                _ => unreachable!(),
            }
            if let Some((mask, value)) = check(lo) {
                state.retire_mismatch(mask, value);
            }
            return;
        }
        state.rewrite(|mut b, mut a| {
            for i in lo..hi {
                (b, a) = self.classical(&self.steps[i], b, a)?;
                if let Some((mask, value)) = check(i) {
                    if (b ^ value) & mask != 0 {
                        return None;
                    }
                }
            }
            Some((b, a))
        });
    }
}

/// Splits a step list into maximal runs of classical steps and single
/// mixing steps.
fn segment(steps: &[Step]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut lo = 0;
    while lo < steps.len() {
        let mut hi = lo + 1;
        if steps[lo].kernel.is_classical() {
            while hi < steps.len() && steps[hi].kernel.is_classical() {
                hi += 1;
            }
        }
        out.push((lo, hi));
        lo = hi;
    }
    out
}

fn query_span(layout: &RegisterLayout, name: &str, p: &Permutation) -> Result<Span> {
    let reg = layout.register(name)?;
    if reg.width() != p.qubits() {
        return Err(Error::WidthMismatch {
            expected: p.qubits(),
            found: reg.width(),
        });
    }
    Ok(Span::of(reg))
}

fn compile_gate(layout: &RegisterLayout, gate: &Gate, p: &Permutation) -> Result<Step> {
    let span = |name: &str| -> Result<Span> { Ok(Span::of(layout.register(name)?)) };
    let kernel = match &gate.kind {
        GateKind::Not(q) => Kernel::Flip(qubit_mask(layout, q)?),
        GateKind::Halt(q) => Kernel::Halt(qubit_mask(layout, q)?),
        GateKind::Hadamard(q) => Kernel::Hadamard(layout.qubit(&q.register, q.index)?),
        GateKind::RegisterXor { src, dst } => Kernel::Xor {
            src: span(src)?,
            dst: span(dst)?,
        },
        GateKind::RegisterSwap { a, b } => Kernel::Swap {
            a: span(a)?,
            b: span(b)?,
        },
        GateKind::CompareFlag {
            register,
            reference,
            flag,
        } => {
            let flag = qubit_mask(layout, flag)?;
            match reference {
                Reference::Constant(c) => Kernel::CompareConst {
                    reg: span(register)?,
                    value: *c,
                    flag,
                },
                Reference::Register(r) => Kernel::CompareReg {
                    reg: span(register)?,
                    other: span(r)?,
                    flag,
                },
            }
        }
        GateKind::Diffusion(r) => {
            let reg = layout.register(r)?;
            Kernel::Diffuse {
                offset: reg.offset(),
                width: reg.width(),
            }
        }
        GateKind::QueryInPlace(r) => Kernel::InPlace {
            reg: query_span(layout, r, p)?,
            inverse: false,
        },
        GateKind::QueryInPlaceInverse(r) => Kernel::InPlace {
            reg: query_span(layout, r, p)?,
            inverse: true,
        },
        GateKind::QueryXor { src, dst } => Kernel::QueryXor {
            src: query_span(layout, src, p)?,
            dst: query_span(layout, dst, p)?,
        },
        GateKind::QueryPhase(r) => Kernel::Phase {
            reg: query_span(layout, r, p)?,
            inverse: false,
        },
        GateKind::QueryPhaseInverse(r) => Kernel::Phase {
            reg: query_span(layout, r, p)?,
            inverse: true,
        },
    };
    let mut ctrl_mask = 0u64;
    let mut ctrl_value = 0u64;
    for c in &gate.controls {
        let m = qubit_mask(layout, &c.qubit)?;
        ctrl_mask |= m;
        if c.on {
            ctrl_value |= m;
        }
    }
    Ok(Step {
        kernel,
        ctrl_mask,
        ctrl_value,
        is_query: gate.is_query(),
    })
}
