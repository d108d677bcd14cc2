// SPDX-License-Identifier: Apache-2.0

//! Exact pure-state simulation over named registers.
//!
//! Bit order: registers are laid out in declaration order starting at bit 0
//! of the basis index, and inside a register qubit `j` is bit `offset + j`
//! (little-endian). Every module in the crate addresses qubits this way.
//!
//! Amplitudes are stored sparsely as `(basis index, amplitude)` pairs. The
//! circuits simulated here are mostly classical reversible maps with a few
//! mixing gates confined to small registers, so the support stays far below
//! `2^W` even when the total width is in the high thirties.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Hard cap on the total width: basis indices are `u64`.
pub const MAX_WIDTH: usize = 63;
/// Widths up to this can be exported as a dense amplitude vector.
pub const MAX_DENSE_WIDTH: usize = 24;
/// Squared magnitudes below this are dropped from the support.
const PRUNE: f64 = 1e-30;
/// Outcomes less likely than this cannot be postselected on.
pub const EMPTY_BRANCH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    name: String,
    offset: usize,
    width: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of basis values, `2^width`.
    pub fn dim(&self) -> u64 {
        1u64 << self.width
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        ((1u64 << self.width) - 1) << self.offset
    }

    #[inline]
    pub fn read(&self, basis: u64) -> u64 {
        (basis >> self.offset) & ((1u64 << self.width) - 1)
    }

    #[inline]
    pub fn write(&self, basis: u64, value: u64) -> u64 {
        (basis & !self.mask()) | (value << self.offset)
    }

    pub fn bit(&self, index: usize) -> Option<usize> {
        (index < self.width).then_some(self.offset + index)
    }
}

/// Ordered named registers. A *view* is an extra name for a run of adjacent
/// registers, so a gate can address e.g. `X = Xlo ++ Xhi` as one operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    views: Vec<Register>,
    width: usize,
}

impl RegisterLayout {
    pub fn new(spec: &[(&str, usize)]) -> Result<Self> {
        let mut registers: Vec<Register> = Vec::with_capacity(spec.len());
        let mut offset = 0;
        for &(name, width) in spec {
            if width == 0 {
                return Err(Error::InvalidLayout(alloc::format!(
                    "register `{name}` has zero width"
                )));
            }
            if registers.iter().any(|r| r.name == name) {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            registers.push(Register {
                name: name.to_string(),
                offset,
                width,
            });
            offset += width;
        }
        if offset > MAX_WIDTH {
            return Err(Error::WidthCapExceeded {
                width: offset,
                cap: MAX_WIDTH,
            });
        }
        Ok(RegisterLayout {
            registers,
            views: Vec::new(),
            width: offset,
        })
    }

    /// Adds `name` as a view over `parts`, which must be adjacent and in
    /// layout order.
    pub fn with_view(mut self, name: &str, parts: &[&str]) -> Result<Self> {
        if self.lookup(name).is_some() {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidLayout("empty view".to_string()))?;
        let first = self.register(first)?.clone();
        let mut end = first.offset + first.width;
        for part in &parts[1..] {
            let reg = self.register(part)?;
            if reg.offset != end {
                return Err(Error::InvalidLayout(alloc::format!(
                    "view `{name}` is not contiguous at `{part}`"
                )));
            }
            end += reg.width;
        }
        self.views.push(Register {
            name: name.to_string(),
            offset: first.offset,
            width: end - first.offset,
        });
        Ok(self)
    }

    fn lookup(&self, name: &str) -> Option<&Register> {
        self.registers
            .iter()
            .chain(self.views.iter())
            .find(|r| r.name == name)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.lookup(name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Views added with [`RegisterLayout::with_view`], in insertion order.
    pub fn views(&self) -> &[Register] {
        &self.views
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Global bit of qubit `index` in register `name`.
    pub fn qubit(&self, name: &str, index: usize) -> Result<usize> {
        let reg = self.register(name)?;
        reg.bit(index).ok_or(Error::ValueOutOfRange {
            register: name.to_string(),
            value: index as u64,
        })
    }

    /// Basis index with the given register values and zeros elsewhere.
    pub fn basis_index(&self, values: &[(&str, u64)]) -> Result<u64> {
        let mut index = 0u64;
        for &(name, value) in values {
            let reg = self.register(name)?;
            if value >= reg.dim() {
                return Err(Error::ValueOutOfRange {
                    register: name.to_string(),
                    value,
                });
            }
            index = reg.write(index, value);
        }
        Ok(index)
    }
}

/// A normalized pure state over a [`RegisterLayout`].
///
/// Branches removed by a halt step, or projected away while running toward
/// a known target, are no longer stored. Their total probability is kept in
/// [`StateVector::retired`]. That part of the state is orthogonal to every
/// stored entry and to the target.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: RegisterLayout,
    // Unique indices, unordered between gate applications.
    entries: Vec<(u64, Complex64)>,
    retired: f64,
}

impl StateVector {
    /// The computational basis state with the given register values.
    pub fn basis(layout: RegisterLayout, values: &[(&str, u64)]) -> Result<Self> {
        let index = layout.basis_index(values)?;
        Ok(StateVector {
            layout,
            entries: alloc::vec![(index, Complex64::new(1.0, 0.0))],
            retired: 0.0,
        })
    }

    /// Builds a state from explicit amplitudes and normalizes it. Repeated
    /// indices are summed.
    pub fn from_amplitudes(
        layout: RegisterLayout,
        amplitudes: impl IntoIterator<Item = (u64, Complex64)>,
    ) -> Result<Self> {
        let limit = if layout.width == 64 {
            u64::MAX
        } else {
            (1u64 << layout.width) - 1
        };
        let mut state = StateVector {
            layout,
            entries: Vec::new(),
            retired: 0.0,
        };
        for (index, amp) in amplitudes {
            if index > limit {
                return Err(Error::ValueOutOfRange {
                    register: "<state>".to_string(),
                    value: index,
                });
            }
            state.entries.push((index, amp));
        }
        state.canonicalize();
        let norm = state.norm_sqr();
        if norm < EMPTY_BRANCH {
            return Err(Error::EmptyBranch { probability: norm });
        }
        state.scale(1.0 / norm.sqrt());
        Ok(state)
    }

    /// Uniform superposition over register `name`, other registers at the
    /// given values (zero if absent).
    pub fn uniform(layout: RegisterLayout, name: &str, rest: &[(&str, u64)]) -> Result<Self> {
        let reg = layout.register(name)?.clone();
        let base = layout.basis_index(rest)? & !reg.mask();
        let amp = Complex64::new(1.0 / (reg.dim() as f64).sqrt(), 0.0);
        let entries = (0..reg.dim()).map(|v| (reg.write(base, v), amp)).collect();
        Ok(StateVector {
            layout,
            entries,
            retired: 0.0,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Nonzero amplitudes sorted by basis index.
    pub fn amplitudes(&self) -> Vec<(u64, Complex64)> {
        let mut out = self.entries.clone();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.entries
            .iter()
            .find(|e| e.0 == index)
            .map_or(Complex64::new(0.0, 0.0), |e| e.1)
    }

    /// Amplitude of the basis state with the given register values.
    pub fn amplitude_of(&self, values: &[(&str, u64)]) -> Result<Complex64> {
        Ok(self.amplitude(self.layout.basis_index(values)?))
    }

    /// Probability held in stored entries; `1 - retired()` for a
    /// normalized state.
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    /// Probability no longer held in stored entries: branches removed by
    /// halt steps, or projected away by [`crate::circuit::Executor::run_toward`].
    pub fn retired(&self) -> f64 {
        self.retired
    }

    /// Moves every entry that disagrees with `goal` on some bit of `mask`
    /// into the retired part.
    pub(crate) fn retire_mismatch(&mut self, mask: u64, goal: u64) {
        self.retire_where(|b| (b ^ goal) & mask != 0);
    }

    fn retire_where(&mut self, gone_if: impl Fn(u64) -> bool) {
        let mut gone = 0.0;
        self.entries.retain(|e| {
            if gone_if(e.0) {
                gone += e.1.norm_sqr();
                false
            } else {
                true
            }
        });
        self.retired += gone;
    }

    /// Dense amplitude vector of length `2^W`, for `W <= MAX_DENSE_WIDTH`.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.layout.width > MAX_DENSE_WIDTH {
            return Err(Error::WidthCapExceeded {
                width: self.layout.width,
                cap: MAX_DENSE_WIDTH,
            });
        }
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); 1usize << self.layout.width];
        for &(i, a) in &self.entries {
            out[i as usize] = a;
        }
        Ok(out)
    }

    /// `(basis index, amplitude)` for every amplitude with magnitude at
    /// least `threshold`, sorted by index.
    pub fn dump(&self, threshold: f64) -> Vec<(u64, Complex64)> {
        let mut out: Vec<_> = self
            .entries
            .iter()
            .copied()
            .filter(|e| e.1.norm() >= threshold)
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    fn scale(&mut self, factor: f64) {
        for e in &mut self.entries {
            e.1 *= factor;
        }
    }

    /// Sorts, merges duplicate indices and prunes numerically-zero entries.
    fn canonicalize(&mut self) {
        self.entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u64, Complex64)> = Vec::with_capacity(self.entries.len());
        for &(i, a) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|e| e.1.norm_sqr() >= PRUNE);
        self.entries = merged;
    }

    // ---- kernels used by the circuit executor -------------------------

    /// Relabels basis states through `f`, which must be injective on the
    /// current support.
    /// Replaces every entry by `f(index, amplitude)`, retiring those that
    /// map to `None`. `f` must be injective on indices.
    pub(crate) fn rewrite(&mut self, mut f: impl FnMut(u64, Complex64) -> Option<(u64, Complex64)>) {
        let mut gone = 0.0;
        self.entries.retain_mut(|e| match f(e.0, e.1) {
            Some(next) => {
                *e = next;
                true
            }
            None => {
                gone += e.1.norm_sqr();
                false
            }
        });
        self.retired += gone;
    }

    /// Hadamard on global bit `bit` for basis states where
    /// `index & ctrl_mask == ctrl_value`.
    pub(crate) fn hadamard(&mut self, bit: usize, ctrl_mask: u64, ctrl_value: u64) {
        let flip = 1u64 << bit;
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let (mut active, idle): (Vec<_>, Vec<_>) = self
            .entries
            .drain(..)
            .partition(|e| e.0 & ctrl_mask == ctrl_value);
        active.sort_unstable_by_key(|e| e.0 & !flip);
        let mut out = idle;
        out.reserve(active.len() * 2);
        let mut i = 0;
        while i < active.len() {
            let key = active[i].0 & !flip;
            let mut a0 = Complex64::new(0.0, 0.0);
            let mut a1 = Complex64::new(0.0, 0.0);
            while i < active.len() && active[i].0 & !flip == key {
                if active[i].0 & flip == 0 {
                    a0 = active[i].1;
                } else {
                    a1 = active[i].1;
                }
                i += 1;
            }
            let b0 = (a0 + a1) * h;
            let b1 = (a0 - a1) * h;
            if b0.norm_sqr() >= PRUNE {
                out.push((key, b0));
            }
            if b1.norm_sqr() >= PRUNE {
                out.push((key | flip, b1));
            }
        }
        self.entries = out;
    }

    /// `H(flag) · [flag = 1] (2|s><s| - I) · H(flag)` on the register at
    /// `offset..offset+width`, for basis states satisfying the control
    /// condition. Per group of entries that agree outside the register and
    /// the flag, with `a0`, `a1` the register amplitudes at flag 0 and 1 and
    /// `m0`, `m1` their means, this is `a0 -> m0 + a1 - m1` and
    /// `a1 -> a0 - m0 + m1`.
    pub(crate) fn flag_diffuse(&mut self, flag: usize, offset: usize, width: usize, ctrl_mask: u64, ctrl_value: u64) {
        let dim = 1u64 << width;
        let reg_mask = (dim - 1) << offset;
        let flag_mask = 1u64 << flag;
        let (mut active, idle): (Vec<_>, Vec<_>) = self
            .entries
            .drain(..)
            .partition(|e| e.0 & ctrl_mask == ctrl_value);
        active.sort_unstable_by_key(|e| e.0 & !reg_mask & !flag_mask);
        let mut out = idle;
        let mut lanes = [
            alloc::vec![Complex64::new(0.0, 0.0); dim as usize],
            alloc::vec![Complex64::new(0.0, 0.0); dim as usize],
        ];
        let mut i = 0;
        while i < active.len() {
            let key = active[i].0 & !reg_mask & !flag_mask;
            let mut sums = [Complex64::new(0.0, 0.0); 2];
            let first = i;
            while i < active.len() && active[i].0 & !reg_mask & !flag_mask == key {
                let (b, a) = active[i];
                let lane = (b & flag_mask != 0) as usize;
                lanes[lane][((b & reg_mask) >> offset) as usize] = a;
                sums[lane] += a;
                i += 1;
            }
            let scale = 1.0 / dim as f64;
            let (m0, m1) = (sums[0] * scale, sums[1] * scale);
            for v in 0..dim as usize {
                let (a0, a1) = (lanes[0][v], lanes[1][v]);
                let index = key | ((v as u64) << offset);
                let new0 = m0 + a1 - m1;
                let new1 = a0 - m0 + m1;
                if new0.norm_sqr() >= PRUNE {
                    out.push((index, new0));
                }
                if new1.norm_sqr() >= PRUNE {
                    out.push((index | flag_mask, new1));
                }
            }
            for &(b, _) in &active[first..i] {
                let lane = (b & flag_mask != 0) as usize;
                lanes[lane][((b & reg_mask) >> offset) as usize] = Complex64::new(0.0, 0.0);
            }
        }
        self.entries = out;
    }

    /// Hadamard on each qubit of `offset..offset+width`, for basis states
    /// satisfying the control condition.
    pub(crate) fn walsh(&mut self, offset: usize, width: usize, ctrl_mask: u64, ctrl_value: u64) {
        let dim = 1usize << width;
        let reg_mask = ((dim as u64) - 1) << offset;
        let scale = 1.0 / (dim as f64).sqrt();
        let (mut active, idle): (Vec<_>, Vec<_>) = self
            .entries
            .drain(..)
            .partition(|e| e.0 & ctrl_mask == ctrl_value);
        active.sort_unstable_by_key(|e| e.0 & !reg_mask);
        let mut out = idle;
        let mut lane = alloc::vec![Complex64::new(0.0, 0.0); dim];
        let mut i = 0;
        while i < active.len() {
            let key = active[i].0 & !reg_mask;
            while i < active.len() && active[i].0 & !reg_mask == key {
                lane[((active[i].0 & reg_mask) >> offset) as usize] = active[i].1;
                i += 1;
            }
            let mut half = 1;
            while half < dim {
                for block in (0..dim).step_by(2 * half) {
                    for k in block..block + half {
                        let (u, v) = (lane[k], lane[k + half]);
                        lane[k] = u + v;
                        lane[k + half] = u - v;
                    }
                }
                half *= 2;
            }
            for (v, slot) in lane.iter_mut().enumerate() {
                let a = *slot * scale;
                if a.norm_sqr() >= PRUNE {
                    out.push((key | ((v as u64) << offset), a));
                }
                *slot = Complex64::new(0.0, 0.0);
            }
        }
        self.entries = out;
    }

    /// `2|s><s| - I` on the register at `offset..offset+width`, for basis
    /// states satisfying the control condition.
    pub(crate) fn diffuse(&mut self, offset: usize, width: usize, ctrl_mask: u64, ctrl_value: u64) {
        let dim = 1u64 << width;
        let reg_mask = (dim - 1) << offset;
        let (mut active, idle): (Vec<_>, Vec<_>) = self
            .entries
            .drain(..)
            .partition(|e| e.0 & ctrl_mask == ctrl_value);
        active.sort_unstable_by_key(|e| (e.0 & !reg_mask, e.0));
        let mut out = idle;
        let mut group: Vec<(u64, Complex64)> = Vec::new();
        let mut i = 0;
        while i < active.len() {
            let key = active[i].0 & !reg_mask;
            group.clear();
            while i < active.len() && active[i].0 & !reg_mask == key {
                group.push(active[i]);
                i += 1;
            }
            let sum: Complex64 = group.iter().map(|e| e.1).sum();
            let twice_mean = sum * (2.0 / dim as f64);
            // `group` is sorted by register value, so walk it alongside.
            let mut g = 0;
            for v in 0..dim {
                let index = key | (v << offset);
                let old = if g < group.len() && group[g].0 == index {
                    g += 1;
                    group[g - 1].1
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let new = twice_mean - old;
                if new.norm_sqr() >= PRUNE {
                    out.push((index, new));
                }
            }
        }
        self.entries = out;
    }

    // ---- measurement ----------------------------------------------------

    /// Probability that register `name` holds `value`.
    pub fn probability(&self, name: &str, value: u64) -> Result<f64> {
        let reg = self.layout.register(name)?;
        if value >= reg.dim() {
            return Err(Error::ValueOutOfRange {
                register: name.to_string(),
                value,
            });
        }
        Ok(self
            .entries
            .iter()
            .filter(|e| reg.read(e.0) == value)
            .map(|e| e.1.norm_sqr())
            .sum())
    }

    /// Outcome distribution of register `name` (values with nonzero
    /// probability only).
    pub fn distribution(&self, name: &str) -> Result<BTreeMap<u64, f64>> {
        let reg = self.layout.register(name)?;
        let mut dist = BTreeMap::new();
        for e in &self.entries {
            *dist.entry(reg.read(e.0)).or_insert(0.0) += e.1.norm_sqr();
        }
        Ok(dist)
    }

    /// Conditions on register `name` holding `value`: returns the outcome
    /// probability and the renormalized post-measurement state. Only stored
    /// entries take part; the retired part never matches.
    pub fn postselect(&self, name: &str, value: u64) -> Result<(f64, StateVector)> {
        let probability = self.probability(name, value)?;
        if probability < EMPTY_BRANCH {
            return Err(Error::EmptyBranch { probability });
        }
        let reg = self.layout.register(name)?;
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .copied()
            .filter(|e| reg.read(e.0) == value)
            .collect();
        let s = 1.0 / probability.sqrt();
        for e in &mut entries {
            e.1 *= s;
        }
        Ok((
            probability,
            StateVector {
                layout: self.layout.clone(),
                entries,
                retired: 0.0,
            },
        ))
    }

    /// Samples a measurement of register `name`, returning the outcome and
    /// the collapsed state. Outcomes are visited in increasing order, so the
    /// result is a deterministic function of the generator state.
    pub fn measure<R: Rng + ?Sized>(&self, name: &str, rng: &mut R) -> Result<(u64, StateVector)> {
        let dist = self.distribution(name)?;
        let total: f64 = dist.values().sum();
        let mut r = rng.gen::<f64>() * total;
        let mut chosen = *dist.keys().next_back().expect("state has support");
        for (&value, &p) in &dist {
            if r < p {
                chosen = value;
                break;
            }
            r -= p;
        }
        let (_, state) = self.postselect(name, chosen)?;
        Ok((chosen, state))
    }

    // ---- comparisons ----------------------------------------------------

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        let a = self.amplitudes();
        let b = other.amplitudes();
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    acc += a[i].1.conj() * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    /// Pure-state trace distance `sqrt(1 - |<a|b>|^2)`, for normalized
    /// states. Exact when at most one side has retired probability, an
    /// upper bound otherwise.
    ///
    /// Evaluated as `d sqrt(1 - d^2/4)` with `d` the phase-aligned Euclidean
    /// distance summed entry by entry, which stays accurate when the states
    /// nearly coincide.
    pub fn trace_distance(&self, other: &StateVector) -> Result<f64> {
        let d = self.phase_insensitive_distance(other)?;
        Ok(d * (1.0 - d * d / 4.0).max(0.0).sqrt())
    }

    /// Trace distance to a single basis state.
    pub fn trace_distance_to_basis(&self, index: u64) -> f64 {
        let a = self.amplitude(index).norm();
        let rest: f64 = self
            .entries
            .iter()
            .filter(|e| e.0 != index)
            .map(|e| e.1.norm_sqr())
            .sum();
        let d = ((1.0 - a) * (1.0 - a) + rest + self.retired).sqrt();
        d * (1.0 - d * d / 4.0).max(0.0).sqrt()
    }

    /// `min_θ ||a - e^{iθ} b||`, the global-phase-insensitive distance.
    pub fn phase_insensitive_distance(&self, other: &StateVector) -> Result<f64> {
        // `<other|self>`, whose phase best aligns `other` with `self`.
        let overlap = other.inner(self)?;
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let a = self.amplitudes();
        let b = other.amplitudes();
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() || j < b.len() {
            let ai = a.get(i).map_or(u64::MAX, |e| e.0);
            let bj = b.get(j).map_or(u64::MAX, |e| e.0);
            if ai < bj {
                acc += a[i].1.norm_sqr();
                i += 1;
            } else if bj < ai {
                acc += b[j].1.norm_sqr();
                j += 1;
            } else {
                acc += (a[i].1 - phase * b[j].1).norm_sqr();
                i += 1;
                j += 1;
            }
        }
        Ok((acc + self.retired + other.retired).sqrt())
    }
}
