// SPDX-License-Identifier: Apache-2.0

//! Line-oriented text formats: permutations, decision problems, circuit
//! listings and state dumps.
//!
//! Blank lines and everything after `#` are ignored when reading.

use std::fmt::Write as _;

use permquery_core::adversary::DecisionProblem;
use permquery_core::circuit::{CircuitProgram, Control, Gate, GateKind, Qubit, Reference};
use permquery_core::{Permutation, RegisterLayout, StateVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error(transparent)]
    Core(#[from] permquery_core::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, FormatError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{token}`")))
}

fn parse_permutation_lines<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<Option<Permutation>, FormatError> {
    let Some((line, head)) = lines.next() else {
        return Ok(None);
    };
    let n: usize = parse_number(line, head, "qubit count")?;
    let (line, body) = lines
        .next()
        .ok_or_else(|| FormatError::Truncated(format!("images for the permutation on line {line}")))?;
    let images = body
        .split_whitespace()
        .map(|t| parse_number(line, t, "image"))
        .collect::<Result<Vec<usize>, _>>()?;
    Permutation::new(n, images)
        .map(Some)
        .map_err(|e| syntax(line, e.to_string()))
}

/// `n` on the first line, the images on the second.
pub fn write_permutation(p: &Permutation) -> String {
    let images: Vec<String> = p.images().iter().map(usize::to_string).collect();
    format!("{}\n{}\n", p.qubits(), images.join(" "))
}

pub fn parse_permutation(text: &str) -> Result<Permutation, FormatError> {
    let mut lines = content_lines(text);
    let p = parse_permutation_lines(&mut lines)?
        .ok_or_else(|| FormatError::Truncated("empty permutation file".into()))?;
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, "trailing content after the permutation"));
    }
    Ok(p)
}

/// One permutation block per instance followed by a single line of 0/1
/// labels, one per instance.
pub fn write_problem(problem: &DecisionProblem) -> String {
    let mut out = String::new();
    for p in problem.instances() {
        out.push_str(&write_permutation(p));
    }
    let labels: Vec<&str> = problem
        .labels()
        .iter()
        .map(|&b| if b { "1" } else { "0" })
        .collect();
    out.push_str(&labels.join(" "));
    out.push('\n');
    out
}

pub fn parse_problem(text: &str) -> Result<DecisionProblem, FormatError> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let Some((&(label_line, labels), blocks)) = lines.split_last() else {
        return Err(FormatError::Truncated("empty problem file".into()));
    };
    if blocks.len() % 2 != 0 {
        return Err(syntax(label_line, "expected permutation blocks of two lines before the label line"));
    }
    let mut iter = blocks.iter().copied();
    let mut instances = Vec::new();
    while let Some(p) = parse_permutation_lines(&mut iter)? {
        instances.push(p);
    }
    let labels = labels
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(syntax(label_line, format!("labels must be 0 or 1, found `{other}`"))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    DecisionProblem::new(instances, labels).map_err(|e| syntax(label_line, e.to_string()))
}

fn qubit_text(q: &Qubit) -> String {
    format!("{}[{}]", q.register, q.index)
}

fn parse_qubit(line: usize, token: &str) -> Result<Qubit, FormatError> {
    let bad = || syntax(line, format!("expected `REG[i]`, found `{token}`"));
    let (name, rest) = token.split_once('[').ok_or_else(bad)?;
    let index = rest.strip_suffix(']').ok_or_else(bad)?;
    Ok(Qubit::new(name, parse_number(line, index, "qubit index")?))
}

fn gate_text(gate: &Gate) -> String {
    let body = match &gate.kind {
        GateKind::Not(q) => format!("not {}", qubit_text(q)),
        GateKind::Hadamard(q) => format!("h {}", qubit_text(q)),
        GateKind::Halt(q) => format!("halt {}", qubit_text(q)),
        GateKind::RegisterXor { src, dst } => format!("xor {src} {dst}"),
        GateKind::RegisterSwap { a, b } => format!("swap {a} {b}"),
        GateKind::CompareFlag {
            register,
            reference,
            flag,
        } => {
            let rhs = match reference {
                Reference::Register(r) => r.clone(),
                Reference::Constant(c) => c.to_string(),
            };
            format!("cmp {register} == {rhs} -> {}", qubit_text(flag))
        }
        GateKind::Diffusion(r) => format!("diffuse {r}"),
        GateKind::QueryInPlace(r) => format!("query-inplace {r}"),
        GateKind::QueryInPlaceInverse(r) => format!("query-inplace-inverse {r}"),
        GateKind::QueryXor { src, dst } => format!("query-xor {src} {dst}"),
        GateKind::QueryPhase(r) => format!("query-phase {r}"),
        GateKind::QueryPhaseInverse(r) => format!("query-phase-inverse {r}"),
    };
    if gate.controls.is_empty() {
        return body;
    }
    let controls: Vec<String> = gate
        .controls
        .iter()
        .map(|c| format!("{}={}", qubit_text(&c.qubit), u8::from(c.on)))
        .collect();
    format!("{body} if {}", controls.join(","))
}

/// Views are written as the registers they cover.
fn view_parts(layout: &RegisterLayout, offset: usize, width: usize) -> Vec<&str> {
    layout
        .registers()
        .iter()
        .filter(|r| r.offset() >= offset && r.offset() + r.width() <= offset + width)
        .map(|r| r.name())
        .collect()
}

/// `layout NAME:WIDTH ...`, then one `view NAME = PART ...` line per view,
/// then one gate per line with an optional `if REG[i]=v,...` suffix.
pub fn write_circuit(program: &CircuitProgram) -> String {
    let layout = program.layout();
    let mut out = String::from("layout");
    for r in layout.registers() {
        let _ = write!(out, " {}:{}", r.name(), r.width());
    }
    out.push('\n');
    for v in layout.views() {
        let _ = writeln!(out, "view {} = {}", v.name(), view_parts(layout, v.offset(), v.width()).join(" "));
    }
    for gate in program.gates() {
        out.push_str(&gate_text(gate));
        out.push('\n');
    }
    out
}

fn parse_layout(line: usize, rest: &str) -> Result<RegisterLayout, FormatError> {
    let mut spec = Vec::new();
    for token in rest.split_whitespace() {
        let (name, width) = token
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("expected `NAME:WIDTH`, found `{token}`")))?;
        spec.push((name, parse_number::<usize>(line, width, "register width")?));
    }
    RegisterLayout::new(&spec).map_err(|e| syntax(line, e.to_string()))
}

fn parse_controls(line: usize, text: &str) -> Result<Vec<Control>, FormatError> {
    text.split(',')
        .map(|c| {
            let (q, v) = c
                .trim()
                .split_once('=')
                .ok_or_else(|| syntax(line, format!("expected `REG[i]=v`, found `{c}`")))?;
            let q = parse_qubit(line, q)?;
            match v {
                "0" => Ok(Control::zero(&q.register, q.index)),
                "1" => Ok(Control::one(&q.register, q.index)),
                other => Err(syntax(line, format!("control value must be 0 or 1, found `{other}`"))),
            }
        })
        .collect()
}

fn parse_gate(line: usize, text: &str) -> Result<Gate, FormatError> {
    let (body, controls) = match text.split_once(" if ") {
        Some((b, c)) => (b, parse_controls(line, c)?),
        None => (text, Vec::new()),
    };
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let arity = |k: usize| -> Result<(), FormatError> {
        if tokens.len() == k + 1 {
            Ok(())
        } else {
            Err(syntax(line, format!("`{}` takes {k} operand(s)", tokens[0])))
        }
    };
    let gate = match tokens[0] {
        "not" | "h" | "halt" => {
            arity(1)?;
            let q = parse_qubit(line, tokens[1])?;
            Gate::new(match tokens[0] {
                "not" => GateKind::Not(q),
                "h" => GateKind::Hadamard(q),
                _ => GateKind::Halt(q),
            })
        }
        "xor" => {
            arity(2)?;
            Gate::xor(tokens[1], tokens[2])
        }
        "swap" => {
            arity(2)?;
            Gate::swap(tokens[1], tokens[2])
        }
        "query-xor" => {
            arity(2)?;
            Gate::query_xor(tokens[1], tokens[2])
        }
        "cmp" => {
            if tokens.len() != 6 || tokens[2] != "==" || tokens[4] != "->" {
                return Err(syntax(line, "expected `cmp REG == REF -> FLAG[i]`"));
            }
            let reference = match tokens[3].parse::<u64>() {
                Ok(c) => Reference::Constant(c),
                Err(_) => Reference::Register(tokens[3].to_string()),
            };
            Gate::compare(tokens[1], reference, parse_qubit(line, tokens[5])?)
        }
        "diffuse" | "query-inplace" | "query-inplace-inverse" | "query-phase" | "query-phase-inverse" => {
            arity(1)?;
            let r = tokens[1].to_string();
            Gate::new(match tokens[0] {
                "diffuse" => GateKind::Diffusion(r),
                "query-inplace" => GateKind::QueryInPlace(r),
                "query-inplace-inverse" => GateKind::QueryInPlaceInverse(r),
                "query-phase" => GateKind::QueryPhase(r),
                _ => GateKind::QueryPhaseInverse(r),
            })
        }
        other => return Err(syntax(line, format!("unknown gate `{other}`"))),
    };
    Ok(gate.with_controls(&controls))
}

pub fn parse_circuit(text: &str) -> Result<CircuitProgram, FormatError> {
    let mut lines = content_lines(text).peekable();
    let (line, head) = lines
        .next()
        .ok_or_else(|| FormatError::Truncated("empty circuit file".into()))?;
    let rest = head
        .strip_prefix("layout")
        .ok_or_else(|| syntax(line, "circuit must start with a `layout` line"))?;
    let mut layout = parse_layout(line, rest)?;
    while let Some(&(line, text)) = lines.peek() {
        let Some(view) = text.strip_prefix("view ") else {
            break;
        };
        lines.next();
        let (name, parts) = view
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected `view NAME = PART ...`"))?;
        let parts: Vec<&str> = parts.split_whitespace().collect();
        layout = layout
            .with_view(name.trim(), &parts)
            .map_err(|e| syntax(line, e.to_string()))?;
    }
    let mut program = CircuitProgram::new(layout);
    for (line, text) in lines {
        let gate = parse_gate(line, text)?;
        program.push(gate).map_err(|e| syntax(line, e.to_string()))?;
    }
    Ok(program)
}

/// `index re im` for every amplitude of magnitude at least `threshold`,
/// under a header naming the layout.
pub fn write_state(state: &StateVector, threshold: f64) -> String {
    let mut out = String::from("# index re im; layout");
    for r in state.layout().registers() {
        let _ = write!(out, " {}:{}", r.name(), r.width());
    }
    out.push('\n');
    for (index, amp) in state.dump(threshold) {
        let _ = writeln!(out, "{index} {:.17e} {:.17e}", amp.re, amp.im);
    }
    out
}
