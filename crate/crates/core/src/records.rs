//! Structured text persistence for domain records.
//!
//! Every file starts with a versioned header line "zenocode <kind> v1".
//! Complex entries are written as decimal pairs with 17 significant digits,
//! which round-trips IEEE doubles bitwise, so a reload compares equal to
//! the original.  Loaders re-run the domain validations, so a hand-edited
//! file that breaks an invariant is rejected, not silently accepted.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::code_search::{CodeSpace, CodingMatrix};
use crate::control::{ControlPair, TimingVector};
use crate::error_model::GeneratorSet;
use crate::quantum::{C64, Operator, StateVector};
use crate::{Error, Result};

const GENERATOR_SET_HEADER: &str = "zenocode generator-set v1";
const CODE_SPACE_HEADER: &str = "zenocode code-space v1";
const CODING_MATRIX_HEADER: &str = "zenocode coding-matrix v1";
const CONTROL_SEQUENCE_HEADER: &str = "zenocode control-sequence v1";

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_matrix(out: &mut String, m: &DMatrix<C64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(' ');
            }
            let z = m[(r, c)];
            let _ = write!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
        out.push('\n');
    }
}

/// Line cursor with 1-based positions for parse diagnostics.
struct Lines<'a> {
    iter: std::str::Lines<'a>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { iter: text.lines(), pos: 0 }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.pos += 1;
        self.iter.next().ok_or(Error::Parse {
            line: self.pos,
            message: "unexpected end of file".into(),
        })
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.pos, message: message.into() }
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let got = self.next()?;
        if got.trim_end() != literal {
            return Err(self.err(format!("expected \"{literal}\", got \"{}\"", got.trim_end())));
        }
        Ok(())
    }

    fn keyed_value(&mut self, key: &str) -> Result<&'a str> {
        let got = self.next()?;
        let mut parts = got.trim_end().splitn(2, ' ');
        let k = parts.next().unwrap_or("");
        if k != key {
            return Err(self.err(format!("expected key \"{key}\", got \"{k}\"")));
        }
        parts.next().ok_or_else(|| self.err(format!("key \"{key}\" has no value")))
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.keyed_value(key)?;
        v.parse().map_err(|_| self.err(format!("key \"{key}\": \"{v}\" is not a count")))
    }

    fn keyed_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.keyed_value(key)?;
        v.parse().map_err(|_| self.err(format!("key \"{key}\": \"{v}\" is not a number")))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let mut out = Vec::with_capacity(count);
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| self.err(format!("\"{tok}\" is not a number")))?;
            out.push(v);
        }
        if out.len() != count {
            return Err(self.err(format!("expected {count} numbers, found {}", out.len())));
        }
        Ok(out)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for r in 0..rows {
            let vals = self.floats(2 * cols)?;
            for c in 0..cols {
                m[(r, c)] = C64::new(vals[2 * c], vals[2 * c + 1]);
            }
        }
        Ok(m)
    }

    fn finish(&mut self) -> Result<()> {
        loop {
            self.pos += 1;
            match self.iter.next() {
                None => return Ok(()),
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => {
                    return Err(self.err(format!("trailing content: \"{}\"", l.trim_end())));
                }
            }
        }
    }
}

pub fn generator_set_to_string(gens: &GeneratorSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{GENERATOR_SET_HEADER}");
    let _ = writeln!(out, "dim {}", gens.dim());
    let _ = writeln!(out, "count {}", gens.len());
    for (g, label) in gens.generators().iter().zip(gens.labels()) {
        let _ = writeln!(out, "generator {label}");
        push_matrix(&mut out, g.matrix());
    }
    out
}

pub fn generator_set_from_string(text: &str) -> Result<GeneratorSet> {
    let mut lines = Lines::new(text);
    lines.expect(GENERATOR_SET_HEADER)?;
    let dim = lines.keyed_usize("dim")?;
    let count = lines.keyed_usize("count")?;
    let mut mats = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        labels.push(lines.keyed_value("generator")?.to_string());
        let m = lines.matrix(dim, dim)?;
        mats.push(Operator::hermitian(m).map_err(|e| lines.err(e.to_string()))?);
    }
    lines.finish()?;
    GeneratorSet::new(dim, mats, labels)
}

pub fn write_generator_set(path: &Path, gens: &GeneratorSet) -> Result<()> {
    Ok(std::fs::write(path, generator_set_to_string(gens))?)
}

pub fn read_generator_set(path: &Path) -> Result<GeneratorSet> {
    generator_set_from_string(&std::fs::read_to_string(path)?)
}

pub fn code_space_to_string(code: &CodeSpace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CODE_SPACE_HEADER}");
    let _ = writeln!(out, "dim {}", code.dim());
    let _ = writeln!(out, "code_dim {}", code.code_dim());
    let _ = writeln!(out, "residual {}", fmt_f64(code.residual()));
    for (t, w) in code.codewords().iter().enumerate() {
        let _ = writeln!(out, "codeword {t}");
        for z in w.amplitudes().iter() {
            let _ = writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

pub fn code_space_from_string(text: &str) -> Result<CodeSpace> {
    let mut lines = Lines::new(text);
    lines.expect(CODE_SPACE_HEADER)?;
    let dim = lines.keyed_usize("dim")?;
    let code_dim = lines.keyed_usize("code_dim")?;
    let residual = lines.keyed_f64("residual")?;
    let mut words = Vec::with_capacity(code_dim);
    for t in 0..code_dim {
        let idx = lines.keyed_usize("codeword")?;
        if idx != t {
            return Err(lines.err(format!("expected codeword {t}, got {idx}")));
        }
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            let v = lines.floats(2)?;
            amps.push(C64::new(v[0], v[1]));
        }
        words.push(StateVector::new(amps).map_err(|e| lines.err(e.to_string()))?);
    }
    lines.finish()?;
    CodeSpace::new(words, residual)
}

pub fn write_code_space(path: &Path, code: &CodeSpace) -> Result<()> {
    Ok(std::fs::write(path, code_space_to_string(code))?)
}

pub fn read_code_space(path: &Path) -> Result<CodeSpace> {
    code_space_from_string(&std::fs::read_to_string(path)?)
}

pub fn coding_matrix_to_string(cm: &CodingMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CODING_MATRIX_HEADER}");
    let _ = writeln!(out, "dim {}", cm.dim());
    let _ = writeln!(out, "code_dim {}", cm.code_dim());
    let _ = writeln!(out, "matrix");
    push_matrix(&mut out, cm.operator().matrix());
    out
}

pub fn coding_matrix_from_string(text: &str) -> Result<CodingMatrix> {
    let mut lines = Lines::new(text);
    lines.expect(CODING_MATRIX_HEADER)?;
    let dim = lines.keyed_usize("dim")?;
    let code_dim = lines.keyed_usize("code_dim")?;
    lines.expect("matrix")?;
    let m = lines.matrix(dim, dim)?;
    lines.finish()?;
    let op = Operator::unitary(m)?;
    CodingMatrix::from_operator(op, code_dim)
}

pub fn write_coding_matrix(path: &Path, cm: &CodingMatrix) -> Result<()> {
    Ok(std::fs::write(path, coding_matrix_to_string(cm))?)
}

pub fn read_coding_matrix(path: &Path) -> Result<CodingMatrix> {
    coding_matrix_from_string(&std::fs::read_to_string(path)?)
}

/// The control pair travels with its timings so a sequence file is enough
/// to replay the propagator elsewhere.
pub fn control_sequence_to_string(ctrl: &ControlPair, tau: &TimingVector) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CONTROL_SEQUENCE_HEADER}");
    let _ = writeln!(out, "dim {}", ctrl.dim());
    let _ = writeln!(out, "sign_reversible {}", u8::from(ctrl.sign_reversible()));
    let _ = writeln!(out, "pulses {}", tau.len());
    let _ = writeln!(out, "timings");
    for t in tau.timings() {
        let _ = writeln!(out, "{}", fmt_f64(*t));
    }
    let _ = writeln!(out, "h_a");
    push_matrix(&mut out, ctrl.h_a().matrix());
    let _ = writeln!(out, "h_b");
    push_matrix(&mut out, ctrl.h_b().matrix());
    out
}

pub fn control_sequence_from_string(text: &str) -> Result<(ControlPair, TimingVector)> {
    let mut lines = Lines::new(text);
    lines.expect(CONTROL_SEQUENCE_HEADER)?;
    let dim = lines.keyed_usize("dim")?;
    let sr = lines.keyed_usize("sign_reversible")?;
    if sr > 1 {
        return Err(lines.err(format!("sign_reversible must be 0 or 1, got {sr}")));
    }
    let pulses = lines.keyed_usize("pulses")?;
    lines.expect("timings")?;
    let mut timings = Vec::with_capacity(pulses);
    for _ in 0..pulses {
        timings.push(lines.floats(1)?[0]);
    }
    lines.expect("h_a")?;
    let h_a = lines.matrix(dim, dim)?;
    lines.expect("h_b")?;
    let h_b = lines.matrix(dim, dim)?;
    lines.finish()?;
    let h_a = Operator::hermitian(h_a).map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
    let h_b = Operator::hermitian(h_b).map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
    let ctrl = ControlPair::new(h_a, h_b, sr == 1)?;
    let tau = TimingVector::new(timings)?;
    Ok((ctrl, tau))
}

pub fn write_control_sequence(path: &Path, ctrl: &ControlPair, tau: &TimingVector) -> Result<()> {
    Ok(std::fs::write(path, control_sequence_to_string(ctrl, tau))?)
}

pub fn read_control_sequence(path: &Path) -> Result<(ControlPair, TimingVector)> {
    control_sequence_from_string(&std::fs::read_to_string(path)?)
}

/// Join one CSV row; fields are plain (no quoting) because every emitted
/// value is a number or a bare word.
pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}
