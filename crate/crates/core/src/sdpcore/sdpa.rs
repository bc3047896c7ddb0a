//! Sparse SDPA text format.
//!
//! SDPA states `minimize cᵀx` subject to `Σ x_i F_i − F₀ ⪰ 0`, so the LMI
//! constant block is written negated. Layout:
//!
//! ```text
//! "comment
//! m
//! nblocks
//! s_1 s_2 ...
//! c_1 ... c_m
//! k b i j v        (upper triangle, 1-based, k = 0 for F₀)
//! ```

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{LmiProblem, SdpError};
use crate::scalar::Real;

/// Render `prob` in SDPA sparse format with one leading comment line.
pub fn export<T: Real>(prob: &LmiProblem<T>, comment: &str) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "\"{line}");
    }
    let _ = writeln!(out, "{}", prob.m());
    let _ = writeln!(out, "{}", prob.block_sizes.len());
    let sizes: Vec<String> = prob.block_sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let cs: Vec<String> = prob.c.iter().map(|c| fmt_num(*c)).collect();
    let _ = writeln!(out, "{}", cs.join(" "));
    let mut emit = |k: usize, blocks: &[DMatrix<T>], sign: T| {
        for (b, m) in blocks.iter().enumerate() {
            for i in 0..m.nrows() {
                for j in i..m.ncols() {
                    let v = m[(i, j)] * sign;
                    if v != T::zero() {
                        let _ = writeln!(out, "{} {} {} {} {}", k, b + 1, i + 1, j + 1, fmt_num(v));
                    }
                }
            }
        }
    };
    emit(0, &prob.f0, -T::one());
    for (k, fk) in prob.f.iter().enumerate() {
        emit(k + 1, fk, T::one());
    }
    out
}

fn fmt_num<T: Real>(v: T) -> String {
    let x = v.to_f64_lossy();
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parse SDPA sparse text. Negative block sizes denote diagonal blocks.
pub fn import<T: Real>(text: &str) -> Result<LmiProblem<T>, SdpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let err = |line: usize, msg: &str| SdpError::Format { line, msg: msg.to_string() };
    let tokens = |l: &str| -> Vec<String> {
        l.replace(['{', '}', '(', ')', ','], " ").split_whitespace().map(str::to_string).collect()
    };
    let mut header = |what: &str| -> Result<(usize, Vec<String>), SdpError> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing {what}")))?;
        Ok((ln, tokens(l)))
    };
    let (ln, t) = header("variable count")?;
    let m: usize = t.first().and_then(|s| s.parse().ok()).ok_or_else(|| err(ln, "bad variable count"))?;
    let (ln, t) = header("block count")?;
    let nb: usize = t.first().and_then(|s| s.parse().ok()).ok_or_else(|| err(ln, "bad block count"))?;
    let (ln, t) = header("block sizes")?;
    if t.len() < nb {
        return Err(err(ln, "too few block sizes"));
    }
    let raw: Vec<i64> =
        t[..nb].iter().map(|s| s.parse().map_err(|_| err(ln, "bad block size"))).collect::<Result<_, _>>()?;
    let sizes: Vec<usize> = raw.iter().map(|s| s.unsigned_abs() as usize).collect();
    let (ln, t) = header("objective")?;
    if t.len() < m {
        return Err(err(ln, "too few objective entries"));
    }
    let c: Vec<T> = t[..m]
        .iter()
        .map(|s| s.parse::<f64>().map(T::lit).map_err(|_| err(ln, "bad objective entry")))
        .collect::<Result<_, _>>()?;
    let zero_blocks = || sizes.iter().map(|&s| DMatrix::<T>::zeros(s, s)).collect::<Vec<_>>();
    let mut f0 = zero_blocks();
    let mut f: Vec<Vec<DMatrix<T>>> = (0..m).map(|_| zero_blocks()).collect();
    for (ln, l) in lines {
        let t = tokens(l);
        if t.len() < 5 {
            return Err(err(ln, "expected 'k block i j value'"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| err(ln, "bad index"));
        let (k, b, i, j) = (idx(&t[0])?, idx(&t[1])?, idx(&t[2])?, idx(&t[3])?);
        let v: f64 = t[4].parse().map_err(|_| err(ln, "bad value"))?;
        if k > m || b == 0 || b > nb {
            return Err(err(ln, "matrix or block index out of range"));
        }
        let s = sizes[b - 1];
        if i == 0 || j == 0 || i > s || j > s || (raw[b - 1] < 0 && i != j) {
            return Err(err(ln, "entry index out of range"));
        }
        let target = if k == 0 { &mut f0[b - 1] } else { &mut f[k - 1][b - 1] };
        let v = if k == 0 { -T::lit(v) } else { T::lit(v) };
        target[(i - 1, j - 1)] = v;
        target[(j - 1, i - 1)] = v;
    }
    LmiProblem::new(sizes, f0, f, c)
}
