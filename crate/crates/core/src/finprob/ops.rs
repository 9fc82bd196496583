use serde::Serialize;

use super::space::{FiniteProbSpace, Partition, RandomVar};
use super::FinProbError;
use crate::series_lab::RealSeq;

pub fn expectation(sp: &FiniteProbSpace, x: &RandomVar) -> Result<f64, FinProbError> {
    sp.check_len(x)?;
    Ok(sp
        .weights()
        .iter()
        .zip(x.values())
        .map(|(w, v)| w * v)
        .sum())
}

/// Block-wise weighted average of `x`, i.e. the orthogonal projection onto
/// `part`-measurable variables.
///
/// A block on which `x` is already constant keeps that constant exactly, so
/// projecting twice is the identity bit for bit. Zero-weight blocks fall
/// back to the unweighted mean.
pub fn cond_expectation(
    sp: &FiniteProbSpace,
    part: &Partition,
    x: &RandomVar,
) -> Result<RandomVar, FinProbError> {
    sp.check_len(x)?;
    part.check_len(x)?;
    let k = part.block_count();
    let mut wsum = vec![0.0; k];
    let mut wx = vec![0.0; k];
    let mut plain = vec![0.0; k];
    let mut count = vec![0usize; k];
    let mut first = vec![f64::NAN; k];
    let mut constant = vec![true; k];
    for (i, (&b, &v)) in part.block_of().iter().zip(x.values()).enumerate() {
        let w = sp.weights()[i];
        wsum[b] += w;
        wx[b] += w * v;
        plain[b] += v;
        if count[b] == 0 {
            first[b] = v;
        } else if v != first[b] {
            constant[b] = false;
        }
        count[b] += 1;
    }
    let level: Vec<f64> = (0..k)
        .map(|b| {
            if constant[b] {
                first[b]
            } else if wsum[b] > 0.0 {
                wx[b] / wsum[b]
            } else {
                plain[b] / count[b] as f64
            }
        })
        .collect();
    Ok(RandomVar::new(
        part.block_of().iter().map(|&b| level[b]).collect(),
    ))
}

/// True iff `x` is constant (exactly) on every block.
pub fn is_measurable(x: &RandomVar, part: &Partition) -> Result<bool, FinProbError> {
    part.check_len(x)?;
    let mut level = vec![None; part.block_count()];
    for (&b, &v) in part.block_of().iter().zip(x.values()) {
        match level[b] {
            None => level[b] = Some(v),
            Some(c) if c != v => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

fn require_measurable(x: &RandomVar, part: &Partition, what: &str) -> Result<(), FinProbError> {
    if !is_measurable(x, part)? {
        return Err(FinProbError::NotMeasurable(what.to_string()));
    }
    Ok(())
}

/// `max_B |E[X·1_B] − E[ce·1_B]|` over the blocks of `part`.
pub fn check_universal_property(
    sp: &FiniteProbSpace,
    part: &Partition,
    x: &RandomVar,
    ce: &RandomVar,
) -> Result<f64, FinProbError> {
    sp.check_len(x)?;
    sp.check_len(ce)?;
    require_measurable(ce, part, "candidate conditional expectation")?;
    let mut lhs = vec![0.0; part.block_count()];
    let mut rhs = vec![0.0; part.block_count()];
    for (i, &b) in part.block_of().iter().enumerate() {
        let w = sp.weights()[i];
        lhs[b] += w * x.values()[i];
        rhs[b] += w * ce.values()[i];
    }
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max))
}

/// `max |E[E[X|fine]|coarse] − E[X|coarse]|`.
pub fn check_tower(
    sp: &FiniteProbSpace,
    coarse: &Partition,
    fine: &Partition,
    x: &RandomVar,
) -> Result<f64, FinProbError> {
    if !fine.refines(coarse) {
        return Err(FinProbError::NotRefinement {
            detail: "fine partition does not refine the coarse one".into(),
        });
    }
    let nested = cond_expectation(sp, coarse, &cond_expectation(sp, fine, x)?)?;
    let direct = cond_expectation(sp, coarse, x)?;
    Ok(nested.max_abs_diff(&direct))
}

/// `max |E[Xm·Y|part] − Xm·E[Y|part]|` for `part`-measurable `Xm`.
pub fn check_factor_out(
    sp: &FiniteProbSpace,
    part: &Partition,
    xm: &RandomVar,
    y: &RandomVar,
) -> Result<f64, FinProbError> {
    sp.check_len(xm)?;
    sp.check_len(y)?;
    require_measurable(xm, part, "factor")?;
    let lhs = cond_expectation(sp, part, &xm.zip_with(y, |a, b| a * b))?;
    let rhs = xm.zip_with(&cond_expectation(sp, part, y)?, |a, b| a * b);
    Ok(lhs.max_abs_diff(&rhs))
}

/// A real map the caller declares convex.
#[derive(Debug, Clone, Copy)]
pub struct Convex<F>(pub F);

/// `min_ω [E[φ(X)|part] − φ(E[X|part])](ω)`; nonnegative for convex `φ`.
pub fn jensen_check<F: Fn(f64) -> f64>(
    sp: &FiniteProbSpace,
    part: &Partition,
    x: &RandomVar,
    phi: &Convex<F>,
) -> Result<f64, FinProbError> {
    let lhs = cond_expectation(sp, part, &x.map(&phi.0))?;
    let rhs = cond_expectation(sp, part, x)?.map(&phi.0);
    Ok(lhs
        .values()
        .iter()
        .zip(rhs.values())
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevBound {
    /// `P(|X| ≥ a)`
    pub lhs: f64,
    /// `E[X²] / a²`
    pub rhs: f64,
}

pub fn chebyshev_check(
    sp: &FiniteProbSpace,
    x: &RandomVar,
    a: f64,
) -> Result<ChebyshevBound, FinProbError> {
    if !(a > 0.0) {
        return Err(FinProbError::InvalidArgument(format!(
            "threshold must be positive, got {a}"
        )));
    }
    sp.check_len(x)?;
    let lhs = sp
        .weights()
        .iter()
        .zip(x.values())
        .filter(|(_, v)| v.abs() >= a)
        .map(|(w, _)| w)
        .sum();
    let rhs = expectation(sp, &x.map(|v| v * v))? / (a * a);
    Ok(ChebyshevBound { lhs, rhs })
}

/// Union bound `Σ_{n=k}^{horizon} p_n` on `P(∪_{n≥k} E_n)`.
pub fn borel_cantelli_tail(p: &RealSeq, k: usize, horizon: usize) -> Result<f64, FinProbError> {
    if k == 0 {
        return Err(FinProbError::InvalidArgument("k is 1-based".into()));
    }
    let mut total = 0.0;
    for n in k..=horizon {
        let v = p
            .get(n)
            .map_err(|e| FinProbError::InvalidArgument(e.to_string()))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(FinProbError::InvalidArgument(format!(
                "p_{n} = {v} is not a probability"
            )));
        }
        total += v;
    }
    Ok(total)
}

/// `(E|X|^p)^{1/p}`
pub fn lp_norm(sp: &FiniteProbSpace, x: &RandomVar, p: f64) -> Result<f64, FinProbError> {
    if !(p >= 1.0) {
        return Err(FinProbError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    let m = expectation(sp, &x.map(|v| v.abs().powf(p)))?;
    Ok(m.powf(1.0 / p))
}
