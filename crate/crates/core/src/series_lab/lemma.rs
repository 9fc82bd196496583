//! Worst-case recursion `ξ_{n+1} = max(a_n, (1 + b_n) ξ_n + δ_n − c_n)` and
//! its backwards unrolling.

use super::{RealSeq, SeriesError};

#[derive(Debug, Clone)]
pub struct DsLemmaInput {
    pub a: RealSeq,
    pub b: RealSeq,
    pub c: RealSeq,
    pub delta: RealSeq,
    pub xi0: f64,
    pub n0: usize,
    pub horizon: usize,
}

impl DsLemmaInput {
    pub fn new(
        a: RealSeq,
        b: RealSeq,
        c: RealSeq,
        delta: RealSeq,
        xi0: f64,
        n0: usize,
        horizon: usize,
    ) -> Result<Self, SeriesError> {
        a.require_nonneg("a")?;
        b.require_nonneg("b")?;
        c.require_nonneg("c")?;
        if n0 == 0 || horizon <= n0 {
            return Err(SeriesError::InvalidArgument(format!(
                "need 1 <= n0 < horizon (n0 = {n0}, horizon = {horizon})"
            )));
        }
        if !(xi0 >= 0.0) {
            return Err(SeriesError::InvalidArgument(
                "xi0 must be nonnegative".into(),
            ));
        }
        Ok(Self {
            a,
            b,
            c,
            delta,
            xi0,
            n0,
            horizon,
        })
    }
}

/// `values[k]` is `ξ_{start + k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub start: usize,
    pub values: Vec<f64>,
}

impl Envelope {
    pub fn at(&self, n: usize) -> Option<f64> {
        n.checked_sub(self.start)
            .and_then(|k| self.values.get(k).copied())
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("envelope is never empty")
    }
}

/// Runs the recursion with equality from `ξ_{N0} = ξ0` through `ξ_horizon`.
///
/// Any nonnegative sequence satisfying the inequality with the same data and
/// `ξ_{N0} ≤ ξ0` is dominated pointwise, since the right-hand side is
/// monotone in `ξ_n`.
pub fn ds_lemma1_envelope(inp: &DsLemmaInput) -> Result<Envelope, SeriesError> {
    envelope_until(inp, inp.horizon)
}

fn envelope_until(inp: &DsLemmaInput, last: usize) -> Result<Envelope, SeriesError> {
    let mut values = Vec::with_capacity(last - inp.n0 + 1);
    let mut xi = inp.xi0;
    values.push(xi);
    for n in inp.n0..last {
        xi = step(inp, n, xi)?;
        values.push(xi);
    }
    Ok(Envelope {
        start: inp.n0,
        values,
    })
}

fn step(inp: &DsLemmaInput, n: usize, xi: f64) -> Result<f64, SeriesError> {
    let drift = (1.0 + inp.b.get(n)?) * xi + inp.delta.get(n)? - inp.c.get(n)?;
    Ok(inp.a.get(n)?.max(drift))
}

/// Bound on `ξ_{n+1}` obtained by unrolling the recursion from `N` up to `n`,
/// using the envelope value at `N` as the starting point.
///
/// See [`unrolled_bound`] for the closed form.
pub fn ds_1_helper_bound(inp: &DsLemmaInput, big_n: usize, n: usize) -> Result<f64, SeriesError> {
    check_order(inp, big_n, n)?;
    let xi_big_n = envelope_until(inp, big_n)?.last();
    unrolled_bound(inp, xi_big_n, big_n, n)
}

fn check_order(inp: &DsLemmaInput, big_n: usize, n: usize) -> Result<(), SeriesError> {
    if big_n < inp.n0 || n < big_n || n > inp.horizon {
        return Err(SeriesError::InvalidArgument(format!(
            "need n0 <= N <= n <= horizon (n0 = {}, N = {big_n}, n = {n}, horizon = {})",
            inp.n0, inp.horizon
        )));
    }
    Ok(())
}

/// Closed-form bound on `ξ_{n+1}` for any sequence satisfying the recursion
/// inequality from index `N` on, given `ξ_N = xi_big_n`:
///
/// ```text
/// B(n, N) = max( max_{N ≤ j ≤ n} [ P(j+1..n) a_j + D(j+1..n) ],
///                P(N..n) ξ_N + D(N..n) )
/// P(l..n) = Π_{k=l}^{n} (1 + b_k)
/// D(l..n) = Σ_{k=l}^{n} P(k+1..n) (δ_k − c_k)
/// ```
///
/// Because `x ↦ (1 + b) x + d` distributes over `max` when `1 + b ≥ 0`, the
/// bound equals the envelope started at `ξ_N` up to rounding.
pub fn unrolled_bound(
    inp: &DsLemmaInput,
    xi_big_n: f64,
    big_n: usize,
    n: usize,
) -> Result<f64, SeriesError> {
    check_order(inp, big_n, n)?;
    let mut growth = 1.0; // P(j+1..n)
    let mut offset = 0.0; // D(j+1..n)
    let mut best = f64::NEG_INFINITY;
    for j in (big_n..=n).rev() {
        best = best.max(growth * inp.a.get(j)? + offset);
        offset += growth * (inp.delta.get(j)? - inp.c.get(j)?);
        growth *= 1.0 + inp.b.get(j)?;
    }
    Ok(best.max(growth * xi_big_n + offset))
}
