use std::fmt;
use std::sync::Arc;

use crate::series_lab::{abel_dini_rho, DeclaredSign, RealSeq, Schedule};

use super::params::{BoundMode, DvoretzkyParams};
use super::CheckerError;

pub type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Root-finding data with a linear growth bound and a local inverse.
#[derive(Clone)]
pub struct BlumProblem {
    pub m: RealMap,
    /// Inverse of `m`, trusted on `inverse_domain` only.
    pub m_inverse: RealMap,
    pub inverse_domain: (f64, f64),
    /// `|M(x)| ≤ lin_a |x| + lin_b`.
    pub lin_a: f64,
    pub lin_b: f64,
    pub sigma: f64,
    pub a: Schedule,
    /// Target level `b` in `M(x) = b`.
    pub b: f64,
}

impl fmt::Debug for BlumProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlumProblem")
            .field("inverse_domain", &self.inverse_domain)
            .field("lin_a", &self.lin_a)
            .field("lin_b", &self.lin_b)
            .field("sigma", &self.sigma)
            .field("a", &self.a.label())
            .field("b", &self.b)
            .finish()
    }
}

impl BlumProblem {
    /// Spot-checks the linear bound on `grid` and `M(x*) = b`.
    pub fn validate(&self, x_star: f64, grid: &[f64]) -> Result<(), CheckerError> {
        if !(self.lin_a >= 0.0 && self.lin_b >= 0.0 && self.sigma >= 0.0) {
            return Err(CheckerError::Regularity(
                "A, B and sigma must be nonnegative".into(),
            ));
        }
        for &x in grid {
            let bound = self.lin_a * x.abs() + self.lin_b;
            let mx = (self.m)(x);
            if !(mx.abs() <= bound + 1e-9 * bound.max(1.0)) {
                return Err(CheckerError::Regularity(format!(
                    "|M({x})| = {} exceeds {bound}",
                    mx.abs()
                )));
            }
        }
        let at_root = (self.m)(x_star);
        if (at_root - self.b).abs() > 1e-9 * self.b.abs().max(1.0) {
            return Err(CheckerError::Regularity(format!(
                "M(x*) = {at_root}, expected {}",
                self.b
            )));
        }
        Ok(())
    }

    fn in_domain(&self, y: f64) -> bool {
        y >= self.inverse_domain.0 && y <= self.inverse_domain.1
    }
}

/// Parameters together with the sequences they were built from.
#[derive(Debug, Clone)]
pub struct BlumConstruction {
    pub params: DvoretzkyParams,
    pub n0: usize,
    pub rho: Schedule,
    pub eta: Schedule,
}

/// `α_n = max(η_n, B a_n)`, `β_n = 0`, `γ_n = a_n ρ_n`, where
/// `η_n = max_± |M⁻¹(b ± ρ_n) − x*|` is the radius of the set on which
/// `|M(x) − b| ≤ ρ_n`.
///
/// `ρ` defaults to `1/S_n` with `S_n` the partial sums of `a`. `N₀` is the
/// first index with `b ± ρ_n` inside the inverse's domain; terms before
/// `N₀` repeat the values at `N₀`.
pub fn blum_to_dvoretzky(
    bp: &BlumProblem,
    x_star: f64,
    horizon: usize,
    rho: Option<Schedule>,
) -> Result<BlumConstruction, CheckerError> {
    if horizon < 2 {
        return Err(CheckerError::InvalidArgument(
            "horizon must be at least 2".into(),
        ));
    }
    let rho = match rho {
        Some(r) => r,
        None => abel_dini_rho(&bp.a, horizon)?,
    };
    let rho_vals = rho.prefix(horizon)?;
    let Some(start) = rho_vals
        .iter()
        .position(|&r| r >= 0.0 && bp.in_domain(bp.b + r) && bp.in_domain(bp.b - r))
    else {
        let largest = rho_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let smallest = rho_vals.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(CheckerError::BlumDomain { largest, smallest });
    };
    let n0 = start + 1;

    let mut eta = vec![0.0; horizon];
    let mut alpha = vec![0.0; horizon];
    let mut gamma = vec![0.0; horizon];
    for n in n0..=horizon {
        let r = rho_vals[n - 1];
        if !(bp.in_domain(bp.b + r) && bp.in_domain(bp.b - r)) {
            return Err(CheckerError::Regularity(format!(
                "rho_{n} = {r} leaves the inverse domain after entering it"
            )));
        }
        let e = ((bp.m_inverse)(bp.b + r) - x_star)
            .abs()
            .max(((bp.m_inverse)(bp.b - r) - x_star).abs());
        let a = bp.a.get(n)?;
        eta[n - 1] = e;
        alpha[n - 1] = e.max(bp.lin_b * a);
        gamma[n - 1] = a * r;
    }
    for n in 1..n0 {
        eta[n - 1] = eta[n0 - 1];
        alpha[n - 1] = alpha[n0 - 1];
        gamma[n - 1] = gamma[n0 - 1];
    }
    let seq = |label: &str, v: Vec<f64>| RealSeq::from_values(label, DeclaredSign::Nonnegative, v);
    let params = DvoretzkyParams::regular(
        seq("blum_alpha", alpha)?,
        Schedule::zero(),
        seq("blum_gamma", gamma)?,
        BoundMode::Original,
        n0,
    );
    Ok(BlumConstruction {
        params,
        n0,
        rho,
        eta: seq("blum_eta", eta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvoretzky_checker::{check_t_bound, GridConfig, Status};
    use crate::process_engine::{NoiseModel, ProcessSpec, Transform};

    fn affine(k: f64, c: f64, b_lin: f64, a: Schedule) -> BlumProblem {
        BlumProblem {
            m: Arc::new(move |x| k * x + c),
            m_inverse: Arc::new(move |y| (y - c) / k),
            inverse_domain: (f64::NEG_INFINITY, f64::INFINITY),
            lin_a: k.abs(),
            lin_b: b_lin,
            sigma: 1.0,
            a,
            b: 0.0,
        }
    }

    #[test]
    fn identity_map_gives_rho() {
        let a = Schedule::harmonic(1.0, 1.0);
        let bp = affine(1.0, 0.0, 0.5, a.clone());
        let c = blum_to_dvoretzky(&bp, 0.0, 2000, None).unwrap();
        assert_eq!(c.n0, 1);
        let mut s = 0.0;
        for n in 1..=2000 {
            let an = a.get(n).unwrap();
            s += an;
            let rho = 1.0 / s;
            assert!((c.eta.get(n).unwrap() - rho).abs() < 1e-12);
            let want_alpha = rho.max(0.5 * an);
            assert!((c.params.alpha.eval(n, 0).unwrap() - want_alpha).abs() < 1e-12);
            assert_eq!(c.params.beta.eval(n, 0).unwrap(), 0.0);
            assert!((c.params.gamma.eval(n, 0).unwrap() - rho / (n as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_b_means_alpha_is_rho() {
        let bp = affine(1.0, 0.0, 0.0, Schedule::harmonic(1.0, 1.0));
        let c = blum_to_dvoretzky(&bp, 0.0, 500, None).unwrap();
        for n in 1..=500 {
            assert_eq!(c.params.alpha.eval(n, 0).unwrap(), c.rho.get(n).unwrap());
        }
    }

    #[test]
    fn affine_root_and_t_bound() {
        let a = Schedule::harmonic(1.0, 1.0);
        let bp = affine(2.0, 1.0, 1.0, a.clone());
        bp.validate(-0.5, &[-1e3, -1.0, 0.0, 2.0, 1e3]).unwrap();
        let c = blum_to_dvoretzky(&bp, -0.5, 5000, None).unwrap();
        for n in [1, 10, 4999] {
            assert!((c.eta.get(n).unwrap() - c.rho.get(n).unwrap() / 2.0).abs() < 1e-12);
        }
        let a2 = a.clone();
        let t = Transform::deterministic(move |n, h| {
            let x = h[n - 1];
            x - a2.get(n).unwrap() * (2.0 * x + 1.0)
        });
        let spec = ProcessSpec::new("rm", t, NoiseModel::zero(), -0.5, 0.0);
        let e = check_t_bound(&spec, &c.params, Some(&GridConfig::default()), &[], &[]).unwrap();
        assert_eq!(e.status, Status::Pass, "{e:?}");
    }

    #[test]
    fn n0_waits_for_domain() {
        let mut bp = affine(1.0, 0.0, 0.0, Schedule::harmonic(1.0, 1.0));
        bp.inverse_domain = (-0.2, 0.2);
        let c = blum_to_dvoretzky(&bp, 0.0, 1000, None).unwrap();
        assert!(c.rho.get(c.n0).unwrap() <= 0.2);
        assert!(c.rho.get(c.n0 - 1).unwrap() > 0.2);
        bp.inverse_domain = (-1e-9, 1e-9);
        match blum_to_dvoretzky(&bp, 0.0, 1000, None) {
            Err(CheckerError::BlumDomain { largest, .. }) => assert_eq!(largest, 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn caller_rho_is_used() {
        let bp = affine(1.0, 0.0, 0.0, Schedule::harmonic(1.0, 1.0));
        let c = blum_to_dvoretzky(&bp, 0.0, 100, Some(Schedule::inv_log(1.0))).unwrap();
        assert!((c.eta.get(9).unwrap() - 1.0 / 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn linear_bound_is_checked() {
        let mut bp = affine(2.0, 1.0, 1.0, Schedule::harmonic(1.0, 1.0));
        bp.lin_b = 0.5;
        assert!(bp.validate(-0.5, &[0.0]).is_err());
        let bp = affine(2.0, 1.0, 1.0, Schedule::harmonic(1.0, 1.0));
        assert!(bp.validate(0.0, &[0.0]).is_err());
    }
}
