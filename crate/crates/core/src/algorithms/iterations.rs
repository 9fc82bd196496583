use crate::process_engine::{simulate, NoiseModel, ProcessSpec, Trajectory, Transform};
use crate::series_lab::{DeclaredSign, RealSeq, Schedule};

use super::problems::{ContractionProblem, MinimizationProblem, RootFindingProblem};
use super::AlgoError;

fn require_nonneg(a: &Schedule) -> Result<(), AlgoError> {
    if a.sign() != DeclaredSign::Nonnegative {
        return Err(AlgoError::InvalidProblem(format!(
            "step sizes {} must be declared nonnegative",
            a.label()
        )));
    }
    Ok(())
}

/// Schedule lookups inside a transform; an unavailable term poisons the
/// step so the divergence guard stops the trajectory.
#[inline]
fn term(s: &Schedule, n: usize) -> f64 {
    s.get(n).unwrap_or(f64::NAN)
}

/// `T_n = x_n + a_n (b − M(x_n))`, `W_n = −a_n ε_n`.
pub fn rm_spec(p: &RootFindingProblem, a: &Schedule, x0: f64, x_star: f64) -> ProcessSpec {
    let (m, b, a_t) = (p.m, p.b, a.clone());
    let t = Transform::deterministic(move |n, h| {
        let x = h[n - 1];
        x + term(&a_t, n) * (b - m.eval(x))
    });
    let w = NoiseModel::scaled(p.noise.clone(), a.clone(), true);
    ProcessSpec::new("robbins_monro", t, w, x_star, x0)
}

/// `x_{n+1} = x_n + a_n (b − y_n)` with `y_n = M(x_n) + ε_n`.
pub fn robbins_monro(
    p: &RootFindingProblem,
    a: &Schedule,
    seed: u64,
    horizon: usize,
    x0: f64,
) -> Result<Trajectory, AlgoError> {
    require_nonneg(a)?;
    let x_star = p.root().unwrap_or(f64::NAN);
    Ok(simulate(&rm_spec(p, a, x0, x_star), seed, horizon)?)
}

/// Two-sided difference quotient ascent on `M`, with an independent noise
/// draw at each of `x_n ± c_n`.
pub fn kw_spec(
    p: &RootFindingProblem,
    a: &Schedule,
    c: &Schedule,
    x0: f64,
    x_star: f64,
) -> ProcessSpec {
    let (m, a_t, c_t) = (p.m, a.clone(), c.clone());
    let t = Transform::deterministic(move |n, h| {
        let x = h[n - 1];
        let cn = term(&c_t, n);
        x + term(&a_t, n) * (m.eval(x + cn) - m.eval(x - cn)) / (2.0 * cn)
    });
    let (a_w, c_w) = (a.clone(), c.clone());
    let factor = RealSeq::nonneg(format!("{}/(2 {})", a.label(), c.label()), move |n| {
        term(&a_w, n) / (2.0 * term(&c_w, n))
    });
    let w = NoiseModel::scaled(NoiseModel::difference(p.noise.clone()), factor, false);
    ProcessSpec::new("kiefer_wolfowitz", t, w, x_star, x0)
}

/// `x_{n+1} = x_n + a_n (y⁺_n − y⁻_n) / (2 c_n)`, `y^± = M(x_n ± c_n) + ε^±`.
pub fn kiefer_wolfowitz(
    p: &RootFindingProblem,
    a: &Schedule,
    c: &Schedule,
    seed: u64,
    horizon: usize,
    x0: f64,
    x_star: f64,
) -> Result<Trajectory, AlgoError> {
    require_nonneg(a)?;
    for n in 1..horizon {
        let cn = c.get(n)?;
        if !(cn > 0.0) {
            return Err(AlgoError::InvalidProblem(format!(
                "c_{n} = {cn} must be positive"
            )));
        }
    }
    Ok(simulate(&kw_spec(p, a, c, x0, x_star), seed, horizon)?)
}

/// `T_n = x_n − a_n ∇L(x_n)`, `W_n = −a_n ξ_n`.
pub fn sgd_spec(p: &MinimizationProblem, a: &Schedule, x0: f64, x_star: f64) -> ProcessSpec {
    let (g, a_t) = (p.grad, a.clone());
    let t = Transform::deterministic(move |n, h| {
        let x = h[n - 1];
        x - term(&a_t, n) * g.eval(x)
    });
    let w = NoiseModel::scaled(p.noise.clone(), a.clone(), true);
    ProcessSpec::new("sgd", t, w, x_star, x0)
}

/// `x_{n+1} = x_n − a_n (∇L(x_n) + ξ_n)`.
pub fn sgd(
    p: &MinimizationProblem,
    a: &Schedule,
    seed: u64,
    horizon: usize,
    x0: f64,
) -> Result<Trajectory, AlgoError> {
    require_nonneg(a)?;
    let x_star = p.minimizer().unwrap_or(f64::NAN);
    Ok(simulate(&sgd_spec(p, a, x0, x_star), seed, horizon)?)
}

/// `T_n = x_n + a_n (g(x_n) − x_n)` without noise.
pub fn banach_spec(p: &ContractionProblem, a: &Schedule, x0: f64) -> ProcessSpec {
    let (g, a_t) = (p.g, a.clone());
    let t = Transform::deterministic(move |n, h| {
        let x = h[n - 1];
        x + term(&a_t, n) * (g.eval(x) - x)
    });
    ProcessSpec::new("banach", t, NoiseModel::zero(), p.fixed_point, x0)
}

/// Deterministic relaxed fixed-point iteration `x_1 = x0, …, x_horizon`.
pub fn banach_iterate(
    p: &ContractionProblem,
    a: &Schedule,
    x0: f64,
    horizon: usize,
) -> Result<Vec<f64>, AlgoError> {
    if horizon == 0 {
        return Err(AlgoError::InvalidProblem(
            "horizon must be at least 1".into(),
        ));
    }
    let mut xs = Vec::with_capacity(horizon);
    let mut x = x0;
    xs.push(x);
    for n in 1..horizon {
        let an = a.get(n)?;
        if !(0.0..=1.0).contains(&an) {
            return Err(AlgoError::InvalidProblem(format!(
                "a_{n} = {an} is outside [0, 1]"
            )));
        }
        x += an * (p.g.eval(x) - x);
        xs.push(x);
    }
    Ok(xs)
}

/// `T_n = slope · x_n + intercept`.
pub fn affine_spec(
    slope: f64,
    intercept: f64,
    noise: NoiseModel,
    x0: f64,
    x_star: f64,
) -> ProcessSpec {
    let t = Transform::deterministic(move |n, h| slope * h[n - 1] + intercept);
    ProcessSpec::new("affine", t, noise, x_star, x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::MapSpec;

    fn linear_rm(k: f64, c: f64, sigma: f64) -> RootFindingProblem {
        RootFindingProblem::new(
            MapSpec::Linear { k, c },
            0.0,
            NoiseModel::gaussian(Schedule::constant(sigma)),
        )
    }

    #[test]
    fn noiseless_rm_telescopes() {
        let tr = robbins_monro(
            &linear_rm(1.0, 0.0, 0.0),
            &Schedule::harmonic(1.0, 1.0),
            0,
            2000,
            3.0,
        )
        .unwrap();
        for (k, x) in tr.xs.iter().enumerate() {
            assert!((x - 3.0 / (k + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn rm_satisfies_both_forms() {
        let p = linear_rm(2.0, 1.0, 1.0);
        let a = Schedule::harmonic(1.0, 1.0);
        let tr = robbins_monro(&p, &a, 9, 5000, 1.0).unwrap();
        for k in 0..tr.ts.len() {
            let n = k + 1;
            let an = a.get(n).unwrap();
            let x = tr.xs[k];
            assert!((tr.xs[k + 1] - tr.ts[k] - tr.ws[k]).abs() < 1e-12);
            assert!((tr.ts[k] - (x + an * (0.0 - (2.0 * x + 1.0)))).abs() < 1e-12);
            // y_n recovered from the noise: x_{n+1} = x_n + a_n (b − y_n)
            let y = 2.0 * x + 1.0 - tr.ws[k] / an;
            assert!((tr.xs[k + 1] - (x + an * (0.0 - y))).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_steps_freeze() {
        let tr = robbins_monro(&linear_rm(2.0, 1.0, 1.0), &Schedule::zero(), 1, 100, 0.75).unwrap();
        assert!(tr.xs.iter().all(|&x| x == 0.75));
    }

    #[test]
    fn kw_finds_the_maximum() {
        let p = RootFindingProblem::new(
            MapSpec::NegQuadratic {
                scale: 1.0,
                center: 0.0,
            },
            0.0,
            NoiseModel::zero(),
        );
        let a = Schedule::harmonic(1.0, 1.0);
        let c = Schedule::power(1.0 / 3.0, 1.0, 0.0);
        let tr = kiefer_wolfowitz(&p, &a, &c, 0, 100_000, 5.0, 0.0).unwrap();
        assert!(tr.last().abs() < 0.05);
        // same schedule, exact gradient ascent
        let mut x: f64 = 5.0;
        for n in 1..100_000 {
            x += a.get(n).unwrap() * (-2.0 * x);
        }
        assert!((tr.last() - x).abs() < 1e-9);
    }

    #[test]
    fn kw_linear_drifts_with_slope() {
        let p =
            RootFindingProblem::new(MapSpec::Linear { k: -0.5, c: 3.0 }, 0.0, NoiseModel::zero());
        let tr = kiefer_wolfowitz(
            &p,
            &Schedule::harmonic(1.0, 0.0),
            &Schedule::constant(0.1),
            0,
            50,
            0.0,
            0.0,
        )
        .unwrap();
        assert!(tr.xs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kw_constant_width_on_quadratic() {
        let p = RootFindingProblem::new(
            MapSpec::NegQuadratic {
                scale: 1.0,
                center: 2.0,
            },
            0.0,
            NoiseModel::zero(),
        );
        let tr = kiefer_wolfowitz(
            &p,
            &Schedule::harmonic(1.0, 1.0),
            &Schedule::constant(0.3),
            0,
            10_000,
            -1.0,
            2.0,
        )
        .unwrap();
        assert!((tr.last() - 2.0).abs() < 0.3);
    }

    #[test]
    fn kw_rejects_nonpositive_width() {
        let p = RootFindingProblem::new(
            MapSpec::NegQuadratic {
                scale: 1.0,
                center: 0.0,
            },
            0.0,
            NoiseModel::zero(),
        );
        assert!(kiefer_wolfowitz(
            &p,
            &Schedule::harmonic(1.0, 1.0),
            &Schedule::zero(),
            0,
            10,
            0.0,
            0.0
        )
        .is_err());
    }

    #[test]
    fn sgd_matches_rm_without_noise() {
        let theta = 1.5;
        let grad = MapSpec::Linear { k: 1.0, c: -theta };
        let a = Schedule::harmonic(1.0, 1.0);
        let s = sgd(
            &MinimizationProblem {
                grad,
                noise: NoiseModel::zero(),
            },
            &a,
            0,
            500,
            4.0,
        )
        .unwrap();
        let r = robbins_monro(
            &RootFindingProblem::new(grad, 0.0, NoiseModel::zero()),
            &a,
            0,
            500,
            4.0,
        )
        .unwrap();
        assert_eq!(s.xs, r.xs);
    }

    #[test]
    fn sgd_unit_step_lands_on_minimum() {
        let p = MinimizationProblem {
            grad: MapSpec::Linear { k: 1.0, c: 0.0 },
            noise: NoiseModel::zero(),
        };
        let tr = sgd(&p, &Schedule::constant(1.0), 0, 5, 7.0).unwrap();
        assert_eq!(&tr.xs[1..], &[0.0; 4]);
    }

    #[test]
    fn sgd_error_matches_product() {
        let curv = 0.8;
        let p = MinimizationProblem {
            grad: MapSpec::Linear { k: curv, c: 0.0 },
            noise: NoiseModel::zero(),
        };
        let a = Schedule::harmonic(1.0, 1.0);
        let tr = sgd(&p, &a, 0, 300, 2.0).unwrap();
        let mut prod = 1.0;
        for (k, x) in tr.xs.iter().enumerate().skip(1) {
            prod *= 1.0 - a.get(k).unwrap() * curv;
            assert!(x.abs() <= 2.0 * prod.abs() + 1e-12);
        }
    }

    #[test]
    fn banach_examples() {
        let grid = crate::algorithms::default_grid();
        let p =
            ContractionProblem::new(MapSpec::Linear { k: 0.9, c: 0.0 }, 0.9, 0.0, &grid).unwrap();
        let xs = banach_iterate(&p, &Schedule::constant(1.0), 2.0, 30).unwrap();
        for (k, x) in xs.iter().enumerate() {
            assert!((x - 2.0 * 0.9f64.powi(k as i32)).abs() < 1e-14);
        }
        let q =
            ContractionProblem::new(MapSpec::Linear { k: 0.5, c: 1.0 }, 0.5, 2.0, &grid).unwrap();
        let xs = banach_iterate(&q, &Schedule::harmonic(1.0, 1.0), -3.0, 10_000).unwrap();
        // error contracts by exactly 1 − a_n/2 per step
        let mut err = -5.0;
        for (k, x) in xs.iter().enumerate().skip(1) {
            err *= 1.0 - 0.5 / (k as f64 + 1.0);
            assert!((x - 2.0 - err).abs() < 1e-12);
        }
        assert!((xs[9_999] - 2.0).abs() < 0.1);
        assert!(xs
            .windows(2)
            .all(|w| (w[1] - 2.0).abs() <= (w[0] - 2.0).abs()));
        let fixed = banach_iterate(&q, &Schedule::harmonic(1.0, 1.0), 2.0, 100).unwrap();
        assert!(fixed.iter().all(|&x| x == 2.0));
        assert!(banach_iterate(&q, &Schedule::constant(1.5), 0.0, 5).is_err());
    }
}
