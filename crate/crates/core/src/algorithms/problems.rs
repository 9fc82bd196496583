use crate::process_engine::NoiseModel;

use super::maps::MapSpec;
use super::AlgoError;

/// Solve `M(x) = b` from noisy evaluations `Y = M(x) + ε`.
#[derive(Debug, Clone)]
pub struct RootFindingProblem {
    pub m: MapSpec,
    pub b: f64,
    /// Law of `Y − M(x)`.
    pub noise: NoiseModel,
    /// `|M(x)| ≤ lin_a |x| + lin_b`.
    pub lin_a: f64,
    pub lin_b: f64,
}

impl RootFindingProblem {
    /// Takes the linear-bound constants from the map when it has them.
    pub fn new(m: MapSpec, b: f64, noise: NoiseModel) -> Self {
        let (lin_a, lin_b) = m.linear_bound().unwrap_or((f64::INFINITY, f64::INFINITY));
        Self {
            m,
            b,
            noise,
            lin_a,
            lin_b,
        }
    }

    pub fn with_bound(mut self, lin_a: f64, lin_b: f64) -> Self {
        self.lin_a = lin_a;
        self.lin_b = lin_b;
        self
    }

    /// Checks `|M(x)| ≤ A|x| + B` at every grid point.
    pub fn validate(&self, grid: &[f64]) -> Result<(), AlgoError> {
        for &x in grid {
            let bound = self.lin_a * x.abs() + self.lin_b;
            if !(self.m.eval(x).abs() <= bound + 1e-12 * bound.max(1.0)) {
                return Err(AlgoError::InvalidProblem(format!(
                    "|M({x})| = {} exceeds the declared bound {bound}",
                    self.m.eval(x).abs()
                )));
            }
        }
        Ok(())
    }

    pub fn root(&self) -> Option<f64> {
        let (lo, hi) = self.m.inverse_domain()?;
        if self.b > lo && self.b < hi {
            self.m.inverse(self.b)
        } else {
            None
        }
    }
}

/// Minimize `E L(y, x)` given the clean gradient `∇_x E L` and additive
/// gradient noise.
#[derive(Debug, Clone)]
pub struct MinimizationProblem {
    pub grad: MapSpec,
    pub noise: NoiseModel,
}

impl MinimizationProblem {
    pub fn minimizer(&self) -> Option<f64> {
        self.grad.inverse(0.0)
    }
}

/// Fixed point of a contraction `g`.
#[derive(Debug, Clone)]
pub struct ContractionProblem {
    pub g: MapSpec,
    pub gamma_contr: f64,
    pub fixed_point: f64,
}

impl ContractionProblem {
    /// Spot-checks the Lipschitz bound on all pairs of `grid` and that
    /// `fixed_point` is fixed.
    pub fn new(
        g: MapSpec,
        gamma_contr: f64,
        fixed_point: f64,
        grid: &[f64],
    ) -> Result<Self, AlgoError> {
        if !(gamma_contr > 0.0 && gamma_contr < 1.0) {
            return Err(AlgoError::InvalidProblem(format!(
                "contraction factor {gamma_contr} is not in (0, 1)"
            )));
        }
        let gap = (g.eval(fixed_point) - fixed_point).abs();
        if gap > 1e-9 * fixed_point.abs().max(1.0) {
            return Err(AlgoError::InvalidProblem(format!(
                "g({fixed_point}) differs from {fixed_point} by {gap}"
            )));
        }
        for (i, &x) in grid.iter().enumerate() {
            for &y in &grid[i + 1..] {
                let lhs = (g.eval(x) - g.eval(y)).abs();
                let rhs = gamma_contr * (x - y).abs();
                if lhs > rhs + 1e-12 * rhs.max(1.0) {
                    return Err(AlgoError::InvalidProblem(format!(
                        "|g({x}) - g({y})| = {lhs} exceeds {rhs}"
                    )));
                }
            }
        }
        Ok(Self {
            g,
            gamma_contr,
            fixed_point,
        })
    }
}

/// Symmetric grid `0, ±10^k` for `k` in `-3..=3`, used for spot checks.
pub fn default_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    for k in -3..=3 {
        for m in [1.0, 2.5, 5.0] {
            let x = m * 10f64.powi(k);
            g.push(x);
            g.push(-x);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_root() {
        let p =
            RootFindingProblem::new(MapSpec::Linear { k: 2.0, c: 1.0 }, 0.0, NoiseModel::zero());
        assert_eq!(p.root(), Some(-0.5));
        assert!(p.validate(&default_grid()).is_ok());
        let tight = p.clone().with_bound(2.0, 0.5);
        assert!(tight.validate(&default_grid()).is_err());
    }

    #[test]
    fn contraction_checks() {
        let g = MapSpec::Linear { k: 0.5, c: 1.0 };
        assert!(ContractionProblem::new(g, 0.5, 2.0, &default_grid()).is_ok());
        assert!(ContractionProblem::new(g, 0.4, 2.0, &default_grid()).is_err());
        assert!(ContractionProblem::new(g, 0.5, 1.0, &default_grid()).is_err());
        assert!(ContractionProblem::new(g, 1.0, 2.0, &default_grid()).is_err());
    }

    #[test]
    fn quadratic_minimizer() {
        let p = MinimizationProblem {
            grad: MapSpec::Linear { k: 3.0, c: -6.0 },
            noise: NoiseModel::zero(),
        };
        assert_eq!(p.minimizer(), Some(2.0));
    }
}
