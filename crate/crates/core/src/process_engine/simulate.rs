use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::noise::NoiseModel;
use super::rng;
use super::ProcessError;

/// `|X_n|` above this flags the trajectory as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

type TransformFn = dyn Fn(usize, &[f64], f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Deterministic,
    Adapted,
}

/// `T_n` as a map of the step index and the history `x_1..x_n`.
///
/// Adapted transforms also receive an auxiliary uniform in (0, 1) that is
/// drawn from the same keyed stream as the noise, in its own lane.
#[derive(Clone)]
pub struct Transform {
    kind: TransformKind,
    f: Arc<TransformFn>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform")
            .field("kind", &self.kind)
            .finish()
    }
}

impl Transform {
    pub fn deterministic<F>(f: F) -> Self
    where
        F: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: TransformKind::Deterministic,
            f: Arc::new(move |n, h, _| f(n, h)),
        }
    }

    pub fn adapted<F>(f: F) -> Self
    where
        F: Fn(usize, &[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: TransformKind::Adapted,
            f: Arc::new(f),
        }
    }

    /// `T_n(x_1..x_n) = x_n`.
    pub fn identity() -> Self {
        Self::deterministic(|_, h| h[h.len() - 1])
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    #[inline]
    pub fn eval(&self, n: usize, history: &[f64], aux: f64) -> f64 {
        (self.f)(n, history, aux)
    }
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub id: String,
    pub transform: Transform,
    pub noise: NoiseModel,
    pub x_star: f64,
    pub x0: f64,
}

impl ProcessSpec {
    pub fn new(
        id: impl Into<String>,
        transform: Transform,
        noise: NoiseModel,
        x_star: f64,
        x0: f64,
    ) -> Self {
        Self {
            id: id.into(),
            transform,
            noise,
            x_star,
            x0,
        }
    }

    /// The auxiliary uniform an adapted transform sees at step `n`.
    pub fn aux(&self, seed: u64, n: usize) -> f64 {
        match self.transform.kind() {
            TransformKind::Deterministic => 0.5,
            TransformKind::Adapted => rng::uniform(seed, n as u64, rng::LANE_ADAPTED),
        }
    }
}

/// `xs[k]` is `X_{k+1}`; `ts[k]`, `ws[k]` are `T_{k+1}`, `W_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub ws: Vec<f64>,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn last(&self) -> f64 {
        *self.xs.last().expect("trajectory holds x_1")
    }

    /// `n,x,t,w` rows; the last row has no `t`, `w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,t,w\n");
        for (k, x) in self.xs.iter().enumerate() {
            match (self.ts.get(k), self.ws.get(k)) {
                (Some(t), Some(w)) => out.push_str(&format!("{},{x:e},{t:e},{w:e}\n", k + 1)),
                _ => out.push_str(&format!("{},{x:e},,\n", k + 1)),
            }
        }
        out
    }
}

/// Runs the recursion, calling `visit(n, x_n)` for every value produced,
/// and returns the step at which the guard fired, if any.
pub(crate) fn run_with<V>(
    spec: &ProcessSpec,
    seed: u64,
    horizon: usize,
    xs: &mut Vec<f64>,
    mut record: V,
) -> Result<Option<usize>, ProcessError>
where
    V: FnMut(usize, f64, f64, f64),
{
    if horizon == 0 {
        return Err(ProcessError::InvalidArgument(
            "horizon must be at least 1".into(),
        ));
    }
    xs.clear();
    xs.push(spec.x0);
    if !guard_ok(spec.x0) {
        return Ok(Some(1));
    }
    for n in 1..horizon {
        let t = spec.transform.eval(n, xs, spec.aux(seed, n));
        let w = spec.noise.draw(seed, n, rng::LANE_NOISE)?;
        let x = t + w;
        record(n, t, w, x);
        xs.push(x);
        if !guard_ok(x) {
            return Ok(Some(n + 1));
        }
    }
    Ok(None)
}

#[inline]
fn guard_ok(x: f64) -> bool {
    x.is_finite() && x.abs() <= DIVERGENCE_GUARD
}

/// One trajectory `X_1 = x0, …, X_horizon`, truncated at the first value
/// outside the divergence guard.
pub fn simulate(spec: &ProcessSpec, seed: u64, horizon: usize) -> Result<Trajectory, ProcessError> {
    let mut xs = Vec::with_capacity(horizon);
    let mut ts = Vec::with_capacity(horizon.saturating_sub(1));
    let mut ws = Vec::with_capacity(horizon.saturating_sub(1));
    let diverged_at = run_with(spec, seed, horizon, &mut xs, |_, t, w, _| {
        ts.push(t);
        ws.push(w);
    })?;
    Ok(Trajectory {
        seed,
        xs,
        ts,
        ws,
        diverged_at,
    })
}
