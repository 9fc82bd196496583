use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::SeriesError;

/// Declared sign class of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredSign {
    Nonnegative,
    Unrestricted,
}

type Generator = dyn Fn(usize) -> f64 + Send + Sync;

struct SeqInner {
    label: String,
    sign: DeclaredSign,
    gen: Box<Generator>,
    /// Finite support length for data-backed sequences; probing past it is an error.
    len: Option<usize>,
    memo: RwLock<Vec<f64>>,
}

/// A lazily evaluated real sequence indexed from 1.
///
/// Values are memoized contiguously, so probing index `n` after any index
/// `m >= n` is a table lookup. Clones share the memo table. Filling the memo
/// is serialized by a lock and the generator is a pure function of the
/// index, so concurrent probes always observe the same values.
#[derive(Clone)]
pub struct RealSeq {
    inner: Arc<SeqInner>,
}

/// Nonnegative sequences double as step-size, variance and parameter schedules.
pub type Schedule = RealSeq;

impl fmt::Debug for RealSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealSeq")
            .field("label", &self.inner.label)
            .field("sign", &self.inner.sign)
            .field("len", &self.inner.len)
            .finish()
    }
}

impl RealSeq {
    pub fn new<F>(label: impl Into<String>, sign: DeclaredSign, gen: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            inner: Arc::new(SeqInner {
                label: label.into(),
                sign,
                gen: Box::new(gen),
                len: None,
                memo: RwLock::new(Vec::new()),
            }),
        }
    }

    pub fn nonneg<F>(label: impl Into<String>, gen: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, DeclaredSign::Nonnegative, gen)
    }

    pub fn unrestricted<F>(label: impl Into<String>, gen: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, DeclaredSign::Unrestricted, gen)
    }

    /// Sequence backed by explicit data; `values[0]` is the term at index 1.
    pub fn from_values(
        label: impl Into<String>,
        sign: DeclaredSign,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let label = label.into();
        if sign == DeclaredSign::Nonnegative {
            if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(SeriesError::SignViolation {
                    label,
                    index: i + 1,
                    value: v,
                });
            }
        }
        let len = values.len();
        let data = values.clone();
        Ok(Self {
            inner: Arc::new(SeqInner {
                label,
                sign,
                gen: Box::new(move |n| data[n - 1]),
                len: Some(len),
                memo: RwLock::new(values),
            }),
        })
    }

    /// Reads one value per line (1-based index order). Blank lines are skipped.
    pub fn from_csv_path(path: impl AsRef<Path>, sign: DeclaredSign) -> Result<Self, SeriesError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SeriesError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| SeriesError::Parse {
                what: format!("{}:{}", path.display(), lineno + 1),
                message: format!("not a number: {line:?}"),
            })?;
            values.push(v);
        }
        Self::from_values(format!("csv:{}", path.display()), sign, values)
    }

    pub fn zero() -> Self {
        Self::nonneg("zero", |_| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        let sign = if c >= 0.0 {
            DeclaredSign::Nonnegative
        } else {
            DeclaredSign::Unrestricted
        };
        Self::new(format!("const({c})"), sign, move |_| c)
    }

    /// `scale / (n + shift)^p`
    pub fn power(p: f64, scale: f64, shift: f64) -> Self {
        Self::nonneg(format!("{scale}/(n+{shift})^{p}"), move |n| {
            scale / (n as f64 + shift).powf(p)
        })
    }

    /// `scale / (n + shift)`
    pub fn harmonic(scale: f64, shift: f64) -> Self {
        Self::nonneg(format!("{scale}/(n+{shift})"), move |n| {
            scale / (n as f64 + shift)
        })
    }

    /// `ratio^n`
    pub fn geometric(ratio: f64) -> Self {
        Self::nonneg(format!("{ratio}^n"), move |n| ratio.powi(n as i32))
    }

    /// `1 / ln(n + shift)`; requires `shift > 0` so every term is finite and positive.
    pub fn inv_log(shift: f64) -> Self {
        Self::nonneg(format!("1/ln(n+{shift})"), move |n| {
            1.0 / (n as f64 + shift).ln()
        })
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn sign(&self) -> DeclaredSign {
        self.inner.sign
    }

    /// Number of available terms for data-backed sequences.
    pub fn support_len(&self) -> Option<usize> {
        self.inner.len
    }

    /// Term at 1-based index `n`.
    pub fn get(&self, n: usize) -> Result<f64, SeriesError> {
        if n == 0 {
            return Err(SeriesError::InvalidArgument(format!(
                "{}: sequences are indexed from 1",
                self.inner.label
            )));
        }
        {
            let memo = self.inner.memo.read().unwrap_or_else(|e| e.into_inner());
            if n <= memo.len() {
                return Ok(memo[n - 1]);
            }
        }
        self.fill(n)?;
        let memo = self.inner.memo.read().unwrap_or_else(|e| e.into_inner());
        Ok(memo[n - 1])
    }

    /// Terms `1..=n` as a vector (`out[k]` is the term at index `k + 1`).
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>, SeriesError> {
        if n == 0 {
            return Ok(Vec::new());
        }
        self.get(n)?;
        let memo = self.inner.memo.read().unwrap_or_else(|e| e.into_inner());
        Ok(memo[..n].to_vec())
    }

    fn fill(&self, n: usize) -> Result<(), SeriesError> {
        if let Some(len) = self.inner.len {
            if n > len {
                return Err(SeriesError::OutOfRange {
                    label: self.inner.label.clone(),
                    index: n,
                    len,
                });
            }
        }
        let mut memo = self.inner.memo.write().unwrap_or_else(|e| e.into_inner());
        let have = memo.len();
        memo.reserve(n.saturating_sub(have));
        for k in memo.len() + 1..=n {
            let v = (self.inner.gen)(k);
            if self.inner.sign == DeclaredSign::Nonnegative && !(v >= 0.0) {
                return Err(SeriesError::SignViolation {
                    label: self.inner.label.clone(),
                    index: k,
                    value: v,
                });
            }
            memo.push(v);
        }
        Ok(())
    }

    /// Fails with a sign error unless the sequence is declared nonnegative.
    pub(crate) fn require_nonneg(&self, role: &str) -> Result<(), SeriesError> {
        match self.inner.sign {
            DeclaredSign::Nonnegative => Ok(()),
            DeclaredSign::Unrestricted => Err(SeriesError::InvalidArgument(format!(
                "{role} must be declared nonnegative (got {})",
                self.inner.label
            ))),
        }
    }
}

/// Closed-form schedule descriptions shared by config files and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SeqSpec {
    Zero,
    Const {
        value: f64,
    },
    /// `scale / (n + shift)`
    Harmonic {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `scale / (n + shift)^p`
    Power {
        p: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
    },
    Geometric {
        ratio: f64,
    },
    InvLog {
        #[serde(default = "one")]
        shift: f64,
    },
    Csv {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

impl SeqSpec {
    pub fn build(&self) -> Result<RealSeq, SeriesError> {
        Ok(match *self {
            SeqSpec::Zero => RealSeq::zero(),
            SeqSpec::Const { value } => RealSeq::constant(value),
            SeqSpec::Harmonic { scale, shift } => RealSeq::harmonic(scale, shift),
            SeqSpec::Power { p, scale, shift } => RealSeq::power(p, scale, shift),
            SeqSpec::Geometric { ratio } => RealSeq::geometric(ratio),
            SeqSpec::InvLog { shift } => {
                if !(shift > 0.0) {
                    return Err(SeriesError::InvalidArgument(
                        "inv_log shift must be positive".into(),
                    ));
                }
                RealSeq::inv_log(shift)
            }
            SeqSpec::Csv { ref path } => RealSeq::from_csv_path(path, DeclaredSign::Nonnegative)?,
        })
    }

    /// Parses the compact command-line form.
    ///
    /// Accepted names: `zero`, `one`, `harmonic` (1/n), `harmonic1` (1/(n+1)),
    /// `inv_sqrt` (1/√n), `inv_sq` (1/n²), `geometric` (2⁻ⁿ), `inv_log`
    /// (1/ln(n+1)), plus the parameterized `const:C`, `power:P`,
    /// `geometric:R` and `csv:PATH`.
    pub fn parse_cli(arg: &str) -> Result<Self, SeriesError> {
        let bad = |msg: &str| SeriesError::Parse {
            what: arg.to_string(),
            message: msg.to_string(),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad("invalid numeric parameter"))
        };
        let (head, param) = match arg.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (arg, None),
        };
        Ok(match (head, param) {
            ("zero", None) => SeqSpec::Zero,
            ("one", None) => SeqSpec::Const { value: 1.0 },
            ("harmonic", None) => SeqSpec::Harmonic {
                scale: 1.0,
                shift: 0.0,
            },
            ("harmonic1", None) => SeqSpec::Harmonic {
                scale: 1.0,
                shift: 1.0,
            },
            ("inv_sqrt", None) => SeqSpec::Power {
                p: 0.5,
                scale: 1.0,
                shift: 0.0,
            },
            ("inv_sq", None) => SeqSpec::Power {
                p: 2.0,
                scale: 1.0,
                shift: 0.0,
            },
            ("geometric", None) => SeqSpec::Geometric { ratio: 0.5 },
            ("inv_log", None) => SeqSpec::InvLog { shift: 1.0 },
            ("const", Some(p)) => SeqSpec::Const { value: num(p)? },
            ("power", Some(p)) => SeqSpec::Power {
                p: num(p)?,
                scale: 1.0,
                shift: 0.0,
            },
            ("geometric", Some(p)) => SeqSpec::Geometric { ratio: num(p)? },
            ("csv", Some(p)) if !p.is_empty() => SeqSpec::Csv {
                path: p.to_string(),
            },
            _ => return Err(bad("unknown sequence name")),
        })
    }
}
