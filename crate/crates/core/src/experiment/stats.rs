//! Two-arm comparison statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard deviation pooled over both samples.
pub fn pooled_sd(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if na + nb <= 2.0 {
        return 0.0;
    }
    (((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0)).sqrt()
}

/// (mean_a - mean_b) / pooled sd. Zero when the means agree; `None` when
/// the means differ but neither sample varies.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Option<f64> {
    let diff = mean(a) - mean(b);
    if diff == 0.0 {
        return Some(0.0);
    }
    let sd = pooled_sd(a, b);
    (sd > 0.0).then(|| diff / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance t test of mean_a against mean_b. `None` when
/// both samples have zero variance (or either has fewer than two values).
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (va, vb) = (sample_variance(a) / a.len() as f64, sample_variance(b) / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        return None;
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Some(WelchTest { t, df, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "p<.001")]
    P001,
    #[serde(rename = "p<.05")]
    P05,
    #[serde(rename = "n.s.")]
    NotSignificant,
    #[serde(rename = "undefined")]
    Undefined,
}

impl Significance {
    pub fn from_test(test: Option<WelchTest>) -> Self {
        match test {
            None => Significance::Undefined,
            Some(t) if t.p < 0.001 => Significance::P001,
            Some(t) if t.p < 0.05 => Significance::P05,
            Some(_) => Significance::NotSignificant,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Significance::P001 => "p<.001",
            Significance::P05 => "p<.05",
            Significance::NotSignificant => "n.s.",
            Significance::Undefined => "undefined",
        }
    }
}

/// Baseline arm `a` against treatment arm `b` for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    /// (mean_b - mean_a) / mean_a * 100; negative is a reduction.
    pub percent_change: Option<f64>,
    pub welch: Option<WelchTest>,
    pub significance: Significance,
    pub cohens_d: Option<f64>,
}

impl MetricComparison {
    pub fn new(a: &[f64], b: &[f64]) -> Self {
        let (mean_a, mean_b) = (mean(a), mean(b));
        let percent_change = if mean_a == mean_b {
            Some(0.0)
        } else if mean_a != 0.0 {
            Some((mean_b - mean_a) / mean_a * 100.0)
        } else {
            None
        };
        let welch = welch_t(a, b);
        Self {
            mean_a,
            mean_b,
            percent_change,
            welch,
            significance: Significance::from_test(welch),
            cohens_d: cohens_d(a, b),
        }
    }
}
