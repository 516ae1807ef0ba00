use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Running mean and variance, merged with Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
}

impl Moments {
    pub fn from_samples(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        for &x in xs {
            m.push(x);
        }
        m
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let d = other.mean - self.mean;
        Moments {
            count: n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Key of one observable: a time and a test-function id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObsKey {
    /// Time stored as raw bits so keys are totally ordered.
    time_bits: u64,
    pub id: String,
}

impl ObsKey {
    pub fn new(time: f64, id: impl Into<String>) -> Self {
        ObsKey {
            time_bits: time.to_bits(),
            id: id.into(),
        }
    }

    pub fn time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }
}

/// Per-(time, test function) moments over replicas.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    entries: BTreeMap<ObsKey, Moments>,
}

impl EnsembleStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, id: &str, value: f64) {
        self.entries
            .entry(ObsKey::new(time, id))
            .or_default()
            .push(value);
    }

    pub fn merge(&self, other: &EnsembleStats) -> EnsembleStats {
        let mut out = self.clone();
        for (k, m) in &other.entries {
            let e = out.entries.entry(k.clone()).or_default();
            *e = e.merge(m);
        }
        out
    }

    pub fn get(&self, time: f64, id: &str) -> Option<&Moments> {
        self.entries.get(&ObsKey::new(time, id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObsKey, &Moments)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Welch's unequal-variance t test, two-sided.
pub fn welch_t(a: &Moments, b: &Moments) -> Result<TestOutcome> {
    if a.count < 2 || b.count < 2 {
        return Err(Error::InvalidParams(
            "Welch test needs two samples per group".into(),
        ));
    }
    let va = a.variance() / a.count as f64;
    let vb = b.variance() / b.count as f64;
    let se2 = va + vb;
    if se2 == 0.0 {
        let p = if a.mean == b.mean { 1.0 } else { 0.0 };
        return Ok(TestOutcome {
            statistic: 0.0,
            p_value: p,
        });
    }
    let t = (a.mean - b.mean) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.count - 1) as f64 + vb * vb / (b.count - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok(TestOutcome {
        statistic: t,
        p_value: 2.0 * (1.0 - dist.cdf(t.abs())),
    })
}

/// `P(K > lambda)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() || xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParams(
            "KS test needs non-empty, NaN-free samples".into(),
        ));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestOutcome> {
    let v = sorted(xs)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p(d, n),
    })
}

/// Two-sample Kolmogorov-Smirnov test. Ties are handled by stepping both
/// empirical CDFs past equal values together.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<TestOutcome> {
    let a = sorted(xs)?;
    let b = sorted(ys)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p(d, na * nb / (na + nb)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let m = Moments::from_samples(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((m.mean - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_known_quantiles() {
        // Tabulated critical values of the limiting distribution.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value < 1e-3);
        assert!(ks_two_sample(&a, &a).unwrap().p_value > 0.99);
        assert!(ks_one_sample(&a, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.99);
    }

    #[test]
    fn welch_identical_groups() {
        let m = Moments::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        let r = welch_t(&m, &m).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(xs in prop::collection::vec(-100.0f64..100.0, 1..60), cut in 0usize..60, cut2 in 0usize..60) {
            let c1 = cut.min(xs.len());
            let c2 = cut2.min(xs.len()).max(c1);
            let a = Moments::from_samples(&xs[..c1]);
            let b = Moments::from_samples(&xs[c1..c2]);
            let c = Moments::from_samples(&xs[c2..]);
            let left = a.merge(&b).merge(&c);
            let right = a.merge(&b.merge(&c));
            let swapped = c.merge(&a).merge(&b);
            let all = Moments::from_samples(&xs);
            for m in [left, right, swapped] {
                prop_assert_eq!(m.count, all.count);
                prop_assert!((m.mean - all.mean).abs() < 1e-9);
                prop_assert!((m.m2 - all.m2).abs() < 1e-7 * all.m2.max(1.0));
                prop_assert!(m.variance() >= 0.0);
            }
        }
    }
}
