use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-range symmetric transition probability `p(.)` on the integers.
///
/// Stored one-sided: `one_sided[d - 1] = p(d) = p(-d)` for `d = 1..=range`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct JumpKernel {
    one_sided: Vec<f64>,
}

/// Serialized form: `{"probs": [p(1), p(2), ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSpec {
    pub probs: Vec<f64>,
}

impl TryFrom<KernelSpec> for JumpKernel {
    type Error = Error;
    fn try_from(spec: KernelSpec) -> Result<Self> {
        JumpKernel::symmetric(spec.probs)
    }
}

impl From<JumpKernel> for KernelSpec {
    fn from(k: JumpKernel) -> Self {
        KernelSpec { probs: k.one_sided }
    }
}

impl JumpKernel {
    /// Builds the kernel from `p(1), ..., p(range)`; the negative side mirrors it.
    pub fn symmetric(one_sided: Vec<f64>) -> Result<Self> {
        if one_sided.is_empty() {
            return Err(Error::InvalidKernel("range must be at least 1".into()));
        }
        if one_sided.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidKernel(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = 2.0 * one_sided.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidKernel(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let mut one_sided = one_sided;
        while one_sided.len() > 1 && *one_sided.last().unwrap() == 0.0 {
            one_sided.pop();
        }
        if one_sided[one_sided.len() - 1] == 0.0 {
            return Err(Error::InvalidKernel("kernel has no mass".into()));
        }
        Ok(JumpKernel { one_sided })
    }

    /// Builds the kernel from explicit `(z, p(z))` pairs, checking symmetry.
    pub fn from_pairs(pairs: &[(i64, f64)]) -> Result<Self> {
        let range = pairs
            .iter()
            .map(|(z, _)| z.unsigned_abs())
            .max()
            .unwrap_or(0) as usize;
        if range == 0 {
            return Err(Error::InvalidKernel("no nonzero displacement".into()));
        }
        let mut pos = vec![0.0; range];
        let mut neg = vec![0.0; range];
        for &(z, p) in pairs {
            match z {
                0 => return Err(Error::InvalidKernel("p(0) must not be listed".into())),
                z if z > 0 => pos[z as usize - 1] += p,
                z => neg[(-z) as usize - 1] += p,
            }
        }
        for d in 0..range {
            if (pos[d] - neg[d]).abs() > 1e-12 {
                return Err(Error::InvalidKernel(format!(
                    "asymmetric at |z| = {}: {} vs {}",
                    d + 1,
                    pos[d],
                    neg[d]
                )));
            }
        }
        JumpKernel::symmetric(pos)
    }

    /// `p(+-1) = 1/2`.
    pub fn nearest_neighbor() -> Self {
        JumpKernel {
            one_sided: vec![0.5],
        }
    }

    pub fn range(&self) -> usize {
        self.one_sided.len()
    }

    /// `p(z)` for any integer displacement.
    pub fn p(&self, z: i64) -> f64 {
        let d = z.unsigned_abs() as usize;
        if d == 0 || d > self.range() {
            0.0
        } else {
            self.one_sided[d - 1]
        }
    }

    pub fn one_sided(&self) -> &[f64] {
        &self.one_sided
    }

    /// `sigma^2 = 1/2 sum_z z^2 p(z)`.
    pub fn sigma_sq(&self) -> f64 {
        // both signs of z contribute equally
        self.one_sided
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) * (i + 1)) as f64 * p)
            .sum()
    }

    /// Kernel with `p'(k z) = p(z)`.
    pub fn dilate(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidKernel("dilation factor must be >= 1".into()));
        }
        let mut one_sided = vec![0.0; self.range() * k];
        for (i, p) in self.one_sided.iter().enumerate() {
            one_sided[(i + 1) * k - 1] = *p;
        }
        JumpKernel::symmetric(one_sided)
    }
}

/// `sigma^2 = 1/2 sum_z z^2 p(z)` of a kernel.
pub fn sigma_sq(kernel: &JumpKernel) -> f64 {
    kernel.sigma_sq()
}
