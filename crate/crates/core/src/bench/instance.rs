use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::stream_rng;
use crate::linalg::{DenseMatrix, PartitionKind, PartitionSpec};
use crate::scalar::Real;

/// Gaussian compressed-sensing instance description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    /// Number of nodes the data will be split over.
    pub parts: usize,
    /// Nonzeros of the planted solution.
    pub k: usize,
    pub seed: u64,
    pub partition: PartitionKind,
}

impl InstanceSpec {
    /// Row-partitioned spec with `k = m / 8`.
    pub fn new(m: usize, n: usize, parts: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            parts,
            k: (m / 8).max(1),
            seed,
            partition: PartitionKind::Row,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(Error::InvalidInput(format!(
                "need 0 < m < n, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.k == 0 || 2 * self.k > self.m {
            return Err(Error::InvalidInput(format!(
                "sparsity k={} must lie in 1..=m/2",
                self.k
            )));
        }
        let split = match self.partition {
            PartitionKind::Row => self.m,
            PartitionKind::Column => self.n,
        };
        if self.parts == 0 || !split.is_multiple_of(self.parts) {
            return Err(Error::InvalidInput(format!(
                "{} nodes do not divide {split}",
                self.parts
            )));
        }
        Ok(())
    }

    pub fn partition_spec(&self) -> Result<PartitionSpec> {
        let total = match self.partition {
            PartitionKind::Row => self.m,
            PartitionKind::Column => self.n,
        };
        PartitionSpec::even(self.partition, total, self.parts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    /// Planted sparse vector with `b = A x0`.
    pub x0: Vec<T>,
    /// Certified BP solution, when known.
    pub x_ref: Option<Vec<T>>,
    pub spec: PartitionSpec,
}

/// `A` has i.i.d. `N(0, 1/√m)` entries (variance `1/√m`); `x0` has `k`
/// entries `±1` at uniform positions; `b = A x0`.
pub fn gen_instance<T: Real>(spec: &InstanceSpec) -> Result<ProblemInstance<T>> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let std = (m as f64).powf(-0.25);
    let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = stream_rng(spec.seed, 0);
    let data = (0..m * n)
        .map(|_| T::lit(normal.sample(&mut rng)))
        .collect();
    let a = DenseMatrix::new(m, n, data)?;
    let mut support = sample(&mut stream_rng(spec.seed, 1), n, spec.k).into_vec();
    support.sort_unstable();
    let mut signs = stream_rng(spec.seed, 2);
    let mut x0 = vec![T::zero(); n];
    for &i in &support {
        x0[i] = if signs.gen_bool(0.5) {
            T::one()
        } else {
            -T::one()
        };
    }
    let b = a.mul_vec(&x0);
    Ok(ProblemInstance {
        a,
        b,
        x0,
        x_ref: None,
        spec: spec.partition_spec()?,
    })
}
