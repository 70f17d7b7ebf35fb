use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::dataio::{EmbeddingSet, Matrix};
use crate::numeric::derive_seed;

const BASIS_STREAM: u64 = 0xBA51;
const SAMPLE_STREAM: u64 = 0x5A3B;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    UniformCube,
    Gaussian,
}

/// A distribution with known intrinsic dimension: `d`-dimensional latent draws
/// mapped isometrically into `R^D`, plus optional isotropic ambient noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub intrinsic_d: usize,
    pub ambient_d: usize,
    pub kind: ManifoldKind,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ManifoldSpec {
    pub fn cube(intrinsic_d: usize, ambient_d: usize, seed: u64) -> Self {
        Self {
            intrinsic_d,
            ambient_d,
            kind: ManifoldKind::UniformCube,
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.intrinsic_d == 0 {
            return Err(ExperimentError::BadSpec("intrinsic_d must be at least 1".into()));
        }
        if self.intrinsic_d > self.ambient_d {
            return Err(ExperimentError::BadSpec(format!(
                "intrinsic_d = {} exceeds ambient_D = {}",
                self.intrinsic_d, self.ambient_d
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(ExperimentError::BadSpec(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// A manifold description together with its fixed embedding basis.
#[derive(Debug, Clone)]
pub struct Manifold {
    spec: ManifoldSpec,
    /// `D x d`, orthonormal columns.
    basis: Matrix,
}

impl Manifold {
    pub fn new(spec: ManifoldSpec) -> Result<Self, ExperimentError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[BASIS_STREAM]));
        let basis = orthonormal_basis(spec.ambient_d, spec.intrinsic_d, &mut rng);
        Ok(Self { spec, basis })
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<EmbeddingSet, ExperimentError> {
        if n == 0 {
            return Err(ExperimentError::InvalidConfig("sample size must be at least 1".into()));
        }
        let (big_d, d) = (self.spec.ambient_d, self.spec.intrinsic_d);
        let mut out = Matrix::zeros(n, big_d);
        let mut latent = vec![0.0; d];
        for i in 0..n {
            for z in latent.iter_mut() {
                *z = match self.spec.kind {
                    ManifoldKind::UniformCube => rng.random::<f64>(),
                    ManifoldKind::Gaussian => rng.sample(StandardNormal),
                };
            }
            let row = out.row_mut(i);
            self.basis.mul_vec(&latent, row);
            if self.spec.noise_sigma > 0.0 {
                for x in row.iter_mut() {
                    let e: f64 = rng.sample(StandardNormal);
                    *x += self.spec.noise_sigma * e;
                }
            }
        }
        EmbeddingSet::new(out).map_err(|e| ExperimentError::InvalidConfig(e.to_string()))
    }

    pub fn sample_seeded(&self, n: usize, seed: u64) -> Result<EmbeddingSet, ExperimentError> {
        self.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

/// Deterministic draw of `n` points from the manifold described by `spec`.
pub fn sample_manifold(spec: &ManifoldSpec, n: usize) -> Result<EmbeddingSet, ExperimentError> {
    let m = Manifold::new(*spec)?;
    m.sample_seeded(n, derive_seed(spec.seed, &[SAMPLE_STREAM, n as u64]))
}

/// Orthonormalized Gaussian `rows x cols` matrix (modified Gram–Schmidt). Each column
/// is sign-normalized so its largest-magnitude entry is positive.
pub(crate) fn orthonormal_basis<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    assert!(cols <= rows);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &columns {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        columns.push(v);
    }
    let mut m = Matrix::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}
