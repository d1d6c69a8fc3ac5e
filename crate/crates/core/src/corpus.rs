//! Seeded random matrices.
//!
//! Every generator draws from a ChaCha8 stream, so a seed fixes the whole
//! corpus on every platform.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::io::write_matrix;
use crate::linalg::{ComplexMatrix, C64};
use crate::shiftlab::shift_matrix;

/// Relative size of the perturbation added to normal matrices for the nearly-normal kind.
pub const NEARLY_NORMAL_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    Invertible,
    Singular,
    Normal,
    NearlyNormal,
    ShiftTruncation,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 5] = [
        CorpusKind::Invertible,
        CorpusKind::Singular,
        CorpusKind::Normal,
        CorpusKind::NearlyNormal,
        CorpusKind::ShiftTruncation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusKind::Invertible => "invertible",
            CorpusKind::Singular => "singular",
            CorpusKind::Normal => "normal",
            CorpusKind::NearlyNormal => "nearly-normal",
            CorpusKind::ShiftTruncation => "shift-truncation",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown corpus kind `{s}`")))
    }
}

pub struct MatrixSampler {
    rng: ChaCha8Rng,
}

impl MatrixSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn gaussian(&mut self) -> C64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix of independent standard complex Gaussians.
    pub fn ginibre(&mut self, m: usize) -> ComplexMatrix {
        let entries = (0..m * m).map(|_| self.gaussian()).collect();
        ComplexMatrix::from_row_major(m, m, entries).expect("finite Gaussian entries")
    }

    /// Haar-distributed unitary: QR of a Ginibre matrix with the phases of `R`'s diagonal moved into `Q`.
    pub fn haar_unitary(&mut self, m: usize) -> ComplexMatrix {
        let qr = self.ginibre(m).into_matrix().qr();
        let (mut q, r) = qr.unpack();
        for j in 0..m {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        ComplexMatrix::wrap(q)
    }

    fn with_singular_values(&mut self, sigma: &[f64]) -> ComplexMatrix {
        let m = sigma.len();
        let v = self.haar_unitary(m);
        let w = self.haar_unitary(m);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            m,
            sigma.iter().map(|&s| C64::new(s, 0.0)),
        ));
        ComplexMatrix::wrap(v.as_matrix() * d * w.as_matrix().adjoint())
    }

    /// Singular values uniform in `[0.1, 1]` with the largest pinned to 1, so the condition number is at most 10.
    pub fn invertible(&mut self, m: usize) -> ComplexMatrix {
        let mut sigma: Vec<f64> = (0..m).map(|_| self.uniform(0.1, 1.0)).collect();
        sigma[0] = 1.0;
        self.with_singular_values(&sigma)
    }

    /// Rank between 1 and `m − 1`.
    pub fn singular(&mut self, m: usize) -> ComplexMatrix {
        let rank = self.rng.random_range(1..m);
        let mut sigma = vec![0.0; m];
        sigma[0] = 1.0;
        for s in sigma.iter_mut().take(rank).skip(1) {
            *s = self.uniform(0.1, 1.0);
        }
        self.with_singular_values(&sigma)
    }

    /// `V†·diag(λ)·V` with Gaussian eigenvalues and Haar `V`.
    pub fn normal(&mut self, m: usize) -> ComplexMatrix {
        let v = self.haar_unitary(m);
        let lambda: Vec<C64> = (0..m).map(|_| self.gaussian()).collect();
        let d = ComplexMatrix::from_diagonal(&lambda);
        &(&v.adjoint() * &d) * &v
    }

    pub fn nearly_normal(&mut self, m: usize) -> ComplexMatrix {
        let n = self.normal(m);
        let g = self.ginibre(m);
        let scale = NEARLY_NORMAL_EPS * n.frobenius_norm() / g.frobenius_norm();
        &n + &g.scale(C64::new(scale, 0.0))
    }

    /// Truncated weighted shift with weights uniform in `[0.5, 2]`.
    pub fn shift_truncation(&mut self, m: usize) -> ComplexMatrix {
        let weights: Vec<f64> = (0..m).map(|_| self.uniform(0.5, 2.0)).collect();
        shift_matrix(&weights)
    }

    pub fn sample(&mut self, kind: CorpusKind, m: usize) -> ComplexMatrix {
        match kind {
            CorpusKind::Invertible => self.invertible(m),
            CorpusKind::Singular => self.singular(m),
            CorpusKind::Normal => self.normal(m),
            CorpusKind::NearlyNormal => self.nearly_normal(m),
            CorpusKind::ShiftTruncation => self.shift_truncation(m),
        }
    }

    /// Positive reals, log-uniform over `[10^−2, 10^2]`.
    pub fn positive_tuple(&mut self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|_| 10f64.powf(self.uniform(-2.0, 2.0)))
            .collect()
    }
}

pub fn generate_corpus(
    kind: CorpusKind,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "corpus matrices need m >= 2, got {m}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument(
            "corpus count must be at least 1".into(),
        ));
    }
    let mut sampler = MatrixSampler::new(seed);
    Ok((0..count).map(|_| sampler.sample(kind, m)).collect())
}

/// Writes `{kind}-{m}-{index}.json` files into `dir` and returns their paths.
pub fn write_corpus(
    dir: &Path,
    kind: CorpusKind,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(count);
    for (i, t) in generate_corpus(kind, m, count, seed)?.iter().enumerate() {
        let path = dir.join(format!("{kind}-{m}-{i:03}.json"));
        write_matrix(&path, t)?;
        paths.push(path);
    }
    Ok(paths)
}
