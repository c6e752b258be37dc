//! Seeded input generation for the pipelines.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal, Uniform};

use crate::dualspace;
use crate::error::{Error, Result};

const MAX_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    Normal,
    /// uniform on [−1, 1)
    Uniform,
}

impl FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "uniform" => Ok(Self::Uniform),
            _ => Err(Error::InvalidInput(format!("unknown distribution '{s}'"))),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Normal => "normal",
            Self::Uniform => "uniform",
        })
    }
}

/// What the drawn X must satisfy before it is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    None,
    /// Hadamard feature set of full rank with enough samples (smooth pipeline).
    Generic,
    /// Pairwise distinct entries (sigmoid pipeline).
    Distinct,
}

pub fn standard_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, dist: Distribution, rng: &mut R) -> DMatrix<f64> {
    match dist {
        Distribution::Normal => standard_normal(rows, cols, rng),
        Distribution::Uniform => {
            let u = Uniform::new(-1.0, 1.0);
            DMatrix::from_fn(rows, cols, |_, _| u.sample(rng))
        }
    }
}

pub fn distinct_entries(x: &DMatrix<f64>) -> bool {
    let mut v: Vec<f64> = x.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[0] != w[1])
}

/// Draw X (d₀ × N) from `seed`, re-drawing until `req` holds.
pub fn gen_data(d0: usize, n: usize, seed: u64, dist: Distribution, req: Requirement) -> Result<DMatrix<f64>> {
    if n == 0 || d0 == 0 {
        return Err(Error::InvalidInput("need d0 >= 1 and N >= 1".into()));
    }
    if req == Requirement::Generic && d0 * d0 + 3 * d0 >= 2 * n {
        return Err(Error::Assumption1Failed(format!(
            "d0^2/2 + 3 d0/2 = {} is not below N = {n}",
            (d0 * d0 + 3 * d0) as f64 / 2.0
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let x = sample(d0, n, dist, &mut rng);
        let ok = match req {
            Requirement::None => true,
            Requirement::Generic => dualspace::check_assumption1(&x).ok(),
            Requirement::Distinct => distinct_entries(&x),
        };
        if ok {
            return Ok(x);
        }
    }
    Err(Error::Assumption1Failed(format!("no acceptable draw in {MAX_DRAWS} attempts")))
}
