//! Gibbs sampling from a fully visible Boltzmann machine on `{-1, +1}^p`
//! with density proportional to `exp(x'Mx / 2 + b'x)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, substream};

pub const DEFAULT_BURNIN: usize = 1000;
pub const DEFAULT_THIN: usize = 10;

/// Field and coupling parameters; `coupling` is `p x p`, row-major,
/// symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Fvbm {
    field: Vec<f64>,
    coupling: Vec<f64>,
}

impl Fvbm {
    pub fn new(field: Vec<f64>, coupling: Vec<f64>) -> Result<Self> {
        let p = field.len();
        if p == 0 || coupling.len() != p * p {
            return Err(Error::Config(format!(
                "coupling matrix must be {p}x{p} for {p} units"
            )));
        }
        for i in 0..p {
            if coupling[i * p + i] != 0.0 {
                return Err(Error::Config(format!(
                    "coupling diagonal is nonzero at {}",
                    i + 1
                )));
            }
            for j in 0..i {
                if coupling[i * p + j] != coupling[j * p + i] {
                    return Err(Error::Config(format!(
                        "coupling matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Fvbm { field, coupling })
    }

    /// Constant field `b` and coupling `c` between neighbours `|i - j| = 1`.
    pub fn banded(p: usize, b: f64, c: f64) -> Result<Self> {
        let mut coupling = vec![0.0; p * p];
        for i in 1..p {
            coupling[i * p + i - 1] = c;
            coupling[(i - 1) * p + i] = c;
        }
        Fvbm::new(vec![b; p], coupling)
    }

    pub fn p(&self) -> usize {
        self.field.len()
    }

    /// Unnormalized log density.
    pub fn log_weight(&self, x: &[f64]) -> f64 {
        let p = self.p();
        let mut quad = 0.0;
        for i in 0..p {
            for j in 0..p {
                quad += x[i] * self.coupling[i * p + j] * x[j];
            }
        }
        0.5 * quad + self.field.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    fn sweep<R: Rng + ?Sized>(&self, state: &mut [f64], rng: &mut R) {
        let p = self.p();
        for i in 0..p {
            let row = &self.coupling[i * p..(i + 1) * p];
            let h = self.field[i]
                + row
                    .iter()
                    .zip(state.iter())
                    .map(|(m, x)| m * x)
                    .sum::<f64>();
            let prob_up = 1.0 / (1.0 + (-2.0 * h).exp());
            state[i] = if rng.random::<f64>() < prob_up {
                1.0
            } else {
                -1.0
            };
        }
    }

    /// Runs one chain from a uniform random start: `burnin` discarded sweeps,
    /// then one kept state every `thin` sweeps.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        count: usize,
        burnin: usize,
        thin: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        if thin == 0 {
            return Err(Error::Config("thinning interval must be at least 1".into()));
        }
        let mut state: Vec<f64> = (0..self.p())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        for _ in 0..burnin {
            self.sweep(&mut state, rng);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            for _ in 0..thin {
                self.sweep(&mut state, rng);
            }
            out.push(state.clone());
        }
        Ok(out)
    }
}

/// Seeded Gibbs sample of `count` states.
pub fn fvbm_gibbs(
    field: &[f64],
    coupling: &[f64],
    count: usize,
    burnin: usize,
    thin: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let model = Fvbm::new(field.to_vec(), coupling.to_vec())?;
    let mut rng = substream(seed, rng::DOMAIN_SIMULATION, 1);
    model.sample(count, burnin, thin, &mut rng)
}
