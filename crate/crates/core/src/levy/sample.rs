use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::scheme::SimScheme;
use crate::error::{Error, Result};
use crate::grid::MAX_DIM;
use crate::mc::{mean_se, par_map};

pub type Point = [f64; MAX_DIM];

/// `0 = t_0 < t_1 < ... < t_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::TimeGrid("needs at least two times starting at 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::TimeGrid("times must be finite and strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `K` equal steps on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(Error::TimeGrid(format!("horizon {horizon} with {steps} steps")));
        }
        Self::new((0..=steps).map(|i| horizon * i as f64 / steps as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the grid time equal to `t` up to rounding.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.horizon();
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }
}

/// Streams paths of a scheme; path `i` is a pure function of `(seed, i)`.
#[derive(Debug, Clone)]
pub struct PathSampler<'a> {
    scheme: &'a SimScheme,
    times: &'a TimeGrid,
    seed: u64,
    drift: Point,
    counts: Vec<Option<Poisson<f64>>>,
}

impl<'a> PathSampler<'a> {
    pub fn new(scheme: &'a SimScheme, times: &'a TimeGrid, seed: u64) -> Result<Self> {
        let rate = scheme.total_jump_rate();
        let mut counts = Vec::with_capacity(times.steps());
        for w in times.times().windows(2) {
            let lambda = rate * (w[1] - w[0]);
            counts.push(if lambda > 0.0 {
                Some(Poisson::new(lambda).map_err(|e| Error::InvalidParameter(format!("jump count: {e}")))?)
            } else {
                None
            });
        }
        let mut drift = [0.0; MAX_DIM];
        for (d, b) in drift.iter_mut().zip(scheme.simulation_drift()) {
            *d = b;
        }
        Ok(Self { scheme, times, seed, drift, counts })
    }

    pub fn times(&self) -> &TimeGrid {
        self.times
    }

    fn jump<R: Rng>(&self, rng: &mut R) -> Point {
        let s = self.scheme;
        let d = s.dim();
        let atoms = s.base().atoms();
        if atoms.is_empty() {
            return s.law.sample(d, rng);
        }
        let mut u = rng.random::<f64>() * s.total_jump_rate();
        if u < s.c_n() {
            return s.law.sample(d, rng);
        }
        u -= s.c_n();
        let mut pick = atoms.len() - 1;
        for (k, a) in atoms.iter().enumerate() {
            if u < a.rate {
                pick = k;
                break;
            }
            u -= a.rate;
        }
        let mut y = [0.0; MAX_DIM];
        y[..d].copy_from_slice(&atoms[pick].position);
        y
    }

    /// Writes `X_{t_0}, ..., X_{t_K}` of path `index` into `out`.
    pub fn fill(&self, index: u64, out: &mut Vec<Point>) {
        let d = self.scheme.dim();
        let l = &self.scheme.factor;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        out.clear();
        let mut x = [0.0; MAX_DIM];
        out.push(x);
        for (i, w) in self.times.times().windows(2).enumerate() {
            let dt = w[1] - w[0];
            let sq = dt.sqrt();
            let mut z = [0.0; MAX_DIM];
            for za in z.iter_mut().take(d) {
                *za = StandardNormal.sample(&mut rng);
            }
            for a in 0..d {
                let mut g = 0.0;
                for b in 0..d {
                    g += l[a][b] * z[b];
                }
                x[a] += self.drift[a] * dt + sq * g;
            }
            if let Some(p) = &self.counts[i] {
                let k = p.sample(&mut rng) as u64;
                for _ in 0..k {
                    let y = self.jump(&mut rng);
                    for a in 0..d {
                        x[a] += y[a];
                    }
                }
            }
            out.push(x);
        }
    }

    pub fn path(&self, index: u64) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.times.steps() + 1);
        self.fill(index, &mut out);
        out
    }
}

/// `P` stored paths on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    times: TimeGrid,
    dim: usize,
    paths: usize,
    seed: u64,
    positions: Vec<Point>,
}

impl PathEnsemble {
    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.paths
    }

    pub fn is_empty(&self) -> bool {
        self.paths == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self, p: usize) -> &[Point] {
        let k = self.times.steps() + 1;
        &self.positions[p * k..(p + 1) * k]
    }
}

pub fn sample_paths(scheme: &SimScheme, times: &TimeGrid, paths: usize, seed: u64, workers: usize) -> Result<PathEnsemble> {
    if paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let sampler = PathSampler::new(scheme, times, seed)?;
    let chunks = par_map(paths, workers, |p| sampler.path(p as u64));
    Ok(PathEnsemble {
        times: times.clone(),
        dim: scheme.dim(),
        paths,
        seed,
        positions: chunks.into_iter().flatten().collect(),
    })
}

/// Empirical characteristic function at grid time index `step` for each
/// frequency, with standard errors of the real and imaginary parts.
pub fn empirical_cf(
    scheme: &SimScheme,
    times: &TimeGrid,
    step: usize,
    freqs: &[Vec<f64>],
    paths: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<(Complex64, f64, f64)>> {
    if step > times.steps() {
        return Err(Error::TimeGrid(format!("step {step} beyond {}", times.steps())));
    }
    let d = scheme.dim();
    for xi in freqs {
        if xi.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: xi.len() });
        }
    }
    let sampler = PathSampler::new(scheme, times, seed)?;
    let ends = par_map(paths, workers, |p| sampler.path(p as u64)[step]);
    Ok(freqs
        .iter()
        .map(|xi| {
            let phase: Vec<f64> = ends.iter().map(|x| xi.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            let re = mean_se(&phase.iter().map(|p| p.cos()).collect::<Vec<_>>());
            let im = mean_se(&phase.iter().map(|p| p.sin()).collect::<Vec<_>>());
            (Complex64::new(re.value, im.value), re.std_error, im.std_error)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Atom, JumpDensity, LevyTriple};
    use nalgebra::DMatrix;

    #[test]
    fn zero_triple_increments_have_padding_variance() {
        let t = LevyTriple::zero(2).unwrap();
        let eps = 0.04;
        let s = SimScheme::truncate(&t, 5, eps).unwrap();
        let times = TimeGrid::uniform(0.5, 1).unwrap();
        let e = sample_paths(&s, &times, 100_000, 11, 1).unwrap();
        for a in 0..2 {
            let sq: Vec<f64> = (0..e.len()).map(|p| e.path(p)[1][a].powi(2)).collect();
            let m = mean_se(&sq);
            assert!(m.within_se(eps * 0.5, 3.0), "{m:?}");
        }
    }

    #[test]
    fn pure_atom_is_a_poisson_counter() {
        let t = LevyTriple::new(vec![0.0], DMatrix::zeros(1, 1), JumpDensity::None, vec![Atom { position: vec![1.0], rate: 2.0 }])
            .unwrap();
        let s = SimScheme::unpadded(&t, 4).unwrap();
        let times = TimeGrid::uniform(1.0, 4).unwrap();
        let e = sample_paths(&s, &times, 20_000, 3, 1).unwrap();
        let ends: Vec<f64> = (0..e.len()).map(|p| e.path(p)[4][0]).collect();
        assert!(ends.iter().all(|x| x.fract() == 0.0 && *x >= 0.0));
        let m = mean_se(&ends);
        assert!(m.within_se(2.0, 3.0), "{m:?}");
    }

    #[test]
    fn same_seed_same_ensemble() {
        let t = LevyTriple::new(
            vec![0.3, 0.0],
            DMatrix::identity(2, 2),
            JumpDensity::UniformBall { rate: 1.0, center: vec![0.5, 0.5], radius: 0.4 },
            vec![Atom { position: vec![-1.0, 0.0], rate: 0.5 }],
        )
        .unwrap();
        let s = SimScheme::with_default_padding(&t, 8).unwrap();
        let times = TimeGrid::uniform(1.0, 10).unwrap();
        let a = sample_paths(&s, &times, 50, 9, 1).unwrap();
        let b = sample_paths(&s, &times, 50, 9, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.path(0).iter().all(|x| x.iter().all(|v| v.is_finite())));
        assert_eq!(a.path(7)[0], [0.0; 3]);
    }
}
