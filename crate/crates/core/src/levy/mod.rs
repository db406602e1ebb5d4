//! Lévy triples `(b, A, rho dx + atoms)`, their symmetric rearrangement,
//! the truncated compound-Poisson-plus-Gaussian approximation and path
//! sampling.

mod jumps;
mod quad;
mod sample;
mod scheme;
mod spec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

pub use jumps::{GaussianComponent, JumpDensity};
pub use sample::{empirical_cf, sample_paths, PathEnsemble, PathSampler, Point, TimeGrid};
pub use scheme::SimScheme;
pub use spec::{FamilySpec, RhoSpec, TripleSpec};

/// A point mass `rate * delta_position` of the Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Vec<f64>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriple {
    drift: Vec<f64>,
    covariance: DMatrix<f64>,
    jumps: JumpDensity,
    atoms: Vec<Atom>,
    transient: bool,
}

impl LevyTriple {
    pub fn new(drift: Vec<f64>, covariance: DMatrix<f64>, jumps: JumpDensity, atoms: Vec<Atom>) -> Result<Self> {
        let d = drift.len();
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidParameter(format!("dimension {d} not in 1..=3")));
        }
        if drift.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::LengthMismatch { expected: d * d, got: covariance.len() });
        }
        let scale = covariance.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if covariance.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("covariance must be finite".into()));
        }
        if (&covariance - covariance.transpose()).iter().any(|x| x.abs() > 1e-12 * scale) {
            return Err(Error::InvalidParameter("covariance must be symmetric".into()));
        }
        let min_eig = covariance.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * scale {
            return Err(Error::InvalidParameter(format!("covariance has negative eigenvalue {min_eig}")));
        }
        jumps.validate(d)?;
        for a in &atoms {
            if a.position.len() != d {
                return Err(Error::LengthMismatch { expected: d, got: a.position.len() });
            }
            if !(a.rate >= 0.0 && a.rate.is_finite()) || a.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom {a:?} needs a finite position and rate >= 0")));
            }
        }
        Ok(Self { drift, covariance, jumps, atoms, transient: false })
    }

    /// Standard Brownian motion (`A = I`).
    pub fn brownian(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], DMatrix::identity(dim, dim), JumpDensity::None, vec![])
    }

    /// Brownian motion with covariance `I` and drift `b`.
    pub fn drifted_brownian(drift: Vec<f64>) -> Result<Self> {
        let d = drift.len();
        Self::new(drift, DMatrix::identity(d, d), JumpDensity::None, vec![])
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], DMatrix::zeros(dim, dim), JumpDensity::None, vec![])
    }

    /// Marks the process as transient, which 0-capacities require.
    pub fn assert_transient(mut self, transient: bool) -> Self {
        self.transient = transient;
        self
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn jumps(&self) -> &JumpDensity {
        &self.jumps
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_transient(&self) -> bool {
        self.transient
    }

    /// Lévy–Khintchine exponent `Psi(xi)` with the density integrated over `|y| > cutoff`.
    pub fn exponent_outside(&self, xi: &[f64], cutoff: f64) -> Result<Complex64> {
        self.exponent_with(xi, cutoff, &self.covariance)
    }

    pub fn exponent(&self, xi: &[f64]) -> Result<Complex64> {
        self.exponent_outside(xi, 0.0)
    }

    pub(crate) fn exponent_with(&self, xi: &[f64], cutoff: f64, cov: &DMatrix<f64>) -> Result<Complex64> {
        let d = self.dim();
        if xi.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: xi.len() });
        }
        let bx: f64 = self.drift.iter().zip(xi).map(|(b, x)| b * x).sum();
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += xi[i] * cov[(i, j)] * xi[j];
            }
        }
        let mut psi = Complex64::new(0.5 * quad, -bx) + self.jumps.exponent(d, xi, cutoff)?;
        for a in &self.atoms {
            let p: f64 = a.position.iter().zip(xi).map(|(y, x)| y * x).sum();
            let r2: f64 = a.position.iter().map(|y| y * y).sum();
            let comp = if r2 < 1.0 { p } else { 0.0 };
            psi += Complex64::new(1.0 - p.cos(), comp - p.sin()) * a.rate;
        }
        Ok(psi)
    }
}

/// `X*`: zero drift, covariance `det(A)^{1/d} I`, density `rho*`, no atoms.
pub fn rearrange_triple(t: &LevyTriple) -> LevyTriple {
    let d = t.dim();
    let a = &t.covariance;
    let isotropic = (0..d).all(|i| (0..d).all(|j| if i == j { a[(i, j)] == a[(0, 0)] } else { a[(i, j)] == 0.0 }));
    let covariance = if isotropic {
        a.clone()
    } else {
        let det = a.determinant().max(0.0);
        DMatrix::identity(d, d) * det.powf(1.0 / d as f64)
    };
    LevyTriple {
        drift: vec![0.0; d],
        covariance,
        jumps: t.jumps.rearranged(d),
        atoms: Vec::new(),
        transient: t.transient,
    }
}

/// `E[e^{i xi . X_t}] = exp(-t Psi(xi))`.
pub fn char_fn(t: &LevyTriple, xi: &[f64], time: f64) -> Result<Complex64> {
    Ok((-t.exponent(xi)? * time).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rearranged_triple_examples() {
        let t = LevyTriple::new(vec![3.0, -1.0], DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0])), JumpDensity::None, vec![])
            .unwrap();
        let r = rearrange_triple(&t);
        assert_eq!(r.drift(), &[0.0, 0.0]);
        assert!((r.covariance() - DMatrix::identity(2, 2) * 2.0).norm() < 1e-14);
        assert_eq!(r.jumps(), &JumpDensity::None);

        let g = JumpDensity::GaussianMixture(vec![GaussianComponent { rate: 1.0, mean: vec![0.5, 1.0], std: 0.3 }]);
        let t = LevyTriple::new(vec![0.0, 0.0], DMatrix::zeros(2, 2), g, vec![]).unwrap();
        let r = rearrange_triple(&t);
        assert_eq!(
            r.jumps(),
            &JumpDensity::GaussianMixture(vec![GaussianComponent { rate: 1.0, mean: vec![0.0, 0.0], std: 0.3 }])
        );

        let t = LevyTriple::new(vec![0.0], DMatrix::zeros(1, 1), JumpDensity::None, vec![Atom { position: vec![1.0], rate: 2.0 }])
            .unwrap();
        assert_eq!(rearrange_triple(&t), LevyTriple::zero(1).unwrap());
    }

    #[test]
    fn rearrangement_is_idempotent() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let mix = JumpDensity::GaussianMixture(vec![
            GaussianComponent { rate: 1.0, mean: vec![0.5, 0.0], std: 0.3 },
            GaussianComponent { rate: 0.5, mean: vec![-1.0, 0.2], std: 0.5 },
        ]);
        let t = LevyTriple::new(vec![1.0, 2.0], a, mix, vec![]).unwrap();
        let once = rearrange_triple(&t);
        assert!(matches!(once.jumps(), JumpDensity::Grid(_)));
        assert_eq!(rearrange_triple(&once), once);
    }

    #[test]
    fn char_fn_examples() {
        let bm = LevyTriple::brownian(1).unwrap();
        let v = char_fn(&bm, &[1.0], 2.0).unwrap();
        assert!((v - Complex64::new((-1.0f64).exp(), 0.0)).norm() < 1e-15);

        let atoms = vec![Atom { position: vec![1.0], rate: 0.5 }, Atom { position: vec![-1.0], rate: 0.5 }];
        let cp = LevyTriple::new(vec![0.0], DMatrix::zeros(1, 1), JumpDensity::None, atoms).unwrap();
        for &(xi, t) in &[(0.7, 1.0), (2.0, 0.3)] {
            let v = char_fn(&cp, &[xi], t).unwrap();
            assert!((v.re - (-t * (1.0 - xi.cos())).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
        let pl = LevyTriple::new(vec![0.2], DMatrix::identity(1, 1), JumpDensity::PowerLaw { c: 1.0, alpha: 1.2, r_min: 0.0, r_max: 2.0 }, vec![])
            .unwrap();
        assert_eq!(char_fn(&pl, &[0.0], 3.0).unwrap(), Complex64::new(1.0, 0.0));
    }
}
