use nalgebra::DMatrix;
use num_complex::Complex64;

use super::jumps::JumpLaw;
use super::LevyTriple;
use crate::error::{Error, Result};

/// The truncated process `X_n = C_n + G_n`: compound Poisson jumps from
/// `rho 1_{|y| > 1/n}` plus the atoms, and a Brownian motion with drift `b_n`
/// and covariance `A + eps_n I`.
#[derive(Debug, Clone)]
pub struct SimScheme {
    base: LevyTriple,
    n: u32,
    eps: f64,
    c_n: f64,
    b_n: Vec<f64>,
    a_n: DMatrix<f64>,
    /// `sum_k rate_k y_k 1_{|y_k| < 1}`
    atom_compensator: Vec<f64>,
    atom_rate: f64,
    pub(crate) factor: [[f64; 3]; 3],
    pub(crate) law: JumpLaw,
    padded: bool,
}

impl SimScheme {
    pub fn truncate(t: &LevyTriple, n: u32, eps_n: f64) -> Result<Self> {
        if !(eps_n > 0.0 && eps_n.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps_n must be positive, got {eps_n}")));
        }
        Self::build(t, n, eps_n, true)
    }

    /// `eps_n = 1/n^2`.
    pub fn with_default_padding(t: &LevyTriple, n: u32) -> Result<Self> {
        Self::truncate(t, n, 1.0 / (n as f64 * n as f64))
    }

    /// No Gaussian padding; `A_n = A` may be singular. Used for deterministic
    /// paths such as the zero process.
    pub fn unpadded(t: &LevyTriple, n: u32) -> Result<Self> {
        Self::build(t, n, 0.0, false)
    }

    fn build(t: &LevyTriple, n: u32, eps: f64, padded: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("truncation index n must be at least 1".into()));
        }
        let d = t.dim();
        let cutoff = 1.0 / n as f64;
        let c_n = t.jumps().mass_outside(d, cutoff)?;
        if !c_n.is_finite() {
            return Err(Error::InfiniteJumpRate(format!("c_n = {c_n}")));
        }
        let m1 = t.jumps().first_moment(d, cutoff, 1.0)?;
        let b_n: Vec<f64> = t.drift().iter().zip(&m1).map(|(b, m)| b - m).collect();
        let mut atom_compensator = vec![0.0; d];
        for a in t.atoms() {
            let r2: f64 = a.position.iter().map(|y| y * y).sum();
            if r2 < 1.0 {
                for (c, y) in atom_compensator.iter_mut().zip(&a.position) {
                    *c += a.rate * y;
                }
            }
        }
        let atom_rate = t.atoms().iter().map(|a| a.rate).sum();
        let a_n = t.covariance() + DMatrix::identity(d, d) * eps;
        let eig = a_n.clone().symmetric_eigen();
        if padded && eig.eigenvalues.min() <= 0.0 {
            return Err(Error::InvalidParameter("A_n is not positive definite".into()));
        }
        let mut factor = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                factor[i][j] = eig.eigenvectors[(i, j)] * eig.eigenvalues[j].max(0.0).sqrt();
            }
        }
        let law = t.jumps().law(d, cutoff)?;
        Ok(Self { base: t.clone(), n, eps, c_n, b_n, a_n, atom_compensator, atom_rate, factor, law, padded })
    }

    pub fn base(&self) -> &LevyTriple {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cutoff(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn eps_n(&self) -> f64 {
        self.eps
    }

    /// `int rho_n`, the jump rate of the absolutely continuous part.
    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    /// `b - int_{|y|<1} y rho_n(y) dy`.
    pub fn b_n(&self) -> &[f64] {
        &self.b_n
    }

    pub fn a_n(&self) -> &DMatrix<f64> {
        &self.a_n
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    /// Jump rate including the atoms.
    pub fn total_jump_rate(&self) -> f64 {
        self.c_n + self.atom_rate
    }

    /// Drift of the simulated Gaussian part: `b_n` minus the atoms' compensator.
    pub fn simulation_drift(&self) -> Vec<f64> {
        self.b_n.iter().zip(&self.atom_compensator).map(|(b, c)| b - c).collect()
    }

    /// `rho_n(y) = rho(y) 1_{|y| > 1/n}`.
    pub fn rho_n(&self, y: &[f64]) -> f64 {
        let r = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > self.cutoff() {
            self.base.jumps().density(self.dim(), y)
        } else {
            0.0
        }
    }

    /// `rho_n / c_n`, or 0 when there are no jumps.
    pub fn rhobar_n(&self, y: &[f64]) -> f64 {
        if self.c_n > 0.0 {
            self.rho_n(y) / self.c_n
        } else {
            0.0
        }
    }

    /// Exponent of `X_n` itself: the triple `(b, A_n, rho_n, atoms)`.
    pub fn exponent(&self, xi: &[f64]) -> Result<Complex64> {
        self.base.exponent_with(xi, self.cutoff(), &self.a_n)
    }

    pub fn char_fn(&self, xi: &[f64], time: f64) -> Result<Complex64> {
        Ok((-self.exponent(xi)? * time).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{GaussianComponent, JumpDensity};

    #[test]
    fn truncation_examples() {
        let pl = JumpDensity::PowerLaw { c: 1.0, alpha: 1.5, r_min: 0.0, r_max: 1.0 };
        let t = LevyTriple::new(vec![0.5], DMatrix::zeros(1, 1), pl, vec![]).unwrap();
        let s = SimScheme::with_default_padding(&t, 4).unwrap();
        assert!((s.c_n() - 28.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.b_n(), &[0.5]);
        assert!((s.a_n()[(0, 0)] - 1.0 / 16.0).abs() < 1e-15);

        let bm = LevyTriple::brownian(2).unwrap();
        let s = SimScheme::truncate(&bm, 3, 0.1).unwrap();
        assert_eq!(s.c_n(), 0.0);
        assert!(SimScheme::truncate(&bm, 3, 0.0).is_err());

        let g = JumpDensity::GaussianMixture(vec![GaussianComponent { rate: 2.0, mean: vec![0.0, 0.0], std: 0.5 }]);
        let t = LevyTriple::new(vec![1.0, -2.0], DMatrix::zeros(2, 2), g, vec![]).unwrap();
        let s = SimScheme::with_default_padding(&t, 8).unwrap();
        assert_eq!(s.b_n(), &[1.0, -2.0]);
        assert!(s.a_n().clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn shifted_ball_drift_matches_brute_force() {
        let rho = JumpDensity::UniformBall { rate: 3.0, center: vec![0.6, -0.2], radius: 0.7 };
        let t = LevyTriple::new(vec![0.0, 0.0], DMatrix::zeros(2, 2), rho.clone(), vec![]).unwrap();
        let s = SimScheme::with_default_padding(&t, 5).unwrap();
        let n = 1500;
        let h = 3.0 / n as f64;
        let (mut mass, mut m) = (0.0, [0.0, 0.0]);
        for i in 0..n {
            for j in 0..n {
                let y = [-1.5 + (i as f64 + 0.5) * h, -1.5 + (j as f64 + 0.5) * h];
                let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                let w = rho.density(2, &y) * h * h;
                if r > 0.2 {
                    mass += w;
                    if r < 1.0 {
                        m[0] += w * y[0];
                        m[1] += w * y[1];
                    }
                }
            }
        }
        // the ball reaches past |y| = 1, so both the mass and the moment are partial
        assert!((s.c_n() - mass).abs() < 2e-3, "{} {mass}", s.c_n());
        assert!((s.b_n()[0] + m[0]).abs() < 2e-3 && (s.b_n()[1] + m[1]).abs() < 2e-3, "{:?} {m:?}", s.b_n());
    }
}
