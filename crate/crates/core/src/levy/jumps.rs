//! Absolutely continuous jump densities. Every quantity that depends on the
//! small-jump truncation takes a `cutoff` and integrates over `|y| > cutoff`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::quad::{ball_avg, integrate, one_minus_sphere_avg, power_series_integral, sphere_area, uniform_breaks, Shell, Vec3};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::rearrange::{rearrange_fn, unit_ball_volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// Total mass of the component.
    pub rate: f64,
    pub mean: Vec<f64>,
    /// Isotropic standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpDensity {
    None,
    GaussianMixture(Vec<GaussianComponent>),
    /// `c |y|^{-d-alpha}` on `r_min < |y| < r_max`.
    PowerLaw { c: f64, alpha: f64, r_min: f64, r_max: f64 },
    /// Constant density `rate / |B|` on the ball `B(center, radius)`.
    UniformBall { rate: f64, center: Vec<f64>, radius: f64 },
    /// Piecewise constant on the cells of a grid, zero outside. Truncation
    /// at a cutoff keeps or drops whole cells by their centre.
    Grid(GridField<f64>),
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pad(v: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Cell centre from lattice coordinates, so mirrored cells are exact negatives.
fn lattice_center(grid: &Grid, flat: usize) -> Vec3 {
    let k = grid.lattice(flat);
    let h = grid.spacing();
    let mut c = [0.0; 3];
    for a in 0..grid.dim() {
        c[a] = (2 * k[a] + 1) as f64 * 0.5 * h;
    }
    c
}

impl JumpDensity {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            JumpDensity::None => Ok(()),
            JumpDensity::GaussianMixture(comps) => {
                for c in comps {
                    if c.mean.len() != dim {
                        return Err(Error::LengthMismatch { expected: dim, got: c.mean.len() });
                    }
                    if !(c.rate >= 0.0 && c.rate.is_finite()) || !(c.std > 0.0 && c.std.is_finite()) {
                        return bad(format!("gaussian component needs rate >= 0 and std > 0, got {c:?}"));
                    }
                    if c.mean.iter().any(|x| !x.is_finite()) {
                        return bad("gaussian mean must be finite".into());
                    }
                }
                Ok(())
            }
            JumpDensity::PowerLaw { c, alpha, r_min, r_max } => {
                if !(*c >= 0.0 && c.is_finite() && alpha.is_finite()) {
                    return bad(format!("power law needs c >= 0 and finite alpha, got c={c} alpha={alpha}"));
                }
                if !(*r_min >= 0.0 && r_max.is_finite() && r_max > r_min) {
                    return bad(format!("power law needs 0 <= r_min < r_max < inf, got {r_min}, {r_max}"));
                }
                if *r_min == 0.0 && *alpha >= 2.0 {
                    return bad(format!("power law with r_min = 0 needs alpha < 2, got {alpha}"));
                }
                Ok(())
            }
            JumpDensity::UniformBall { rate, center, radius } => {
                if center.len() != dim {
                    return Err(Error::LengthMismatch { expected: dim, got: center.len() });
                }
                if !(*rate >= 0.0 && rate.is_finite() && *radius > 0.0 && radius.is_finite()) {
                    return bad(format!("uniform ball needs rate >= 0 and radius > 0, got {rate}, {radius}"));
                }
                Ok(())
            }
            JumpDensity::Grid(f) => {
                if f.grid().dim() != dim {
                    return Err(Error::InvalidParameter(format!(
                        "jump grid has dimension {}, triple has {dim}",
                        f.grid().dim()
                    )));
                }
                if f.background() != 0.0 {
                    return Err(Error::Background { background: f.background(), required: 0.0 });
                }
                if f.has_hard_part() {
                    return Err(Error::InfiniteValue);
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            JumpDensity::None => true,
            JumpDensity::GaussianMixture(c) => c.iter().all(|c| c.rate == 0.0),
            JumpDensity::PowerLaw { c, .. } => *c == 0.0,
            JumpDensity::UniformBall { rate, .. } => *rate == 0.0,
            JumpDensity::Grid(f) => f.values().iter().all(|&v| v == 0.0),
        }
    }

    /// Pointwise density `rho(y)`.
    pub fn density(&self, dim: usize, y: &[f64]) -> f64 {
        match self {
            JumpDensity::None => 0.0,
            JumpDensity::GaussianMixture(comps) => comps
                .iter()
                .map(|c| {
                    let r2: f64 = y.iter().zip(&c.mean).map(|(a, b)| (a - b) * (a - b)).sum();
                    c.rate * (2.0 * PI * c.std * c.std).powf(-(dim as f64) / 2.0) * (-r2 / (2.0 * c.std * c.std)).exp()
                })
                .sum(),
            JumpDensity::PowerLaw { c, alpha, r_min, r_max } => {
                let r = norm(y);
                if r > *r_min && r < *r_max {
                    c * r.powf(-(dim as f64) - alpha)
                } else {
                    0.0
                }
            }
            JumpDensity::UniformBall { rate, center, radius } => {
                let r2: f64 = y.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if r2 < radius * radius {
                    rate / (unit_ball_volume(dim) * radius.powi(dim as i32))
                } else {
                    0.0
                }
            }
            JumpDensity::Grid(f) => f.value_at(y),
        }
    }

    /// `int_{|y| > cutoff} rho`.
    pub fn mass_outside(&self, dim: usize, cutoff: f64) -> Result<f64> {
        match self {
            JumpDensity::None => Ok(0.0),
            JumpDensity::GaussianMixture(comps) => {
                let mut total = 0.0;
                for c in comps {
                    total += c.rate - gaussian_inner(dim, c, cutoff, &|_| 1.0, 0.0)?;
                }
                Ok(total.max(0.0))
            }
            JumpDensity::PowerLaw { c, alpha, r_min, r_max } => {
                power_mass(dim, *c, *alpha, r_min.max(cutoff), *r_max)
            }
            JumpDensity::UniformBall { rate, center, radius } => {
                let inside = ball_piece(dim, center, *radius, 0.0, cutoff, &|_| 1.0, 0.0)?;
                Ok((rate - rate / (unit_ball_volume(dim) * radius.powi(dim as i32)) * inside).max(0.0))
            }
            JumpDensity::Grid(f) => {
                let g = f.grid();
                let mut total = 0.0;
                for (i, &v) in f.values().iter().enumerate() {
                    if v > 0.0 && norm(&lattice_center(g, i)[..dim]) > cutoff {
                        total += v;
                    }
                }
                Ok(total * g.cell_volume())
            }
        }
    }

    /// `int_{lo < |y| < hi} y rho(y) dy`.
    pub fn first_moment(&self, dim: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; dim];
        if !(hi > lo) {
            return Ok(out);
        }
        match self {
            JumpDensity::None | JumpDensity::PowerLaw { .. } => {}
            JumpDensity::GaussianMixture(comps) => {
                for c in comps {
                    if c.mean.iter().all(|&m| m == 0.0) {
                        continue;
                    }
                    for (a, o) in out.iter_mut().enumerate() {
                        *o += gaussian_inner(dim, c, hi, &|y| y[a], 0.0)? - gaussian_inner(dim, c, lo, &|y| y[a], 0.0)?;
                    }
                }
            }
            JumpDensity::UniformBall { rate, center, radius } => {
                if center.iter().any(|&x| x != 0.0) {
                    let k = rate / (unit_ball_volume(dim) * radius.powi(dim as i32));
                    for (a, o) in out.iter_mut().enumerate() {
                        *o = k * ball_piece(dim, center, *radius, lo, hi, &|y| y[a], 0.0)?;
                    }
                }
            }
            JumpDensity::Grid(f) => {
                let g = f.grid();
                for i in 0..g.len() {
                    let r = g.reflect(i);
                    if r < i {
                        continue;
                    }
                    let x = lattice_center(g, i);
                    let n = norm(&x[..dim]);
                    if n > lo && n < hi {
                        // x_r = -x exactly, so symmetric pairs cancel exactly
                        let w = f.value(i) - f.value(r);
                        for a in 0..dim {
                            out[a] += w * x[a];
                        }
                    }
                }
                for o in &mut out {
                    *o *= g.cell_volume();
                }
            }
        }
        Ok(out)
    }

    /// `int_{|y| > cutoff} (1 - e^{i xi.y} + i xi.y 1_{|y|<1}) rho(y) dy`.
    pub fn exponent(&self, dim: usize, xi: &[f64], cutoff: f64) -> Result<Complex64> {
        let k = norm(xi);
        match self {
            JumpDensity::None => Ok(Complex64::new(0.0, 0.0)),
            JumpDensity::PowerLaw { c, alpha, r_min, r_max } => {
                let a = r_min.max(cutoff);
                if k == 0.0 || *c == 0.0 || !(*r_max > a) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let f = |r: f64| one_minus_sphere_avg(dim, k * r) * r.powf(-1.0 - alpha);
                let scale = c * sphere_area(dim);
                // below 1/k the integrand is r^{1 - alpha} times a power series
                let mid = r_max.min(1.0 / k).max(a);
                let near = power_series_integral(dim, k, *alpha, a, mid);
                let far = integrate(&f, mid, *r_max, &uniform_breaks(mid, *r_max, PI / k), 1e-13 / scale.max(1e-300) * k * k)?;
                Ok(Complex64::new(scale * (near + far), 0.0))
            }
            JumpDensity::GaussianMixture(comps) => {
                let mut total = Complex64::new(0.0, 0.0);
                for c in comps {
                    let s2 = c.std * c.std;
                    let ft = Complex64::from_polar(c.rate * (-0.5 * s2 * k * k).exp(), dot(xi, &c.mean));
                    let inner_re = gaussian_inner(dim, c, cutoff, &|y| 1.0 - dot(xi, &y[..dim]).cos(), k)?;
                    let inner_im = gaussian_inner(dim, c, cutoff, &|y| dot(xi, &y[..dim]).sin(), k)?;
                    // int_{|y|>cutoff} (1 - e^{i xi y}) = (rate - ft) - int_{|y|<cutoff} (1 - e^{i xi y})
                    total += Complex64::new(c.rate, 0.0) - ft - Complex64::new(inner_re, -inner_im);
                }
                let m1 = self.first_moment(dim, cutoff, 1.0)?;
                Ok(total + Complex64::new(0.0, dot(xi, &m1)))
            }
            JumpDensity::UniformBall { rate, center, radius } => {
                let vol = unit_ball_volume(dim) * radius.powi(dim as i32);
                let ft = Complex64::from_polar(rate * ball_avg(dim, k * radius), dot(xi, center));
                let inner_re = ball_piece(dim, center, *radius, 0.0, cutoff, &|y| 1.0 - dot(xi, &y[..dim]).cos(), k)?;
                let inner_im = ball_piece(dim, center, *radius, 0.0, cutoff, &|y| dot(xi, &y[..dim]).sin(), k)?;
                let m1 = self.first_moment(dim, cutoff, 1.0)?;
                Ok(Complex64::new(*rate, 0.0) - ft - Complex64::new(inner_re, -inner_im) * (rate / vol)
                    + Complex64::new(0.0, dot(xi, &m1)))
            }
            JumpDensity::Grid(f) => {
                let g = f.grid();
                let h = g.spacing();
                let smear: f64 = xi.iter().map(|&x| sinc(0.5 * x * h)).product();
                let mut re = 0.0;
                let mut im = 0.0;
                for i in 0..g.len() {
                    let r = g.reflect(i);
                    if r < i {
                        continue;
                    }
                    let x = lattice_center(g, i);
                    let n = norm(&x[..dim]);
                    if n <= cutoff {
                        continue;
                    }
                    let (vi, vr) = (f.value(i), f.value(r));
                    if vi == 0.0 && vr == 0.0 {
                        continue;
                    }
                    let phase = dot(xi, &x[..dim]);
                    let comp = if n < 1.0 { phase } else { 0.0 };
                    // cell i at x and its mirror at -x
                    re += (vi + vr) * (1.0 - phase.cos() * smear);
                    im += (vi - vr) * (comp - phase.sin() * smear);
                }
                let v = g.cell_volume();
                Ok(Complex64::new(re * v, im * v))
            }
        }
    }

    /// Symmetric decreasing rearrangement `rho*`.
    pub fn rearranged(&self, dim: usize) -> JumpDensity {
        match self {
            JumpDensity::None => JumpDensity::None,
            JumpDensity::PowerLaw { .. } => self.clone(),
            JumpDensity::UniformBall { rate, radius, .. } => {
                JumpDensity::UniformBall { rate: *rate, center: vec![0.0; dim], radius: *radius }
            }
            JumpDensity::GaussianMixture(comps) => {
                let concentric = comps.windows(2).all(|w| w[0].mean == w[1].mean);
                if concentric {
                    JumpDensity::GaussianMixture(
                        comps
                            .iter()
                            .map(|c| GaussianComponent { rate: c.rate, mean: vec![0.0; dim], std: c.std })
                            .collect(),
                    )
                } else {
                    let field = self.to_grid(dim);
                    JumpDensity::Grid(rearrange_fn(&field).expect("grid density has zero background"))
                }
            }
            JumpDensity::Grid(f) => JumpDensity::Grid(rearrange_fn(f).expect("validated background")),
        }
    }

    /// Samples a gaussian mixture on a grid, rescaled to the exact total rate.
    fn to_grid(&self, dim: usize) -> GridField<f64> {
        let JumpDensity::GaussianMixture(comps) = self else {
            unreachable!("only mixtures are gridded")
        };
        let smin = comps.iter().map(|c| c.std).fold(f64::INFINITY, f64::min);
        let smax = comps.iter().map(|c| c.std).fold(0.0, f64::max);
        let reach = comps.iter().map(|c| norm(&c.mean)).fold(0.0, f64::max) + 7.0 * smax;
        let cap = match dim {
            1 => 4096.0,
            2 => 512.0,
            _ => 128.0,
        };
        let h = (smin / 6.0).max(2.0 * reach / cap);
        let grid = Grid::covering(dim, h, reach).expect("positive spacing");
        let mut field =
            GridField::from_fn(grid, 0.0, |y| self.density(dim, y)).expect("densities are finite and nonnegative");
        let total: f64 = comps.iter().map(|c| c.rate).sum();
        let mass: f64 = field.values().iter().sum::<f64>() * grid.cell_volume();
        if mass > 0.0 {
            field = field.scale(total / mass).expect("finite scale");
        }
        field
    }

    pub(crate) fn law(&self, dim: usize, cutoff: f64) -> Result<JumpLaw> {
        if self.mass_outside(dim, cutoff)? == 0.0 {
            return Ok(JumpLaw::None);
        }
        Ok(match self {
            JumpDensity::None => JumpLaw::None,
            JumpDensity::GaussianMixture(comps) => {
                let live: Vec<&GaussianComponent> = comps.iter().filter(|c| c.rate > 0.0).collect();
                JumpLaw::Mixture {
                    pick: WeightedAliasIndex::new(live.iter().map(|c| c.rate).collect())
                        .map_err(|e| Error::InvalidParameter(e.to_string()))?,
                    comps: live.iter().map(|c| (pad(&c.mean), c.std)).collect(),
                    cutoff,
                }
            }
            JumpDensity::PowerLaw { alpha, r_min, r_max, .. } => {
                JumpLaw::PowerLaw { a: r_min.max(cutoff), b: *r_max, alpha: *alpha }
            }
            JumpDensity::UniformBall { center, radius, .. } => {
                JumpLaw::Ball { center: pad(center), radius: *radius, cutoff }
            }
            JumpDensity::Grid(f) => {
                let g = f.grid();
                let mut centers = Vec::new();
                let mut weights = Vec::new();
                for (i, &v) in f.values().iter().enumerate() {
                    let x = lattice_center(g, i);
                    if v > 0.0 && norm(&x[..dim]) > cutoff {
                        centers.push(x);
                        weights.push(v);
                    }
                }
                JumpLaw::Grid {
                    alias: WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidParameter(e.to_string()))?,
                    centers,
                    h: g.spacing(),
                }
            }
        })
    }
}

fn power_mass(dim: usize, c: f64, alpha: f64, a: f64, b: f64) -> Result<f64> {
    if c == 0.0 || !(b > a) {
        return Ok(0.0);
    }
    if a == 0.0 && alpha >= 0.0 {
        return Err(Error::InfiniteJumpRate(format!("power law with alpha {alpha} has infinite mass near 0")));
    }
    let s = c * sphere_area(dim);
    Ok(if alpha == 0.0 { s * (b / a).ln() } else { s * (a.powf(-alpha) - b.powf(-alpha)) / alpha })
}

/// `int_{|y| < r} f(y) N(y; mean, std^2 I) rate dy`.
fn gaussian_inner(dim: usize, c: &GaussianComponent, r: f64, f: &dyn Fn(&Vec3) -> f64, freq: f64) -> Result<f64> {
    if r <= 0.0 || c.rate == 0.0 {
        return Ok(0.0);
    }
    let s2 = c.std * c.std;
    let norm_c = c.rate * (2.0 * PI * s2).powf(-(dim as f64) / 2.0);
    let mean = pad(&c.mean);
    let m = norm(&c.mean);
    let g = |y: &Vec3| {
        let d2: f64 = (0..dim).map(|a| (y[a] - mean[a]) * (y[a] - mean[a])).sum();
        norm_c * (-d2 / (2.0 * s2)).exp() * f(y)
    };
    let shell = Shell {
        dim,
        lo: 0.0,
        hi: r,
        ball: None,
        pole: mean,
        breaks: vec![m - 4.0 * c.std, m, m + 4.0 * c.std],
        freq,
        tol: 1e-13 * c.rate,
    };
    shell.integrate(&g)
}

/// `int_{lo < |y| < hi, |y - center| < radius} f(y) dy`.
fn ball_piece(
    dim: usize,
    center: &[f64],
    radius: f64,
    lo: f64,
    hi: f64,
    f: &dyn Fn(&Vec3) -> f64,
    freq: f64,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let vol = unit_ball_volume(dim) * radius.powi(dim as i32);
    let shell = Shell { dim, lo, hi, ball: Some((center, radius)), pole: pad(center), breaks: vec![], freq, tol: 1e-13 * vol };
    shell.integrate(f)
}

/// Normalized jump law `rho_n / c_n`, ready for sampling.
#[derive(Debug, Clone)]
pub(crate) enum JumpLaw {
    None,
    Mixture { pick: WeightedAliasIndex<f64>, comps: Vec<(Vec3, f64)>, cutoff: f64 },
    PowerLaw { a: f64, b: f64, alpha: f64 },
    Ball { center: Vec3, radius: f64, cutoff: f64 },
    Grid { alias: WeightedAliasIndex<f64>, centers: Vec<Vec3>, h: f64 },
}

fn direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec3 {
    match dim {
        1 => [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0, 0.0],
        2 => {
            let t = 2.0 * PI * rng.random::<f64>();
            [t.cos(), t.sin(), 0.0]
        }
        _ => loop {
            let v: Vec3 = [StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)];
            let n = norm(&v);
            if n > 1e-12 {
                break [v[0] / n, v[1] / n, v[2] / n];
            }
        },
    }
}

impl JumpLaw {
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vec3 {
        match self {
            JumpLaw::None => [0.0; 3],
            JumpLaw::Mixture { pick, comps, cutoff } => loop {
                let (mean, std) = comps[pick.sample(rng)];
                let mut y = [0.0; 3];
                for a in 0..dim {
                    let z: f64 = StandardNormal.sample(rng);
                    y[a] = mean[a] + std * z;
                }
                if norm(&y) > *cutoff {
                    break y;
                }
            },
            JumpLaw::PowerLaw { a, b, alpha } => {
                let u: f64 = rng.random();
                let r = if *alpha == 0.0 {
                    a * (b / a).powf(u)
                } else {
                    let (ta, tb) = (a.powf(-alpha), b.powf(-alpha));
                    (ta - u * (ta - tb)).powf(-1.0 / alpha)
                };
                let d = direction(dim, rng);
                [r * d[0], r * d[1], r * d[2]]
            }
            JumpLaw::Ball { center, radius, cutoff } => loop {
                let d = direction(dim, rng);
                let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
                let y = [center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]];
                if norm(&y[..dim]) > *cutoff {
                    break y;
                }
            },
            JumpLaw::Grid { alias, centers, h } => {
                let c = centers[alias.sample(rng)];
                let mut y = [0.0; 3];
                for a in 0..dim {
                    y[a] = c[a] + h * (rng.random::<f64>() - 0.5);
                }
                y
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_mass_closed_form() {
        let rho = JumpDensity::PowerLaw { c: 1.0, alpha: 1.5, r_min: 0.0, r_max: 1.0 };
        let m = rho.mass_outside(1, 0.25).unwrap();
        assert!((m - 28.0 / 3.0).abs() < 1e-12, "{m}");
        assert!(matches!(rho.mass_outside(1, 0.0), Err(Error::InfiniteJumpRate(_))));
    }

    #[test]
    fn ball_mass_and_moment() {
        let rho = JumpDensity::UniformBall { rate: 2.0, center: vec![0.5, 0.0], radius: 1.0 };
        assert!((rho.mass_outside(2, 0.0).unwrap() - 2.0).abs() < 1e-10);
        // all of the ball lies in |y| < 2, and its first moment is rate * centre
        let m = rho.first_moment(2, 0.0, 2.0).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-9 && m[1].abs() < 1e-9, "{m:?}");
        // d = 1: ball (-0.5, 1.5), outside |y| < 0.25 keeps 1.5 of its length 2
        let rho = JumpDensity::UniformBall { rate: 1.0, center: vec![0.5], radius: 1.0 };
        assert!((rho.mass_outside(1, 0.25).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn gaussian_exponent_without_cutoff_is_closed_form() {
        let c = GaussianComponent { rate: 1.5, mean: vec![0.3, -0.2, 0.1], std: 0.4 };
        let rho = JumpDensity::GaussianMixture(vec![c.clone()]);
        let xi = [0.7, 1.1, -0.4];
        // with cutoff 0 the compensator still needs the moment over |y| < 1
        let got = rho.exponent(3, &xi, 0.0).unwrap();
        let m1 = rho.first_moment(3, 0.0, 1.0).unwrap();
        let ft = Complex64::from_polar(1.5 * (-0.5 * 0.16 * dot(&xi, &xi)).exp(), dot(&xi, &c.mean));
        let want = Complex64::new(1.5, 0.0) - ft + Complex64::new(0.0, dot(&xi, &m1));
        assert!((got - want).norm() < 1e-10, "{got} {want}");
    }

    #[test]
    fn gaussian_cutoff_pieces_add_up() {
        let rho = JumpDensity::GaussianMixture(vec![GaussianComponent { rate: 1.0, mean: vec![0.2, 0.1], std: 0.5 }]);
        let xi = [1.3, -0.6];
        // the exponent with a cutoff equals the full one minus the inner ball piece, done by brute force
        let full = rho.exponent(2, &xi, 0.0).unwrap();
        let cut = rho.exponent(2, &xi, 0.3).unwrap();
        let n = 800;
        let h = 0.6 / n as f64;
        let mut inner = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let y = [-0.3 + (i as f64 + 0.5) * h, -0.3 + (j as f64 + 0.5) * h];
                if norm(&y) < 0.3 {
                    let p = dot(&xi, &y);
                    inner += Complex64::new(1.0 - p.cos(), -p.sin() + p) * rho.density(2, &y) * h * h;
                }
            }
        }
        assert!((full - cut - inner).norm() < 1e-4, "{}", (full - cut - inner).norm());
    }

    #[test]
    fn symmetric_grid_has_no_first_moment() {
        let grid = Grid::new(2, 2.0, 16).unwrap();
        let f = GridField::from_fn(grid, 0.0, |y| (-(y[0] * y[0] + 2.0 * y[1] * y[1])).exp()).unwrap();
        let rho = JumpDensity::Grid(f);
        assert_eq!(rho.first_moment(2, 0.0, 1.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(rho.exponent(2, &[0.4, 1.7], 0.1).unwrap().im, 0.0);
    }
}
