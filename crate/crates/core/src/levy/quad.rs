//! Quadrature over spherical shells and the radial special functions used
//! by the jump families.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub(crate) type Vec3 = [f64; 3];

/// Surface area of the unit sphere in `d` dimensions.
pub(crate) fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

fn series(d: usize, x: f64, ball: bool) -> f64 {
    // sum_k (-1)^k x^{2k} / (2^k k! prod_{j<k} (d + 2j)), times d/(d+2k) for the ball
    let d = d as f64;
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..=10 {
        let kf = k as f64;
        term *= -x2 / (2.0 * kf * (d + 2.0 * (kf - 1.0)));
        sum += if ball { term * d / (d + 2.0 * kf) } else { term };
    }
    sum
}

/// `int_a^b (1 - A_d(k r)) r^{-1-alpha} dr` for `k b <= 1`, term by term; `a > 0` unless `alpha < 2`.
pub(crate) fn power_series_integral(d: usize, k: f64, alpha: f64, a: f64, b: f64) -> f64 {
    let df = d as f64;
    let mut coef = 1.0;
    let mut sum = 0.0;
    for j in 1..=12 {
        let jf = j as f64;
        coef *= -k * k / (2.0 * jf * (df + 2.0 * (jf - 1.0)));
        let p = 2.0 * jf - alpha;
        sum -= coef * if p == 0.0 { (b / a).ln() } else { (b.powf(p) - a.powf(p)) / p };
    }
    sum
}

/// `1 - A_d(x)`, where `A_d(|xi| r)` is the average of `cos(xi . y)` over the sphere `|y| = r`.
pub(crate) fn one_minus_sphere_avg(d: usize, x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        return -series(d, x, false);
    }
    1.0 - match d {
        1 => x.cos(),
        2 => puruspe::Jn(0, x),
        _ => x.sin() / x,
    }
}

/// Average of `e^{i xi . y}` over the unit ball as a function of `|xi|`.
pub(crate) fn ball_avg(d: usize, x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        return 1.0 + series(d, x, true);
    }
    match d {
        1 => x.sin() / x,
        2 => 2.0 * puruspe::Jn(1, x) / x,
        _ => 3.0 * (x.sin() - x * x.cos()) / (x * x * x),
    }
}

/// Double-exponential quadrature on `[a, b]`, split at `breaks`.
pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let pieces = (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let out = quadrature::integrate(f, w[0], w[1], tol / pieces);
        if !(out.integral.is_finite() && out.error_estimate <= 1e3 * tol.max(1e-300) + 1e-12 * out.integral.abs()) {
            return Err(Error::Quadrature(format!(
                "[{}, {}]: error estimate {:e}",
                w[0], w[1], out.error_estimate
            )));
        }
        total += out.integral;
    }
    Ok(total)
}

/// Breakpoints splitting `[a, b]` into pieces no longer than `len`.
pub(crate) fn uniform_breaks(a: f64, b: f64, len: f64) -> Vec<f64> {
    if !(len > 0.0) || !(b > a) {
        return Vec::new();
    }
    let n = ((b - a) / len).ceil().min(10_000.0) as usize;
    (1..n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn orthonormal_frame(pole: &Vec3) -> (Vec3, Vec3, Vec3) {
    let n = (pole[0] * pole[0] + pole[1] * pole[1] + pole[2] * pole[2]).sqrt();
    let p = if n > 0.0 { [pole[0] / n, pole[1] / n, pole[2] / n] } else { [1.0, 0.0, 0.0] };
    let helper = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = p[0] * helper[0] + p[1] * helper[1] + p[2] * helper[2];
    let mut u = [helper[0] - dot * p[0], helper[1] - dot * p[1], helper[2] - dot * p[2]];
    let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u = [u[0] / un, u[1] / un, u[2] / un];
    let v = [p[1] * u[2] - p[2] * u[1], p[2] * u[0] - p[0] * u[2], p[0] * u[1] - p[1] * u[0]];
    (p, u, v)
}

/// Region `{lo < |y| < hi}`, optionally intersected with the ball `B(center, radius)`.
pub(crate) struct Shell<'a> {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub ball: Option<(&'a [f64], f64)>,
    /// Direction of the polar axis; integrands peaked along it are resolved best.
    pub pole: Vec3,
    /// Extra radial breakpoints.
    pub breaks: Vec<f64>,
    /// Largest angular frequency of the integrand per unit radius.
    pub freq: f64,
    pub tol: f64,
}

impl Shell<'_> {
    /// Largest polar angle (about the ball centre direction) inside the ball at radius `r`.
    fn cap_angle(&self, r: f64) -> f64 {
        match self.ball {
            None => PI,
            Some((c, radius)) => {
                let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                if cn == 0.0 || r == 0.0 {
                    return if r < radius { PI } else { 0.0 };
                }
                let cos = (r * r + cn * cn - radius * radius) / (2.0 * r * cn);
                cos.clamp(-1.0, 1.0).acos()
            }
        }
    }

    fn axis(&self) -> Vec3 {
        match self.ball {
            Some((c, _)) if c.iter().any(|&x| x != 0.0) => {
                let mut a = [0.0; 3];
                a[..c.len()].copy_from_slice(c);
                a
            }
            _ => self.pole,
        }
    }

    fn radial_breaks(&self) -> Vec<f64> {
        let mut b = self.breaks.clone();
        if let Some((c, radius)) = self.ball {
            let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            b.push((cn - radius).abs());
            b.push(cn + radius);
        }
        b
    }

    pub fn integrate(&self, f: &dyn Fn(&Vec3) -> f64) -> Result<f64> {
        let hi = match self.ball {
            Some((c, radius)) => self.hi.min(c.iter().map(|x| x * x).sum::<f64>().sqrt() + radius),
            None => self.hi,
        };
        if !(hi > self.lo) {
            return Ok(0.0);
        }
        assert!(hi.is_finite(), "shell must be bounded");
        match self.dim {
            1 => self.integrate_1d(hi, f),
            2 => self.integrate_2d(hi, f),
            _ => self.integrate_3d(hi, f),
        }
    }

    fn integrate_1d(&self, hi: f64, f: &dyn Fn(&Vec3) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for s in [1.0, -1.0] {
            let (mut a, mut b) = (self.lo, hi);
            if let Some((c, radius)) = self.ball {
                a = a.max(s * c[0] - radius);
                b = b.min(s * c[0] + radius);
            }
            let g = |r: f64| f(&[s * r, 0.0, 0.0]);
            total += integrate(&g, a, b, &self.breaks, self.tol)?;
        }
        Ok(total)
    }

    fn integrate_2d(&self, hi: f64, f: &dyn Fn(&Vec3) -> f64) -> Result<f64> {
        let axis = self.axis();
        let phi0 = axis[1].atan2(axis[0]);
        let failed: Cell<Option<Error>> = Cell::new(None);
        let radial = |r: f64| {
            let g = self.cap_angle(r);
            if g == 0.0 {
                return 0.0;
            }
            let ang = |t: f64| {
                let a = phi0 + t;
                f(&[r * a.cos(), r * a.sin(), 0.0])
            };
            let ab = uniform_breaks(-g, g, PI / 2.0);
            let mut br = vec![0.0];
            br.extend(ab);
            match integrate(&ang, -g, g, &br, self.tol / (hi * hi).max(1e-3)) {
                Ok(v) => r * v,
                Err(e) => {
                    failed.set(Some(e));
                    0.0
                }
            }
        };
        let mut br = self.radial_breaks();
        br.extend(uniform_breaks(self.lo, hi, PI / self.freq.max(1e-12)));
        let v = integrate(&radial, self.lo, hi, &br, self.tol)?;
        match failed.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    fn integrate_3d(&self, hi: f64, f: &dyn Fn(&Vec3) -> f64) -> Result<f64> {
        let (p, u, v) = orthonormal_frame(&self.axis());
        let nphi = 24 + 2 * (self.freq * hi).ceil() as usize;
        let trig: Vec<(f64, f64)> = (0..nphi)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / nphi as f64;
                (a.cos(), a.sin())
            })
            .collect();
        let failed: Cell<Option<Error>> = Cell::new(None);
        let radial = |r: f64| {
            let g = self.cap_angle(r);
            if g == 0.0 {
                return 0.0;
            }
            let polar = |t: f64| {
                let (st, ct) = t.sin_cos();
                let mut acc = 0.0;
                for &(c, s) in &trig {
                    let mut y = [0.0; 3];
                    for a in 0..3 {
                        y[a] = r * (ct * p[a] + st * (c * u[a] + s * v[a]));
                    }
                    acc += f(&y);
                }
                acc * 2.0 * PI / nphi as f64 * st
            };
            match integrate(&polar, 0.0, g, &uniform_breaks(0.0, g, PI / 4.0), self.tol / (hi * hi).max(1e-3)) {
                Ok(val) => r * r * val,
                Err(e) => {
                    failed.set(Some(e));
                    0.0
                }
            }
        };
        let mut br = self.radial_breaks();
        br.extend(uniform_breaks(self.lo, hi, PI / self.freq.max(1e-12)));
        let val = integrate(&radial, self.lo, hi, &br, self.tol)?;
        match failed.into_inner() {
            Some(e) => Err(e),
            None => Ok(val),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_functions_match_closed_forms() {
        for d in 1..=3 {
            for &x in &[1e-6f64, 0.3, 0.999, 1.0, 2.5, 12.0] {
                let direct = match d {
                    1 => 1.0 - x.cos(),
                    2 => 1.0 - puruspe::Jn(0, x),
                    _ => 1.0 - x.sin() / x,
                };
                if x > 1e-3 {
                    assert!((one_minus_sphere_avg(d, x) - direct).abs() < 1e-12, "d={d} x={x}");
                }
            }
        }
        assert!((ball_avg(3, 0.999) - ball_avg(3, 1.0)).abs() < 1e-3);
        assert!((ball_avg(2, 0.5) - 2.0 * puruspe::Jn(1, 0.5) / 0.5).abs() < 1e-13);
    }

    #[test]
    fn power_series_matches_quadrature() {
        for d in 1..=3 {
            for &(k, alpha, a, b) in &[(0.8, 1.5, 0.2, 1.2), (2.0, 0.5, 0.05, 0.5), (1.0, 2.0, 0.3, 1.0)] {
                let f = |r: f64| one_minus_sphere_avg(d, k * r) * r.powf(-1.0 - alpha);
                let want = integrate(&f, a, b, &[], 1e-14).unwrap();
                let got = power_series_integral(d, k, alpha, a, b);
                assert!((got - want).abs() < 1e-12 * want, "d = {d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn shell_volumes() {
        let one = |_: &Vec3| 1.0;
        for d in 1..=3 {
            let s = Shell { dim: d, lo: 0.5, hi: 2.0, ball: None, pole: [1.0, 0.0, 0.0], breaks: vec![], freq: 0.0, tol: 1e-12 };
            let exact = sphere_area(d) * (2f64.powi(d as i32) - 0.5f64.powi(d as i32)) / d as f64;
            assert!((s.integrate(&one).unwrap() - exact).abs() < 1e-9, "d={d}");
        }
        // ball of radius 1 centred at (0.7, 0, 0): volume inside |y| < 2 is the whole ball
        let c = [0.7, 0.0, 0.0];
        for d in 2..=3 {
            let s = Shell { dim: d, lo: 0.0, hi: 2.0, ball: Some((&c[..d], 1.0)), pole: c, breaks: vec![], freq: 0.0, tol: 1e-12 };
            let exact = crate::rearrange::unit_ball_volume(d);
            assert!((s.integrate(&one).unwrap() - exact).abs() < 1e-8, "d={d}");
        }
    }
}
