//! Symmetric decreasing and increasing rearrangements on a grid, and the
//! symmetric domination order between fields with a common background.
//!
//! The discrete ball of volume `k h^d` is the set of the `k` cells nearest
//! the origin in [`Grid::radial_order`]. All functions here share that
//! order, so rearranged fields and the domination check agree exactly.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::scalar::Scalar;

/// Volume of the unit ball in `d` dimensions (`d` in 1..=3).
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("dimension {d} not supported"),
    }
}

/// Radius of the origin-centred ball with volume `v`.
pub fn ball_radius(v: f64, d: usize) -> f64 {
    (v.max(0.0) / unit_ball_volume(d)).powf(1.0 / d as f64)
}

fn descending<T: Scalar>(a: &T, b: &T) -> Ordering {
    b.partial_cmp(a).expect("field values are never NaN")
}

/// Places `sorted` on the cells of `grid` in radial order.
fn place_radially<T: Scalar>(grid: &Grid, sorted: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); grid.len()];
    for (&cell, &v) in grid.radial_order().iter().zip(sorted) {
        out[cell] = v;
    }
    out
}

/// Symmetric decreasing rearrangement `f*`: the largest values (infinite
/// ones first) go to the cells nearest the origin.
pub fn rearrange_fn<T: Scalar>(f: &GridField<T>) -> Result<GridField<T>> {
    if f.background() != T::zero() {
        return Err(Error::Background { background: f.background().as_f64(), required: 0.0 });
    }
    let mut sorted = f.values().to_vec();
    sorted.sort_by(descending);
    GridField::new(*f.grid(), place_radially(f.grid(), &sorted), T::zero())
}

/// `A*`: the same number of cells, nearest the origin.
pub fn rearrange_set<T: Scalar>(a: &GridField<T>) -> Result<GridField<T>> {
    if !a.is_indicator() {
        return Err(Error::InvalidParameter("rearrange_set needs a 0/1 indicator field".into()));
    }
    rearrange_fn(a)
}

/// `phi_* = sigma - (sigma - phi)*`; the smallest values of `phi` go nearest the origin.
pub fn increasing_rearrange<T: Scalar>(phi: &GridField<T>, sigma: T) -> Result<GridField<T>> {
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
    }
    if phi.background() != sigma {
        return Err(Error::Background { background: phi.background().as_f64(), required: sigma.as_f64() });
    }
    if let Some((cell, &v)) = phi.values().iter().enumerate().find(|(_, &v)| v > sigma) {
        return Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "exceeds sigma" });
    }
    // sorting phi ascending is sorting the deficit descending, without rounding
    let mut sorted = phi.values().to_vec();
    sorted.sort_by(|a, b| descending(b, a));
    GridField::new(*phi.grid(), place_radially(phi.grid(), &sorted), sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub holds: bool,
    /// Cell count at the smallest margin.
    pub worst_cells: usize,
    /// `worst_cells * h^d`.
    pub worst_volume: f64,
    /// `RHS - LHS` at `worst_cells`.
    pub worst_margin: f64,
    pub tolerance: f64,
}

/// Per-cell deficit masses `(sigma - v) h^d`.
fn deficit_masses<T: Scalar>(f: &GridField<T>, sigma: T) -> Result<Vec<T>> {
    if f.background() != sigma {
        return Err(Error::Background { background: f.background().as_f64(), required: sigma.as_f64() });
    }
    let vol = T::lit(f.grid().cell_volume());
    f.values()
        .iter()
        .enumerate()
        .map(|(cell, &v)| {
            let d = sigma - v;
            if !d.is_finite() || d < T::zero() {
                Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "deficit must be finite and nonnegative" })
            } else {
                Ok(d * vol)
            }
        })
        .collect()
}

/// Suffix sums `s[k] = sum_{j >= k} x[j]`, with `s[len] = 0`.
fn suffix_sums<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut s = vec![T::zero(); x.len() + 1];
    for k in (0..x.len()).rev() {
        s[k] = s[k + 1] + x[k];
    }
    s
}

/// `varphi ≻ phi` with the default tolerance `1e-12 * deficit scale`.
pub fn dominates<T: Scalar>(varphi: &GridField<T>, phi: &GridField<T>, sigma: T) -> Result<DominationReport> {
    dominates_with_tolerance(varphi, phi, sigma, None)
}

/// Exact bathtub check: for every `k`, the deficit of `varphi` outside the
/// `k` nearest cells is at most the smallest deficit of `phi` outside any
/// `k` cells, which is the total minus its `k` largest cell deficits.
pub fn dominates_with_tolerance<T: Scalar>(
    varphi: &GridField<T>,
    phi: &GridField<T>,
    sigma: T,
    tolerance: Option<f64>,
) -> Result<DominationReport> {
    varphi.require_same_grid(phi)?;
    let grid = varphi.grid();
    let dv = deficit_masses(varphi, sigma)?;
    let mut dp = deficit_masses(phi, sigma)?;

    let radial: Vec<T> = grid.radial_order().iter().map(|&c| dv[c]).collect();
    dp.sort_by(descending);
    let lhs = suffix_sums(&radial);
    let rhs = suffix_sums(&dp);

    let scale = lhs[0].max(rhs[0]).as_f64();
    let tol = tolerance.unwrap_or(1e-12 * scale);
    let (worst_cells, worst_margin) = (0..=grid.len())
        .map(|k| (k, (rhs[k] - lhs[k]).as_f64()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(DominationReport {
        holds: worst_margin >= -tol,
        worst_cells,
        worst_volume: worst_cells as f64 * grid.cell_volume(),
        worst_margin,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{combine, integrate, BinaryOp};

    fn g1(l: f64, m: usize) -> Grid {
        Grid::new(1, l, m).unwrap()
    }

    fn interval(g: Grid, a: f64, b: f64) -> GridField<f64> {
        GridField::indicator(g, move |x| x[0] > a && x[0] < b)
    }

    #[test]
    fn ball_radius_examples() {
        assert_eq!(ball_radius(4.0, 1), 2.0);
        assert!((ball_radius(std::f64::consts::PI, 2) - 1.0).abs() < 1e-15);
        assert!((ball_radius(4.0 * std::f64::consts::PI / 3.0, 3) - 1.0).abs() < 1e-15);
        assert_eq!(ball_radius(0.0, 2), 0.0);
    }

    #[test]
    fn two_level_layer_cake() {
        let g = g1(4.0, 64);
        let f = GridField::from_fn(g, 0.0, |x| {
            if x[0] > 0.0 && x[0] < 1.0 {
                2.0
            } else if x[0] > 1.0 && x[0] < 3.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let r = rearrange_fn(&f).unwrap();
        let expect = GridField::from_fn(g, 0.0, |x| {
            let a = x[0].abs();
            if a < 0.5 {
                2.0
            } else if a < 1.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn set_rearrangement_examples() {
        let g = g1(4.0, 64);
        assert_eq!(rearrange_set(&interval(g, 0.0, 2.0)).unwrap(), interval(g, -1.0, 1.0));
        let empty = GridField::<f64>::zeros(g);
        assert_eq!(rearrange_set(&empty).unwrap(), empty);
        let ones = GridField::constant(g, 1.0, 0.0).unwrap();
        assert_eq!(rearrange_set(&ones).unwrap(), ones);
        let half = ones.scale(0.5).unwrap();
        assert!(rearrange_set(&half).is_err());
    }

    #[test]
    fn radial_field_is_fixed_point() {
        let g = Grid::new(2, 3.0, 24).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        assert_eq!(rearrange_fn(&f).unwrap(), f);
    }

    #[test]
    fn infinite_values_sort_first() {
        let g = g1(2.0, 8);
        let mut v = vec![0.0; 8];
        v[0] = f64::INFINITY;
        v[7] = 3.0;
        let r = rearrange_fn(&GridField::new(g, v, 0.0).unwrap()).unwrap();
        let order = g.radial_order();
        assert_eq!(r.value(order[0]), f64::INFINITY);
        assert_eq!(r.value(order[1]), 3.0);
        assert!(rearrange_fn(&GridField::constant(g, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn increasing_rearrangement_examples() {
        let g = g1(4.0, 64);
        let phi = interval(g, 0.0, 2.0).complement_to(1.0).unwrap();
        let expect = interval(g, -1.0, 1.0).complement_to(1.0).unwrap();
        assert_eq!(increasing_rearrange(&phi, 1.0).unwrap(), expect);

        let flat = GridField::constant(g, 1.0, 1.0).unwrap();
        assert_eq!(increasing_rearrange(&flat, 1.0).unwrap(), flat);

        let two = GridField::from_fn(g, 1.0, |x| {
            1.0 - 0.5 * f64::from(x[0] > 0.0 && x[0] < 2.0) - 0.5 * f64::from(x[0] > 0.0 && x[0] < 4.0)
        })
        .unwrap();
        let expect = GridField::from_fn(g, 1.0, |x| {
            1.0 - 0.5 * f64::from(x[0].abs() < 2.0) - 0.5 * f64::from(x[0].abs() < 1.0)
        })
        .unwrap();
        assert_eq!(increasing_rearrange(&two, 1.0).unwrap(), expect);

        assert!(increasing_rearrange(&GridField::constant(g, 2.0, 1.0).unwrap(), 1.0).is_err());
        assert!(increasing_rearrange(&flat, 0.0).is_err());
    }

    #[test]
    fn domination_examples() {
        let g = g1(4.0, 64);
        let phi = interval(g, 0.0, 2.0).complement_to(1.0).unwrap();
        let star = interval(g, -1.0, 1.0).complement_to(1.0).unwrap();
        assert!(dominates(&star, &phi, 1.0).unwrap().holds);

        let wide = interval(g, -2.0, 2.0).complement_to(1.0).unwrap();
        let rep = dominates(&wide, &phi, 1.0).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.worst_cells, 0);
        assert!((rep.worst_margin + 2.0).abs() < 1e-12);

        let radial = GridField::from_fn(g, 1.0, |x| 1.0 - (-(x[0] * x[0])).exp()).unwrap();
        let rep = dominates(&radial, &radial, 1.0).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.worst_margin, 0.0);

        let other = g1(4.0, 32);
        let phi2 = GridField::constant(other, 1.0, 1.0).unwrap();
        assert_eq!(dominates(&phi2, &phi, 1.0), Err(Error::GridMismatch));
        let bg = GridField::constant(g, 0.5, 0.5).unwrap();
        assert!(dominates(&bg, &phi, 1.0).is_err());
    }

    #[test]
    fn hardy_littlewood_on_example() {
        let g = g1(4.0, 32);
        let f = interval(g, 0.5, 2.5);
        let h = interval(g, -2.0, 0.0).scale(2.0).unwrap();
        let raw = integrate(&combine(&f, &h, BinaryOp::Product).unwrap()).unwrap();
        let rr = integrate(&combine(&rearrange_fn(&f).unwrap(), &rearrange_fn(&h).unwrap(), BinaryOp::Product).unwrap())
            .unwrap();
        assert_eq!(raw, 0.0);
        assert_eq!(rr, 4.0);
    }
}
