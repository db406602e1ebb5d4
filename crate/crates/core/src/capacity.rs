//! Monte Carlo q-capacities `C^q(A) = q int E_x[e^{-q T_A}] dx` and the
//! extrapolated 0-capacity, from grid-time hitting of a lattice set.
//!
//! Every start cell is driven by one centred path: `x` hits `A` at step `i`
//! when `x + round(X_{t_i}/h)` is a cell of `A`. The start cells are not
//! confined to a box, so there is no spatial truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, Lattice, MAX_DIM};
use crate::lattice::{first_hits, shift_of, CellSet};
use crate::levy::{rearrange_triple, LevyTriple, PathSampler, Point, SimScheme, TimeGrid};
use crate::mc::{mean_se, paired, par_map, McParams};
use crate::rearrange::rearrange_set;
use crate::report::{ComparisonReport, Estimate};
use crate::trap_continuum::{discretization_allowance, hitting_mass_profile, hitting_profile_paths};

/// Largest tolerated `e^{-q t_max}`.
pub const HORIZON_TOL: f64 = 1e-3;

/// Default ladder `q_0 / 2^k` for [`zero_capacity`].
pub const DEFAULT_LADDER: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub q: f64,
    pub value: f64,
    pub std_error: f64,
    pub spatial_truncation_bias_bound: f64,
    /// Bound on the bias from stopping the paths at `t_max`: `e^{-q t_max} value`.
    pub horizon_bias_bound: f64,
    pub time_step: f64,
    pub paths: usize,
}

impl CapacityEstimate {
    fn zero(q: f64, time_step: f64, paths: usize) -> Self {
        Self { q, value: 0.0, std_error: 0.0, spatial_truncation_bias_bound: 0.0, horizon_bias_bound: 0.0, time_step, paths }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.std_error)
    }
}

/// Horizon with `e^{-q t_max} = HORIZON_TOL`.
pub fn default_horizon(q: f64) -> f64 {
    -HORIZON_TOL.ln() / q
}

/// First index `i` with `x + X_{t_i}` in `A`, with both rounded to lattice cells.
pub fn hitting_time(path: &[Point], a: &GridField<f64>, x: &[f64]) -> Option<usize> {
    let g = a.grid();
    let k = g.lattice_of_point(x);
    path.iter().position(|p| {
        let n = shift_of(p, g.spacing(), g.dim());
        let mut c: Lattice = [0; MAX_DIM];
        for i in 0..g.dim() {
            c[i] = k[i] + n[i];
        }
        a.at_lattice(&c) != 0.0
    })
}

fn check_ladder(qs: &[f64], horizon: f64) -> Result<()> {
    if qs.is_empty() {
        return Err(Error::InvalidParameter("empty q ladder".into()));
    }
    for &q in qs {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
        }
        if (-q * horizon).exp() > HORIZON_TOL * (1.0 + 1e-9) {
            return Err(Error::Horizon(format!(
                "e^(-q t_max) = {:.3e} exceeds {HORIZON_TOL:e} for q = {q}, t_max = {horizon}",
                (-q * horizon).exp()
            )));
        }
    }
    Ok(())
}

/// Per q, per path: `q h^d sum_x e^{-q T(x)}` over the grid times `t_0..=t_K`.
fn capacity_paths(scheme: &SimScheme, a: &GridField<f64>, qs: &[f64], horizon: f64, params: &McParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    check_ladder(qs, horizon)?;
    if !a.is_indicator() {
        return Err(Error::InvalidParameter("capacity needs a 0/1 indicator set".into()));
    }
    let g = a.grid();
    let (d, h) = (g.dim(), g.spacing());
    if scheme.dim() != d {
        return Err(Error::LengthMismatch { expected: d, got: scheme.dim() });
    }
    if a.support_len() == 0 {
        return Ok(vec![vec![0.0; params.paths]; qs.len()]);
    }
    let times = TimeGrid::uniform(horizon, params.steps)?;
    let set = [CellSet::from_support(a, false)];
    let sampler = PathSampler::new(scheme, &times, params.seed)?;
    let vol = g.cell_volume();
    let per_path = par_map(params.paths, params.worker_count(), |p| -> Result<Vec<f64>> {
        let path = sampler.path(p as u64);
        // x + n_i in A  <=>  x in A - n_i
        let hits = first_hits(&set, path.iter().map(|x| (0, shift_of(x, h, d))))?;
        let mut counts = vec![0u32; times.times().len()];
        for &i in hits.values() {
            counts[i as usize] += 1;
        }
        Ok(qs
            .iter()
            .map(|&q| {
                let s: f64 = counts.iter().zip(times.times()).map(|(&c, &t)| c as f64 * (-q * t).exp()).sum();
                q * vol * s
            })
            .collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((0..qs.len()).map(|j| per_path.iter().map(|v| v[j]).collect()).collect())
}

fn summarize(q: f64, values: &[f64], horizon: f64, params: &McParams) -> CapacityEstimate {
    let e = mean_se(values);
    CapacityEstimate {
        q,
        value: e.value,
        std_error: e.std_error,
        spatial_truncation_bias_bound: 0.0,
        horizon_bias_bound: (-q * horizon).exp() * e.value,
        time_step: horizon / params.steps as f64,
        paths: params.paths,
    }
}

/// `C^q(A)` with the horizon [`default_horizon`]`(q)` split into `params.steps` steps.
pub fn qcapacity(t: &LevyTriple, a: &GridField<f64>, q: f64, params: &McParams) -> Result<CapacityEstimate> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    Ok(qcapacity_ladder(t, a, &[q], default_horizon(q), params)?.remove(0))
}

/// `C^q(A)` for several `q` on one ensemble over `[0, horizon]`.
pub fn qcapacity_ladder(t: &LevyTriple, a: &GridField<f64>, qs: &[f64], horizon: f64, params: &McParams) -> Result<Vec<CapacityEstimate>> {
    let scheme = params.scheme(t)?;
    let values = capacity_paths(&scheme, a, qs, horizon, params)?;
    Ok(qs.iter().zip(&values).map(|(&q, v)| summarize(q, v, horizon, params)).collect())
}

/// 0-capacity on [`DEFAULT_LADDER`] with the horizon of its smallest `q`.
pub fn zero_capacity(t: &LevyTriple, a: &GridField<f64>, params: &McParams) -> Result<CapacityEstimate> {
    zero_capacity_with(t, a, &DEFAULT_LADDER, default_horizon(DEFAULT_LADDER[4]), params).map(|z| z.limit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCapacity {
    pub limit: CapacityEstimate,
    pub ladder: Vec<CapacityEstimate>,
    /// Root mean square residual of the fit.
    pub residual: f64,
}

/// Least-squares weights `w` with `sum_k w_k C(q_k)` the intercept of a fit
/// of `C(q)` on `{1, sqrt q, q}` (or `{1, q}` for two points).
fn intercept_weights(qs: &[f64]) -> Result<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    let cols = if qs.len() >= 3 { 3 } else { 2 };
    let x = nalgebra::DMatrix::from_fn(qs.len(), cols, |i, j| match (cols, j) {
        (_, 0) => 1.0,
        (3, 1) => qs[i].sqrt(),
        _ => qs[i],
    });
    let xtx = (x.transpose() * &x).try_inverse().ok_or_else(|| Error::InvalidParameter("degenerate q ladder".into()))?;
    let pinv = xtx * x.transpose();
    Ok((pinv.row(0).iter().copied().collect(), x * pinv))
}

/// 0-capacity of a transient process, extrapolated from a q ladder sampled on
/// one ensemble. The standard error combines the sampling error of the
/// intercept (computed path by path) with the fit residual.
pub fn zero_capacity_with(t: &LevyTriple, a: &GridField<f64>, ladder: &[f64], horizon: f64, params: &McParams) -> Result<ZeroCapacity> {
    if !t.is_transient() {
        return Err(Error::InvalidParameter("zero_capacity needs a triple asserted transient".into()));
    }
    if ladder.len() < 2 {
        return Err(Error::InvalidParameter("the q ladder needs at least two values".into()));
    }
    let scheme = params.scheme(t)?;
    let values = capacity_paths(&scheme, a, ladder, horizon, params)?;
    let est: Vec<CapacityEstimate> = ladder.iter().zip(&values).map(|(&q, v)| summarize(q, v, horizon, params)).collect();
    let dt = horizon / params.steps as f64;
    if a.support_len() == 0 {
        return Ok(ZeroCapacity { limit: CapacityEstimate::zero(0.0, dt, params.paths), ladder: est, residual: 0.0 });
    }
    let mut order: Vec<usize> = (0..ladder.len()).collect();
    order.sort_by(|&i, &j| ladder[i].total_cmp(&ladder[j]));
    for w in order.windows(2) {
        let (_, _, diff) = paired(&values[w[1]], &values[w[0]]);
        if diff.value < -3.0 * diff.std_error {
            return Err(Error::NonMonotoneLadder(format!(
                "C^q drops by {:.4} ({:.1} s.e.) from q = {} to q = {}",
                -diff.value,
                -diff.value / diff.std_error,
                ladder[w[0]],
                ladder[w[1]]
            )));
        }
    }
    let (w, hat) = intercept_weights(ladder)?;
    let per_path: Vec<f64> = (0..params.paths).map(|p| w.iter().zip(&values).map(|(wk, v)| wk * v[p]).sum()).collect();
    let intercept = mean_se(&per_path);
    let means = nalgebra::DVector::from_iterator(est.len(), est.iter().map(|e| e.value));
    let fitted = &hat * &means;
    let residual = ((&means - fitted).norm_squared() / est.len() as f64).sqrt();
    let horizon_bias = est.iter().map(|e| e.horizon_bias_bound).fold(0.0, f64::max);
    let limit = CapacityEstimate {
        q: 0.0,
        value: intercept.value.max(0.0),
        std_error: intercept.std_error.hypot(residual),
        spatial_truncation_bias_bound: 0.0,
        horizon_bias_bound: horizon_bias,
        time_step: dt,
        paths: params.paths,
    };
    Ok(ZeroCapacity { limit, ladder: est, residual })
}

/// `A` mirrored through the origin.
fn reflect_set(a: &GridField<f64>) -> GridField<f64> {
    let g = a.grid();
    GridField::new(*g, (0..g.len()).map(|c| a.value(g.reflect(c))).collect(), 0.0).expect("same values")
}

/// `int P_x(T_A < t) dx` with grid-time hitting on `[0, t)`, from the
/// killed mass of hard traps at `-A` with `phi = 1`.
pub fn hitting_mass(t: &LevyTriple, a: &GridField<f64>, horizon: f64, params: &McParams) -> Result<Estimate> {
    Ok(*hitting_mass_profile(t, &reflect_set(a), horizon, params)?.last().expect("at least one step"))
}

/// `C^q = q^2 int_0^inf e^{-qu} M(u) du` with `M(u) = int P_x(T_A < u) dx`
/// read from the hitting-mass profile on the grid of [`default_horizon`]`(q)`.
pub fn bridge_capacity(t: &LevyTriple, a: &GridField<f64>, q: f64, params: &McParams) -> Result<Estimate> {
    let horizon = default_horizon(q);
    let profile = hitting_profile_paths(t, &reflect_set(a), horizon, params)?;
    let times = TimeGrid::uniform(horizon, params.steps)?;
    let e: Vec<f64> = times.times().iter().map(|&s| (-q * s).exp()).collect();
    let k = params.steps;
    // M is constant on (t_i, t_{i+1}] and stays at its last value after t_K
    let w: Vec<f64> = (0..k).map(|i| if i + 1 < k { e[i] - e[i + 1] } else { e[i] }).collect();
    let values: Vec<f64> = profile.iter().map(|m| q * m.iter().zip(&w).map(|(m, w)| m * w).sum::<f64>()).collect();
    Ok(mean_se(&values))
}

/// `C^q(A) - C^q*(A*)` on common random numbers.
pub fn verify_cap(t: &LevyTriple, a: &GridField<f64>, q: f64, params: &McParams) -> Result<ComparisonReport> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    let horizon = default_horizon(q);
    let star_set = rearrange_set(a)?;
    let raw = capacity_paths(&params.scheme(t)?, a, &[q], horizon, params)?.remove(0);
    let star = capacity_paths(&params.scheme(&rearrange_triple(t))?, &star_set, &[q], horizon, params)?.remove(0);
    let (r, s, diff) = paired(&raw, &star);
    let allowance = discretization_allowance(&star_set, horizon / params.steps as f64, q);
    Ok(ComparisonReport::new(r, s, diff.value, diff.std_error, allowance, 3.0).with_seed(params.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn hitting_time_examples() {
        let g = Grid::new(1, 4.0, 80).unwrap();
        let a = GridField::indicator(g, |x| x[0] > 2.0 && x[0] < 3.0);
        let still = vec![[0.0; 3]; 11];
        assert_eq!(hitting_time(&still, &a, &[2.5]), Some(0));
        assert_eq!(hitting_time(&still, &a, &[0.0]), None);
        let drift: Vec<Point> = (0..=40).map(|i| [0.1 * i as f64, 0.0, 0.0]).collect();
        assert_eq!(hitting_time(&drift, &a, &[0.025]), Some(20));
    }

    #[test]
    fn empty_set_and_zero_process() {
        let g = Grid::new(1, 4.0, 80).unwrap();
        let params = McParams::new(4, 50, 3).with_eps(0.0);
        let empty = GridField::zeros(g);
        assert_eq!(qcapacity(&LevyTriple::brownian(1).unwrap(), &empty, 1.0, &params.clone().with_eps(1e-4)).unwrap().value, 0.0);
        // the zero process only hits from inside: C^q = q |A|
        let a = GridField::indicator(g, |x| x[0].abs() < 1.0);
        let c = qcapacity(&LevyTriple::zero(1).unwrap(), &a, 2.0, &params).unwrap();
        assert!((c.value - 4.0).abs() < 1e-12 && c.std_error == 0.0, "{c:?}");
    }

    #[test]
    fn horizon_is_checked() {
        let g = Grid::new(1, 4.0, 80).unwrap();
        let a = GridField::indicator(g, |x| x[0].abs() < 1.0);
        let bm = LevyTriple::brownian(1).unwrap();
        let err = qcapacity_ladder(&bm, &a, &[1.0], 2.0, &McParams::new(4, 10, 1));
        assert!(matches!(err, Err(Error::Horizon(_))));
    }

    #[test]
    fn intercept_is_exact_on_the_basis() {
        let qs = [4.0, 2.0, 1.0, 0.5];
        let (w, _) = intercept_weights(&qs).unwrap();
        let c: f64 = qs.iter().zip(&w).map(|(q, w)| w * (3.0 + 2.0 * q.sqrt() - 0.5 * q)).sum();
        assert!((c - 3.0).abs() < 1e-12);
    }
}
