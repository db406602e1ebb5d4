//! Monte Carlo for the continuum trap model: killed mass, survival
//! probability and Lévy sausage volumes, on the lattice of a grid.
//!
//! One centred path drives every start point at once. A start cell `x` sees
//! the trap cell `-x - round(X/h)`, so the cells killed along a path are the
//! mirrored trap cells swept by `-round(X/h)`. Killing is read at the left
//! ends `t_0, ..., t_{K-1}` of the time steps, matching `s` in `[0, t)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField, Lattice, MAX_DIM};
use crate::lattice::{boundary_faces, first_hits, pack, reflect, shift_of, sub, unpack, CellSet};
use crate::levy::{rearrange_triple, LevyTriple, PathSampler, Point, SimScheme, TimeGrid};
use crate::mc::{mean_se, paired, par_map, McParams};
use crate::rearrange::{increasing_rearrange, rearrange_fn};
use crate::report::{ComparisonReport, Estimate};

/// Trap potential on `[s_{j-1}, s_j)`: a finite soft part and a hard set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSlice {
    pub soft: GridField<f64>,
    pub hard: GridField<f64>,
}

impl TrapSlice {
    pub fn hard(set: GridField<f64>) -> Self {
        Self { soft: GridField::zeros(*set.grid()), hard: set }
    }

    pub fn soft(potential: GridField<f64>) -> Self {
        Self { hard: GridField::zeros(*potential.grid()), soft: potential }
    }

    /// Splits an extended-valued potential into its finite part and `{U = inf}`.
    pub fn from_potential(u: &GridField<f64>) -> Result<Self> {
        let soft = GridField::new(*u.grid(), u.values().iter().map(|&v| if v.is_infinite() { 0.0 } else { v }).collect(), 0.0)?;
        let hard = GridField::new(*u.grid(), u.values().iter().map(|&v| if v.is_infinite() { 1.0 } else { 0.0 }).collect(), 0.0)?;
        Ok(Self { soft, hard })
    }

    /// `soft + inf * 1_hard`.
    pub fn potential(&self) -> GridField<f64> {
        let values = self.soft.values().iter().zip(self.hard.values()).map(|(&s, &h)| if h != 0.0 { f64::INFINITY } else { s }).collect();
        GridField::new(*self.soft.grid(), values, 0.0).expect("same grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapSchedule {
    slice_times: Vec<f64>,
    slices: Vec<TrapSlice>,
}

impl TrapSchedule {
    pub fn new(slice_times: Vec<f64>, slices: Vec<TrapSlice>) -> Result<Self> {
        if slices.is_empty() || slice_times.len() != slices.len() + 1 {
            return Err(Error::TimeGrid(format!("{} slice times for {} slices", slice_times.len(), slices.len())));
        }
        if slice_times[0] != 0.0 || slice_times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::TimeGrid("slice times must increase strictly from 0".into()));
        }
        let grid = *slices[0].soft.grid();
        for s in &slices {
            if s.soft.grid() != &grid || s.hard.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            if s.soft.background() != 0.0 || s.soft.has_hard_part() {
                return Err(Error::InvalidParameter("soft traps must be finite with background 0".into()));
            }
            if !s.hard.is_indicator() {
                return Err(Error::InvalidParameter("hard traps must be 0/1 indicators".into()));
            }
        }
        Ok(Self { slice_times, slices })
    }

    /// One slice on `[0, t)`.
    pub fn constant(t: f64, slice: TrapSlice) -> Result<Self> {
        Self::new(vec![0.0, t], vec![slice])
    }

    pub fn horizon(&self) -> f64 {
        *self.slice_times.last().unwrap()
    }

    pub fn grid(&self) -> &Grid {
        self.slices[0].soft.grid()
    }

    pub fn slice_times(&self) -> &[f64] {
        &self.slice_times
    }

    pub fn slices(&self) -> &[TrapSlice] {
        &self.slices
    }

    /// Slice-wise `U_s*`; the hard set of each slice becomes the centre of the
    /// rearranged potential.
    pub fn rearranged(&self) -> Result<Self> {
        let slices = self
            .slices
            .iter()
            .map(|s| TrapSlice::from_potential(&rearrange_fn(&s.potential())?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.slice_times.clone(), slices)
    }

    /// Slice index in force at each left endpoint `t_0, ..., t_{K'-1}` before the horizon.
    fn slice_per_step(&self, times: &TimeGrid) -> Result<Vec<usize>> {
        for &s in &self.slice_times[1..] {
            if times.index_of(s).is_none() {
                return Err(Error::TimeGrid(format!("slice time {s} is not a grid time")));
            }
        }
        let end = times.index_of(self.horizon()).ok_or_else(|| Error::TimeGrid("ensemble horizon is shorter than t".into()))?;
        let mut out = Vec::with_capacity(end);
        let mut j = 0;
        for &t in &times.times()[..end] {
            while j + 1 < self.slices.len() && times.index_of(self.slice_times[j + 1]).unwrap() <= times.index_of(t).unwrap() {
                j += 1;
            }
            out.push(j);
        }
        Ok(out)
    }
}

/// Killing weight of the start point `x` (snapped to its cell) along one path.
pub fn kill_weight(path: &[Point], times: &TimeGrid, schedule: &TrapSchedule, x: &[f64]) -> Result<f64> {
    let g = schedule.grid();
    let d = g.dim();
    let steps = schedule.slice_per_step(times)?;
    if path.len() < steps.len() {
        return Err(Error::TimeGrid("path shorter than the schedule".into()));
    }
    let start = reflect(&g.lattice_of_point(x), d);
    let mut total = 0.0;
    for (i, &j) in steps.iter().enumerate() {
        let cell = sub(&start, &shift_of(&path[i], g.spacing(), d));
        let s = &schedule.slices[j];
        if s.hard.at_lattice(&cell) != 0.0 {
            return Ok(1.0);
        }
        total += (times.times()[i + 1] - times.times()[i]) * s.soft.at_lattice(&cell);
    }
    Ok(1.0 - (-total).exp())
}

pub fn survival_probability(w: f64) -> f64 {
    (-w).exp()
}

struct Prepared {
    hard: Vec<CellSet>,
    soft: Vec<Vec<(Lattice, f64)>>,
    steps: Vec<usize>,
    dt: Vec<f64>,
    h: f64,
    dim: usize,
}

impl Prepared {
    fn new(schedule: &TrapSchedule, times: &TimeGrid) -> Result<Self> {
        let g = schedule.grid();
        let d = g.dim();
        let steps = schedule.slice_per_step(times)?;
        let hard = schedule.slices.iter().map(|s| CellSet::from_support(&s.hard, true)).collect();
        let soft = schedule
            .slices
            .iter()
            .map(|s| (0..g.len()).filter(|&c| s.soft.value(c) > 0.0).map(|c| (reflect(&g.lattice(c), d), s.soft.value(c))).collect())
            .collect();
        let dt = times.times().windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { hard, soft, steps, dt, h: g.spacing(), dim: d })
    }

    /// Killed cells with their weights `1 - e^{-int U}` (1 for hard hits), and
    /// for hard hits the first step.
    fn weights(&self, path: &[Point]) -> Result<(FxHashMap<u64, f64>, FxHashMap<u64, u32>)> {
        let shifts: Vec<Lattice> = self.steps.iter().enumerate().map(|(i, _)| shift_of(&path[i], self.h, self.dim)).collect();
        let hits = first_hits(&self.hard, self.steps.iter().zip(&shifts).map(|(&j, &s)| (j, s)))?;
        let mut acc: FxHashMap<u64, f64> = FxHashMap::default();
        if self.soft.iter().any(|s| !s.is_empty()) {
            // occupation time of each (slice, shift), in order of first visit
            let mut index: FxHashMap<(usize, Lattice), usize> = FxHashMap::default();
            let mut occupation: Vec<(usize, Lattice, f64)> = Vec::new();
            for (i, (&j, s)) in self.steps.iter().zip(&shifts).enumerate() {
                let k = *index.entry((j, *s)).or_insert_with(|| {
                    occupation.push((j, *s, 0.0));
                    occupation.len() - 1
                });
                occupation[k].2 += self.dt[i];
            }
            for (j, s, tau) in occupation {
                for (a, u) in &self.soft[j] {
                    *acc.entry(pack(&sub(a, &s))?).or_insert(0.0) += tau * u;
                }
            }
        }
        let mut w: FxHashMap<u64, f64> = acc.into_iter().map(|(k, v)| (k, 1.0 - (-v).exp())).collect();
        for k in hits.keys() {
            w.insert(*k, 1.0);
        }
        Ok((w, hits))
    }
}

fn check_phi(phi: &GridField<f64>, grid: &Grid) -> Result<()> {
    if !phi.grid().same_lattice(grid) {
        return Err(Error::GridMismatch);
    }
    if phi.has_hard_part() || !phi.background().is_finite() {
        return Err(Error::InfiniteValue);
    }
    Ok(())
}

/// Per-path killed mass `h^d sum_x phi(x) w(x)`.
fn killed_mass_paths(scheme: &SimScheme, schedule: &TrapSchedule, phi: &GridField<f64>, params: &McParams) -> Result<Vec<f64>> {
    params.validate()?;
    check_phi(phi, schedule.grid())?;
    let times = TimeGrid::uniform(schedule.horizon(), params.steps)?;
    let prep = Prepared::new(schedule, &times)?;
    let sampler = PathSampler::new(scheme, &times, params.seed)?;
    let vol = schedule.grid().cell_volume();
    let results = par_map(params.paths, params.worker_count(), |p| -> Result<f64> {
        let path = sampler.path(p as u64);
        let (w, _) = prep.weights(&path)?;
        let mut keys: Vec<&u64> = w.keys().collect();
        keys.sort_unstable();
        Ok(keys.into_iter().map(|k| phi.at_lattice(&unpack(*k)) * w[k]).sum::<f64>() * vol)
    });
    results.into_iter().collect()
}

/// `W_t = int w_t(x) phi(x) dx` for the process `T` and a trap schedule on `[0, t)`.
pub fn trap_mass(t: &LevyTriple, schedule: &TrapSchedule, phi: &GridField<f64>, params: &McParams) -> Result<Estimate> {
    let scheme = params.scheme(t)?;
    Ok(mean_se(&killed_mass_paths(&scheme, schedule, phi, params)?))
}

/// `int P(the hard traps catch x at a grid time < t_k) dx` for every `k = 1..=K`.
pub fn hitting_mass_profile(t: &LevyTriple, hard: &GridField<f64>, horizon: f64, params: &McParams) -> Result<Vec<Estimate>> {
    let per_path = hitting_profile_paths(t, hard, horizon, params)?;
    Ok((0..params.steps).map(|i| mean_se(&per_path.iter().map(|v| v[i]).collect::<Vec<_>>())).collect())
}

pub(crate) fn hitting_profile_paths(t: &LevyTriple, hard: &GridField<f64>, horizon: f64, params: &McParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let scheme = params.scheme(t)?;
    let schedule = TrapSchedule::constant(horizon, TrapSlice::hard(hard.clone()))?;
    let times = TimeGrid::uniform(horizon, params.steps)?;
    let prep = Prepared::new(&schedule, &times)?;
    let sampler = PathSampler::new(&scheme, &times, params.seed)?;
    let vol = hard.grid().cell_volume();
    let k = params.steps;
    par_map(params.paths, params.worker_count(), |p| -> Result<Vec<f64>> {
        let (_, hits) = prep.weights(&sampler.path(p as u64))?;
        let mut counts = vec![0usize; k];
        for &i in hits.values() {
            counts[i as usize] += 1;
        }
        let mut out = Vec::with_capacity(k);
        let mut c = 0;
        for n in counts {
            c += n;
            out.push(c as f64 * vol);
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

/// Direct simulation of a Poisson field of traps: `N ~ Poisson(int phi)`
/// trap points with density `phi / int phi`, each moving along its own path.
/// Returns the mean of `prod_n (1 - w_n)`, the survival of the particle at 0.
pub fn poisson_field_oracle(
    t: &LevyTriple,
    schedule: &TrapSchedule,
    intensity: &GridField<f64>,
    samples: usize,
    params: &McParams,
) -> Result<Estimate> {
    params.validate()?;
    check_phi(intensity, schedule.grid())?;
    if intensity.background() != 0.0 {
        return Err(Error::Background { background: intensity.background(), required: 0.0 });
    }
    let g = intensity.grid();
    let total: f64 = intensity.values().iter().sum::<f64>() * g.cell_volume();
    let scheme = params.scheme(t)?;
    let times = TimeGrid::uniform(schedule.horizon(), params.steps)?;
    schedule.slice_per_step(&times)?;
    let cells: Vec<usize> = (0..g.len()).filter(|&c| intensity.value(c) > 0.0).collect();
    if cells.is_empty() || total == 0.0 {
        return Ok(Estimate::exact(1.0));
    }
    let pick = WeightedAliasIndex::new(cells.iter().map(|&c| intensity.value(c)).collect()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let count = Poisson::new(total).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    // trap paths use their own seed so they never coincide with trap_mass paths
    let sampler = PathSampler::new(&scheme, &times, params.seed ^ 0x5eed_f1e1_d000_0001)?;
    let values = par_map(samples, params.worker_count(), |s| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(s as u64);
        let n = count.sample(&mut rng) as u64;
        if n >= 1 << 24 {
            return Err(Error::InvalidParameter("too many trap points".into()));
        }
        let mut survive = 1.0;
        for m in 0..n {
            let cell = cells[pick.sample(&mut rng)];
            let path = sampler.path(((s as u64) << 24) | m);
            let x = g.center(cell);
            survive *= 1.0 - kill_weight(&path, &times, schedule, &x[..g.dim()])?;
        }
        Ok(survive)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(mean_se(&values))
}

/// A path-valued drift `g` added to the sausage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathShift {
    Zero,
    Linear { velocity: Vec<f64> },
    /// Values at the grid times `t_0, ..., t_K`.
    Samples { values: Vec<Vec<f64>> },
}

impl PathShift {
    fn at(&self, i: usize, t: f64, dim: usize) -> Result<Point> {
        let mut p = [0.0; MAX_DIM];
        match self {
            PathShift::Zero => {}
            PathShift::Linear { velocity } => {
                if velocity.len() != dim {
                    return Err(Error::LengthMismatch { expected: dim, got: velocity.len() });
                }
                for a in 0..dim {
                    p[a] = velocity[a] * t;
                }
            }
            PathShift::Samples { values } => {
                let v = values.get(i).ok_or_else(|| Error::TimeGrid(format!("no drift sample for step {i}")))?;
                if v.len() != dim {
                    return Err(Error::LengthMismatch { expected: dim, got: v.len() });
                }
                p[..dim].copy_from_slice(v);
            }
        }
        Ok(p)
    }
}

fn sausage_paths(scheme: &SimScheme, d_set: &GridField<f64>, g: &PathShift, horizon: f64, params: &McParams) -> Result<Vec<f64>> {
    params.validate()?;
    if !d_set.is_indicator() {
        return Err(Error::InvalidParameter("sausage set must be a 0/1 indicator".into()));
    }
    let grid = d_set.grid();
    let (d, h) = (grid.dim(), grid.spacing());
    if scheme.dim() != d {
        return Err(Error::LengthMismatch { expected: d, got: scheme.dim() });
    }
    let times = TimeGrid::uniform(horizon, params.steps)?;
    let offsets = (0..params.steps)
        .map(|i| g.at(i, times.times()[i], d).map(|p| shift_of(&p, h, d)))
        .collect::<Result<Vec<_>>>()?;
    let set = [CellSet::from_support(d_set, false)];
    let sampler = PathSampler::new(scheme, &times, params.seed)?;
    let vol = grid.cell_volume();
    par_map(params.paths, params.worker_count(), |p| -> Result<f64> {
        let path = sampler.path(p as u64);
        // D + n_i + g_i is the set swept as D - s with s = -(n_i + g_i)
        let seq = (0..params.steps).map(|i| {
            let n = shift_of(&path[i], h, d);
            let mut s = [0; MAX_DIM];
            for a in 0..d {
                s[a] = -(n[a] + offsets[i][a]);
            }
            (0, s)
        });
        Ok(first_hits(&set, seq)?.len() as f64 * vol)
    })
    .into_iter()
    .collect()
}

/// `E Vol(union_{s in [0,t)} (D + X_s + g(s)))`.
pub fn sausage_volume(t: &LevyTriple, d_set: &GridField<f64>, g: &PathShift, horizon: f64, params: &McParams) -> Result<Estimate> {
    let scheme = params.scheme(t)?;
    Ok(mean_se(&sausage_paths(&scheme, d_set, g, horizon, params)?))
}

/// Allowance for lattice rounding and grid-time monitoring: `scale (h + sqrt(dt))` times the
/// surface of the set.
pub(crate) fn discretization_allowance(set: &GridField<f64>, dt: f64, scale: f64) -> f64 {
    let g = set.grid();
    let h = g.spacing();
    let surface = boundary_faces(set) as f64 * h.powi(g.dim() as i32 - 1);
    scale * (h + dt.sqrt()) * surface
}

/// Trap-model instance: process, schedule and initial density on `[0, t)`.
#[derive(Debug, Clone)]
pub struct TrapInstance {
    pub triple: LevyTriple,
    pub schedule: TrapSchedule,
    pub phi: GridField<f64>,
}

/// `phi_* = sigma - (sigma - phi ^ sigma)*` with `sigma` the background of `phi`.
fn phi_star(phi: &GridField<f64>) -> Result<GridField<f64>> {
    let sigma = phi.background();
    if sigma == 0.0 {
        return Ok(GridField::zeros(*phi.grid()));
    }
    increasing_rearrange(&phi.map_values(|v| v.min(sigma))?, sigma)
}

/// `W(phi, U) - W*(phi_*, U*)`, paired path by path.
pub fn verify_trap(inst: &TrapInstance, params: &McParams) -> Result<ComparisonReport> {
    let raw_scheme = params.scheme(&inst.triple)?;
    let star_scheme = params.scheme(&rearrange_triple(&inst.triple))?;
    let star_sched = inst.schedule.rearranged()?;
    let star_phi = phi_star(&inst.phi)?;
    let raw = killed_mass_paths(&raw_scheme, &inst.schedule, &inst.phi, params)?;
    let star = killed_mass_paths(&star_scheme, &star_sched, &star_phi, params)?;
    let (a, b, diff) = paired(&raw, &star);
    let dt = inst.schedule.horizon() / params.steps as f64;
    let scale = inst.phi.max_value();
    let allowance = star_sched
        .slices()
        .iter()
        .map(|s| {
            let support = s.potential().map_values(|v| if v > 0.0 { 1.0 } else { 0.0 }).expect("finite");
            discretization_allowance(&support, dt, scale)
        })
        .fold(0.0, f64::max);
    Ok(ComparisonReport::new(a, b, diff.value, diff.std_error, allowance, 3.0).with_seed(params.seed))
}

/// Sausage comparison: `(X, D, g)` against `(X*, D*, 0)`.
pub fn verify_sausage(t: &LevyTriple, d_set: &GridField<f64>, g: &PathShift, horizon: f64, params: &McParams) -> Result<ComparisonReport> {
    let star_set = crate::rearrange::rearrange_set(d_set)?;
    let raw = sausage_paths(&params.scheme(t)?, d_set, g, horizon, params)?;
    let star = sausage_paths(&params.scheme(&rearrange_triple(t))?, &star_set, &PathShift::Zero, horizon, params)?;
    let (a, b, diff) = paired(&raw, &star);
    let allowance = discretization_allowance(&star_set, horizon / params.steps as f64, 1.0);
    Ok(ComparisonReport::new(a, b, diff.value, diff.std_error, allowance, 3.0).with_seed(params.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(grid: Grid, lo: f64, hi: f64) -> GridField<f64> {
        GridField::indicator(grid, |x| x[0] > lo && x[0] < hi)
    }

    #[test]
    fn kill_weight_examples() {
        let grid = Grid::new(1, 4.0, 80).unwrap();
        let times = TimeGrid::uniform(2.0, 20).unwrap();
        let still = vec![[0.0; 3]; 21];
        let none = TrapSchedule::constant(2.0, TrapSlice::soft(GridField::zeros(grid))).unwrap();
        assert_eq!(kill_weight(&still, &times, &none, &[0.3]).unwrap(), 0.0);
        let all = TrapSchedule::constant(2.0, TrapSlice::hard(GridField::indicator(grid, |_| true))).unwrap();
        assert_eq!(kill_weight(&still, &times, &all, &[0.3]).unwrap(), 1.0);
        let lambda = 0.7;
        let soft = interval(grid, -1.0, 1.0).scale(lambda).unwrap();
        let s = TrapSchedule::constant(2.0, TrapSlice::soft(soft)).unwrap();
        let w = kill_weight(&still, &times, &s, &[0.0]).unwrap();
        assert!((w - (1.0 - (-lambda * 2.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn zero_process_kills_exactly_the_trap() {
        let grid = Grid::new(1, 3.0, 60).unwrap();
        let d = interval(grid, -0.5, 1.2);
        let sched = TrapSchedule::constant(1.0, TrapSlice::hard(d.clone())).unwrap();
        let phi = GridField::constant(grid, 1.0, 1.0).unwrap();
        let params = McParams::new(4, 10, 1).with_eps(0.0);
        let w = trap_mass(&LevyTriple::zero(1).unwrap(), &sched, &phi, &params).unwrap();
        assert!((w.value - 1.7).abs() < 1e-12 && w.std_error == 0.0, "{w:?}");
        let none = TrapSchedule::constant(1.0, TrapSlice::soft(GridField::zeros(grid))).unwrap();
        let w = trap_mass(&LevyTriple::brownian(1).unwrap(), &none, &phi, &params).unwrap();
        assert_eq!(w, Estimate::exact(0.0));
    }

    #[test]
    fn sausage_examples() {
        let grid = Grid::new(1, 4.0, 160).unwrap();
        let d = interval(grid, -1.0, 1.0);
        let zero = LevyTriple::zero(1).unwrap();
        let params = McParams::new(3, 100, 5).with_eps(0.0);
        let v = sausage_volume(&zero, &d, &PathShift::Linear { velocity: vec![1.0] }, 1.0, &params).unwrap();
        assert!((v.value - 3.0).abs() < 1e-12, "{v:?}");
        let one = McParams::new(3, 1, 5);
        let v = sausage_volume(&LevyTriple::brownian(1).unwrap(), &d, &PathShift::Zero, 1e-3, &one).unwrap();
        assert!((v.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rearranged_schedule_puts_hard_cells_in_the_middle() {
        let grid = Grid::new(1, 2.0, 8).unwrap();
        let soft = GridField::new(grid, vec![0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 0.0], 0.0).unwrap();
        let hard = GridField::new(grid, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        let s = TrapSchedule::constant(1.0, TrapSlice { soft, hard }).unwrap().rearranged().unwrap();
        let sl = &s.slices()[0];
        assert_eq!(sl.hard.values(), &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sl.soft.values(), &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
    }
}
