//! Discrete-time killed mass `W_n(phi, V, p)` of a random walk started
//! from the measure `phi(x) dx`, killed at step `i` with probability
//! `V_i(X_i)`.
//!
//! The state of the recursion is always the deficit `1 - phi_k`, which has
//! compact support, so every integral stays finite:
//!
//! ```text
//! D_0 = V_0 + psi - V_0 psi
//! D_k = V_k + C - V_k C,   C = p_k * D_{k-1}
//! W_n = int D_n - int psi
//! ```

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{convolve, integrate, Grid, GridField, MAX_DIM};
use crate::rearrange::{increasing_rearrange, rearrange_fn};
use crate::report::ComparisonReport;
use crate::scalar::Scalar;

/// Initial measure `phi` (background `sigma`), traps `V_0..V_n` and kernels `p_1..p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance<T> {
    phi: GridField<T>,
    traps: Vec<GridField<T>>,
    kernels: Vec<GridField<T>>,
    sigma: T,
}

fn normalization_tol<T: Scalar>() -> f64 {
    if T::loose_eps().as_f64() > 1e-8 {
        1e-5
    } else {
        1e-10
    }
}

impl<T: Scalar> DiscreteInstance<T> {
    pub fn new(phi: GridField<T>, traps: Vec<GridField<T>>, kernels: Vec<GridField<T>>, sigma: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
        }
        if traps.len() != kernels.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} traps need {} kernels, got {}",
                traps.len(),
                traps.len().saturating_sub(1),
                kernels.len()
            )));
        }
        if phi.background() != sigma {
            return Err(Error::Background { background: phi.background().as_f64(), required: sigma.as_f64() });
        }
        if let Some((cell, &v)) = phi.values().iter().enumerate().find(|(_, &v)| v > sigma) {
            return Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "phi exceeds sigma" });
        }
        for v in &traps {
            v.require_same_grid(&phi)?;
            if v.background() != T::zero() {
                return Err(Error::Background { background: v.background().as_f64(), required: 0.0 });
            }
            if let Some((cell, &x)) = v.values().iter().enumerate().find(|(_, &x)| x > T::one()) {
                return Err(Error::InvalidValue { cell, value: x.as_f64(), reason: "trap value above 1" });
            }
        }
        for p in &kernels {
            p.require_same_grid(&phi)?;
            let mass = integrate(p)?.as_f64();
            if (mass - 1.0).abs() > normalization_tol::<T>() {
                return Err(Error::NotNormalized(mass));
            }
        }
        Ok(Self { phi, traps, kernels, sigma })
    }

    pub fn phi(&self) -> &GridField<T> {
        &self.phi
    }

    pub fn traps(&self) -> &[GridField<T>] {
        &self.traps
    }

    pub fn kernels(&self) -> &[GridField<T>] {
        &self.kernels
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.kernels.len()
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    /// `psi = 1 - phi / sigma` as a background-0 field.
    pub fn psi(&self) -> GridField<T> {
        let values = self.phi.values().iter().map(|&v| T::one() - v / self.sigma).collect();
        GridField::new(*self.grid(), values, T::zero()).expect("phi <= sigma gives psi in [0, 1]")
    }

    /// Replaces `phi`, keeping traps and kernels.
    pub fn with_phi(&self, phi: GridField<T>) -> Result<Self> {
        Self::new(phi, self.traps.clone(), self.kernels.clone(), self.sigma)
    }

    /// Every slot rearranged: `phi_*`, `V_i*` and `p_j*` renormalized to unit mass.
    pub fn rearranged(&self) -> Result<Self> {
        let phi = increasing_rearrange(&self.phi, self.sigma)?;
        let traps = self.traps.iter().map(rearrange_fn).collect::<Result<Vec<_>>>()?;
        let kernels = self
            .kernels
            .iter()
            .map(|p| rearrange_fn(p)?.normalized())
            .collect::<Result<Vec<_>>>()?;
        Self::new(phi, traps, kernels, self.sigma)
    }

    /// Loose upper bound on `W_n`, used to scale tolerances: `int (sigma - phi) + sigma sum int V_i`.
    pub fn scale(&self) -> f64 {
        let sigma = self.sigma.as_f64();
        let psi = integrate(&self.psi()).map(|x| x.as_f64()).unwrap_or(0.0);
        let traps: f64 = self.traps.iter().map(|v| integrate(v).map(|x| x.as_f64()).unwrap_or(0.0)).sum();
        sigma * (psi + traps)
    }
}

/// `1 - (1 - a)(1 - b)` cell by cell.
fn union_deficit<T: Scalar>(a: &GridField<T>, b: &GridField<T>) -> GridField<T> {
    let values = a.values().iter().zip(b.values()).map(|(&x, &y)| x + y - x * y).collect();
    GridField::new(*a.grid(), values, T::zero()).expect("deficits stay in [0, 1]")
}

/// Deficit `1 - phi_upto` of the survival density (background 0).
fn deficit_upto<T: Scalar>(inst: &DiscreteInstance<T>, upto: usize) -> Result<GridField<T>> {
    let mut d = union_deficit(&inst.traps[0], &inst.psi());
    for k in 1..=upto {
        let c = convolve(&inst.kernels[k - 1], &d)?;
        // rounding in the convolution may push a value a hair above 1
        let c = c.map_values(|v| v.min(T::one()))?;
        d = union_deficit(&inst.traps[k], &c);
    }
    Ok(d)
}

/// Survival density `phi_upto` (background 1) for an instance with `sigma = 1`.
pub fn survival_density<T: Scalar>(inst: &DiscreteInstance<T>, upto: usize) -> Result<GridField<T>> {
    if inst.sigma != T::one() {
        return Err(Error::InvalidParameter("survival_density needs sigma = 1; scale phi first".into()));
    }
    if upto > inst.steps() {
        return Err(Error::InvalidParameter(format!("upto {upto} exceeds n = {}", inst.steps())));
    }
    deficit_upto(inst, upto)?.complement_to(T::one())
}

/// `W_n` by the deficit recursion; `W` is linear in `phi`, so general `sigma` is scaled out.
pub fn wn_eval<T: Scalar>(inst: &DiscreteInstance<T>) -> Result<T> {
    let d = deficit_upto(inst, inst.steps())?;
    Ok(inst.sigma * (integrate(&d)? - integrate(&inst.psi())?))
}

/// Vertex kernel `K(delta) = 2^-d sum_{e in {0,1}^d} p[delta + e - 1]` over lattice
/// differences `delta in [-(m-1), m-1]^d`, indexed with offset `m - 1`.
fn vertex_kernel<T: Scalar>(p: &GridField<T>) -> Vec<T> {
    let g = p.grid();
    let d = g.dim();
    let m = g.points() as i64;
    let side = (2 * m - 1) as usize;
    let corners = 1usize << d;
    let w = T::one() / T::lit(corners as f64);
    let mut out = vec![T::zero(); side.pow(d as u32)];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut delta = [0i64; MAX_DIM];
        let mut rem = idx;
        for a in (0..d).rev() {
            delta[a] = (rem % side) as i64 - (m - 1);
            rem /= side;
        }
        let mut acc = T::zero();
        for corner in 0..corners {
            let mut k = [0i64; MAX_DIM];
            for a in 0..d {
                k[a] = delta[a] + ((corner >> a) & 1) as i64 - 1;
            }
            acc = acc + p.at_lattice(&k);
        }
        *slot = acc * w;
    }
    out
}

/// Independent oracle: the `psi`-split multiple integral summed literally over
/// all `(n+1)`-tuples of cells. Agrees with [`wn_eval`] when every support plus
/// `n` kernel reaches stays inside the box.
pub fn brute_wn<T: Scalar>(inst: &DiscreteInstance<T>) -> Result<f64> {
    let g = *inst.grid();
    let n = inst.steps();
    let cells = g.len();
    if n > 2 || cells > 4096 {
        return Err(Error::InstanceTooLarge(format!("n = {n}, {cells} cells (limits n <= 2, 4096 cells)")));
    }
    let work = (cells as f64).powi(n as i32 + 1);
    if work > 1e8 {
        return Err(Error::InstanceTooLarge(format!("{work:e} tuples")));
    }
    let d = g.dim();
    let m = g.points() as i64;
    let side = (2 * m - 1) as usize;
    let kernels: Vec<Vec<f64>> =
        inst.kernels.iter().map(|p| vertex_kernel(p).into_iter().map(|x| x.as_f64()).collect()).collect();
    let lattice: Vec<[i64; MAX_DIM]> = (0..cells).map(|c| g.lattice(c)).collect();
    let kernel_index = |a: usize, b: usize| -> usize {
        (0..d).fold(0, |acc, ax| acc * side + (lattice[b][ax] - lattice[a][ax] + m - 1) as usize)
    };
    let psi: Vec<f64> = inst.psi().values().iter().map(|x| x.as_f64()).collect();
    let traps: Vec<Vec<f64>> = inst.traps.iter().map(|v| v.values().iter().map(|x| x.as_f64()).collect()).collect();
    let vol = g.cell_volume();

    // sum over x_1..x_n of (1 - survive * prod (1 - V_i)) * prod K, for fixed x_0
    fn tail(
        step: usize,
        prev: usize,
        survive: f64,
        weight: f64,
        traps: &[Vec<f64>],
        kernels: &[Vec<f64>],
        kernel_index: &dyn Fn(usize, usize) -> usize,
        cells: usize,
    ) -> f64 {
        if step == traps.len() {
            return (1.0 - survive) * weight;
        }
        let mut acc = 0.0;
        for x in 0..cells {
            let k = kernels[step - 1][kernel_index(prev, x)];
            if k == 0.0 {
                continue;
            }
            acc += tail(step + 1, x, survive * (1.0 - traps[step][x]), weight * k, traps, kernels, kernel_index, cells);
        }
        acc
    }

    let mut total = 0.0;
    for x0 in 0..cells {
        let survive = (1.0 - psi[x0]) * (1.0 - traps[0][x0]);
        total += tail(1, x0, survive, 1.0, &traps, &kernels, &kernel_index, cells);
    }
    // every kernel step carries a factor h^d, as does x_0
    let integral = total * vol.powi(n as i32 + 1);
    let psi_mass: f64 = psi.iter().sum::<f64>() * vol;
    Ok(inst.sigma.as_f64() * (integral - psi_mass))
}

/// Default multiple of `h * scale` tolerated as discretization error.
pub const DEFAULT_TOL_FACTOR: f64 = 10.0;

/// `W_n(raw) - W_n(other)` with allowance `c h scale`.
pub fn compare_instances<T: Scalar>(
    raw: &DiscreteInstance<T>,
    other: &DiscreteInstance<T>,
    tol_factor: f64,
) -> Result<ComparisonReport> {
    let lhs = wn_eval(raw)?.as_f64();
    let rhs = wn_eval(other)?.as_f64();
    let tol = tol_factor * raw.grid().spacing() * raw.scale();
    Ok(ComparisonReport::deterministic(lhs, rhs, lhs - rhs, tol))
}

/// `W_n(phi, V, p) >= W_n(phi_*, V*, p*)`.
pub fn verify_ri<T: Scalar>(inst: &DiscreteInstance<T>) -> Result<ComparisonReport> {
    verify_ri_with(inst, DEFAULT_TOL_FACTOR)
}

pub fn verify_ri_with<T: Scalar>(inst: &DiscreteInstance<T>, tol_factor: f64) -> Result<ComparisonReport> {
    compare_instances(inst, &inst.rearranged()?, tol_factor)
}

/// Probability that a walk started from `phi_prob` stays in `A_i` at every step.
pub fn stay_probability<T: Scalar>(phi_prob: &GridField<T>, sets: &[GridField<T>], kernels: &[GridField<T>]) -> Result<T> {
    if sets.len() != kernels.len() + 1 {
        return Err(Error::InvalidParameter("need one more set than kernels".into()));
    }
    let mut u = crate::grid::combine(phi_prob, &sets[0], crate::grid::BinaryOp::Product)?;
    for (a, p) in sets[1..].iter().zip(kernels) {
        let moved = convolve(p, &u)?;
        u = crate::grid::combine(&moved, a, crate::grid::BinaryOp::Product)?;
    }
    integrate(&u)
}

/// Uniform probability density on the cells of an indicator.
pub fn uniform_on<T: Scalar>(set: &GridField<T>) -> Result<GridField<T>> {
    if set.support_len() == 0 {
        return Err(Error::InvalidParameter("empty set".into()));
    }
    set.normalized()
}

/// Stay-inside probability: rearranged sets and kernels can only increase it.
/// `margin = rearranged - raw`.
pub fn verify_bll<T: Scalar>(
    phi_prob: &GridField<T>,
    sets: &[GridField<T>],
    kernels: &[GridField<T>],
) -> Result<ComparisonReport> {
    let first = sets.first().ok_or_else(|| Error::InvalidParameter("no sets".into()))?;
    if first.support_len() == 0 {
        return Err(Error::InvalidParameter("A_0 is empty".into()));
    }
    for a in sets {
        if !a.is_indicator() {
            return Err(Error::InvalidParameter("sets must be indicators".into()));
        }
    }
    let mass = integrate(phi_prob)?.as_f64();
    if (mass - 1.0).abs() > normalization_tol::<T>() {
        return Err(Error::NotNormalized(mass));
    }
    for p in kernels {
        let mass = integrate(p)?.as_f64();
        if (mass - 1.0).abs() > normalization_tol::<T>() {
            return Err(Error::NotNormalized(mass));
        }
    }
    let raw = stay_probability(phi_prob, sets, kernels)?.as_f64();
    let phi_star = rearrange_fn(phi_prob)?;
    let sets_star = sets.iter().map(rearrange_fn).collect::<Result<Vec<_>>>()?;
    let kernels_star = kernels.iter().map(|p| rearrange_fn(p)?.normalized()).collect::<Result<Vec<_>>>()?;
    let rearranged = stay_probability(&phi_star, &sets_star, &kernels_star)?.as_f64();
    let tol = DEFAULT_TOL_FACTOR * phi_prob.grid().spacing();
    Ok(ComparisonReport::deterministic(raw, rearranged, rearranged - raw, tol))
}

/// Shape of random instances: all trap and deficit supports lie in
/// `[-support, support]^d` and kernels in `[-kernel_support, kernel_support]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceShape {
    pub steps: usize,
    pub sigma: f64,
    pub support: f64,
    pub kernel_support: f64,
    /// Probability that a cell inside a [`random_blob`] is left empty.
    pub sparsity: f64,
    /// Probability that a trap cell is hard (value exactly 1).
    pub hard_fraction: f64,
}

impl InstanceShape {
    /// Supports sized so that `support + steps * kernel_support` stays a cell inside the box.
    pub fn fitting(grid: &Grid, steps: usize) -> Self {
        let reach = grid.half_extent() - 2.0 * grid.spacing();
        let unit = reach / (2.0 + steps as f64);
        Self {
            steps,
            sigma: 1.0,
            support: 2.0 * unit,
            kernel_support: unit,
            sparsity: 0.3,
            hard_fraction: 0.1,
        }
    }
}

/// Random nonnegative field supported on a random sub-box of `[-radius, radius]^d`.
pub fn random_blob<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Grid,
    radius: f64,
    sparsity: f64,
    mut value: impl FnMut(&mut R) -> f64,
) -> GridField<f64> {
    let d = grid.dim();
    let mut lo = [0.0; MAX_DIM];
    let mut hi = [0.0; MAX_DIM];
    for a in 0..d {
        let c = rng.random_range(-0.5..=0.5) * radius;
        let w = rng.random_range(0.15..=0.5) * radius;
        lo[a] = c - w;
        hi[a] = c + w;
    }
    let mut values = vec![0.0; grid.len()];
    let mut nearest = None;
    let mut nearest_dist = f64::INFINITY;
    for (cell, slot) in values.iter_mut().enumerate() {
        let x = grid.center(cell);
        let inside = (0..d).all(|a| x[a] > lo[a] && x[a] < hi[a]);
        let mid: f64 = (0..d).map(|a| (x[a] - 0.5 * (lo[a] + hi[a])).powi(2)).sum();
        if mid < nearest_dist && (0..d).all(|a| x[a].abs() < radius) {
            nearest_dist = mid;
            nearest = Some(cell);
        }
        if inside && rng.random::<f64>() >= sparsity {
            *slot = value(rng);
        }
    }
    if values.iter().all(|&v| v == 0.0) {
        if let Some(c) = nearest {
            values[c] = 1.0;
        }
    }
    GridField::new(*grid, values, 0.0).expect("blob values are nonnegative")
}

/// Axis-aligned box with a height; a building block of random fields that
/// can be resampled on finer grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBox {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
    pub height: f64,
}

/// Sum of boxes, clipped at `cap`, defined on all of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxField {
    pub dim: usize,
    pub boxes: Vec<WeightedBox>,
    pub cap: f64,
}

impl BoxField {
    /// One to three random boxes inside `[-radius, radius]^d`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64, cap: f64, hard_fraction: f64) -> Self {
        let count = rng.random_range(1..=3);
        let boxes = (0..count)
            .map(|_| {
                let mut lo = [0.0; MAX_DIM];
                let mut hi = [0.0; MAX_DIM];
                for a in 0..dim {
                    let c = rng.random_range(-0.5..=0.5) * radius;
                    let w = rng.random_range(0.1..=0.5) * radius;
                    lo[a] = c - w;
                    hi[a] = c + w;
                }
                let height = if rng.random::<f64>() < hard_fraction { cap } else { rng.random_range(0.2..=1.0) * cap };
                WeightedBox { lo, hi, height }
            })
            .collect();
        Self { dim, boxes, cap }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .boxes
            .iter()
            .filter(|b| (0..self.dim).all(|a| x[a] > b.lo[a] && x[a] < b.hi[a]))
            .map(|b| b.height)
            .sum();
        s.min(self.cap)
    }

    pub fn sample(&self, grid: &Grid) -> GridField<f64> {
        GridField::from_fn(*grid, 0.0, |x| self.eval(x)).expect("box sums are nonnegative")
    }
}

/// Grid-independent random instance; [`RandomInstance::realize`] samples it on any grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub sigma: f64,
    pub psi: BoxField,
    pub traps: Vec<BoxField>,
    pub kernels: Vec<BoxField>,
}

impl RandomInstance {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, dim: usize, shape: &InstanceShape) -> Self {
        Self {
            sigma: shape.sigma,
            psi: BoxField::random(rng, dim, shape.support, 1.0, 0.0),
            traps: (0..=shape.steps)
                .map(|_| BoxField::random(rng, dim, shape.support, 1.0, shape.hard_fraction))
                .collect(),
            kernels: (0..shape.steps).map(|_| BoxField::random(rng, dim, shape.kernel_support, 1.0, 0.0)).collect(),
        }
    }

    pub fn realize(&self, grid: &Grid) -> Result<DiscreteInstance<f64>> {
        let psi = self.psi.sample(grid);
        let phi = GridField::new(
            *grid,
            psi.values().iter().map(|&p| self.sigma * (1.0 - p)).collect(),
            self.sigma,
        )?;
        let traps = self.traps.iter().map(|v| v.sample(grid)).collect();
        let kernels = self
            .kernels
            .iter()
            .map(|p| {
                let f = p.sample(grid);
                if f.support_len() == 0 {
                    // narrower than a cell at this resolution: fall back to the cell holding its centre
                    let b = p.boxes[0];
                    let mut c = [0.0; MAX_DIM];
                    for a in 0..grid.dim() {
                        c[a] = 0.5 * (b.lo[a] + b.hi[a]);
                    }
                    let cell = grid.nearest_cell(&c[..grid.dim()]).expect("kernel centre inside box");
                    let mut v = vec![0.0; grid.len()];
                    v[cell] = 1.0;
                    GridField::new(*grid, v, 0.0)?.normalized()
                } else {
                    f.normalized()
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteInstance::new(phi, traps, kernels, self.sigma)
    }
}

/// Random instance with asymmetric, off-centre slots, sampled on `grid`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, grid: &Grid, shape: &InstanceShape) -> Result<DiscreteInstance<f64>> {
    RandomInstance::draw(rng, grid.dim(), shape).realize(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1(l: f64, m: usize) -> Grid {
        Grid::new(1, l, m).unwrap()
    }

    fn interval(g: Grid, a: f64, b: f64) -> GridField<f64> {
        GridField::indicator(g, move |x| x[0] > a && x[0] < b)
    }

    fn ones(g: Grid) -> GridField<f64> {
        GridField::constant(g, 1.0, 1.0).unwrap()
    }

    #[test]
    fn survival_density_examples() {
        let g = g1(4.0, 32);
        let phi = GridField::from_fn(g, 1.0, |x| if x[0].abs() < 1.0 { 0.5 } else { 1.0 }).unwrap();
        let inst = DiscreteInstance::new(phi.clone(), vec![GridField::zeros(g)], vec![], 1.0).unwrap();
        assert_eq!(survival_density(&inst, 0).unwrap(), phi);

        let trap = interval(g, -1.0, 1.0);
        let inst = DiscreteInstance::new(ones(g), vec![trap.clone()], vec![], 1.0).unwrap();
        assert_eq!(survival_density(&inst, 0).unwrap(), trap.complement_to(1.0).unwrap());

        let p = interval(g, -1.0, 1.0).normalized().unwrap();
        let inst = DiscreteInstance::new(ones(g), vec![trap.clone(), trap.clone()], vec![p], 1.0).unwrap();
        let s1 = survival_density(&inst, 1).unwrap();
        assert_eq!(s1.value_at(&[0.0]), 0.0);
        assert!(s1.value_at(&[1.2]) > 0.0 && s1.value_at(&[1.2]) < 1.0);
        assert!(survival_density(&inst, 2).is_err());
    }

    #[test]
    fn wn_examples() {
        let g = g1(4.0, 32);
        let trap = interval(g, -1.0, 1.0);
        let inst = DiscreteInstance::new(ones(g), vec![trap], vec![], 1.0).unwrap();
        assert_eq!(wn_eval(&inst).unwrap(), 2.0);

        let v = GridField::from_fn(g, 0.0, |x| if x[0] > 0.3 && x[0] < 2.0 { 0.25 + 0.1 * x[0] } else { 0.0 }).unwrap();
        let inst = DiscreteInstance::new(ones(g), vec![v.clone()], vec![], 1.0).unwrap();
        let w = wn_eval(&inst).unwrap();
        assert!((w - integrate(&v).unwrap()).abs() < 1e-14);
        let rep = verify_ri(&inst).unwrap();
        assert!(rep.margin.abs() < 1e-14);
    }

    #[test]
    fn unnormalized_kernel_is_rejected() {
        let g = g1(4.0, 32);
        let p = interval(g, -1.0, 1.0);
        let err = DiscreteInstance::new(ones(g), vec![GridField::zeros(g); 2], vec![p], 1.0);
        assert!(matches!(err, Err(Error::NotNormalized(_))));
    }

    #[test]
    fn n0_brute_force_matches() {
        let g = g1(4.0, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = InstanceShape { steps: 0, ..InstanceShape::fitting(&g, 0) };
        let inst = random_instance(&mut rng, &g, &shape).unwrap();
        let direct: f64 = inst
            .phi()
            .values()
            .iter()
            .zip(inst.traps()[0].values())
            .map(|(p, v)| p * v)
            .sum::<f64>()
            * g.cell_volume();
        assert!((brute_wn(&inst).unwrap() - direct).abs() < 1e-13);
        assert!((wn_eval(&inst).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn recursion_matches_brute_force_in_2d() {
        let g = Grid::new(2, 4.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shape = InstanceShape::fitting(&g, 1);
        let inst = random_instance(&mut rng, &g, &shape).unwrap();
        let a = wn_eval(&inst).unwrap();
        let b = brute_wn(&inst).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn general_sigma_scales() {
        let g = g1(4.0, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = InstanceShape::fitting(&g, 2);
        let inst = random_instance(&mut rng, &g, &shape).unwrap();
        let scaled = DiscreteInstance::new(
            inst.phi().map_values(|v| 2.5 * v).unwrap().with_background(2.5).unwrap(),
            inst.traps().to_vec(),
            inst.kernels().to_vec(),
            2.5,
        )
        .unwrap();
        let a = wn_eval(&inst).unwrap();
        let b = wn_eval(&scaled).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
        assert!((brute_wn(&scaled).unwrap() - b).abs() < 1e-10 * b);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let g = g1(4.0, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = InstanceShape::fitting(&g, 3);
        let inst = random_instance(&mut rng, &g, &shape).unwrap();
        assert!(matches!(brute_wn(&inst), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn symmetric_instance_is_a_fixed_point() {
        let g = g1(4.0, 64);
        let phi = GridField::from_fn(g, 1.0, |x| 1.0 - 0.5 * (-(x[0] * x[0])).exp()).unwrap();
        let v = interval(g, -0.5, 0.5);
        let p = GridField::from_fn(g, 0.0, |x| (-(2.0 * x[0] * x[0])).exp()).unwrap().normalized().unwrap();
        let inst = DiscreteInstance::new(phi, vec![v.clone(), v.clone(), v], vec![p.clone(), p], 1.0).unwrap();
        let rep = verify_ri(&inst).unwrap();
        assert!(rep.margin.abs() <= 1e-12, "{}", rep.margin);
    }

    #[test]
    fn bll_examples() {
        let g = g1(4.0, 64);
        let ball = interval(g, -1.0, 1.0);
        let p = interval(g, -0.5, 0.5).normalized().unwrap();
        let u = uniform_on(&ball).unwrap();
        let rep = verify_bll(&u, &[ball.clone(), ball.clone()], &[p.clone()]).unwrap();
        assert!(rep.margin.abs() < 1e-14 && rep.holds);

        let a0 = interval(g, 0.5, 1.5);
        let a1 = interval(g, -1.0, 0.75);
        let a2 = interval(g, 0.0, 1.0);
        let rep = verify_bll(&uniform_on(&a0).unwrap(), &[a0, a1, a2], &[p.clone(), p.clone()]).unwrap();
        assert!(rep.holds && rep.margin > 0.0);

        let whole = GridField::constant(g, 1.0, 0.0).unwrap();
        let rep = verify_bll(&u, &[ball.clone(), whole.clone()], &[p.clone()]).unwrap();
        assert!((rep.raw.value - 1.0).abs() < 1e-12 && rep.margin.abs() < 1e-12);

        let empty = GridField::zeros(g);
        assert!(verify_bll(&u, &[empty, ball], &[p]).is_err());
    }
}
