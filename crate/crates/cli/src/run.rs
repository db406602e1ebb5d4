//! Executes a validated experiment and renders its report.

use std::path::{Path, PathBuf};

use levysym::capacity::{default_horizon, qcapacity, verify_cap, zero_capacity_with, CapacityEstimate, DEFAULT_LADDER};
use levysym::grid::integrate;
use levysym::levy::LevyTriple;
use levysym::mc::{par_map, McParams};
use levysym::rearrange::{increasing_rearrange, rearrange_set};
use levysym::report::{ComparisonReport, Estimate};
use levysym::trap_continuum::{sausage_volume, survival_probability, verify_sausage, verify_trap, PathShift, TrapInstance};
use levysym::trap_discrete::{random_blob, verify_bll, verify_ri_with, wn_eval, DiscreteInstance, InstanceShape, RandomInstance};
use levysym::{Grid, GridField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::spec::{CapacityInputs, ExperimentSpec, Expected, Inputs, Kind, RandomInputs, SchemaError};

/// One CSV line. Columns are fixed in this order for every kind; cells that
/// do not apply to a kind are left empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub index: usize,
    pub label: String,
    pub seed: Option<u64>,
    pub raw: f64,
    pub raw_se: f64,
    pub rearranged: Option<f64>,
    pub rearranged_se: Option<f64>,
    pub reference: Option<f64>,
    pub margin: Option<f64>,
    pub margin_se: Option<f64>,
    pub allowance: Option<f64>,
    pub holds: bool,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "index",
    "label",
    "seed",
    "raw",
    "raw_se",
    "rearranged",
    "rearranged_se",
    "reference",
    "margin",
    "margin_se",
    "allowance",
    "holds",
];

impl Row {
    fn value(label: impl Into<String>, value: Estimate) -> Self {
        Self {
            index: 0,
            label: label.into(),
            seed: None,
            raw: value.value,
            raw_se: value.std_error,
            rearranged: None,
            rearranged_se: None,
            reference: None,
            margin: None,
            margin_se: None,
            allowance: None,
            holds: true,
        }
    }

    fn exact(label: impl Into<String>, value: f64, reference: f64, holds: bool) -> Self {
        Self { reference: Some(reference), holds, ..Self::value(label, Estimate::exact(value)) }
    }

    fn comparison(label: impl Into<String>, rep: &ComparisonReport) -> Self {
        Self {
            seed: rep.seed,
            rearranged: Some(rep.rearranged.value),
            rearranged_se: Some(rep.rearranged.std_error),
            margin: Some(rep.margin),
            margin_se: Some(rep.margin_se),
            allowance: Some(rep.allowance),
            holds: rep.holds,
            ..Self::value(label, rep.raw)
        }
    }

    fn capacity(label: impl Into<String>, c: &CapacityEstimate, expected: Option<&Expected>) -> Self {
        let mut row = Self::value(label, c.estimate());
        if let Some(e) = expected {
            let diff = (c.value - e.value).abs();
            row.reference = Some(e.value);
            row.holds = diff <= e.rel * e.value.abs() && diff <= e.z * c.std_error;
        }
        row
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentSpec,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub holds: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        let stem = &self.config.output.stem;
        write_pair(dir, stem, &self.to_json(), &self.to_csv())
    }
}

pub(crate) fn rows_to_csv<S: Serialize>(rows: &[S]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub(crate) fn write_pair(dir: &Path, stem: &str, json: &str, csv: &str) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let j = dir.join(format!("{stem}.json"));
    let c = dir.join(format!("{stem}.csv"));
    std::fs::write(&j, json)?;
    std::fs::write(&c, csv)?;
    Ok((j, c))
}

/// Runs `spec` on `workers` threads. Library failures after validation are
/// recorded in the report (which then does not hold) rather than returned.
pub fn run(spec: &ExperimentSpec, workers: usize) -> Result<Report, SchemaError> {
    let result = match &spec.inputs {
        Inputs::Selftest(_) => selftest(),
        Inputs::Random(r) if spec.kind == Kind::RiVerify => ri_verify(spec, r, workers),
        Inputs::Random(r) => bll_verify(spec, r, workers),
        Inputs::Trap(t) => {
            let inst = TrapInstance { triple: spec.triple(&t.triple)?, schedule: spec.schedule(&t.schedule)?, phi: spec.field(&t.phi)? };
            let params = spec.mc_params(workers)?;
            verify_trap(&inst, &params).map(|r| vec![Row::comparison("trap", &r)])
        }
        Inputs::Sausage(s) => {
            let params = spec.mc_params(workers)?;
            verify_sausage(&spec.triple(&s.triple)?, &spec.set(&s.set)?, &s.shift, s.horizon, &params)
                .map(|r| vec![Row::comparison("sausage", &r)])
        }
        Inputs::Capacity(c) => capacity(spec, c, workers)?,
        Inputs::CapVerify(c) => {
            let params = spec.mc_params(workers)?;
            verify_cap(&spec.triple(&c.triple)?, &spec.set(&c.set)?, c.q, &params).map(|r| vec![Row::comparison(format!("q={}", c.q), &r)])
        }
    };
    let (mut rows, error) = match result {
        Ok(rows) => (rows, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    for (i, r) in rows.iter_mut().enumerate() {
        r.index = i;
    }
    let holds = error.is_none() && rows.iter().all(|r| r.holds);
    Ok(Report { tool: "levysym", version: env!("CARGO_PKG_VERSION"), config: spec.clone(), rows, error, holds })
}

/// Small cases with known answers.
fn selftest() -> levysym::Result<Vec<Row>> {
    let mut rows = Vec::new();
    let g = Grid::new(1, 2.0, 40)?;
    let off = GridField::<f64>::indicator(g, |x| x[0] > 0.3 && x[0] < 1.3);
    let centred = GridField::<f64>::indicator(g, |x| x[0].abs() < 0.5);
    let star = rearrange_set(&off)?;
    rows.push(Row::exact("rearranged-interval-is-centred", star.l1_distance(&centred)?, 0.0, star == centred));

    let s = survival_probability(2f64.ln());
    rows.push(Row::exact("survival-at-ln2", s, 0.5, (s - 0.5).abs() < 1e-15));

    let flat = GridField::constant(g, 1.0, 1.0)?;
    let inc = increasing_rearrange(&flat, 1.0)?;
    rows.push(Row::exact("increasing-rearrangement-of-background", inc.max_abs_diff(&flat)?, 0.0, inc == flat));

    let phi = GridField::from_fn(g, 1.0, |x| if x[0].abs() < 0.5 { 0.5 } else { 1.0 })?;
    let kernel = centred.normalized()?;
    let free = DiscreteInstance::new(phi, vec![GridField::zeros(g); 2], vec![kernel], 1.0)?;
    let w = wn_eval(&free)?;
    rows.push(Row::exact("no-traps-kill-nothing", w, 0.0, w == 0.0));

    let zero = LevyTriple::zero(1)?;
    let params = McParams::new(4, 8, 1);
    let vol = integrate(&off)?;
    let sausage = sausage_volume(&zero, &off, &PathShift::Zero, 1.0, &params)?;
    rows.push(Row::exact("still-sausage-is-the-set", sausage.value, vol, (sausage.value - vol).abs() < 1e-12));

    let c = qcapacity(&zero, &off, 2.0, &params)?;
    rows.push(Row::exact("still-process-capacity-is-q-volume", c.value, 2.0 * vol, (c.value - 2.0 * vol).abs() < 1e-12));

    let c = qcapacity(&LevyTriple::brownian(1)?, &GridField::zeros(g), 1.0, &params)?;
    rows.push(Row::exact("empty-set-has-no-capacity", c.value, 0.0, c.value == 0.0));
    Ok(rows)
}

/// Instance shapes depend only on the box, so refining `m` resamples the same instances.
fn shape(spec: &ExperimentSpec, steps: usize) -> levysym::Result<InstanceShape> {
    let g = spec.grid.expect("validated");
    Ok(InstanceShape::fitting(&Grid::new(g.d, g.half_width, 32)?, steps))
}

fn ri_verify(spec: &ExperimentSpec, r: &RandomInputs, workers: usize) -> levysym::Result<Vec<Row>> {
    let grid = spec.grid().map_err(|e| levysym::Error::InvalidParameter(e.0))?;
    let shape = shape(spec, r.steps)?;
    par_map(r.instances, workers, |i| {
        let seed = spec.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = RandomInstance::draw(&mut rng, grid.dim(), &shape).realize(&grid)?;
        let rep = verify_ri_with(&inst, r.tol_factor)?.with_seed(seed);
        Ok(Row::comparison(format!("instance-{i}"), &rep))
    })
    .into_iter()
    .collect()
}

fn bll_verify(spec: &ExperimentSpec, r: &RandomInputs, workers: usize) -> levysym::Result<Vec<Row>> {
    let grid = spec.grid().map_err(|e| levysym::Error::InvalidParameter(e.0))?;
    let shape = shape(spec, r.steps)?;
    par_map(r.instances, workers, |i| {
        let seed = spec.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight = |rng: &mut ChaCha8Rng| rng.random_range(0.2..=1.0);
        let phi = random_blob(&mut rng, &grid, shape.support, shape.sparsity, weight).normalized()?;
        let sets: Vec<GridField<f64>> =
            (0..=r.steps).map(|_| random_blob(&mut rng, &grid, shape.support, shape.sparsity, |_| 1.0)).collect();
        let kernels = (0..r.steps)
            .map(|_| random_blob(&mut rng, &grid, shape.kernel_support, 0.0, weight).normalized())
            .collect::<levysym::Result<Vec<_>>>()?;
        let mut rep = verify_bll(&phi, &sets, &kernels)?.with_seed(seed);
        if r.tol_factor != levysym::trap_discrete::DEFAULT_TOL_FACTOR {
            let allowance = r.tol_factor * grid.spacing();
            rep = ComparisonReport::deterministic(rep.raw.value, rep.rearranged.value, rep.margin, allowance).with_seed(seed);
        }
        Ok(Row::comparison(format!("instance-{i}"), &rep))
    })
    .into_iter()
    .collect()
}

fn capacity(spec: &ExperimentSpec, c: &CapacityInputs, workers: usize) -> Result<levysym::Result<Vec<Row>>, SchemaError> {
    let t = spec.triple(&c.triple)?;
    let a = spec.set(&c.set)?;
    let params = spec.mc_params(workers)?;
    let expected = c.expected.as_ref();
    Ok(match c.q {
        Some(q) => qcapacity(&t, &a, q, &params).map(|est| vec![Row::capacity(format!("q={q}"), &est, expected)]),
        None => {
            let ladder = c.ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
            let smallest = ladder.iter().copied().fold(f64::INFINITY, f64::min);
            let horizon = c.horizon.unwrap_or_else(|| default_horizon(smallest));
            zero_capacity_with(&t, &a, &ladder, horizon, &params).map(|z| {
                let mut rows: Vec<Row> = z.ladder.iter().map(|est| Row::capacity(format!("q={}", est.q), est, None)).collect();
                rows.push(Row::capacity("q=0", &z.limit, expected));
                rows
            })
        }
    })
}
