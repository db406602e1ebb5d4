//! Sparse sets of lattice cells swept along a path. Cells are addressed by
//! integer coordinates on the lattice of a grid, with no bounding box.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField, Lattice, MAX_DIM};
use crate::levy::Point;

const BITS: u32 = 21;
const OFFSET: i64 = 1 << (BITS - 1);

pub(crate) fn pack(k: &Lattice) -> Result<u64> {
    let mut key = 0u64;
    for &ka in k {
        let v = ka + OFFSET;
        if !(0..(1 << BITS)).contains(&v) {
            return Err(Error::InvalidParameter(format!("lattice coordinate {ka} out of range")));
        }
        key = (key << BITS) | v as u64;
    }
    Ok(key)
}

pub(crate) fn unpack(mut key: u64) -> Lattice {
    let mut k = [0; MAX_DIM];
    for a in (0..MAX_DIM).rev() {
        k[a] = (key & ((1 << BITS) - 1)) as i64 - OFFSET;
        key >>= BITS;
    }
    k
}

/// Nearest lattice translation `round(x / h)`.
pub(crate) fn shift_of(x: &Point, h: f64, dim: usize) -> Lattice {
    let mut n = [0; MAX_DIM];
    for a in 0..dim {
        n[a] = (x[a] / h).round() as i64;
    }
    n
}

pub(crate) fn sub(a: &Lattice, b: &Lattice) -> Lattice {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Reflection `k -> -k - 1` through the origin of a cell-centred lattice.
pub(crate) fn reflect(k: &Lattice, dim: usize) -> Lattice {
    let mut r = [0; MAX_DIM];
    for a in 0..dim {
        r[a] = -k[a] - 1;
    }
    r
}

fn unit_index(delta: &Lattice) -> Option<usize> {
    let mut idx = 0;
    for &d in delta {
        if !(-1..=1).contains(&d) {
            return None;
        }
        idx = idx * 3 + (d + 1) as usize;
    }
    Some(idx)
}

/// A finite cell set `B`, swept as `B - s` over a sequence of shifts `s`.
#[derive(Debug, Clone)]
pub(crate) struct CellSet {
    cells: Vec<Lattice>,
    /// For each unit move `delta`: cells `a` with `a - delta` outside the set.
    fronts: Vec<Vec<Lattice>>,
}

impl CellSet {
    pub fn new(cells: Vec<Lattice>) -> Self {
        let members: FxHashSet<Lattice> = cells.iter().copied().collect();
        let mut fronts = vec![Vec::new(); 27];
        for (idx, front) in fronts.iter_mut().enumerate() {
            let delta = [(idx / 9) as i64 - 1, ((idx / 3) % 3) as i64 - 1, (idx % 3) as i64 - 1];
            *front = cells.iter().copied().filter(|a| !members.contains(&sub(a, &delta))).collect();
        }
        Self { cells, fronts }
    }

    /// Cells where `field` is nonzero, optionally mirrored through the origin.
    pub fn from_support(field: &GridField<f64>, mirrored: bool) -> Self {
        let g = field.grid();
        let cells = (0..g.len())
            .filter(|&c| field.value(c) != 0.0)
            .map(|c| if mirrored { reflect(&g.lattice(c), g.dim()) } else { g.lattice(c) })
            .collect();
        Self::new(cells)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Lattice] {
        &self.cells
    }

    /// Cells added when the shift moves by `delta`, or all cells for a longer move.
    fn front(&self, delta: &Lattice) -> &[Lattice] {
        match unit_index(delta) {
            Some(i) => &self.fronts[i],
            None => &self.cells,
        }
    }
}

/// First step at which each point of `union_i (sets[j_i] - s_i)` is covered.
pub(crate) fn first_hits(sets: &[CellSet], seq: impl IntoIterator<Item = (usize, Lattice)>) -> Result<FxHashMap<u64, u32>> {
    let mut hits: FxHashMap<u64, u32> = FxHashMap::default();
    let mut seen: FxHashSet<(usize, Lattice)> = FxHashSet::default();
    let mut prev: Option<(usize, Lattice)> = None;
    for (step, (j, s)) in seq.into_iter().enumerate() {
        if sets[j].is_empty() || !seen.insert((j, s)) {
            prev = Some((j, s));
            continue;
        }
        let cells = match prev {
            Some((pj, ps)) if pj == j => sets[j].front(&sub(&s, &ps)),
            _ => sets[j].cells(),
        };
        for a in cells {
            hits.entry(pack(&sub(a, &s))?).or_insert(step as u32);
        }
        prev = Some((j, s));
    }
    Ok(hits)
}

/// Number of faces between cells of `field`'s support and cells outside it.
pub(crate) fn boundary_faces(field: &GridField<f64>) -> usize {
    let g: &Grid = field.grid();
    let d = g.dim();
    let inside: FxHashSet<Lattice> = (0..g.len()).filter(|&c| field.value(c) != 0.0).map(|c| g.lattice(c)).collect();
    let mut faces = 0;
    for k in &inside {
        for a in 0..d {
            for s in [-1, 1] {
                let mut n = *k;
                n[a] += s;
                if !inside.contains(&n) {
                    faces += 1;
                }
            }
        }
    }
    faces
}
