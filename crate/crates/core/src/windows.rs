//! Windows as attractors of the internal-space IFS
//! W_i = ⋃_j ⋃_{t∈T_ij} A·W_j + t★, approximated by grid-snapped point clouds.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::algebra::AlgebraicElement;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::scalar::Real;

/// Per-type point clouds in internal space; points carry two components
/// (the second is zero for 1d models).
#[derive(Clone, Debug, PartialEq)]
pub struct WindowCloud<T> {
    pub d: usize,
    pub clouds: Vec<Vec<[T; 2]>>,
    pub generation: usize,
    pub cell_size: T,
}

/// Occupied-cell volume with a one-boundary-layer bracket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Cells whose whole neighbourhood is occupied.
    pub lower: f64,
    /// Occupied cells plus their empty neighbours.
    pub upper: f64,
}

/// Cells shared by two types, split into boundary and interior cells.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapReport {
    pub pairs: Vec<OverlapPair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapPair {
    pub types: (usize, usize),
    /// Axis-aligned hulls intersect.
    pub hulls_overlap: bool,
    pub shared_cells: usize,
    /// Shared cells that are interior cells of both types.
    pub interior_shared: usize,
}

/// Boundary dimension of the twisted silver windows, log(x_max)/log(λ) with
/// x_max the largest root of x³ − 2x² − 1.
pub fn twisted_boundary_dimension() -> f64 {
    let mut x = 2.2f64;
    for _ in 0..50 {
        x -= (x * x * x - 2.0 * x * x - 1.0) / (3.0 * x * x - 4.0 * x);
    }
    x.ln() / (1.0 + 2f64.sqrt()).ln()
}

/// Boundary dimension of the CAP windows, log(2+√3)/(2 log τ).
pub fn cap_boundary_dimension() -> f64 {
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    (2.0 + 3f64.sqrt()).ln() / (2.0 * tau.ln())
}

type Cell = (i64, i64);

struct Ifs<T> {
    n: usize,
    d: usize,
    a: [[T; 2]; 2],
    /// branches[i] = [(j, t★)].
    branches: Vec<Vec<(usize, [T; 2])>>,
    contraction: f64,
    max_shift: f64,
}

impl<T: Real> Ifs<T> {
    fn new(model: &ModelSpec) -> Result<Self> {
        let disp = model.displacement()?;
        let d = model.dim();
        let m = model.int_contraction().phys_matrix::<T>();
        let mut a = [[T::zero(); 2]; 2];
        for r in 0..d {
            for c in 0..d {
                a[r][c] = m[r][c];
            }
        }
        let mut branches = vec![Vec::new(); disp.n];
        let mut max_shift = 0.0f64;
        for (i, j, t) in disp.iter() {
            let v = t.embed_int::<T>();
            let p = [v[0], if d == 2 { v[1] } else { T::zero() }];
            max_shift = max_shift.max((p[0] * p[0] + p[1] * p[1]).sqrt().to_f64_lossy());
            branches[i].push((j, p));
        }
        // A is a similarity, so its norm is sqrt|det A|.
        let contraction = if d == 1 {
            a[0][0].abs().to_f64_lossy()
        } else {
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs().sqrt().to_f64_lossy()
        };
        Ok(Self { n: disp.n, d, a, branches, contraction, max_shift })
    }

    fn apply(&self, p: &[T; 2], t: &[T; 2]) -> [T; 2] {
        [
            self.a[0][0] * p[0] + self.a[0][1] * p[1] + t[0],
            self.a[1][0] * p[0] + self.a[1][1] * p[1] + t[1],
        ]
    }

    /// Diameter bound of the attractor: 2·max|t★|/(1 − ‖A‖).
    fn diameter(&self) -> f64 {
        2.0 * self.max_shift / (1.0 - self.contraction)
    }
}

fn cell_of<T: Real>(p: &[T; 2], h: T) -> Cell {
    ((p[0] / h).floor().to_f64_lossy() as i64, (p[1] / h).floor().to_f64_lossy() as i64)
}

/// One point per cell in 2d; in 1d the extreme points of each cell are kept
/// so interval endpoints are never coarsened.
fn dedup<T: Real>(points: Vec<[T; 2]>, h: T, d: usize) -> Vec<[T; 2]> {
    if d == 1 {
        let mut cells: HashMap<i64, ([T; 2], [T; 2])> = HashMap::new();
        for p in points {
            let c = cell_of(&p, h).0;
            cells
                .entry(c)
                .and_modify(|(lo, hi)| {
                    if p[0] < lo[0] {
                        *lo = p;
                    }
                    if p[0] > hi[0] {
                        *hi = p;
                    }
                })
                .or_insert((p, p));
        }
        let mut keys: Vec<i64> = cells.keys().copied().collect();
        keys.sort_unstable();
        let mut out = Vec::with_capacity(2 * keys.len());
        for k in keys {
            let (lo, hi) = cells[&k];
            out.push(lo);
            if hi[0] != lo[0] {
                out.push(hi);
            }
        }
        out
    } else {
        let mut seen = HashSet::new();
        points.into_iter().filter(|p| seen.insert(cell_of(p, h))).collect()
    }
}

impl<T: Real> WindowCloud<T> {
    /// Seed {0} per type with the default resolution 2⁻¹⁰ of the attractor
    /// diameter bound.
    pub fn seed(model: &ModelSpec) -> Result<Self> {
        let ifs = Ifs::<T>::new(model)?;
        let h = ifs.diameter() / 1024.0;
        Self::seed_with_cell(model, h)
    }

    pub fn seed_with_cell(model: &ModelSpec, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::InvalidArgument("cell size must be positive".into()));
        }
        let n = model.displacement()?.n;
        Ok(Self {
            d: model.dim(),
            clouds: vec![vec![[T::zero(); 2]]; n],
            generation: 0,
            cell_size: T::from_f64_lossy(cell_size),
        })
    }

    pub fn n_types(&self) -> usize {
        self.clouds.len()
    }

    pub fn len(&self) -> usize {
        self.clouds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cells(&self, i: usize) -> HashSet<Cell> {
        self.clouds[i].iter().map(|p| cell_of(p, self.cell_size)).collect()
    }

    fn neighbours(&self, c: Cell) -> Vec<Cell> {
        if self.d == 1 {
            vec![(c.0 - 1, c.1), (c.0 + 1, c.1)]
        } else {
            let mut v = Vec::with_capacity(8);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if dx != 0 || dy != 0 {
                        v.push((c.0 + dx, c.1 + dy));
                    }
                }
            }
            v
        }
    }

    fn cell_measure(&self) -> f64 {
        self.cell_size.to_f64_lossy().powi(self.d as i32)
    }

    fn volume_of(&self, cells: &HashSet<Cell>) -> VolumeEstimate {
        let interior = cells.iter().filter(|c| self.neighbours(**c).iter().all(|n| cells.contains(n))).count();
        let halo: HashSet<Cell> = cells
            .iter()
            .flat_map(|c| self.neighbours(*c))
            .filter(|n| !cells.contains(n))
            .collect();
        let m = self.cell_measure();
        VolumeEstimate {
            value: cells.len() as f64 * m,
            lower: interior as f64 * m,
            upper: (cells.len() + halo.len()) as f64 * m,
        }
    }

    /// Volume of the window of one type.
    pub fn volume(&self, i: usize) -> VolumeEstimate {
        self.volume_of(&self.cells(i))
    }

    /// Volume of the union of all windows.
    pub fn total_volume(&self) -> VolumeEstimate {
        let all: HashSet<Cell> = (0..self.n_types()).flat_map(|i| self.cells(i)).collect();
        self.volume_of(&all)
    }

    /// (min, max) of each coordinate of one type's cloud.
    pub fn bounds(&self, i: usize) -> Option<([T; 2], [T; 2])> {
        let pts = &self.clouds[i];
        let first = *pts.first()?;
        Some(pts.iter().fold((first, first), |(lo, hi), p| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        }))
    }

    pub fn overlap_report(&self) -> OverlapReport {
        let cells: Vec<HashSet<Cell>> = (0..self.n_types()).map(|i| self.cells(i)).collect();
        let interior = |s: &HashSet<Cell>, c: &Cell| self.neighbours(*c).iter().all(|n| s.contains(n));
        let mut pairs = Vec::new();
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                let hulls_overlap = match (self.bounds(i), self.bounds(j)) {
                    (Some((li, hi)), Some((lj, hj))) => {
                        (0..self.d).all(|r| li[r] <= hj[r] && lj[r] <= hi[r])
                    }
                    _ => false,
                };
                let shared: Vec<&Cell> = cells[i].intersection(&cells[j]).collect();
                let interior_shared =
                    shared.iter().filter(|c| interior(&cells[i], c) && interior(&cells[j], c)).count();
                pairs.push(OverlapPair { types: (i, j), hulls_overlap, shared_cells: shared.len(), interior_shared });
            }
        }
        OverlapReport { pairs }
    }

    /// Box-counting estimate of the boundary dimension of type `i` from
    /// coarsenings by 2^0..2^levels. Diagnostic only.
    pub fn boundary_box_dimension(&self, i: usize, levels: u32) -> Option<f64> {
        let base = self.cells(i);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for l in 0..=levels {
            let f = 1i64 << l;
            let coarse: HashSet<Cell> = base.iter().map(|c| (c.0.div_euclid(f), c.1.div_euclid(f))).collect();
            let boundary = coarse.iter().filter(|c| self.neighbours(**c).iter().any(|n| !coarse.contains(n))).count();
            if boundary == 0 {
                return None;
            }
            xs.push(-((self.cell_size.to_f64_lossy() * f as f64).ln()));
            ys.push((boundary as f64).ln());
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// One IFS application with grid deduplication.
pub fn ifs_step<T: Real>(cloud: &WindowCloud<T>, model: &ModelSpec) -> Result<WindowCloud<T>> {
    let ifs = Ifs::<T>::new(model)?;
    if ifs.n != cloud.n_types() {
        return Err(Error::Dimension { expected: ifs.n, found: cloud.n_types() });
    }
    Ok(step_with(&ifs, cloud))
}

fn step_with<T: Real>(ifs: &Ifs<T>, cloud: &WindowCloud<T>) -> WindowCloud<T> {
    let h = cloud.cell_size;
    let clouds = (0..ifs.n)
        .into_par_iter()
        .map(|i| {
            let pts: Vec<[T; 2]> = ifs.branches[i]
                .iter()
                .flat_map(|(j, t)| cloud.clouds[*j].iter().map(move |p| ifs.apply(p, t)))
                .collect();
            dedup(pts, h, ifs.d)
        })
        .collect();
    WindowCloud { d: cloud.d, clouds, generation: cloud.generation + 1, cell_size: h }
}

/// `steps` IFS applications from `cloud`.
pub fn iterate<T: Real>(cloud: WindowCloud<T>, model: &ModelSpec, steps: usize) -> Result<WindowCloud<T>> {
    let ifs = Ifs::<T>::new(model)?;
    let mut c = cloud;
    for _ in 0..steps {
        c = step_with(&ifs, &c);
    }
    Ok(c)
}

/// Contraction factor ‖A‖ of the internal IFS.
pub fn contraction_factor(model: &ModelSpec) -> Result<f64> {
    Ok(Ifs::<f64>::new(model)?.contraction)
}

/// Hausdorff distance between two point sets (grid-accelerated).
pub fn hausdorff<T: Real>(a: &[[T; 2]], b: &[[T; 2]]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    directed(a, b).max(directed(b, a))
}

fn directed<T: Real>(a: &[[T; 2]], b: &[[T; 2]]) -> f64 {
    let to = |p: &[T; 2]| [p[0].to_f64_lossy(), p[1].to_f64_lossy()];
    let bf: Vec<[f64; 2]> = b.iter().map(to).collect();
    let (mut lo, mut hi) = (bf[0], bf[0]);
    for p in &bf {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let h = extent / (bf.len() as f64).sqrt().max(1.0);
    let key = |p: &[f64; 2]| ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64);
    let mut grid: HashMap<Cell, Vec<[f64; 2]>> = HashMap::new();
    for p in &bf {
        grid.entry(key(p)).or_default().push(*p);
    }
    a.par_iter()
        .map(|p| {
            let p = to(p);
            let c = key(&p);
            let mut best = f64::INFINITY;
            let mut r = 0i64;
            // Search square rings until the ring is farther than the best hit.
            loop {
                for dx in -r..=r {
                    for dy in -r..=r {
                        if dx.abs() != r && dy.abs() != r {
                            continue;
                        }
                        if let Some(v) = grid.get(&(c.0 + dx, c.1 + dy)) {
                            for q in v {
                                best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                            }
                        }
                    }
                }
                if best <= r as f64 * h {
                    break best;
                }
                r += 1;
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Volumes from membership of uniform sample points in the depth-n outer
/// approximations W⁽ⁿ⁾ (n IFS steps applied to bounding boxes).
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVolumes {
    pub per_type: Vec<f64>,
    pub total: f64,
    /// Measure of the points lying in two or more windows.
    pub overlap: f64,
    pub depth: usize,
    pub sample_spacing: f64,
}

/// Membership oracle x ∈ W_i⁽ⁿ⁾ by searching backward orbits
/// y ↦ A⁻¹(y − t★), pruned by boxes containing the attractors.
pub struct MembershipOracle<T> {
    ifs: Ifs<T>,
    ainv: [[T; 2]; 2],
    boxes: Vec<([T; 2], [T; 2])>,
}

impl<T: Real> MembershipOracle<T> {
    /// Boxes are taken from a converged cloud and widened by its Hausdorff
    /// error bound, so they contain the true windows.
    pub fn new(model: &ModelSpec, cloud: &WindowCloud<T>) -> Result<Self> {
        let ifs = Ifs::<T>::new(model)?;
        if ifs.n != cloud.n_types() {
            return Err(Error::Dimension { expected: ifs.n, found: cloud.n_types() });
        }
        let c = ifs.contraction;
        let h = cloud.cell_size.to_f64_lossy();
        let margin = T::from_f64_lossy(
            2.0 * h * 2f64.sqrt() / (1.0 - c) + c.powi(cloud.generation as i32) * ifs.diameter() + 1e-12,
        );
        let boxes = (0..ifs.n)
            .map(|i| {
                let (lo, hi) = cloud.bounds(i).ok_or_else(|| Error::Degenerate("empty window cloud".into()))?;
                let m1 = if ifs.d == 2 { margin } else { T::zero() };
                Ok(([lo[0] - margin, lo[1] - m1], [hi[0] + margin, hi[1] + m1]))
            })
            .collect::<Result<_>>()?;
        let a = ifs.a;
        let ainv = if ifs.d == 1 {
            [[T::one() / a[0][0], T::zero()], [T::zero(), T::zero()]]
        } else {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
        };
        Ok(Self { ifs, ainv, boxes })
    }

    fn in_box(&self, j: usize, y: &[T; 2]) -> bool {
        let (lo, hi) = &self.boxes[j];
        y[0] >= lo[0] && y[0] <= hi[0] && y[1] >= lo[1] && y[1] <= hi[1]
    }

    pub fn contains(&self, i: usize, x: [T; 2], depth: usize) -> bool {
        if !self.in_box(i, &x) {
            return false;
        }
        let mut stack = vec![(i, x, 0usize)];
        while let Some((i, y, level)) = stack.pop() {
            if level == depth {
                return true;
            }
            for (j, t) in &self.ifs.branches[i] {
                let u = [y[0] - t[0], y[1] - t[1]];
                let z = [
                    self.ainv[0][0] * u[0] + self.ainv[0][1] * u[1],
                    self.ainv[1][0] * u[0] + self.ainv[1][1] * u[1],
                ];
                if self.in_box(*j, &z) {
                    stack.push((*j, z, level + 1));
                }
            }
        }
        false
    }

    /// Sample the common bounding box on a `samples`-per-axis midpoint grid.
    pub fn volumes(&self, depth: usize, samples: usize) -> MembershipVolumes {
        let d = self.ifs.d;
        let n = self.ifs.n;
        let lo = (0..2).map(|r| self.boxes.iter().map(|b| b.0[r]).fold(T::infinity(), T::min)).collect::<Vec<_>>();
        let hi = (0..2).map(|r| self.boxes.iter().map(|b| b.1[r]).fold(T::neg_infinity(), T::max)).collect::<Vec<_>>();
        let span = (0..d).map(|r| (hi[r] - lo[r]).to_f64_lossy()).fold(0.0, f64::max);
        let step = span / samples as f64;
        let counts: Vec<usize> = if d == 1 { vec![samples, 1] } else { vec![samples, samples] };
        let cell = step.powi(d as i32);
        let (per, total, overlap) = (0..counts[0] * counts[1])
            .into_par_iter()
            .map(|idx| {
                let (a, b) = (idx % counts[0], idx / counts[0]);
                let x = [
                    lo[0] + T::from_f64_lossy((a as f64 + 0.5) * step),
                    if d == 2 { lo[1] + T::from_f64_lossy((b as f64 + 0.5) * step) } else { T::zero() },
                ];
                let hits: Vec<usize> = (0..n).map(|i| self.contains(i, x, depth) as usize).collect();
                let k: usize = hits.iter().sum();
                (hits, (k > 0) as usize, (k > 1) as usize)
            })
            .reduce(
                || (vec![0; n], 0, 0),
                |(mut h, t, o), (h2, t2, o2)| {
                    for (x, y) in h.iter_mut().zip(h2) {
                        *x += y;
                    }
                    (h, t + t2, o + o2)
                },
            );
        MembershipVolumes {
            per_type: per.into_iter().map(|c| c as f64 * cell).collect(),
            total: total as f64 * cell,
            overlap: overlap as f64 * cell,
            depth,
            sample_spacing: step,
        }
    }
}

/// Exact variant of [`MembershipOracle`] for 1d models over a real quadratic
/// field: backward orbits are tracked as (u + v·g)/D with integer u, v, so
/// arbitrarily deep approximations are free of rounding.
pub struct ExactLineOracle {
    n: usize,
    /// g² = p·g + q; `root_sign` selects the embedded root.
    p: BigInt,
    q: BigInt,
    root_sign: i8,
    ainv: (BigInt, BigInt),
    branches: Vec<Vec<(usize, (BigInt, BigInt))>>,
    /// Boxes as integer multiples of 2⁻²⁰.
    boxes: Vec<(BigInt, BigInt)>,
}

const BOX_SCALE: f64 = (1u64 << 20) as f64;

impl ExactLineOracle {
    pub fn new<T: Real>(model: &ModelSpec, cloud: &WindowCloud<T>) -> Result<Self> {
        let spec = model.field.spec();
        if model.dim() != 1 || spec.degree != 2 {
            return Err(Error::InvalidArgument("exact line oracle needs a 1d quadratic model".into()));
        }
        let g = &spec.generators[0];
        let int_pair = |e: &AlgebraicElement| -> Result<(BigInt, BigInt)> {
            if !e.is_integral_coords() {
                return Err(Error::InvalidArgument(format!("{e} is not integral")));
            }
            Ok((e.coords()[0].to_integer(), e.coords()[1].to_integer()))
        };
        let ainv = int_pair(&model.int_contraction().factor.inverse()?)?;
        let disp = model.displacement()?;
        let mut branches = vec![Vec::new(); disp.n];
        for (i, j, t) in disp.iter() {
            branches[i].push((j, int_pair(&t.star())?));
        }
        let float = MembershipOracle::new(model, cloud)?;
        let boxes = float
            .boxes
            .iter()
            .map(|(lo, hi)| {
                let l = (lo[0].to_f64_lossy() * BOX_SCALE).floor();
                let h = (hi[0].to_f64_lossy() * BOX_SCALE).ceil();
                (BigInt::from(l as i64), BigInt::from(h as i64))
            })
            .collect();
        let disc_root_positive = 2.0 * g.value.0 - g.p as f64 > 0.0;
        Ok(Self {
            n: disp.n,
            p: BigInt::from(g.p),
            q: BigInt::from(g.q),
            root_sign: if disc_root_positive { 1 } else { -1 },
            ainv,
            branches,
            boxes,
        })
    }

    /// Sign of u + v·g.
    fn sign(&self, u: &BigInt, v: &BigInt) -> Ordering {
        // 2(u + v·g) = (2u + v·p) + s·v·√Δ.
        let a = BigInt::from(2) * u + v * &self.p;
        let b = if self.root_sign > 0 { v.clone() } else { -v };
        let disc = &self.p * &self.p + BigInt::from(4) * &self.q;
        match (a.sign(), b.sign()) {
            (Sign::NoSign, _) => b.sign().cmp(&Sign::NoSign),
            (_, Sign::NoSign) => a.sign().cmp(&Sign::NoSign),
            (sa, sb) if sa == sb => sa.cmp(&Sign::NoSign),
            (sa, _) => {
                let lhs = &a * &a;
                let rhs = &b * &b * disc;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa.cmp(&Sign::NoSign),
                    Ordering::Less => sa.cmp(&Sign::NoSign).reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    /// y = (u + v·g)/D in box j, the box being stored as multiples of 2⁻²⁰
    /// and `dscale` = D·2⁻²⁰.
    fn in_box(&self, j: usize, y: &(BigInt, BigInt), dscale: &BigInt) -> bool {
        let (lo, hi) = &self.boxes[j];
        self.sign(&(&y.0 - lo * dscale), &y.1) != Ordering::Less
            && self.sign(&(&y.0 - hi * dscale), &y.1) != Ordering::Greater
    }

    fn contains(&self, i: usize, x: (BigInt, BigInt), d: &BigInt, dscale: &BigInt, depth: usize) -> bool {
        if !self.in_box(i, &x, dscale) {
            return false;
        }
        let (a0, a1) = &self.ainv;
        let mut stack = vec![(i, x, 0usize)];
        while let Some((i, y, level)) = stack.pop() {
            if level == depth {
                return true;
            }
            for (j, (t0, t1)) in &self.branches[i] {
                let u0 = &y.0 - t0 * d;
                let u1 = &y.1 - t1 * d;
                // (u0 + u1 g)(a0 + a1 g) with g² = p g + q.
                let bd = &u1 * a1;
                let z = (&u0 * a0 + &bd * &self.q, &u0 * a1 + &u1 * a0 + &bd * &self.p);
                if self.in_box(*j, &z, dscale) {
                    stack.push((*j, z, level + 1));
                }
            }
        }
        false
    }

    /// As [`MembershipOracle::volumes`], on `samples` midpoints of the
    /// common box.
    pub fn volumes(&self, depth: usize, samples: usize) -> MembershipVolumes {
        let lo = self.boxes.iter().map(|b| b.0.clone()).min().expect("types");
        let hi = self.boxes.iter().map(|b| b.1.clone()).max().expect("types");
        // x_a = lo/2²⁰ + (2a+1)(hi−lo)/(2N·2²⁰) = (2N·lo + (2a+1)(hi−lo)) / D.
        let two_n = BigInt::from(2 * samples as u64);
        let dscale = two_n.clone();
        let d = &two_n * BigInt::from(1u64 << 20);
        let span = &hi - &lo;
        let n = self.n;
        let (per, total, overlap) = (0..samples)
            .into_par_iter()
            .map(|a| {
                let u = &two_n * &lo + BigInt::from(2 * a as u64 + 1) * &span;
                let hits: Vec<usize> = (0..n)
                    .map(|i| self.contains(i, (u.clone(), BigInt::from(0)), &d, &dscale, depth) as usize)
                    .collect();
                let k: usize = hits.iter().sum();
                (hits, (k > 0) as usize, (k > 1) as usize)
            })
            .reduce(
                || (vec![0; n], 0, 0),
                |(mut h, t, o), (h2, t2, o2)| {
                    for (x, y) in h.iter_mut().zip(h2) {
                        *x += y;
                    }
                    (h, t + t2, o + o2)
                },
            );
        let step = span.to_f64().unwrap_or(f64::NAN) / BOX_SCALE / samples as f64;
        MembershipVolumes {
            per_type: per.into_iter().map(|c| c as f64 * step).collect(),
            total: total as f64 * step,
            overlap: overlap as f64 * step,
            depth,
            sample_spacing: step,
        }
    }
}

/// Membership volumes with default settings: exact orbits (depth 80) for 1d
/// quadratic models; f64 orbits in 2d, to the depth where rounding error
/// amplified by ‖A⁻¹‖ⁿ stays below 10⁻³.
pub fn membership_volumes(model: &ModelSpec, cloud: &WindowCloud<f64>) -> Result<MembershipVolumes> {
    if model.dim() == 1 && model.field.spec().degree == 2 {
        return Ok(ExactLineOracle::new(model, cloud)?.volumes(80, 1 << 13));
    }
    let c = contraction_factor(model)?;
    let depth = ((1e13f64).ln() / (1.0 / c).ln()).floor() as usize;
    Ok(MembershipOracle::new(model, cloud)?.volumes(depth, 512))
}

/// Rendering options for [`render_windows`].
#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// Zoom rectangle ((x0, y0), (x1, y1)); the full extent when absent.
    pub view: Option<([f64; 2], [f64; 2])>,
    /// Types sharing a colour (e.g. the orientations of one shape).
    pub group: usize,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// SVG of the clouds: coloured cells per type (intervals on one line in 1d).
pub fn render_windows<T: Real>(cloud: &WindowCloud<T>, opts: &RenderOptions) -> String {
    let (w, hgt) = (800.0, if cloud.d == 1 { 120.0 } else { 800.0 });
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}">"#);
    let all: Vec<(usize, [f64; 2])> = cloud
        .clouds
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |p| (i, [p[0].to_f64_lossy(), p[1].to_f64_lossy()])))
        .collect();
    if all.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (lo, hi) = opts.view.unwrap_or_else(|| {
        all.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), (_, p)| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        })
    });
    let cell = cloud.cell_size.to_f64_lossy();
    let margin = 20.0;
    let span_x = (hi[0] - lo[0]).max(cell);
    let span_y = if cloud.d == 1 { 1.0 } else { (hi[1] - lo[1]).max(cell) };
    let scale = if cloud.d == 1 { (w - 2.0 * margin) / span_x } else { ((w - 2.0 * margin) / span_x).min((hgt - 2.0 * margin) / span_y) };
    let group = opts.group.max(1);
    let _ = writeln!(s, r#"<rect width="{w}" height="{hgt}" fill="white"/>"#);
    for i in 0..cloud.n_types() {
        let colour = PALETTE[(i / group) % PALETTE.len()];
        let mut cells: Vec<Cell> = cloud.cells(i).into_iter().collect();
        cells.sort_unstable();
        let _ = writeln!(s, r#"<g fill="{colour}" stroke="none">"#);
        if cloud.d == 1 {
            // Merge runs of consecutive cells into intervals.
            let mut k = 0;
            while k < cells.len() {
                let start = cells[k].0;
                let mut end = start;
                while k + 1 < cells.len() && cells[k + 1].0 == end + 1 {
                    k += 1;
                    end = cells[k].0;
                }
                k += 1;
                let x0 = margin + (start as f64 * cell - lo[0]) * scale;
                let x1 = margin + ((end + 1) as f64 * cell - lo[0]) * scale;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="30"/>"#,
                    x0,
                    40.0 + 10.0 * (i % 2) as f64,
                    (x1 - x0).max(0.5)
                );
            }
        } else {
            let side = (cell * scale).max(0.5);
            for c in cells {
                let x = margin + (c.0 as f64 * cell - lo[0]) * scale;
                let y = hgt - margin - ((c.1 + 1) as f64 * cell - lo[1]) * scale;
                if x < -side || x > w || y < -side || y > hgt {
                    continue;
                }
                let _ = writeln!(s, r#"<rect x="{x:.3}" y="{y:.3}" width="{side:.3}" height="{side:.3}"/>"#);
            }
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_windows<T: Real>(cloud: &WindowCloud<T>, opts: &RenderOptions, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_windows(cloud, opts))?;
    Ok(())
}

/// CSV dump of occupied cell centres: `type,x,y`.
pub fn cells_csv<T: Real>(cloud: &WindowCloud<T>) -> String {
    let h = cloud.cell_size.to_f64_lossy();
    let mut s = String::from("type,x,y\n");
    for i in 0..cloud.n_types() {
        let mut cells: Vec<Cell> = cloud.cells(i).into_iter().collect();
        cells.sort_unstable();
        for c in cells {
            let y = if cloud.d == 1 { 0.0 } else { (c.1 as f64 + 0.5) * h };
            let _ = writeln!(s, "{i},{:.16e},{:.16e}", (c.0 as f64 + 0.5) * h, y);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;

    fn converged(name: &str, steps: usize) -> (ModelSpec, WindowCloud<f64>) {
        let m = builtin(name).unwrap();
        let c = iterate(WindowCloud::seed(&m).unwrap(), &m, steps).unwrap();
        (m, c)
    }

    #[test]
    fn silver_endpoints() {
        let (_, c) = converged("silver", 40);
        let r = 2f64.sqrt() / 2.0;
        let (a_lo, a_hi) = c.bounds(0).unwrap();
        let (b_lo, b_hi) = c.bounds(1).unwrap();
        assert!((a_lo[0] - (r - 1.0)).abs() < 1e-8 && (a_hi[0] - r).abs() < 1e-8);
        assert!((b_lo[0] - (-1.0 - r)).abs() < 1e-8 && (b_hi[0] - (r - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn silver_volumes() {
        let (_, c) = converged("silver", 40);
        let lam = 1.0 + 2f64.sqrt();
        let v = c.total_volume();
        assert!((v.value - lam).abs() / lam < 0.01, "{v:?}");
        assert!(v.lower <= v.value && v.value <= v.upper);
        assert!((c.volume(0).value - 1.0).abs() < 0.01);
    }

    #[test]
    fn twisted_volume_and_overlap() {
        let (m, c) = converged("silver_twisted", 40);
        let lam = 1.0 + 2f64.sqrt();
        let v = ExactLineOracle::new(&m, &c).unwrap().volumes(80, 1 << 13);
        assert!((v.total - lam).abs() / lam < 0.02, "{v:?}");
        assert!(v.overlap < 0.01 * lam, "{v:?}");
        let rep = c.overlap_report();
        assert!(rep.pairs[0].hulls_overlap);
    }

    #[test]
    fn extra_step_is_within_a_cell() {
        let (m, c) = converged("silver", 30);
        let next = ifs_step(&c, &m).unwrap();
        for i in 0..2 {
            assert!(hausdorff(&c.clouds[i], &next.clouds[i]) <= c.cell_size);
        }
    }

    #[test]
    fn hausdorff_shrinks_geometrically() {
        let m = builtin("silver").unwrap();
        let mut c = WindowCloud::<f64>::seed_with_cell(&m, 1e-9).unwrap();
        let mut dists = Vec::new();
        for _ in 0..12 {
            let next = ifs_step(&c, &m).unwrap();
            if c.generation >= 5 {
                dists.push(hausdorff(&c.clouds[0], &next.clouds[0]));
            }
            c = next;
        }
        let ratios: Vec<f64> = dists.windows(2).map(|w| w[1] / w[0]).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean - (2f64.sqrt() - 1.0)).abs() < 0.05, "{ratios:?}");
    }

    #[test]
    fn cap_volume_matches_density() {
        let (m, c) = converged("cap", 14);
        let lattice = crate::cps::LatticeBasis::from_model(&m).unwrap();
        let expect = m.density_f64() / lattice.density().to_f64();
        let v = c.total_volume();
        assert!((v.value - expect).abs() / expect < 0.02, "{v:?} vs {expect}");
    }

    #[test]
    fn dimension_constants() {
        assert!((twisted_boundary_dimension() - 0.89745).abs() < 1e-5);
        assert!((cap_boundary_dimension() - 1.3683764).abs() < 1e-7);
    }

    #[test]
    fn render_empty_and_silver() {
        let empty = WindowCloud::<f64> { d: 2, clouds: vec![vec![]], generation: 0, cell_size: 0.1 };
        let s = render_windows(&empty, &RenderOptions::default());
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        let (_, c) = converged("silver", 30);
        let s = render_windows(&c, &RenderOptions::default());
        // Two intervals, one per type.
        assert_eq!(s.matches("<rect x=").count(), 2);
    }

    #[test]
    fn scaffold_has_no_windows() {
        let m = builtin("casper_scaffold").unwrap();
        assert!(WindowCloud::<f64>::seed(&m).is_err());
    }
}
