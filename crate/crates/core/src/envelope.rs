//! Lambda-convex envelopes of functions sampled on a regular grid.
//!
//! One sweep replaces every node value by the lower convex envelope of the
//! current values along each admissible line through the node. Lines along
//! lattice directions pass through nodes exactly; sampled cone directions
//! use multilinear interpolation. Sweeps are Jacobi updates, so a sweep is
//! a pure function of the previous grid.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{cone_contains, cone_sample, Operator, DEFAULT_TOL_CONE};
use crate::par;

/// Value standing in for `+infinity`.
pub fn sentinel(max_abs: f64) -> f64 {
    1e6 * (1.0 + max_abs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    /// Row-major: the last axis varies fastest.
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || hi.len() != d || resolution.len() != d {
            return Err(Error::Dimension("box and resolution must have the same positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Input("degenerate box".into()));
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::Input("resolution must be >= 2 per axis".into()));
        }
        let count: usize = resolution.iter().product();
        if values.len() != count {
            return Err(Error::Dimension(format!("{} values for {count} nodes", values.len())));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Input("grid values contain NaN".into()));
        }
        Ok(Self { lo, hi, resolution, values })
    }

    pub fn from_fn(lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>, f: impl Fn(&DVector<f64>) -> f64 + Sync) -> Result<Self> {
        let count: usize = resolution.iter().product();
        let probe = Self::new(lo, hi, resolution, vec![0.0; count])?;
        let values = par::map_range(count, |i| f(&probe.node(i)));
        Self::new(probe.lo, probe.hi, probe.resolution, values)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.resolution[axis] - 1) as f64
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            idx[ax] = flat % self.resolution[ax];
            flat /= self.resolution[ax];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.resolution).fold(0, |acc, (i, r)| acc * r + i)
    }

    pub fn node(&self, flat: usize) -> DVector<f64> {
        let idx = self.multi_index(flat);
        DVector::from_fn(self.dim(), |ax, _| self.lo[ax] + idx[ax] as f64 * self.spacing(ax))
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim()).all(|ax| x[ax] >= self.lo[ax] - 1e-12 && x[ax] <= self.hi[ax] + 1e-12)
    }

    /// Multilinear interpolation; `None` outside the box.
    pub fn sample(&self, x: &DVector<f64>) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        Some(self.interpolate(x.as_slice(), &mut Scratch::new(self.dim())))
    }

    /// Interpolation at a point assumed inside the box (coordinates are
    /// clamped).
    fn interpolate(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        let d = self.dim();
        let mut base = 0usize;
        let mut stride = 1usize;
        for ax in (0..d).rev() {
            let top = (self.resolution[ax] - 1) as f64;
            let s = ((x[ax] - self.lo[ax]) / self.spacing(ax)).clamp(0.0, top);
            let i = (s.floor() as usize).min(self.resolution[ax] - 2);
            scratch.frac[ax] = s - i as f64;
            scratch.stride[ax] = stride;
            base += i * stride;
            stride *= self.resolution[ax];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = base;
            for ax in 0..d {
                if corner >> ax & 1 == 1 {
                    idx += scratch.stride[ax];
                    w *= scratch.frac[ax];
                } else {
                    w *= 1.0 - scratch.frac[ax];
                }
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

struct Scratch {
    frac: Vec<f64>,
    stride: Vec<usize>,
    point: Vec<f64>,
    s: Vec<f64>,
    v: Vec<f64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Self {
            frac: vec![0.0; d],
            stride: vec![0; d],
            point: vec![0.0; d],
            s: Vec::new(),
            v: Vec::new(),
        }
    }
}

/// Lower convex envelope of `(s_k, v_k)` (strictly increasing `s`)
/// evaluated at every `s_k`.
pub fn lower_envelope_1d(s: &[f64], v: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop j if it lies on or above the chord i -> k
            let lhs = (v[j] - v[i]) * (s[k] - s[i]);
            let rhs = (v[k] - v[i]) * (s[j] - s[i]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        while seg + 1 < hull.len() && s[hull[seg + 1]] < s[k] {
            seg += 1;
        }
        let i = hull[seg];
        if i == k || seg + 1 == hull.len() {
            out.push(v[k].min(v[i]));
            continue;
        }
        let j = hull[seg + 1];
        let t = (s[k] - s[i]) / (s[j] - s[i]);
        out.push((v[i] + t * (v[j] - v[i])).min(v[k]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub max_decrease: f64,
    /// Largest pointwise increase (never positive for a correct sweep).
    pub max_increase: f64,
}

#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub grid: GridFunction,
    pub sweeps: Vec<SweepStats>,
    pub converged: bool,
}

/// Admissible line families for an operator on a given grid.
#[derive(Debug, Clone)]
pub struct EnvelopeSolver {
    /// Node chains along each admissible lattice direction.
    lattice_lines: Vec<Vec<Vec<usize>>>,
    /// Sampled physical unit directions.
    sampled: Vec<DVector<f64>>,
    pub lattice_directions: Vec<Vec<i64>>,
}

fn primitive_directions(d: usize, reach: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let side = (2 * reach + 1) as usize;
    let total = side.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let p: Vec<i64> = (0..d)
            .map(|_| {
                let v = (c % side) as i64 - reach;
                c /= side;
                v
            })
            .collect();
        let first = p.iter().copied().find(|&x| x != 0);
        if first.is_none_or(|f| f < 0) {
            continue;
        }
        let g = p.iter().fold(0i64, |g, &x| gcd(g, x.abs()));
        if g == 1 {
            out.push(p);
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl EnvelopeSolver {
    /// Lattice steps with entries up to 2 (up to 1 beyond two dimensions)
    /// that are cone directions, plus `dir_count` sampled cone directions.
    pub fn new(grid: &GridFunction, op: &Operator, dir_count: usize, seed: u64) -> Result<Self> {
        let d = grid.dim();
        if d != op.d_state() {
            return Err(Error::Dimension(format!("grid dimension {d}, operator state dimension {}", op.d_state())));
        }
        let reach = if d <= 2 { 2 } else { 1 };
        let mut lattice_directions = Vec::new();
        let mut lattice_lines = Vec::new();
        for p in primitive_directions(d, reach) {
            let phys = DVector::from_fn(d, |ax, _| p[ax] as f64 * grid.spacing(ax));
            if !cone_contains(op, &phys, DEFAULT_TOL_CONE)?.member {
                continue;
            }
            lattice_lines.push(lines_along(grid, &p));
            lattice_directions.push(p);
        }
        let sampled = if dir_count > 0 {
            cone_sample(op, dir_count, seed, DEFAULT_TOL_CONE)?
                .into_iter()
                .map(|b| &b.lambda / b.lambda.norm())
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            lattice_lines,
            sampled,
            lattice_directions,
        })
    }

    /// One Jacobi sweep.
    pub fn sweep(&self, grid: &GridFunction) -> GridFunction {
        let old = &grid.values;
        let mut new = old.clone();
        for lines in &self.lattice_lines {
            let updates = par::map(lines, |line| {
                let v: Vec<f64> = line.iter().map(|&i| old[i]).collect();
                let s: Vec<f64> = (0..line.len()).map(|k| k as f64).collect();
                lower_envelope_1d(&s, &v)
            });
            for (line, vals) in lines.iter().zip(updates) {
                for (&i, v) in line.iter().zip(vals) {
                    if v < new[i] {
                        new[i] = v;
                    }
                }
            }
        }
        if !self.sampled.is_empty() {
            let h = (0..grid.dim()).map(|ax| grid.spacing(ax)).fold(f64::INFINITY, f64::min);
            let sampled = par::map_range(grid.len(), |i| {
                let x = grid.node(i);
                let mut scratch = Scratch::new(grid.dim());
                self.sampled
                    .iter()
                    .map(|u| sampled_line_value(grid, x.as_slice(), u.as_slice(), h, old[i], &mut scratch))
                    .fold(old[i], f64::min)
            });
            for (n, s) in new.iter_mut().zip(sampled) {
                if s < *n {
                    *n = s;
                }
            }
        }
        GridFunction {
            values: new,
            ..grid.clone()
        }
    }
}

fn lines_along(grid: &GridFunction, p: &[i64]) -> Vec<Vec<usize>> {
    let d = grid.dim();
    let inside = |idx: &[i64]| (0..d).all(|ax| idx[ax] >= 0 && idx[ax] < grid.resolution[ax] as i64);
    let mut lines = Vec::new();
    for flat in 0..grid.len() {
        let idx: Vec<i64> = grid.multi_index(flat).into_iter().map(|x| x as i64).collect();
        let prev: Vec<i64> = idx.iter().zip(p).map(|(a, b)| a - b).collect();
        if inside(&prev) {
            continue;
        }
        let mut line = Vec::new();
        let mut cur = idx;
        while inside(&cur) {
            let u: Vec<usize> = cur.iter().map(|&x| x as usize).collect();
            line.push(grid.flat_index(&u));
            for ax in 0..d {
                cur[ax] += p[ax];
            }
        }
        if line.len() >= 3 {
            lines.push(line);
        }
    }
    lines
}

fn sampled_line_value(grid: &GridFunction, x: &[f64], u: &[f64], h: f64, at_x: f64, scratch: &mut Scratch) -> f64 {
    // parameter range inside the box
    let (mut tmin, mut tmax) = (f64::NEG_INFINITY, f64::INFINITY);
    for ax in 0..grid.dim() {
        if u[ax].abs() < 1e-15 {
            continue;
        }
        let a = (grid.lo[ax] - x[ax]) / u[ax];
        let b = (grid.hi[ax] - x[ax]) / u[ax];
        tmin = tmin.max(a.min(b));
        tmax = tmax.min(a.max(b));
    }
    if !(tmin < -1e-12 && tmax > 1e-12) {
        return at_x;
    }
    let below = (-tmin / h).floor() as i64;
    let above = (tmax / h).floor() as i64;
    let (mut s, mut v) = (std::mem::take(&mut scratch.s), std::mem::take(&mut scratch.v));
    s.clear();
    v.clear();
    let mut zero = 0;
    for k in -below..=above {
        let t = k as f64 * h;
        if k == 0 {
            zero = s.len();
            s.push(0.0);
            v.push(at_x);
            continue;
        }
        for ax in 0..x.len() {
            scratch.point[ax] = x[ax] + u[ax] * t;
        }
        let p = std::mem::take(&mut scratch.point);
        s.push(t);
        v.push(grid.interpolate(&p, scratch));
        scratch.point = p;
    }
    let out = lower_envelope_1d(&s, &v)[zero];
    scratch.s = s;
    scratch.v = v;
    out
}

pub fn lambda_envelope(f: &GridFunction, op: &Operator, max_iter: usize, dir_count: usize, tol: f64) -> Result<EnvelopeResult> {
    let solver = EnvelopeSolver::new(f, op, dir_count, 0)?;
    let mut grid = f.clone();
    let mut sweeps = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = solver.sweep(&grid);
        let mut stats = SweepStats {
            max_decrease: 0.0,
            max_increase: f64::NEG_INFINITY,
        };
        for (a, b) in grid.values.iter().zip(&next.values) {
            stats.max_decrease = stats.max_decrease.max(a - b);
            stats.max_increase = stats.max_increase.max(b - a);
        }
        sweeps.push(stats);
        grid = next;
        if stats.max_decrease < tol {
            converged = true;
            break;
        }
    }
    Ok(EnvelopeResult { grid, sweeps, converged })
}
