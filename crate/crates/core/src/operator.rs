//! Constant-coefficient first-order operators `A u = sum_i A_i du/dx_i` and the
//! linear algebra of their characteristic cone.
//!
//! The cone is the set of states `lambda` for which some nonzero frequency `w`
//! satisfies `(sum_i w_i A_i) lambda = 0`. Jumps across a line with normal `w`
//! are free exactly when they lie in this set, which is what every laminate
//! construction downstream relies on.
//!
//! Rank decisions are made on singular values with a threshold relative to
//! the largest one, `tol * max(1, sigma_max)`.

use nalgebra::{DMatrix, DVector};
use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, project, right_svd, singular_values};
use crate::sampling;

pub const DEFAULT_TOL_CONE: f64 = 1e-9;

/// Trial budget for accept-reject cone sampling on operators without an
/// analytic parametrization.
pub const CONE_TRIAL_BUDGET: usize = 1_000_000;

/// The matrices `A_1..A_N`, each `m x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    name: Option<String>,
    n_space: usize,
    d_state: usize,
    m_eq: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl Operator {
    pub fn new(name: Option<String>, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Input("operator needs at least one matrix".into()))?;
        let (m_eq, d_state) = first.shape();
        if m_eq == 0 || d_state == 0 {
            return Err(Error::Input("operator matrices must be non-empty".into()));
        }
        for (i, a) in matrices.iter().enumerate() {
            if a.shape() != (m_eq, d_state) {
                return Err(Error::Dimension(format!(
                    "matrix {} is {}x{}, expected {}x{}",
                    i + 1,
                    a.nrows(),
                    a.ncols(),
                    m_eq,
                    d_state
                )));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("matrix {} has non-finite entries", i + 1)));
            }
        }
        Ok(Self {
            name,
            n_space: matrices.len(),
            d_state,
            m_eq,
            matrices,
        })
    }

    /// Builds an operator from row-major nested lists, `matrices[i][row][col]`.
    pub fn from_rows(name: Option<&str>, matrices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mats = matrices
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let m = rows.len();
                let d = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension(format!("matrix {} has ragged rows", i + 1)));
                }
                Ok(DMatrix::from_fn(m, d, |r, c| rows[r][c]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name.map(str::to_owned), mats)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn d_state(&self) -> usize {
        self.d_state
    }

    pub fn m_eq(&self) -> usize {
        self.m_eq
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<f64> {
        &self.matrices[i]
    }

    /// `m x N` matrix whose i-th column is `A_i lambda`.
    pub fn jump_matrix(&self, lambda: &DVector<f64>) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.m_eq, self.n_space);
        for (i, a) in self.matrices.iter().enumerate() {
            b.set_column(i, &(a * lambda));
        }
        b
    }

    fn check_state(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.d_state {
            return Err(Error::Dimension(format!(
                "state vector has length {}, operator expects d = {}",
                v.len(),
                self.d_state
            )));
        }
        Ok(())
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_owned());
        self
    }
}

/// `sum_i w_i A_i`.
pub fn symbol_matrix(op: &Operator, w: &[f64]) -> Result<DMatrix<f64>> {
    if w.len() != op.n_space {
        return Err(Error::Dimension(format!(
            "frequency has length {}, operator has N = {}",
            w.len(),
            op.n_space
        )));
    }
    let mut s = DMatrix::<f64>::zeros(op.m_eq, op.d_state);
    for (wi, a) in w.iter().zip(&op.matrices) {
        s += a * *wi;
    }
    Ok(s)
}

fn symbol_unchecked(op: &Operator, w: &DVector<f64>) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::zeros(op.m_eq, op.d_state);
    for (wi, a) in w.iter().zip(&op.matrices) {
        s += a * *wi;
    }
    s
}

/// A cone direction together with an orthonormal basis of the frequencies
/// that annihilate it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeBasis {
    pub lambda: DVector<f64>,
    pub v_basis: Vec<DVector<f64>>,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMembership {
    pub member: bool,
    /// N-th singular value of the jump matrix of the normalized direction
    /// (zero when `m < N`).
    pub sigma_min: f64,
    /// Set when `m < N`: the jump matrix can never have rank `N`, so every
    /// direction is in the cone.
    pub trivial: bool,
}

/// Rank test on `B(lambda)`. The test runs on `lambda / |lambda|` so the
/// answer does not depend on the scale of `lambda`; `lambda = 0` is a member.
pub fn cone_contains(op: &Operator, lambda: &DVector<f64>, tol_cone: f64) -> Result<ConeMembership> {
    op.check_state(lambda)?;
    if tol_cone <= 0.0 {
        return Err(Error::Input("tol_cone must be positive".into()));
    }
    let trivial = op.m_eq < op.n_space;
    let norm = lambda.norm();
    if norm == 0.0 {
        return Ok(ConeMembership {
            member: true,
            sigma_min: 0.0,
            trivial,
        });
    }
    let b = op.jump_matrix(&(lambda / norm));
    if trivial {
        return Ok(ConeMembership {
            member: true,
            sigma_min: 0.0,
            trivial,
        });
    }
    let s = singular_values(&b);
    let sigma_max = s[0];
    let sigma_n = s[op.n_space - 1];
    Ok(ConeMembership {
        member: sigma_n <= tol_cone * sigma_max.max(1.0),
        sigma_min: sigma_n,
        trivial,
    })
}

/// Numerical null space of `B(lambda)`: the frequencies `w` for which a jump
/// by `lambda` across a line with normal `w` is compatible. Empty when
/// `lambda` is not in the cone.
pub fn v_lambda(op: &Operator, lambda: &DVector<f64>, tol_cone: f64) -> Result<ConeBasis> {
    op.check_state(lambda)?;
    let norm = lambda.norm();
    if norm == 0.0 {
        let basis = (0..op.n_space)
            .map(|i| DVector::from_fn(op.n_space, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        return Ok(ConeBasis {
            lambda: lambda.clone(),
            v_basis: basis,
            sigma_min: 0.0,
        });
    }
    let svd = right_svd(&op.jump_matrix(&(lambda / norm)));
    let thr = tol_cone * svd.values[0].max(1.0);
    let v_basis: Vec<DVector<f64>> = svd
        .values
        .iter()
        .zip(svd.vectors)
        .filter(|(s, _)| **s <= thr)
        .map(|(_, v)| canonical_sign(v.normalize()))
        .collect();
    let sigma_min = *svd.values.last().expect("N >= 1");
    Ok(ConeBasis {
        lambda: lambda.clone(),
        v_basis,
        sigma_min,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    /// True iff the symbol had full row rank `m` at every sample.
    pub holds: bool,
    /// A frequency where the rank drops below `m`, if one was found.
    pub witness: Option<DVector<f64>>,
    pub samples_checked: usize,
    pub min_sigma: f64,
    pub ranks_seen: Vec<usize>,
}

fn numerical_rank(s: &[f64], tol: f64) -> usize {
    let thr = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > thr).count()
}

/// m-th singular value of the symbol, zero when `m > d`.
fn symbol_sigma_m(op: &Operator, w: &DVector<f64>) -> (f64, usize) {
    let s = singular_values(&symbol_unchecked(op, w));
    let rank = numerical_rank(&s, DEFAULT_TOL_CONE);
    let sig = if op.m_eq <= s.len() { s[op.m_eq - 1] } else { 0.0 };
    (sig, rank)
}

/// Sampled check that the symbol has rank `m` on the unit sphere of
/// frequencies. Quasi-uniform points plus `samples` seeded random points are
/// evaluated; from the sample with the smallest m-th singular value a local
/// alternating minimisation looks for an exact rank drop. The result is a
/// sampled check, not a proof.
pub fn constant_rank_check(op: &Operator, samples: usize, seed: u64) -> Result<RankReport> {
    if samples == 0 {
        return Err(Error::Input("samples must be >= 1".into()));
    }
    let n = op.n_space;
    let mut points = sampling::quasi_uniform_sphere(samples, n, seed);
    let mut rng = sampling::rng(seed);
    points.extend((0..samples).map(|_| sampling::unit_sphere(&mut rng, n)));

    let mut ranks_seen = Vec::new();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut witness = None;
    for w in &points {
        let (sig, rank) = symbol_sigma_m(op, w);
        if !ranks_seen.contains(&rank) {
            ranks_seen.push(rank);
        }
        if rank < op.m_eq && witness.is_none() {
            witness = Some(w.clone());
        }
        if best.as_ref().is_none_or(|(b, _)| sig < *b) {
            best = Some((sig, w.clone()));
        }
    }
    let (mut min_sigma, start) = best.expect("at least one sample");
    if witness.is_none() && op.m_eq <= op.d_state {
        let (sig, w) = minimise_symbol_sigma(op, start);
        min_sigma = min_sigma.min(sig);
        let rank = numerical_rank(&singular_values(&symbol_unchecked(op, &w)), DEFAULT_TOL_CONE);
        if rank < op.m_eq {
            if !ranks_seen.contains(&rank) {
                ranks_seen.push(rank);
            }
            witness = Some(w);
        }
    }
    ranks_seen.sort_unstable();
    Ok(RankReport {
        holds: witness.is_none(),
        witness,
        samples_checked: points.len(),
        min_sigma,
        ranks_seen,
    })
}

/// Minimises `|A(w)^T y|` over unit `w`, unit `y` by alternating the two
/// singular-vector problems. Each half step cannot increase the objective.
fn minimise_symbol_sigma(op: &Operator, mut w: DVector<f64>) -> (f64, DVector<f64>) {
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let s = symbol_unchecked(op, &w);
        // y: left singular vector for the smallest singular value of A(w),
        // i.e. the smallest right singular vector of A(w)^T.
        let svd = right_svd(&s.transpose());
        let y = svd.vectors.last().expect("m >= 1").clone();
        // C(y) = [A_1^T y, ..., A_N^T y]
        let mut c = DMatrix::zeros(op.d_state, op.n_space);
        for (i, a) in op.matrices.iter().enumerate() {
            c.set_column(i, &(a.transpose() * &y));
        }
        let svd_c = right_svd(&c);
        w = svd_c.vectors.last().expect("N >= 1").clone();
        let obj = *svd_c.values.last().expect("N >= 1");
        if obj < 1e-15 || (last - obj).abs() <= 1e-14 * last.max(1.0) {
            last = obj;
            break;
        }
        last = obj;
    }
    (last, canonical_sign(w))
}

/// Operator seen in rotated coordinates `x = R y`: `A~_j = sum_i R_ij A_i`.
/// Satisfies `A~(w) = A(R w)`.
pub fn rotate_operator(op: &Operator, r: &DMatrix<f64>) -> Result<Operator> {
    let n = op.n_space;
    if r.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "rotation is {}x{}, operator has N = {}",
            r.nrows(),
            r.ncols(),
            n
        )));
    }
    let defect = (r.transpose() * r - DMatrix::<f64>::identity(n, n)).amax();
    if defect > 1e-12 {
        return Err(Error::Input(format!("R is not orthogonal (|R^T R - I| = {defect:.3e})")));
    }
    let matrices = (0..n)
        .map(|j| {
            let mut a = DMatrix::<f64>::zeros(op.m_eq, op.d_state);
            for i in 0..n {
                a += &op.matrices[i] * r[(i, j)];
            }
            a
        })
        .collect();
    Operator::new(op.name.clone(), matrices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parametrization {
    Everything,
    RankOneCurl { m: usize },
    Sys4,
    Maxwell,
}

fn parametrization(op: &Operator) -> Option<Parametrization> {
    let name = op.name.as_deref()?;
    let reference = builtin(name)?;
    if reference.matrices != op.matrices {
        return None;
    }
    Some(match name {
        "div2" => Parametrization::Everything,
        "curl2-m1" => Parametrization::RankOneCurl { m: 1 },
        "curl2-m2" => Parametrization::RankOneCurl { m: 2 },
        "sys4" => Parametrization::Sys4,
        "maxwell3" => Parametrization::Maxwell,
        _ => return None,
    })
}

fn analytic_direction(kind: Parametrization, rng: &mut sampling::SeededRng, d: usize) -> DVector<f64> {
    let v = match kind {
        Parametrization::Everything => sampling::gaussian(rng, d),
        Parametrization::RankOneCurl { m } => {
            let a = sampling::gaussian(rng, m);
            let nu = sampling::gaussian(rng, 2);
            DVector::from_fn(2 * m, |k, _| a[k / 2] * nu[k % 2])
        }
        Parametrization::Sys4 => {
            let p = sampling::gaussian(rng, 2);
            let s = sampling::gaussian(rng, 1)[0];
            DVector::from_vec(vec![p[0], p[1], -s * p[1], s * p[0]])
        }
        Parametrization::Maxwell => {
            let h = sampling::gaussian(rng, 3);
            let g = sampling::gaussian(rng, 3);
            let a = &g - &h * (g.dot(&h) / h.norm_squared());
            let m = a - &h;
            DVector::from_iterator(6, m.iter().chain(h.iter()).copied())
        }
    };
    let n = v.norm();
    if n > 1e-12 {
        v / n
    } else {
        analytic_direction(kind, rng, d)
    }
}

/// Deterministic sample of unit cone directions.
///
/// Built-in operators use their analytic parametrization. Any other operator
/// is handled by accept-reject: a random direction is pulled towards the cone
/// by alternating minimisation of `|A(w) lambda|` before the rank test.
pub fn cone_sample(op: &Operator, count: usize, seed: u64, tol_cone: f64) -> Result<Vec<ConeBasis>> {
    cone_sample_with_budget(op, count, seed, tol_cone, CONE_TRIAL_BUDGET)
}

pub fn cone_sample_with_budget(
    op: &Operator,
    count: usize,
    seed: u64,
    tol_cone: f64,
    budget: usize,
) -> Result<Vec<ConeBasis>> {
    if count == 0 {
        return Err(Error::Input("count must be >= 1".into()));
    }
    let mut rng = sampling::rng(seed);
    let d = op.d_state;
    let mut out = Vec::with_capacity(count);
    if let Some(kind) = parametrization(op) {
        while out.len() < count {
            let lambda = analytic_direction(kind, &mut rng, d);
            let basis = v_lambda(op, &lambda, tol_cone)?;
            if !basis.v_basis.is_empty() {
                out.push(basis);
            }
        }
        return Ok(out);
    }
    let mut trials = 0;
    while out.len() < count && trials < budget {
        trials += 1;
        let start = sampling::unit_sphere(&mut rng, d);
        let lambda = pull_towards_cone(op, start, tol_cone);
        if cone_contains(op, &lambda, tol_cone)?.member {
            let basis = v_lambda(op, &lambda, tol_cone)?;
            if !basis.v_basis.is_empty() {
                out.push(basis);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::TrivialCone(trials));
    }
    Ok(out)
}

/// Alternating minimisation of `|A(w) lambda|` over unit `w` and unit
/// `lambda`. When `A(w)` has a null space the current direction is projected
/// onto it, which keeps the sample spread instead of collapsing onto one
/// singular vector.
fn pull_towards_cone(op: &Operator, mut lambda: DVector<f64>, tol_cone: f64) -> DVector<f64> {
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        let b = op.jump_matrix(&lambda);
        let w = right_svd(&b).vectors.last().expect("N >= 1").clone();
        let s = symbol_unchecked(op, &w);
        let svd = right_svd(&s);
        let thr = tol_cone * svd.values[0].max(1.0);
        let null: Vec<DVector<f64>> = svd
            .values
            .iter()
            .zip(&svd.vectors)
            .filter(|(v, _)| **v <= thr)
            .map(|(_, v)| v.clone())
            .collect();
        if !null.is_empty() {
            let p = project(&lambda, &null);
            let pn = p.norm();
            return if pn > 1e-8 { p / pn } else { null[0].clone() };
        }
        lambda = svd.vectors.last().expect("d >= 1").clone();
        let obj = *svd.values.last().expect("d >= 1");
        if (last - obj).abs() <= 1e-14 {
            break;
        }
        last = obj;
    }
    lambda
}

/// Names of the bundled operators.
pub const BUILTIN_NAMES: [&str; 5] = ["div2", "curl2-m1", "curl2-m2", "sys4", "maxwell3"];

/// Bundled operators: planar divergence, planar curl with one and two rows,
/// the four-component planar system and the magnetostatic Maxwell system.
pub fn builtin(name: &str) -> Option<Operator> {
    let rows: Vec<Vec<Vec<f64>>> = match name {
        "div2" => vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]],
        "curl2-m1" => vec![vec![vec![0.0, 1.0]], vec![vec![-1.0, 0.0]]],
        "curl2-m2" => vec![
            vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
            vec![vec![-1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, -1.0, 0.0]],
        ],
        "sys4" => vec![
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, -1.0]],
            vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
        ],
        "maxwell3" => {
            // u = (m, h); rows: div(m + h), then the three components of curl h.
            let mut mats = vec![vec![vec![0.0; 6]; 4]; 3];
            for (i, a) in mats.iter_mut().enumerate() {
                a[0][i] = 1.0;
                a[0][3 + i] = 1.0;
            }
            // (curl h)_1 = d2 h3 - d3 h2
            mats[1][1][5] = 1.0;
            mats[2][1][4] = -1.0;
            // (curl h)_2 = d3 h1 - d1 h3
            mats[2][2][3] = 1.0;
            mats[0][2][5] = -1.0;
            // (curl h)_3 = d1 h2 - d2 h1
            mats[0][3][4] = 1.0;
            mats[1][3][3] = -1.0;
            mats
        }
        _ => return None,
    };
    Some(Operator::from_rows(Some(name), &rows).expect("built-in operators are well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn symbol_examples() {
        let div = builtin("div2").unwrap();
        let s = symbol_matrix(&div, &[1.0, 0.0]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let zero = symbol_matrix(&div, &[0.0, 0.0]).unwrap();
        assert_eq!(zero, DMatrix::zeros(1, 2));

        let sys = builtin("sys4").unwrap();
        let s = symbol_matrix(&sys, &[1.0, 1.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]);
        assert_eq!(s, expected);
        assert!(matches!(symbol_matrix(&sys, &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_malformed_operators() {
        let bad = Operator::from_rows(None, &[vec![vec![1.0, 0.0]], vec![vec![1.0]]]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
        let nan = Operator::from_rows(None, &[vec![vec![f64::NAN, 0.0]]]);
        assert!(matches!(nan, Err(Error::Input(_))));
    }

    #[test]
    fn constant_rank_examples() {
        let div = builtin("div2").unwrap();
        let r = constant_rank_check(&div, 64, 1).unwrap();
        assert!(r.holds);
        assert_eq!(r.samples_checked, 128);

        let curl = builtin("curl2-m1").unwrap();
        assert!(constant_rank_check(&curl, 64, 1).unwrap().holds);

        let degenerate = Operator::from_rows(None, &[vec![vec![1.0, 0.0]], vec![vec![2.0, 0.0]]]).unwrap();
        let r = constant_rank_check(&degenerate, 64, 1).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        let expected = v(&[-2.0, 1.0]).normalize();
        assert!((w.dot(&expected).abs() - 1.0).abs() < 1e-9, "witness {w}");
    }

    #[test]
    fn maxwell_symbol_rank_is_constant_but_not_full() {
        let mx = builtin("maxwell3").unwrap();
        let r = constant_rank_check(&mx, 50, 3).unwrap();
        assert!(!r.holds);
        assert_eq!(r.ranks_seen, vec![3]);
    }

    #[test]
    fn cone_examples() {
        let sys = builtin("sys4").unwrap();
        assert!(cone_contains(&sys, &v(&[1.0, 1.0, 1.0, -1.0]), 1e-9).unwrap().member);
        assert!(!cone_contains(&sys, &v(&[1.0, 0.0, 1.0, 0.0]), 1e-9).unwrap().member);
        assert!(cone_contains(&sys, &v(&[0.0; 4]), 1e-9).unwrap().member);
        let div = builtin("div2").unwrap();
        let c = cone_contains(&div, &v(&[0.3, -0.8]), 1e-9).unwrap();
        assert!(c.member && c.trivial);
    }

    #[test]
    fn v_lambda_examples() {
        let div = builtin("div2").unwrap();
        let b = v_lambda(&div, &v(&[1.0, 0.0]), 1e-9).unwrap();
        assert_eq!(b.v_basis.len(), 1);
        assert_abs_diff_eq!(b.v_basis[0], v(&[0.0, 1.0]), epsilon = 1e-14);

        let sys = builtin("sys4").unwrap();
        let b = v_lambda(&sys, &v(&[1.0, 1.0, 1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(b.v_basis.len(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(b.v_basis[0], v(&[s, -s]), epsilon = 1e-14);

        let b = v_lambda(&sys, &v(&[0.0; 4]), 1e-9).unwrap();
        assert_eq!(b.v_basis, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);

        let off = v_lambda(&sys, &v(&[1.0, 0.0, 1.0, 0.0]), 1e-9).unwrap();
        assert!(off.v_basis.is_empty());
    }

    #[test]
    fn cone_sample_builtins() {
        let div = builtin("div2").unwrap();
        let s = cone_sample(&div, 4, 9, 1e-9).unwrap();
        assert_eq!(s.len(), 4);
        for b in &s {
            assert_abs_diff_eq!(b.lambda.norm(), 1.0, epsilon = 1e-12);
            assert!(b.sigma_min <= 1e-9);
        }

        let sys = builtin("sys4").unwrap();
        let s = cone_sample(&sys, 8, 9, 1e-9).unwrap();
        assert_eq!(s.len(), 8);
        for b in &s {
            let l = &b.lambda;
            assert!((l[0] * l[2] + l[1] * l[3]).abs() <= 1e-9);
        }
        assert_eq!(s, cone_sample(&sys, 8, 9, 1e-9).unwrap());
    }

    #[test]
    fn maxwell_samples_have_the_expected_structure() {
        let mx = builtin("maxwell3").unwrap();
        for b in cone_sample(&mx, 16, 4, 1e-9).unwrap() {
            let m = b.lambda.rows(0, 3).into_owned();
            let h = b.lambda.rows(3, 3).into_owned();
            let a = &m + &h;
            assert!(a.dot(&h).abs() < 1e-12);
            assert!(cone_contains(&mx, &b.lambda, 1e-9).unwrap().member);
        }
    }

    #[test]
    fn accept_reject_sampler_on_unnamed_operator() {
        let sys = builtin("sys4").unwrap();
        let anon = Operator::new(None, sys.matrices().to_vec()).unwrap();
        let s = cone_sample(&anon, 8, 2, 1e-9).unwrap();
        assert_eq!(s.len(), 8);
        for b in &s {
            let l = &b.lambda;
            assert!((l[0] * l[2] + l[1] * l[3]).abs() <= 1e-9);
        }
    }

    #[test]
    fn trivial_cone_is_reported() {
        // A_1 = I, A_2 = rotation by 90 degrees: B(lambda) = [lambda, J lambda] has rank 2.
        let op = Operator::from_rows(
            None,
            &[
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            ],
        )
        .unwrap();
        let r = cone_sample_with_budget(&op, 2, 1, 1e-9, 200);
        assert!(matches!(r, Err(Error::TrivialCone(200))));
    }

    #[test]
    fn rotate_examples() {
        let div = builtin("div2").unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(rotate_operator(&div, &id).unwrap(), div);

        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let rot = rotate_operator(&div, &r).unwrap();
        assert_eq!(rot.matrix(0), div.matrix(1));
        assert_eq!(rot.matrix(1), &(-div.matrix(0)));

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(rotate_operator(&div, &bad), Err(Error::Input(_))));
    }

    #[test]
    fn rotated_symbol_identity() {
        let sys = builtin("sys4").unwrap();
        let th: f64 = 0.7;
        let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let rot = rotate_operator(&sys, &r).unwrap();
        let mut rng = sampling::rng(5);
        for _ in 0..100 {
            let w = sampling::gaussian(&mut rng, 2);
            let lhs = symbol_matrix(&rot, w.as_slice()).unwrap();
            let rw = &r * &w;
            let rhs = symbol_matrix(&sys, rw.as_slice()).unwrap();
            assert!((lhs - rhs).amax() <= 1e-12);
        }
    }
}
