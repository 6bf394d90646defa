//! Small dense linear-algebra helpers shared by the cone and lemma code.

use nalgebra::{DMatrix, DVector};

/// Singular values (descending) of `b` together with the matching right
/// singular vectors. Wide matrices are zero-padded so that a full set of
/// `ncols` right vectors is always returned.
pub(crate) struct RightSvd {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

pub(crate) fn right_svd(b: &DMatrix<f64>) -> RightSvd {
    let (rows, cols) = b.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(b);
        p
    } else {
        b.clone()
    };
    let svd = nalgebra::linalg::SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut pairs: Vec<(f64, DVector<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, v_t.row(i).transpose()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (values, vectors) = pairs.into_iter().unzip();
    RightSvd { values, vectors }
}

/// Singular values of `b`, descending.
pub(crate) fn singular_values(b: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = b.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Flips `v` so that its first non-negligible entry is positive.
pub(crate) fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Orthogonal projection of `x` onto the span of the orthonormal `basis`.
pub(crate) fn project(x: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for b in basis {
        out.axpy(b.dot(x), b, 1.0);
    }
    out
}
