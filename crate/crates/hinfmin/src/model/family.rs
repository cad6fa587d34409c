//! Affine families of constant matrices weighted by scalar coefficients.

use faer::c64;
use faer::mat::{Mat, MatRef};
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::model::coefficient::ScalarCoefficient;

/// One constant matrix of an affine family, stored dense or compressed-column.
///
/// Values are kept complex so that full-system data (real) and projected
/// reduced-system data (complex) share a single representation.
#[derive(Debug, Clone)]
pub enum TermMatrix {
    Dense(Mat<c64>),
    Sparse(SparseColMat<usize, c64>),
}

impl TermMatrix {
    pub fn dense_real(m: MatRef<'_, f64>) -> Self {
        Self::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
            c64::new(m[(i, j)], 0.0)
        }))
    }

    pub fn sparse_from_real_triplets(
        rows: usize,
        cols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let triplets: Vec<Triplet<usize, usize, c64>> = entries
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, c64::new(v, 0.0)))
            .collect();
        SparseColMat::try_new_from_triplets(rows, cols, &triplets)
            .map(Self::Sparse)
            .map_err(|e| Error::DimensionMismatch(format!("sparse term construction: {e:?}")))
    }

    pub fn sparse_identity(n: usize) -> Self {
        let triplets: Vec<Triplet<usize, usize, c64>> = (0..n)
            .map(|i| Triplet::new(i, i, c64::new(1.0, 0.0)))
            .collect();
        Self::Sparse(SparseColMat::try_new_from_triplets(n, n, &triplets).unwrap())
    }

    pub fn nrows(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Self::Dense(m) => m.ncols(),
            Self::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse(_))
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        match self {
            Self::Dense(m) => {
                (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
            }
            Self::Sparse(m) => m.val().iter().all(|v| v.im == 0.0),
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SparseColMat<usize, c64> {
        match self {
            Self::Sparse(m) => m.clone(),
            Self::Dense(m) => {
                let mut triplets = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if v != c64::new(0.0, 0.0) {
                            triplets.push(Triplet::new(i, j, v));
                        }
                    }
                }
                SparseColMat::try_new_from_triplets(m.nrows(), m.ncols(), &triplets).unwrap()
            }
        }
    }

    /// `acc += scale * M`.
    pub fn acc_scaled(&self, scale: c64, acc: &mut Mat<c64>) {
        match self {
            Self::Dense(m) => {
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        acc[(i, j)] += scale * m[(i, j)];
                    }
                }
            }
            Self::Sparse(m) => {
                let sym = m.symbolic();
                let val = m.val();
                for j in 0..m.ncols() {
                    let range = sym.col_range(j);
                    let rows = &sym.row_idx()[range.clone()];
                    let vals = &val[range];
                    for (&i, &v) in rows.iter().zip(vals) {
                        acc[(i, j)] += scale * v;
                    }
                }
            }
        }
    }

    /// `acc += scale * (M * x)`.
    pub fn acc_mul(&self, scale: c64, x: MatRef<'_, c64>, acc: &mut Mat<c64>) {
        let prod = match self {
            Self::Dense(m) => m * x,
            Self::Sparse(m) => m * x,
        };
        for j in 0..acc.ncols() {
            for i in 0..acc.nrows() {
                acc[(i, j)] += scale * prod[(i, j)];
            }
        }
    }

    /// `W^H * M * V` (Petrov-Galerkin restriction of a square term).
    pub fn project(&self, w: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Mat<c64> {
        let mv = match self {
            Self::Dense(m) => m * v,
            Self::Sparse(m) => m * v,
        };
        w.adjoint() * mv
    }

    /// `W^H * M` (restriction of an input term).
    pub fn project_left(&self, w: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Self::Dense(m) => w.adjoint() * m,
            Self::Sparse(m) => w.adjoint() * m,
        }
    }

    /// `M * V` (restriction of an output term).
    pub fn project_right(&self, v: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Self::Dense(m) => m * v,
            Self::Sparse(m) => m * v,
        }
    }
}

/// An affine matrix-valued function `mu -> f_1(mu) M_1 + ... + f_k(mu) M_k`.
#[derive(Debug, Clone)]
pub struct AffineMatrixFamily {
    terms: Vec<(ScalarCoefficient, TermMatrix)>,
    rows: usize,
    cols: usize,
}

impl AffineMatrixFamily {
    pub fn new(terms: Vec<(ScalarCoefficient, TermMatrix)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidInput(
                "affine family needs at least one term".into(),
            ));
        };
        let (rows, cols) = (first.nrows(), first.ncols());
        for (idx, (_, m)) in terms.iter().enumerate() {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "family term {idx} is {}x{}, expected {rows}x{cols}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { terms, rows, cols })
    }

    /// Single-term family with constant coefficient 1.
    pub fn constant(m: TermMatrix) -> Self {
        Self::new(vec![(ScalarCoefficient::Constant(1.0), m)]).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(ScalarCoefficient, TermMatrix)] {
        &self.terms
    }

    pub fn any_sparse(&self) -> bool {
        self.terms.iter().any(|(_, m)| m.is_sparse())
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, m)| m.is_real())
    }

    pub fn max_coordinate(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|(c, _)| c.max_coordinate())
            .max()
    }

    /// Coefficient values `f_i(mu)`, rejecting non-finite results.
    pub fn values(&self, mu: &[f64]) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|(c, _)| {
                let v = c.eval(mu);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::CoefficientFailure {
                        mu: mu.to_vec(),
                        detail: format!("coefficient {c:?} returned {v}"),
                    })
                }
            })
            .collect()
    }

    /// Partial derivatives `df_i/dmu_j(mu)`.
    pub fn partials(&self, mu: &[f64], j: usize) -> Vec<f64> {
        self.terms.iter().map(|(c, _)| c.partial(mu, j)).collect()
    }

    /// Dense assembly `M(mu)`.
    pub fn assemble_dense(&self, mu: &[f64]) -> Result<Mat<c64>> {
        let values = self.values(mu)?;
        let mut acc = Mat::zeros(self.rows, self.cols);
        for ((_, m), v) in self.terms.iter().zip(&values) {
            m.acc_scaled(c64::new(*v, 0.0), &mut acc);
        }
        Ok(acc)
    }

    /// Sparse assembly `M(mu)`; duplicate positions across terms are summed.
    pub fn assemble_sparse(&self, mu: &[f64]) -> Result<SparseColMat<usize, c64>> {
        let values = self.values(mu)?;
        let mut triplets = Vec::new();
        for ((_, m), &v) in self.terms.iter().zip(&values) {
            let scale = c64::new(v, 0.0);
            let sp = m.to_sparse();
            let sym = sp.symbolic();
            for j in 0..sp.ncols() {
                let range = sym.col_range(j);
                for (idx, &i) in sym.row_idx()[range.clone()].iter().enumerate() {
                    triplets.push(Triplet::new(i, j, scale * sp.val()[range.start + idx]));
                }
            }
        }
        SparseColMat::try_new_from_triplets(self.rows, self.cols, &triplets)
            .map_err(|e| Error::DimensionMismatch(format!("sparse assembly: {e:?}")))
    }

    /// `acc += sum_i weights[i] * (M_i * x)`, the workhorse behind pencil
    /// derivatives. Weights are arbitrary complex reweightings of the terms.
    pub fn acc_weighted_mul(&self, weights: &[c64], x: MatRef<'_, c64>, acc: &mut Mat<c64>) {
        for ((_, m), &w) in self.terms.iter().zip(weights) {
            if w != c64::new(0.0, 0.0) {
                m.acc_mul(w, x, acc);
            }
        }
    }

    /// Petrov-Galerkin restriction of every term: `W^H M_i V`, sharing the
    /// coefficient functions with the parent family.
    pub fn project(&self, w: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, m)| (c.clone(), TermMatrix::Dense(m.project(w, v))))
            .collect();
        Self::new(terms).unwrap()
    }

    pub fn project_left(&self, w: MatRef<'_, c64>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, m)| (c.clone(), TermMatrix::Dense(m.project_left(w))))
            .collect();
        Self::new(terms).unwrap()
    }

    pub fn project_right(&self, v: MatRef<'_, c64>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, m)| (c.clone(), TermMatrix::Dense(m.project_right(v))))
            .collect();
        Self::new(terms).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_approx_eq(a: MatRef<'_, c64>, b: MatRef<'_, c64>, tol: f64) -> bool {
        (a - b).norm_max() <= tol
    }

    #[test]
    fn single_identity_term_assembles_to_identity() {
        let fam = AffineMatrixFamily::constant(TermMatrix::sparse_identity(3));
        let m = fam.assemble_dense(&[0.7]).unwrap();
        assert!(mat_approx_eq(
            m.as_ref(),
            Mat::<c64>::identity(3, 3).as_ref(),
            0.0
        ));
    }

    #[test]
    fn weighted_two_term_assembly_matches_direct_sum() {
        // coefficients mu0 and mu0*mu1 at mu = (2, 3) give weights 2 and 6
        let m1 = Mat::from_fn(4, 4, |i, j| c64::new((i + 2 * j) as f64, 0.0));
        let m2 = Mat::from_fn(4, 4, |i, j| c64::new((3 * i) as f64 - j as f64, 0.0));
        let fam = AffineMatrixFamily::new(vec![
            (
                ScalarCoefficient::Coordinate(0),
                TermMatrix::Dense(m1.clone()),
            ),
            (
                ScalarCoefficient::coordinate_product(0, 1, 2),
                TermMatrix::Dense(m2.clone()),
            ),
        ])
        .unwrap();
        let got = fam.assemble_dense(&[2.0, 3.0]).unwrap();
        let want = Mat::from_fn(4, 4, |i, j| 2.0 * m1[(i, j)] + 6.0 * m2[(i, j)]);
        assert!(mat_approx_eq(got.as_ref(), want.as_ref(), 1e-14));
    }

    #[test]
    fn assembly_is_linear_in_each_coefficient() {
        let m1 = Mat::from_fn(3, 3, |i, j| c64::new(1.0 + i as f64 * j as f64, 0.0));
        let fam = AffineMatrixFamily::new(vec![(
            ScalarCoefficient::Coordinate(0),
            TermMatrix::Dense(m1),
        )])
        .unwrap();
        let at1 = fam.assemble_dense(&[1.0]).unwrap();
        let at5 = fam.assemble_dense(&[5.0]).unwrap();
        let scaled = &at1 * faer::Scale(c64::new(5.0, 0.0));
        assert!(mat_approx_eq(at5.as_ref(), scaled.as_ref(), 1e-13));
    }

    #[test]
    fn sparse_and_dense_assembly_agree() {
        let entries = [(0usize, 0usize, 2.0), (1, 2, -1.5), (3, 1, 4.0)];
        let sp = TermMatrix::sparse_from_real_triplets(4, 4, &entries).unwrap();
        let dn = TermMatrix::Dense(sp.to_dense());
        let fam_sp = AffineMatrixFamily::new(vec![(ScalarCoefficient::Coordinate(0), sp)]).unwrap();
        let fam_dn = AffineMatrixFamily::new(vec![(ScalarCoefficient::Coordinate(0), dn)]).unwrap();
        let a = fam_sp.assemble_sparse(&[3.0]).unwrap().to_dense();
        let b = fam_dn.assemble_dense(&[3.0]).unwrap();
        assert!(mat_approx_eq(a.as_ref(), b.as_ref(), 1e-14));
    }

    #[test]
    fn mismatched_term_dims_rejected() {
        let a = TermMatrix::Dense(Mat::zeros(2, 2));
        let b = TermMatrix::Dense(Mat::zeros(3, 2));
        let err = AffineMatrixFamily::new(vec![
            (ScalarCoefficient::Constant(1.0), a),
            (ScalarCoefficient::Constant(1.0), b),
        ]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn empty_family_rejected() {
        assert!(AffineMatrixFamily::new(vec![]).is_err());
    }
}
