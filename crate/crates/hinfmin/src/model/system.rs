//! Parameter-dependent descriptor systems and transfer-function evaluation.

use std::sync::OnceLock;

use faer::c64;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::mat::{Mat, MatRef};
use faer::sparse::linalg::solvers as sp_solvers;
use faer::sparse::{SparseColMat, SparseColMatRef, SymbolicSparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::family::{AffineMatrixFamily, TermMatrix};

/// State dimension below which pencil solves go through dense LU. Above it,
/// systems with sparse terms use a compressed-column LU with a cached
/// symbolic factorization.
pub const DENSE_SOLVE_CROSSOVER: usize = 500;

/// Componentwise parameter bounds (the admissible set is a box).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidInput("parameter box must have dimension >= 1".into()));
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidInput(format!(
                    "invalid bounds [{lo}, {hi}] for parameter {j}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Euclidean length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, mu: &[f64], tol: f64) -> bool {
        mu.len() == self.dim()
            && mu
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo - tol && x <= hi + tol)
    }

    /// Componentwise clamp onto the box.
    pub fn project(&self, mu: &[f64]) -> Vec<f64> {
        mu.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| x.clamp(lo, hi))
            .collect()
    }

    /// All `2^d` vertices; meant for small `d` (multistart seeding).
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            self.upper[j]
                        } else {
                            self.lower[j]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Assembled coefficient matrix, dense or compressed-column.
#[derive(Debug, Clone)]
pub enum AssembledMatrix {
    Dense(Mat<c64>),
    Sparse(SparseColMat<usize, c64>),
}

impl AssembledMatrix {
    pub fn to_dense(&self) -> Mat<c64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Sparse(m) => m.to_dense(),
        }
    }
}

/// Union sparsity pattern of the E- and A-families with per-term scatter maps,
/// so that `i omega E(mu) - A(mu)` can be assembled by a single pass over the
/// stored values and factorized with a cached symbolic LU.
#[derive(Debug)]
struct SparsePencilTemplate {
    symbolic: SymbolicSparseColMat<usize>,
    /// Per E-term list of (position in the union value vector, entry value).
    e_slots: Vec<Vec<(usize, c64)>>,
    a_slots: Vec<Vec<(usize, c64)>>,
    symbolic_lu: OnceLock<std::result::Result<sp_solvers::SymbolicLu<usize>, String>>,
}

impl SparsePencilTemplate {
    fn build(e: &AffineMatrixFamily, a: &AffineMatrixFamily) -> Result<Self> {
        let n = e.rows();
        let mut triplets = Vec::new();
        for fam in [e, a] {
            for (_, term) in fam.terms() {
                let sp = term.to_sparse();
                let sym = sp.symbolic();
                for j in 0..n {
                    for &i in &sym.row_idx()[sym.col_range(j)] {
                        triplets.push(Triplet::new(i, j, c64::new(0.0, 0.0)));
                    }
                }
            }
        }
        let union = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::DimensionMismatch(format!("pencil pattern: {e:?}")))?;
        let (symbolic, _) = union.into_parts();

        let slot_of = |i: usize, j: usize| -> usize {
            let range = symbolic.col_range(j);
            let rows = &symbolic.row_idx()[range.clone()];
            range.start + rows.binary_search(&i).expect("entry in union pattern")
        };
        let slots_for = |fam: &AffineMatrixFamily| -> Vec<Vec<(usize, c64)>> {
            fam.terms()
                .iter()
                .map(|(_, term)| {
                    let sp = term.to_sparse();
                    let sym = sp.symbolic();
                    let mut slots = Vec::with_capacity(sp.val().len());
                    for j in 0..n {
                        let range = sym.col_range(j);
                        for (off, &i) in sym.row_idx()[range.clone()].iter().enumerate() {
                            slots.push((slot_of(i, j), sp.val()[range.start + off]));
                        }
                    }
                    slots
                })
                .collect()
        };

        Ok(Self {
            e_slots: slots_for(e),
            a_slots: slots_for(a),
            symbolic,
            symbolic_lu: OnceLock::new(),
        })
    }

    /// Values of `i omega E(mu) - A(mu)` laid out in the union pattern.
    fn assemble_values(&self, e_vals: &[f64], a_vals: &[f64], omega: f64) -> Vec<c64> {
        let nnz = self.symbolic.row_idx().len();
        let mut values = vec![c64::new(0.0, 0.0); nnz];
        let i_omega = c64::new(0.0, omega);
        for (slots, &f) in self.e_slots.iter().zip(e_vals) {
            let w = i_omega * f;
            for &(idx, v) in slots {
                values[idx] += w * v;
            }
        }
        for (slots, &g) in self.a_slots.iter().zip(a_vals) {
            for &(idx, v) in slots {
                values[idx] -= g * v;
            }
        }
        values
    }

    fn factor(&self, values: &[c64]) -> Result<sp_solvers::Lu<usize, c64>> {
        let sym_lu = self
            .symbolic_lu
            .get_or_init(|| {
                sp_solvers::SymbolicLu::try_new(self.symbolic.as_ref())
                    .map_err(|e| format!("{e:?}"))
            })
            .clone()
            .map_err(Error::EigFailure)?;
        let mat = SparseColMatRef::new(self.symbolic.as_ref(), values);
        sp_solvers::Lu::try_new_with_symbolic(sym_lu, mat)
            .map_err(|e| Error::EigFailure(format!("sparse LU: {e:?}")))
    }
}

/// Factorized pencil `D(mu, i omega) = i omega E(mu) - A(mu)`.
pub enum PencilFactor {
    Dense(PartialPivLu<c64>),
    Sparse(sp_solvers::Lu<usize, c64>),
}

impl PencilFactor {
    /// Solves `D X = rhs`.
    pub fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Self::Dense(lu) => lu.solve(rhs),
            Self::Sparse(lu) => lu.solve(rhs),
        }
    }

    /// Solves `D^H X = rhs`.
    pub fn solve_adjoint(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Self::Dense(lu) => lu.solve_adjoint(rhs),
            Self::Sparse(lu) => lu.solve_adjoint(rhs),
        }
    }
}

/// A parameter-dependent descriptor system with affine coefficient structure:
/// `E(mu) x' = A(mu) x + B(mu) u`, `y = C(mu) x`, transfer function
/// `H[mu](s) = C(mu) (s E(mu) - A(mu))^{-1} B(mu)`.
///
/// Systems are immutable after construction; all evaluation methods are pure
/// reads and may run concurrently.
#[derive(Debug)]
pub struct DescriptorSystem {
    e: AffineMatrixFamily,
    a: AffineMatrixFamily,
    b: AffineMatrixFamily,
    c: AffineMatrixFamily,
    bounds: ParameterBox,
    real_data: bool,
    pencil: Option<SparsePencilTemplate>,
}

impl DescriptorSystem {
    pub fn new(
        e: AffineMatrixFamily,
        a: AffineMatrixFamily,
        b: AffineMatrixFamily,
        c: AffineMatrixFamily,
        bounds: ParameterBox,
    ) -> Result<Self> {
        let n = e.rows();
        if e.cols() != n || a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "E is {}x{}, A is {}x{}; both must be {n}x{n}",
                e.rows(),
                e.cols(),
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.rows()
            )));
        }
        if c.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C has {} columns, expected {n}",
                c.cols()
            )));
        }
        let d = bounds.dim();
        for (name, fam) in [("E", &e), ("A", &a), ("B", &b), ("C", &c)] {
            if let Some(j) = fam.max_coordinate() {
                if j >= d {
                    return Err(Error::DimensionMismatch(format!(
                        "{name}-family reads parameter {j} but the box has dimension {d}"
                    )));
                }
            }
        }
        let real_data = e.is_real() && a.is_real() && b.is_real() && c.is_real();
        let use_sparse = n > DENSE_SOLVE_CROSSOVER && (e.any_sparse() || a.any_sparse());
        let pencil = if use_sparse {
            Some(SparsePencilTemplate::build(&e, &a)?)
        } else {
            None
        };
        Ok(Self {
            e,
            a,
            b,
            c,
            bounds,
            real_data,
            pencil,
        })
    }

    pub fn order(&self) -> usize {
        self.e.rows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn num_params(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &ParameterBox {
        &self.bounds
    }

    /// True when all stored matrix data is real, in which case
    /// `H[mu](-i omega) = conj(H[mu](i omega))` and the singular value
    /// function is even in `omega`.
    pub fn real_data(&self) -> bool {
        self.real_data
    }

    pub fn e_family(&self) -> &AffineMatrixFamily {
        &self.e
    }

    pub fn a_family(&self) -> &AffineMatrixFamily {
        &self.a
    }

    pub fn b_family(&self) -> &AffineMatrixFamily {
        &self.b
    }

    pub fn c_family(&self) -> &AffineMatrixFamily {
        &self.c
    }

    /// Whether pencil solves route through the sparse LU path.
    pub fn uses_sparse_solves(&self) -> bool {
        self.pencil.is_some()
    }

    /// Evaluates all four coefficient matrices at `mu`. Evaluation slightly
    /// outside the box is permitted (finite-difference probes and the
    /// extended algorithm's auxiliary points rely on it).
    pub fn assemble_matrices(
        &self,
        mu: &[f64],
    ) -> Result<(AssembledMatrix, AssembledMatrix, Mat<c64>, Mat<c64>)> {
        self.check_mu(mu)?;
        let (e, a) = if self.pencil.is_some() {
            (
                AssembledMatrix::Sparse(self.e.assemble_sparse(mu)?),
                AssembledMatrix::Sparse(self.a.assemble_sparse(mu)?),
            )
        } else {
            (
                AssembledMatrix::Dense(self.e.assemble_dense(mu)?),
                AssembledMatrix::Dense(self.a.assemble_dense(mu)?),
            )
        };
        Ok((e, a, self.b.assemble_dense(mu)?, self.c.assemble_dense(mu)?))
    }

    fn check_mu(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "mu has length {}, expected {}",
                mu.len(),
                self.num_params()
            )));
        }
        Ok(())
    }

    /// Factors `D(mu, i omega) = i omega E(mu) - A(mu)`.
    pub fn factor_pencil(&self, mu: &[f64], omega: f64) -> Result<PencilFactor> {
        self.check_mu(mu)?;
        match &self.pencil {
            Some(tpl) => {
                let e_vals = self.e.values(mu)?;
                let a_vals = self.a.values(mu)?;
                let values = tpl.assemble_values(&e_vals, &a_vals, omega);
                Ok(PencilFactor::Sparse(tpl.factor(&values)?))
            }
            None => {
                let n = self.order();
                let mut d = Mat::zeros(n, n);
                let i_omega = c64::new(0.0, omega);
                for ((_, m), &f) in self.e.terms().iter().zip(&self.e.values(mu)?) {
                    m.acc_scaled(i_omega * f, &mut d);
                }
                for ((_, m), &g) in self.a.terms().iter().zip(&self.a.values(mu)?) {
                    m.acc_scaled(c64::new(-g, 0.0), &mut d);
                }
                Ok(PencilFactor::Dense(d.partial_piv_lu()))
            }
        }
    }

    /// Shared setup for transfer evaluation at `(mu, omega)`: factors the
    /// pencil once and performs the input/output solves.
    pub fn transfer_context(&self, mu: &[f64], omega: f64) -> Result<TransferContext<'_>> {
        let factor = self.factor_pencil(mu, omega)?;
        let b = self.b.assemble_dense(mu)?;
        let c = self.c.assemble_dense(mu)?;
        let x = factor.solve(b.as_ref());
        let y = factor.solve_adjoint(c.adjoint().to_owned().as_ref());
        if !mat_is_finite(x.as_ref()) || !mat_is_finite(y.as_ref()) {
            return Err(Error::SingularPencil {
                mu: mu.to_vec(),
                omega,
                detail: "pencil solve produced non-finite values".into(),
            });
        }
        let h = &c * &x;
        Ok(TransferContext {
            sys: self,
            mu: mu.to_vec(),
            omega,
            x,
            y,
            h,
            b,
            c,
        })
    }

    /// Transfer function value `H[mu](i omega)` (p x m).
    pub fn eval_transfer(&self, mu: &[f64], omega: f64) -> Result<Mat<c64>> {
        Ok(self.transfer_context(mu, omega)?.h)
    }

    /// Partial derivative of the transfer function with respect to one
    /// parameter component or the frequency.
    pub fn transfer_partial(&self, mu: &[f64], omega: f64, which: Partial) -> Result<Mat<c64>> {
        let ctx = self.transfer_context(mu, omega)?;
        Ok(match which {
            Partial::Mu(j) => ctx.partial_mu(j),
            Partial::Omega => ctx.partial_omega(),
        })
    }
}

/// Selects the differentiation variable for [`DescriptorSystem::transfer_partial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partial {
    Mu(usize),
    Omega,
}

/// Factored pencil plus the solves shared by the transfer value and all of
/// its first-order partial derivatives at a single `(mu, omega)` point.
pub struct TransferContext<'a> {
    sys: &'a DescriptorSystem,
    mu: Vec<f64>,
    omega: f64,
    /// `D^{-1} B` (n x m).
    x: Mat<c64>,
    /// `D^{-H} C^H` (n x p).
    y: Mat<c64>,
    h: Mat<c64>,
    b: Mat<c64>,
    c: Mat<c64>,
}

impl TransferContext<'_> {
    pub fn transfer(&self) -> &Mat<c64> {
        &self.h
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `dH/dmu_j = C'_j D^{-1} B - C D^{-1} D'_j D^{-1} B + C D^{-1} B'_j`
    /// where `D'_j = i omega E'_j - A'_j`; the sign of the middle term comes
    /// from `d(D^{-1}) = -D^{-1} (dD) D^{-1}`.
    pub fn partial_mu(&self, j: usize) -> Mat<c64> {
        let sys = self.sys;
        let (p, m) = (self.h.nrows(), self.h.ncols());
        let n = sys.order();
        let mut result = Mat::zeros(p, m);

        // C'_j X
        let c_weights: Vec<c64> = sys
            .c
            .partials(&self.mu, j)
            .iter()
            .map(|&v| c64::new(v, 0.0))
            .collect();
        sys.c
            .acc_weighted_mul(&c_weights, self.x.as_ref(), &mut result);

        // - Y^H (D'_j X) with D'_j X accumulated term by term
        let mut dx = Mat::zeros(n, m);
        let i_omega = c64::new(0.0, self.omega);
        let e_weights: Vec<c64> = sys
            .e
            .partials(&self.mu, j)
            .iter()
            .map(|&v| i_omega * v)
            .collect();
        sys.e.acc_weighted_mul(&e_weights, self.x.as_ref(), &mut dx);
        let a_weights: Vec<c64> = sys
            .a
            .partials(&self.mu, j)
            .iter()
            .map(|&v| c64::new(-v, 0.0))
            .collect();
        sys.a.acc_weighted_mul(&a_weights, self.x.as_ref(), &mut dx);
        let middle = self.y.adjoint() * &dx;
        for jj in 0..m {
            for ii in 0..p {
                result[(ii, jj)] -= middle[(ii, jj)];
            }
        }

        // Y^H B'_j
        let b_weights: Vec<c64> = sys
            .b
            .partials(&self.mu, j)
            .iter()
            .map(|&v| c64::new(v, 0.0))
            .collect();
        let mut bprime = Mat::zeros(n, m);
        for ((_, term), &w) in sys.b.terms().iter().zip(&b_weights) {
            if w != c64::new(0.0, 0.0) {
                term.acc_scaled(w, &mut bprime);
            }
        }
        let third = self.y.adjoint() * &bprime;
        for jj in 0..m {
            for ii in 0..p {
                result[(ii, jj)] += third[(ii, jj)];
            }
        }
        result
    }

    /// `dH/domega = -C D^{-1} (i E(mu)) D^{-1} B`.
    pub fn partial_omega(&self) -> Mat<c64> {
        let sys = self.sys;
        let n = sys.order();
        let m = self.h.ncols();
        let mut ex = Mat::zeros(n, m);
        let weights: Vec<c64> = sys
            .e
            .values(&self.mu)
            .expect("coefficients already evaluated at this mu")
            .iter()
            .map(|&v| c64::new(0.0, -v))
            .collect();
        sys.e.acc_weighted_mul(&weights, self.x.as_ref(), &mut ex);
        self.y.adjoint() * &ex
    }

    /// Input and output solve blocks `(D^{-1} B, D^{-H} C^H)`, which are the
    /// raw subspace expansion directions.
    pub fn solve_blocks(&self) -> (&Mat<c64>, &Mat<c64>) {
        (&self.x, &self.y)
    }

    pub fn input_matrix(&self) -> &Mat<c64> {
        &self.b
    }

    pub fn output_matrix(&self) -> &Mat<c64> {
        &self.c
    }
}

pub(crate) fn mat_is_finite(m: MatRef<'_, c64>) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coefficient::ScalarCoefficient;

    fn siso_system() -> DescriptorSystem {
        // E = 1, A = -1, B = C = 1
        let one = || TermMatrix::Dense(Mat::from_fn(1, 1, |_, _| c64::new(1.0, 0.0)));
        let neg = TermMatrix::Dense(Mat::from_fn(1, 1, |_, _| c64::new(-1.0, 0.0)));
        DescriptorSystem::new(
            AffineMatrixFamily::constant(one()),
            AffineMatrixFamily::constant(neg),
            AffineMatrixFamily::constant(one()),
            AffineMatrixFamily::constant(one()),
            ParameterBox::new(vec![0.0], vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn siso_resolvent_value() {
        // H(i) = 1/(1 + i)
        let sys = siso_system();
        let h = sys.eval_transfer(&[0.5], 1.0).unwrap();
        let want = c64::new(1.0, 0.0) / c64::new(1.0, 1.0);
        assert!((h[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn siso_omega_partial_at_zero() {
        // dH/domega = -C D^{-1} (iE) D^{-1} B = -i at omega = 0 where D = 1
        let sys = siso_system();
        let dh = sys.transfer_partial(&[0.5], 0.0, Partial::Omega).unwrap();
        assert!((dh[(0, 0)] - c64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn transfer_conjugate_symmetry_for_real_data() {
        let sys = siso_system();
        assert!(sys.real_data());
        let hp = sys.eval_transfer(&[0.3], 2.5).unwrap();
        let hm = sys.eval_transfer(&[0.3], -2.5).unwrap();
        assert!((hp[(0, 0)].conj() - hm[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn mu_partial_matches_finite_difference() {
        // 2x2 system with E-only parameter dependence: dH/dmu reduces to the
        // middle term alone, checked against a central difference.
        let e0 = TermMatrix::Dense(Mat::from_fn(2, 2, |i, j| {
            c64::new(if i == j { 1.0 } else { 0.1 }, 0.0)
        }));
        let e1 = TermMatrix::Dense(Mat::from_fn(2, 2, |i, j| {
            c64::new(0.3 * (i as f64 + 1.0) * (j as f64 + 0.5), 0.0)
        }));
        let a = TermMatrix::Dense(Mat::from_fn(2, 2, |i, j| {
            c64::new(if i == j { -2.0 } else { 0.4 }, 0.0)
        }));
        let b = TermMatrix::Dense(Mat::from_fn(2, 1, |i, _| c64::new(1.0 + i as f64, 0.0)));
        let c = TermMatrix::Dense(Mat::from_fn(1, 2, |_, j| c64::new(2.0 - j as f64, 0.0)));
        let sys = DescriptorSystem::new(
            AffineMatrixFamily::new(vec![
                (ScalarCoefficient::Constant(1.0), e0),
                (ScalarCoefficient::Coordinate(0), e1),
            ])
            .unwrap(),
            AffineMatrixFamily::constant(a),
            AffineMatrixFamily::constant(b),
            AffineMatrixFamily::constant(c),
            ParameterBox::new(vec![0.1], vec![2.0]).unwrap(),
        )
        .unwrap();

        let mu = [0.8];
        let omega = 1.7;
        let analytic = sys.transfer_partial(&mu, omega, Partial::Mu(0)).unwrap();
        let h = 1e-6;
        let hp = sys.eval_transfer(&[mu[0] + h], omega).unwrap();
        let hm = sys.eval_transfer(&[mu[0] - h], omega).unwrap();
        let fd = (hp[(0, 0)] - hm[(0, 0)]) / (2.0 * h);
        assert!(
            (analytic[(0, 0)] - fd).norm() <= 1e-5 * (1.0 + fd.norm()),
            "analytic {:?} vs fd {:?}",
            analytic[(0, 0)],
            fd
        );
    }

    #[test]
    fn sparse_and_dense_pencil_routes_agree() {
        // same block-diagonal system through both storage routes
        let n = 6;
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, -(1.0 + i as f64)));
            if i + 1 < n {
                entries.push((i, i + 1, 0.5));
            }
        }
        let a_sp = TermMatrix::sparse_from_real_triplets(n, n, &entries).unwrap();
        let a_dn = TermMatrix::Dense(a_sp.to_dense());
        let b = TermMatrix::Dense(Mat::from_fn(n, 1, |i, _| c64::new((i % 3) as f64, 0.0)));
        let c = TermMatrix::Dense(Mat::from_fn(1, n, |_, j| c64::new(1.0 / (1.0 + j as f64), 0.0)));
        let bx = ParameterBox::new(vec![0.0], vec![1.0]).unwrap();

        let mk = |a: TermMatrix| {
            DescriptorSystem::new(
                AffineMatrixFamily::constant(TermMatrix::sparse_identity(n)),
                AffineMatrixFamily::new(vec![(ScalarCoefficient::Coordinate(0), a)]).unwrap(),
                AffineMatrixFamily::constant(b.clone()),
                AffineMatrixFamily::constant(c.clone()),
                bx.clone(),
            )
            .unwrap()
        };
        let sys_sp = mk(a_sp);
        let sys_dn = mk(a_dn);
        // small n keeps both on the dense route; force sparse assembly too
        let h1 = sys_sp.eval_transfer(&[0.7], 3.0).unwrap();
        let h2 = sys_dn.eval_transfer(&[0.7], 3.0).unwrap();
        assert!((h1[(0, 0)] - h2[(0, 0)]).norm() < 1e-13);
    }

    #[test]
    fn box_validation_and_projection() {
        assert!(ParameterBox::new(vec![1.0], vec![0.0]).is_err());
        let bx = ParameterBox::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(bx.project(&[3.0, -5.0]), vec![2.0, -1.0]);
        assert!(bx.contains(&[1.0, 0.0], 0.0));
        assert!(!bx.contains(&[2.1, 0.0], 0.0));
        assert_eq!(bx.vertices().len(), 4);
    }
}
