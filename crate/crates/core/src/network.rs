//! Influence networks: the matrices of a Friedkin-Johnsen model, their
//! validation, and the row-deficiency calculus of substochastic matrices.
//!
//! A model is a pair `(Λ, W)` where `W` is row-stochastic and `Λ` is a
//! diagonal matrix of susceptibilities in `[0, 1]`. The opinion update is
//! driven by the substochastic product `A = ΛW`.

use nalgebra::{DMatrix, DVector};

use crate::error::{FjError, Result};

/// Default tolerance on row sums for matrices read from files.
pub const DEFAULT_ROW_TOL: f64 = 1e-9;

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(FjError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_nonnegative(m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(FjError::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(FjError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn row_sum(m: &DMatrix<f64>, i: usize) -> f64 {
    m.row(i).iter().sum()
}

/// Row-stochastic matrix of interpersonal influence weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix(DMatrix<f64>);

impl InfluenceMatrix {
    /// Validates with [`DEFAULT_ROW_TOL`].
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(m, DEFAULT_ROW_TOL)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub(crate) fn new_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Builds a dense matrix from row vectors. All rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    for r in rows {
        if r.len() != cols {
            return Err(FjError::DimensionMismatch {
                expected: cols,
                found: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

/// Accepts `m` iff it is square, nonnegative and every row sums to 1 within
/// `tol`. Rows are never renormalized here; see [`normalize_rows`].
pub fn validate_stochastic(m: DMatrix<f64>, tol: f64) -> Result<InfluenceMatrix> {
    let n = check_square(&m)?;
    check_nonnegative(&m)?;
    for i in 0..n {
        let sum = row_sum(&m, i);
        if (sum - 1.0).abs() > tol {
            return Err(FjError::RowSumViolation { row: i, sum });
        }
    }
    Ok(InfluenceMatrix(m))
}

/// Divides each row by its sum. Rows summing to zero are rejected.
pub fn normalize_rows(mut m: DMatrix<f64>) -> Result<InfluenceMatrix> {
    let n = check_square(&m)?;
    check_nonnegative(&m)?;
    for i in 0..n {
        let sum = row_sum(&m, i);
        if sum <= 0.0 {
            return Err(FjError::RowSumViolation { row: i, sum });
        }
        m.row_mut(i).iter_mut().for_each(|v| *v /= sum);
    }
    Ok(InfluenceMatrix(m))
}

/// Diagonal of `Λ`: each agent's susceptibility to interpersonal influence.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityProfile(DVector<f64>);

impl SusceptibilityProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(FjError::InvalidSusceptibility { index, value });
            }
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// One `(Λ, W)` pair. A stationary model is a stage plus prejudices; a
/// time-varying schedule is a sequence of stages.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    lambda: SusceptibilityProfile,
    w: InfluenceMatrix,
}

impl Stage {
    pub fn new(lambda: SusceptibilityProfile, w: InfluenceMatrix) -> Result<Self> {
        if lambda.len() != w.n() {
            return Err(FjError::DimensionMismatch {
                expected: w.n(),
                found: lambda.len(),
            });
        }
        Ok(Self { lambda, w })
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn lambda(&self) -> &SusceptibilityProfile {
        &self.lambda
    }

    pub fn w(&self) -> &InfluenceMatrix {
        &self.w
    }

    /// `ΛW`.
    pub fn system_matrix(&self) -> SubstochasticMatrix {
        SubstochasticMatrix::from_parts(&self.lambda, &self.w)
    }

    /// Non-degeneracy: `w_ii = 1` exactly when `λ_ii = 0`.
    pub fn is_non_degenerate(&self) -> bool {
        (0..self.n()).all(|i| (self.w.get(i, i) == 1.0) == (self.lambda.get(i) == 0.0))
    }

    /// The historical coupling `w_ii = 1 - λ_ii`. Only reported, never required.
    pub fn satisfies_coupling(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| (self.w.get(i, i) - (1.0 - self.lambda.get(i))).abs() <= tol)
    }

    pub fn augmented_matrix(&self) -> DMatrix<f64> {
        augmented_matrix(&self.lambda, &self.w)
    }
}

/// Stationary model `x(k+1) = ΛW x(k) + (I - Λ) u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FjModel {
    stage: Stage,
    u: DVector<f64>,
}

impl FjModel {
    pub fn new(w: InfluenceMatrix, lambda: SusceptibilityProfile, u: DVector<f64>) -> Result<Self> {
        let stage = Stage::new(lambda, w)?;
        Self::from_stage(stage, u)
    }

    pub fn from_stage(stage: Stage, u: DVector<f64>) -> Result<Self> {
        if u.len() != stage.n() {
            return Err(FjError::DimensionMismatch {
                expected: stage.n(),
                found: u.len(),
            });
        }
        Ok(Self { stage, u })
    }

    pub fn n(&self) -> usize {
        self.stage.n()
    }

    pub fn stage(&self) -> &Stage {
        &self.stage
    }

    pub fn lambda(&self) -> &SusceptibilityProfile {
        self.stage.lambda()
    }

    pub fn w(&self) -> &InfluenceMatrix {
        self.stage.w()
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn with_prejudice(&self, u: DVector<f64>) -> Result<Self> {
        Self::from_stage(self.stage.clone(), u)
    }

    pub fn system_matrix(&self) -> SubstochasticMatrix {
        self.stage.system_matrix()
    }

    pub fn is_non_degenerate(&self) -> bool {
        self.stage.is_non_degenerate()
    }

    pub fn satisfies_coupling(&self, tol: f64) -> bool {
        self.stage.satisfies_coupling(tol)
    }

    pub fn augmented_matrix(&self) -> DMatrix<f64> {
        self.stage.augmented_matrix()
    }
}

/// Nonnegative square matrix whose rows sum to at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstochasticMatrix(DMatrix<f64>);

impl SubstochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_ROW_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = check_square(&m)?;
        check_nonnegative(&m)?;
        for i in 0..n {
            let sum = row_sum(&m, i);
            if sum > 1.0 + tol {
                return Err(FjError::RowSumViolation { row: i, sum });
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// `ΛW`; always substochastic for a valid pair.
    pub fn from_parts(lambda: &SusceptibilityProfile, w: &InfluenceMatrix) -> Self {
        let mut a = w.matrix().clone();
        for (i, mut row) in a.row_iter_mut().enumerate() {
            row *= lambda.get(i);
        }
        Self(a)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        row_sum(&self.0, i)
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n()).map(|i| self.row_sum(i)).fold(0.0, f64::max)
    }

    /// Matrix product; substochastic matrices are closed under it.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        if self.n() != rhs.n() {
            return Err(FjError::DimensionMismatch {
                expected: self.n(),
                found: rhs.n(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }
}

/// Row deficiencies `1 - Σ_j a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyVector(DVector<f64>);

impl DeficiencyVector {
    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn deficiency(a: &SubstochasticMatrix) -> DeficiencyVector {
    DeficiencyVector(DVector::from_fn(a.n(), |i, _| 1.0 - a.row_sum(i)))
}

/// Deficiencies of `AB` from those of `A` and `B`: `ĉ = â + A b̂`.
/// The product `AB` is never formed.
pub fn deficiency_of_product(
    a: &SubstochasticMatrix,
    b: &SubstochasticMatrix,
) -> Result<DeficiencyVector> {
    if a.n() != b.n() {
        return Err(FjError::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    let a_hat = deficiency(a).0;
    let b_hat = deficiency(b).0;
    Ok(DeficiencyVector(a_hat + a.matrix() * b_hat))
}

/// Splits `A` into `Λ` (row sums) and `W` (rows rescaled to sum one).
/// Zero rows become a self-loop with `λ_ii = 0`. The result is
/// non-degenerate unless some row of `A` has mass only on its diagonal.
pub fn decompose_substochastic(a: &SubstochasticMatrix) -> (SusceptibilityProfile, InfluenceMatrix) {
    let n = a.n();
    let mut lambda = Vec::with_capacity(n);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let sum = a.row_sum(i);
        if sum > 0.0 {
            for j in 0..n {
                w[(i, j)] = a.get(i, j) / sum;
            }
            // rows within the tolerance band above one
            lambda.push(sum.min(1.0));
        } else {
            w[(i, i)] = 1.0;
            lambda.push(0.0);
        }
    }
    (
        SusceptibilityProfile(DVector::from_vec(lambda)),
        InfluenceMatrix::new_unchecked(w),
    )
}

/// The `(n+1)×(n+1)` stochastic matrix `[[ΛW, 1 - Λ1], [0, 1]]` of the
/// system extended by a static virtual agent carrying the prejudice.
pub fn augmented_matrix(lambda: &SusceptibilityProfile, w: &InfluenceMatrix) -> DMatrix<f64> {
    let n = w.n();
    let a = SubstochasticMatrix::from_parts(lambda, w);
    let mut out = DMatrix::zeros(n + 1, n + 1);
    out.view_mut((0, 0), (n, n)).copy_from(a.matrix());
    for i in 0..n {
        out[(i, n)] = 1.0 - lambda.get(i);
    }
    out[(n, n)] = 1.0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(rows: &[Vec<f64>]) -> SubstochasticMatrix {
        SubstochasticMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_stochastic() {
        assert!(validate_stochastic(DMatrix::identity(3, 3), 1e-9).is_ok());
    }

    #[test]
    fn row_sum_violation_reports_row_and_sum() {
        let m = matrix_from_rows(&[vec![0.5, 0.5], vec![0.3, 0.8]]).unwrap();
        match validate_stochastic(m, 1e-9) {
            Err(FjError::RowSumViolation { row, sum }) => {
                assert_eq!(row, 1);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_entry_rejected() {
        let m = matrix_from_rows(&[vec![1.5, -0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            validate_stochastic(m, 1e-9),
            Err(FjError::NegativeEntry {
                row: 0,
                col: 1,
                value: -0.5
            })
        );
    }

    #[test]
    fn non_square_rejected() {
        let m = DMatrix::zeros(2, 3);
        assert!(matches!(
            validate_stochastic(m, 1e-9),
            Err(FjError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn switching_matrix_accepted() {
        let w = InfluenceMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert!(w.is_ok());
    }

    #[test]
    fn normalize_rows_is_explicit() {
        let m = matrix_from_rows(&[vec![1.0, 3.0], vec![2.0, 2.0]]).unwrap();
        let w = normalize_rows(m).unwrap();
        assert_eq!(w.get(0, 1), 0.75);
        assert_eq!(w.get(1, 0), 0.5);
        let zero = DMatrix::zeros(2, 2);
        assert!(normalize_rows(zero).is_err());
    }

    #[test]
    fn susceptibility_range() {
        assert!(SusceptibilityProfile::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert_eq!(
            SusceptibilityProfile::new(vec![0.2, 1.2]),
            Err(FjError::InvalidSusceptibility {
                index: 1,
                value: 1.2
            })
        );
    }

    #[test]
    fn deficiency_examples() {
        let d = deficiency(&sub(&[vec![0.5, 0.3], vec![0.2, 0.2]]));
        assert!((d.get(0) - 0.2).abs() < 1e-15);
        assert!((d.get(1) - 0.6).abs() < 1e-15);

        let w = InfluenceMatrix::from_rows(&[vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let lam = SusceptibilityProfile::new(vec![1.0, 1.0]).unwrap();
        let d = deficiency(&SubstochasticMatrix::from_parts(&lam, &w));
        assert!(d.values().iter().all(|v| v.abs() < 1e-15));

        let lam = SusceptibilityProfile::new(vec![0.5, 1.0]).unwrap();
        let d = deficiency(&SubstochasticMatrix::from_parts(&lam, &InfluenceMatrix::identity(2)));
        assert_eq!(d.values().as_slice(), &[0.5, 0.0]);
    }

    #[test]
    fn deficiency_of_product_examples() {
        let half = sub(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let c = deficiency_of_product(&half, &half).unwrap();
        assert_eq!(c.values().as_slice(), &[0.75, 0.75]);

        let a = sub(&[vec![0.2, 0.8], vec![1.0, 0.0]]);
        let b = sub(&[vec![0.1, 0.3], vec![0.0, 0.9]]);
        let c = deficiency_of_product(&a, &b).unwrap();
        let expected = a.matrix() * deficiency(&b).values();
        assert!((c.values() - expected).amax() < 1e-15);

        assert!(matches!(
            deficiency_of_product(&half, &SubstochasticMatrix::zeros(3)),
            Err(FjError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decompose_examples() {
        let (lam, w) = decompose_substochastic(&SubstochasticMatrix::zeros(3));
        assert_eq!(lam.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(w.matrix(), &DMatrix::<f64>::identity(3, 3));

        let (lam, w) = decompose_substochastic(&sub(&[vec![0.25, 0.25], vec![0.0, 0.5]]));
        assert_eq!(lam.as_slice(), &[0.5, 0.5]);
        assert_eq!(w.matrix(), &matrix_from_rows(&[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap());

        let stoch = sub(&[vec![0.25, 0.75], vec![0.5, 0.5]]);
        let (lam, w) = decompose_substochastic(&stoch);
        assert_eq!(lam.as_slice(), &[1.0, 1.0]);
        assert_eq!(w.matrix(), stoch.matrix());
    }

    #[test]
    fn decomposition_is_non_degenerate() {
        let a = sub(&[vec![0.0, 0.0, 0.0], vec![0.1, 0.2, 0.3], vec![0.0, 0.4, 0.5]]);
        let (lam, w) = decompose_substochastic(&a);
        let stage = Stage::new(lam, w).unwrap();
        assert!(stage.is_non_degenerate());
        assert!((stage.system_matrix().matrix() - a.matrix()).amax() < 1e-12);
    }

    #[test]
    fn pure_self_loop_row_stays_degenerate() {
        // a row carrying only diagonal mass has w_ii = 1 and λ_ii > 0
        let a = sub(&[vec![0.9, 0.0], vec![0.5, 0.5]]);
        let (lam, w) = decompose_substochastic(&a);
        assert_eq!(lam.get(0), 0.9);
        assert_eq!(w.get(0, 0), 1.0);
        let stage = Stage::new(lam, w).unwrap();
        assert!(!stage.is_non_degenerate());
        assert_eq!(stage.system_matrix().matrix(), a.matrix());
    }

    #[test]
    fn augmented_examples() {
        let w = InfluenceMatrix::from_rows(&[vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let a = augmented_matrix(&SusceptibilityProfile::uniform(2, 1.0).unwrap(), &w);
        let expected = matrix_from_rows(&[
            vec![0.3, 0.7, 0.0],
            vec![0.4, 0.6, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(a, expected);

        let a = augmented_matrix(&SusceptibilityProfile::uniform(2, 0.0).unwrap(), &InfluenceMatrix::identity(2));
        for i in 0..2 {
            assert_eq!(a.row(i).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
        }

        let a = augmented_matrix(&SusceptibilityProfile::uniform(1, 0.5).unwrap(), &InfluenceMatrix::identity(1));
        assert_eq!(a, matrix_from_rows(&[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap());
    }

    #[test]
    fn coupling_predicate() {
        let w = InfluenceMatrix::from_rows(&[vec![0.4, 0.6], vec![0.5, 0.5]]).unwrap();
        let lam = SusceptibilityProfile::new(vec![0.6, 0.5]).unwrap();
        let stage = Stage::new(lam, w).unwrap();
        assert!(stage.satisfies_coupling(1e-12));
        assert!(stage.is_non_degenerate());
    }
}
