//! Symmetric matrices and uniformly elliptic operators.
//!
//! Operators act on the Hessian slot of a parabolic equation
//! `d/dt u + F(x, D^2 u) = f`. Every shipped kind is positively
//! 1-homogeneous, degenerate elliptic (X <= Y implies eval(Y) <= eval(X))
//! and sandwiched between the Pucci extremal operators with its declared
//! ellipticity constants:
//!
//! ```text
//! pucci_minus(X - Y, lambda, Lambda) <= F(X) - F(Y) <= pucci_plus(X - Y, lambda, Lambda)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported matrix dimension. Grid Hessians use up to 3; 4 is kept
/// for matrix-level tests.
pub const MAX_DIM: usize = 4;

/// Dense symmetric matrix of dimension 1..=4, stored inline so per-node
/// Hessian evaluation does not allocate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl SymMatrix {
    /// Zero matrix. `dim` must be 1..=4; that is a programming error, not
    /// input validation, hence the assert.
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        SymMatrix {
            dim,
            a: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a full row-major dim*dim slice. Errors when the slice has
    /// the wrong length, contains non-finite entries, or is not symmetric
    /// (tolerance 1e-12 relative to the largest entry).
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if rows.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                rows.len()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        let scale = rows.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale.max(1.0);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if (rows[i * dim + j] - rows[j * dim + i]).abs() > tol {
                    return Err(Error::NotSymmetric);
                }
                m.a[i * MAX_DIM + j] = rows[i * dim + j];
            }
        }
        // Enforce exact symmetry so downstream bitwise comparisons behave.
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = m.a[i * MAX_DIM + j];
                m.a[j * MAX_DIM + i] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i * MAX_DIM + j]
    }

    /// Sets entry (i, j) and its mirror (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i * MAX_DIM + j] = v;
        self.a[j * MAX_DIM + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.a[i * MAX_DIM + j] *= factor;
            }
        }
        out
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.a[i * MAX_DIM + j] += other.a[i * MAX_DIM + j];
            }
        }
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Eigenvalues in nondecreasing order; only the first `dim` slots are
    /// meaningful. Closed form for dim <= 2, cyclic Jacobi otherwise.
    pub fn eigenvalues(&self) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        match self.dim {
            1 => out[0] = self.get(0, 0),
            2 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let d = self.get(1, 1);
                let mean = 0.5 * (a + d);
                let r = f64::hypot(0.5 * (a - d), b);
                out[0] = mean - r;
                out[1] = mean + r;
            }
            _ => {
                let (e, _) = self.eigen_decomposition();
                return e;
            }
        }
        out
    }

    /// Full spectral decomposition X = Q diag(e) Q^T via cyclic Jacobi.
    /// Returns eigenvalues in nondecreasing order and the matching
    /// eigenvectors as columns of Q (row-major `q[r][c]`, column c pairs
    /// with eigenvalue c).
    pub fn eigen_decomposition(&self) -> ([f64; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
        let n = self.dim;
        let mut a = *self;
        let mut q = [[0.0f64; MAX_DIM]; MAX_DIM];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = 1.0;
        }

        // Convergence threshold scales with the matrix norm so iteration
        // terminates for matrices of any magnitude.
        let mut frob = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                frob += a.get(i, j) * a.get(i, j);
            }
        }
        let tol = 1e-14 * frob.sqrt().max(1.0);

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for r in (p + 1)..n {
                    off = off.max(a.get(p, r).abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for r in (p + 1)..n {
                    let apr = a.get(p, r);
                    if apr.abs() <= tol * 1e-2 {
                        continue;
                    }
                    let theta = (a.get(r, r) - a.get(p, p)) / (2.0 * apr);
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    let app = a.get(p, p);
                    let arr = a.get(r, r);
                    a.set(p, p, app - t * apr);
                    a.set(r, r, arr + t * apr);
                    a.set(p, r, 0.0);
                    for k in 0..n {
                        if k != p && k != r {
                            let akp = a.get(k, p);
                            let akr = a.get(k, r);
                            a.set(k, p, c * akp - s * akr);
                            a.set(k, r, s * akp + c * akr);
                        }
                    }
                    for row in q.iter_mut().take(n) {
                        let vp = row[p];
                        let vr = row[r];
                        row[p] = c * vp - s * vr;
                        row[r] = s * vp + c * vr;
                    }
                }
            }
        }

        let mut evals = [0.0f64; MAX_DIM];
        for i in 0..n {
            evals[i] = a.get(i, i);
        }
        // Sort eigenvalues (and matching columns) ascending.
        let mut order: [usize; MAX_DIM] = [0, 1, 2, 3];
        order[..n].sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
        let mut sorted_e = [0.0f64; MAX_DIM];
        let mut sorted_q = [[0.0f64; MAX_DIM]; MAX_DIM];
        for (c, &src) in order[..n].iter().enumerate() {
            sorted_e[c] = evals[src];
            for r in 0..n {
                sorted_q[r][c] = q[r][src];
            }
        }
        (sorted_e, sorted_q)
    }
}

/// Free-function form of [`SymMatrix::eigenvalues`].
pub fn sym_eigenvalues(x: &SymMatrix) -> [f64; MAX_DIM] {
    x.eigenvalues()
}

fn check_constants(lambda: f64, big_lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && big_lambda.is_finite()) || lambda <= 0.0 || big_lambda < lambda {
        return Err(Error::InvalidArgument(format!(
            "ellipticity constants must satisfy 0 < lambda <= Lambda, got ({lambda}, {big_lambda})"
        )));
    }
    Ok(())
}

#[inline]
fn pucci_plus_of_eigs(e: &[f64], lambda: f64, big_lambda: f64) -> f64 {
    // max over lambda I <= A <= Lambda I of tr[-A X]:
    // weight lambda on positive eigenvalues, Lambda on negative ones.
    e.iter()
        .map(|&ek| if ek >= 0.0 { -lambda * ek } else { -big_lambda * ek })
        .sum()
}

#[inline]
fn pucci_minus_of_eigs(e: &[f64], lambda: f64, big_lambda: f64) -> f64 {
    e.iter()
        .map(|&ek| if ek >= 0.0 { -big_lambda * ek } else { -lambda * ek })
        .sum()
}

/// Pucci maximal operator P+(X) = max { tr[-AX] : lambda I <= A <= Lambda I }.
pub fn pucci_plus(x: &SymMatrix, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_constants(lambda, big_lambda)?;
    let e = x.eigenvalues();
    Ok(pucci_plus_of_eigs(&e[..x.dim()], lambda, big_lambda))
}

/// Pucci minimal operator P-(X) = min { tr[-AX] : lambda I <= A <= Lambda I }.
pub fn pucci_minus(x: &SymMatrix, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_constants(lambda, big_lambda)?;
    let e = x.eigenvalues();
    Ok(pucci_minus_of_eigs(&e[..x.dim()], lambda, big_lambda))
}

/// Shipped operator kinds. `Scaled` is internal calculus used by tests and
/// the ordering checks; the config surface does not expose it.
#[derive(Clone, Debug)]
pub enum OperatorKind {
    LinearTrace { a: SymMatrix },
    PucciPlus,
    PucciMinus,
    Barenblatt { gamma: f64 },
    MinMax2d,
    Scaled { factor: f64, inner: Box<EllipticOperator> },
}

/// A uniformly elliptic, positively 1-homogeneous operator together with its
/// dimension and ellipticity constants.
#[derive(Clone, Debug)]
pub struct EllipticOperator {
    kind: OperatorKind,
    dim: usize,
    lambda: f64,
    big_lambda: f64,
    x_dependent: bool,
}

impl EllipticOperator {
    pub fn linear_trace(a: SymMatrix) -> Result<Self> {
        let e = a.eigenvalues();
        let dim = a.dim();
        let lambda = e[..dim].iter().cloned().fold(f64::INFINITY, f64::min);
        let big_lambda = e[..dim].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument(
                "linear-trace coefficient matrix must be positive definite".into(),
            ));
        }
        Ok(EllipticOperator {
            kind: OperatorKind::LinearTrace { a },
            dim,
            lambda,
            big_lambda,
            x_dependent: false,
        })
    }

    /// -Laplacian: linear-trace with the identity coefficient matrix.
    pub fn laplacian(dim: usize) -> Self {
        Self::linear_trace(SymMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn pucci_plus_op(dim: usize, lambda: f64, big_lambda: f64) -> Result<Self> {
        check_constants(lambda, big_lambda)?;
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "operator dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        Ok(EllipticOperator {
            kind: OperatorKind::PucciPlus,
            dim,
            lambda,
            big_lambda,
            x_dependent: false,
        })
    }

    pub fn pucci_minus_op(dim: usize, lambda: f64, big_lambda: f64) -> Result<Self> {
        let mut op = Self::pucci_plus_op(dim, lambda, big_lambda)?;
        op.kind = OperatorKind::PucciMinus;
        Ok(op)
    }

    /// max(-tr X/(1-gamma), -tr X/(1+gamma)); ellipticity constants
    /// (1/(1+gamma), 1/(1-gamma)) as per-coordinate trace weights.
    pub fn barenblatt(dim: usize, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "barenblatt gamma must lie in (0, 1), got {gamma}"
            )));
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "operator dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        Ok(EllipticOperator {
            kind: OperatorKind::Barenblatt { gamma },
            dim,
            lambda: 1.0 / (1.0 + gamma),
            big_lambda: 1.0 / (1.0 - gamma),
            x_dependent: false,
        })
    }

    /// min(max(-tr X, -2 tr X), -X_11 - 2 X_22); two-dimensional only.
    pub fn minmax_2d() -> Self {
        EllipticOperator {
            kind: OperatorKind::MinMax2d,
            dim: 2,
            lambda: 1.0,
            big_lambda: 2.0,
            x_dependent: false,
        }
    }

    /// Positive multiple of another operator; constants scale with it.
    pub fn scaled(factor: f64, inner: EllipticOperator) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(EllipticOperator {
            dim: inner.dim,
            lambda: factor * inner.lambda,
            big_lambda: factor * inner.big_lambda,
            x_dependent: inner.x_dependent,
            kind: OperatorKind::Scaled {
                factor,
                inner: Box::new(inner),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn x_dependent(&self) -> bool {
        self.x_dependent
    }

    pub fn kind(&self) -> &OperatorKind {
        self.kind_ref()
    }

    fn kind_ref(&self) -> &OperatorKind {
        &self.kind
    }

    /// Evaluates F(x, X). The position is carried for interface stability;
    /// all shipped kinds ignore it.
    pub fn eval(&self, x: &[f64], m: &SymMatrix) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.dim(),
            });
        }
        Ok(self.eval_unchecked(m))
    }

    /// Evaluation without dimension checks, for stepping loops that validate
    /// once up front.
    #[inline]
    pub fn eval_unchecked(&self, m: &SymMatrix) -> f64 {
        match &self.kind {
            OperatorKind::LinearTrace { a } => {
                let mut s = 0.0;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s -= a.get(i, j) * m.get(i, j);
                    }
                }
                s
            }
            OperatorKind::PucciPlus => {
                let e = m.eigenvalues();
                pucci_plus_of_eigs(&e[..self.dim], self.lambda, self.big_lambda)
            }
            OperatorKind::PucciMinus => {
                let e = m.eigenvalues();
                pucci_minus_of_eigs(&e[..self.dim], self.lambda, self.big_lambda)
            }
            OperatorKind::Barenblatt { gamma } => {
                let tr = m.trace();
                (-tr / (1.0 - gamma)).max(-tr / (1.0 + gamma))
            }
            OperatorKind::MinMax2d => {
                let tr = m.trace();
                let first = (-tr).max(-2.0 * tr);
                let second = -m.get(0, 0) - 2.0 * m.get(1, 1);
                first.min(second)
            }
            OperatorKind::Scaled { factor, inner } => factor * inner.eval_unchecked(m),
        }
    }

    /// One-line description round-tripping through the harness operator-spec
    /// parser, e.g. `pucci-minus lambda=1 Lambda=2`.
    pub fn describe(&self) -> String {
        match &self.kind {
            OperatorKind::LinearTrace { a } => {
                let dim = a.dim();
                let mut is_diag = true;
                for i in 0..dim {
                    for j in 0..dim {
                        if i != j && a.get(i, j) != 0.0 {
                            is_diag = false;
                        }
                    }
                }
                let first = a.get(0, 0);
                let is_scale = is_diag && (0..dim).all(|i| a.get(i, i) == first);
                if is_scale {
                    format!("linear-trace scale={first}")
                } else if is_diag {
                    let entries: Vec<String> =
                        (0..dim).map(|i| format!("{}", a.get(i, i))).collect();
                    format!("linear-trace diag={}", entries.join(","))
                } else {
                    let mut entries = Vec::new();
                    for i in 0..dim {
                        for j in 0..dim {
                            entries.push(format!("{}", a.get(i, j)));
                        }
                    }
                    format!("linear-trace matrix={}", entries.join(","))
                }
            }
            OperatorKind::PucciPlus => format!(
                "pucci-plus lambda={} Lambda={}",
                self.lambda, self.big_lambda
            ),
            OperatorKind::PucciMinus => format!(
                "pucci-minus lambda={} Lambda={}",
                self.lambda, self.big_lambda
            ),
            OperatorKind::Barenblatt { gamma } => format!("barenblatt gamma={gamma}"),
            OperatorKind::MinMax2d => "minmax-2d".to_string(),
            OperatorKind::Scaled { factor, inner } => {
                format!("scaled factor={factor} ({})", inner.describe())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym2(a: f64, b: f64, d: f64) -> SymMatrix {
        SymMatrix::from_rows(2, &[a, b, b, d]).unwrap()
    }

    #[test]
    fn eigenvalues_diagonal_sorted() {
        let m = SymMatrix::diag(&[3.0, 1.0, 2.0]);
        let e = m.eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_2d_closed_form() {
        let m = sym2(0.0, 1.0, 0.0);
        let e = m.eigenvalues();
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!((e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_symmetric_rejected() {
        let r = SymMatrix::from_rows(2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(r, Err(Error::NotSymmetric)));
    }

    #[test]
    fn reconstruction_from_decomposition() {
        let m = SymMatrix::from_rows(
            3,
            &[2.0, -0.7, 0.3, -0.7, 1.1, 0.4, 0.3, 0.4, -0.5],
        )
        .unwrap();
        let (e, q) = m.eigen_decomposition();
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += q[i][k] * e[k] * q[j][k];
                }
                assert!(
                    (v - m.get(i, j)).abs() < 1e-9,
                    "reconstruction off at ({i},{j}): {v} vs {}",
                    m.get(i, j)
                );
            }
        }
    }

    #[test]
    fn pucci_values_match_hand_computation() {
        // Mixed-sign spectrum, lambda=1, Lambda=2.
        let m = SymMatrix::diag(&[1.0, -1.0]);
        assert!((pucci_plus(&m, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        // Identity: all eigenvalues positive.
        let id = SymMatrix::identity(2);
        assert!((pucci_plus(&id, 1.0, 2.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((pucci_minus(&id, 1.0, 2.0).unwrap() + 4.0).abs() < 1e-14);
        let m = SymMatrix::diag(&[2.0, -3.0]);
        assert!((pucci_minus(&m, 1.0, 2.0).unwrap() + 1.0).abs() < 1e-14);
        // lambda = Lambda = 1 collapses both to -trace.
        let m = SymMatrix::diag(&[0.3, -0.8, 2.0]);
        assert!((pucci_plus(&m, 1.0, 1.0).unwrap() + m.trace()).abs() < 1e-14);
        assert!((pucci_minus(&m, 1.0, 1.0).unwrap() + m.trace()).abs() < 1e-14);
    }

    #[test]
    fn pucci_rejects_bad_constants() {
        let m = SymMatrix::identity(1);
        assert!(pucci_plus(&m, 0.0, 1.0).is_err());
        assert!(pucci_plus(&m, 2.0, 1.0).is_err());
    }

    #[test]
    fn linear_trace_identity() {
        let op = EllipticOperator::laplacian(2);
        let m = SymMatrix::diag(&[1.0, 2.0]);
        assert!((op.eval(&[0.0, 0.0], &m).unwrap() + 3.0).abs() < 1e-14);
        assert_eq!(op.lambda(), 1.0);
        assert_eq!(op.big_lambda(), 1.0);
    }

    #[test]
    fn barenblatt_example() {
        let op = EllipticOperator::barenblatt(2, 0.5).unwrap();
        let m = SymMatrix::diag(&[-1.0, -1.0]); // trace -2
        assert!((op.eval(&[0.0, 0.0], &m).unwrap() - 4.0).abs() < 1e-14);
        assert!((op.lambda() - 2.0 / 3.0).abs() < 1e-15);
        assert!((op.big_lambda() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minmax_2d_example() {
        let op = EllipticOperator::minmax_2d();
        let m = SymMatrix::identity(2);
        assert!((op.eval(&[0.0, 0.0], &m).unwrap() + 3.0).abs() < 1e-14);
    }

    #[test]
    fn eval_checks_dimensions() {
        let op = EllipticOperator::laplacian(2);
        let m = SymMatrix::identity(3);
        assert!(matches!(
            op.eval(&[0.0, 0.0], &m),
            Err(Error::DimensionMismatch { .. })
        ));
        let m2 = SymMatrix::identity(2);
        assert!(matches!(
            op.eval(&[0.0], &m2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minmax_requires_dim_two() {
        let op = EllipticOperator::minmax_2d();
        assert_eq!(op.dim(), 2);
    }

    #[test]
    fn scaled_operator_constants() {
        let inner = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
        let op = EllipticOperator::scaled(3.0, inner).unwrap();
        assert_eq!(op.lambda(), 3.0);
        assert_eq!(op.big_lambda(), 6.0);
        let m = SymMatrix::diag(&[-1.0]);
        assert!((op.eval(&[0.0], &m).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn describe_round_trippable_strings() {
        assert_eq!(
            EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap().describe(),
            "pucci-minus lambda=1 Lambda=2"
        );
        assert_eq!(EllipticOperator::laplacian(3).describe(), "linear-trace scale=1");
        assert_eq!(
            EllipticOperator::linear_trace(SymMatrix::diag(&[1.0, 2.0]))
                .unwrap()
                .describe(),
            "linear-trace diag=1,2"
        );
        assert_eq!(
            EllipticOperator::barenblatt(1, 0.5).unwrap().describe(),
            "barenblatt gamma=0.5"
        );
    }
}
