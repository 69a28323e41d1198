//! Finite-dimensional operator systems represented as spans of matrices.

use serde::{Deserialize, Serialize};

use crate::linalg::{gram_rank, kron, op_norm, span_membership, ComplexMatrix, LeastSquares, C64};
use crate::{Error, Result, TOL_NUM};

/// A self-adjoint unital span of `k x k` matrices with a fixed basis.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorSystemSpan {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    unit_coeffs: Vec<C64>,
}

impl OperatorSystemSpan {
    /// Wraps an existing basis after checking every invariant.
    pub fn from_basis(basis: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let check = is_operator_system(&basis, tol)?;
        if let Some(failed) = check.failed {
            return Err(Error::Invalid(format!(
                "basis is not an operator system: {failed}"
            )));
        }
        let unit_coeffs = find_unit_coeffs(&basis)?;
        Ok(Self {
            ambient_dim: basis[0].rows(),
            basis,
            unit_coeffs,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension `N` of the span.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn unit_coeffs(&self) -> &[C64] {
        &self.unit_coeffs
    }

    /// `sum_j coeffs[j] * basis[j]`.
    pub fn element(&self, coeffs: &[C64]) -> ComplexMatrix {
        ComplexMatrix::combination(coeffs, &self.basis)
    }

    /// Coordinates of `m` in the basis, if `m` lies in the span.
    pub fn coordinates(&self, m: &ComplexMatrix, tol: f64) -> Result<Option<Vec<C64>>> {
        let cols: Vec<Vec<C64>> = self.basis.iter().map(ComplexMatrix::vectorize).collect();
        span_membership(&m.vectorize(), &cols, tol)
    }

    /// Conjugates every basis element by `u`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let ua = u.adjoint();
        Self {
            ambient_dim: self.ambient_dim,
            basis: self.basis.iter().map(|b| &(u * b) * &ua).collect(),
            unit_coeffs: self.unit_coeffs.clone(),
        }
    }

    /// Replaces the basis by `b'_j = sum_i change[(i, j)] b_i`.
    pub fn rebased(&self, change: &ComplexMatrix) -> Result<Self> {
        let n = self.dim();
        if change.rows() != n || change.cols() != n {
            return Err(Error::Dimension(format!("basis change must be {n}x{n}")));
        }
        let basis: Vec<ComplexMatrix> = (0..n)
            .map(|j| {
                let col: Vec<C64> = (0..n).map(|i| change[(i, j)]).collect();
                self.element(&col)
            })
            .collect();
        Self::from_basis(basis, TOL_NUM)
    }
}

fn vectors(mats: &[ComplexMatrix]) -> Vec<Vec<C64>> {
    mats.iter().map(ComplexMatrix::vectorize).collect()
}

fn check_square_family(mats: &[ComplexMatrix]) -> Result<usize> {
    let k = mats
        .first()
        .ok_or_else(|| Error::Dimension("no matrices".into()))?
        .rows();
    for m in mats {
        if !m.is_square() || m.rows() != k {
            return Err(Error::Dimension(format!(
                "expected {k}x{k} matrices, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(k)
}

/// Builds the operator system spanned by the identity (when requested or
/// already present), the generators and their adjoints.
///
/// The basis is extracted greedily: the identity first, then `g_1, g_1*,
/// g_2, g_2*, ...`, skipping candidates that do not raise the rank.
pub fn build_system(
    ambient_dim: usize,
    generators: &[ComplexMatrix],
    include_identity: bool,
) -> Result<OperatorSystemSpan> {
    if ambient_dim == 0 {
        return Err(Error::Dimension(
            "ambient dimension must be positive".into(),
        ));
    }
    if generators.is_empty() && !include_identity {
        return Err(Error::EmptySystem);
    }
    for g in generators {
        if !g.is_square() || g.rows() != ambient_dim {
            return Err(Error::Dimension(format!(
                "generator is {}x{}, ambient dimension is {ambient_dim}",
                g.rows(),
                g.cols()
            )));
        }
    }
    let identity = ComplexMatrix::identity(ambient_dim);
    let candidates: Vec<ComplexMatrix> = generators
        .iter()
        .flat_map(|g| [g.clone(), g.adjoint()])
        .collect();

    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let nonzero: Vec<Vec<C64>> = candidates
        .iter()
        .filter(|c| c.max_abs() > 0.0)
        .map(ComplexMatrix::vectorize)
        .collect();
    let identity_in_span =
        !nonzero.is_empty() && span_membership(&identity.vectorize(), &nonzero, TOL_NUM)?.is_some();
    if include_identity || identity_in_span {
        basis.push(identity);
    }
    for cand in candidates {
        if cand.max_abs() == 0.0 {
            continue;
        }
        let mut trial = vectors(&basis);
        trial.push(cand.vectorize());
        if gram_rank(&trial, TOL_NUM)? == trial.len() {
            basis.push(cand);
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptySystem);
    }
    let unit_coeffs = find_unit_coeffs(&basis)?;
    Ok(OperatorSystemSpan {
        ambient_dim,
        basis,
        unit_coeffs,
    })
}

/// Which membership condition failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemCondition {
    ContainsIdentity,
    SelfAdjoint,
    LinearlyIndependent,
}

impl std::fmt::Display for SystemCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemCondition::ContainsIdentity => "identity not in span",
            SystemCondition::SelfAdjoint => "span not closed under adjoints",
            SystemCondition::LinearlyIndependent => "tuple is linearly dependent",
        })
    }
}

/// Outcome of [`is_operator_system`].
#[derive(Clone, Debug, Serialize)]
pub struct SystemCheck {
    pub holds: bool,
    pub failed: Option<SystemCondition>,
    /// Least-squares residual of the identity against the span.
    pub unit_residual: f64,
    /// Largest residual of an adjoint `x_j*` against the span.
    pub adjoint_residual: f64,
    /// Smallest distance of `x_j` from the span of its predecessors. Reported
    /// for information only.
    pub separation: f64,
}

/// Decides whether `tuple` is a linearly independent basis of an operator
/// system.
pub fn is_operator_system(tuple: &[ComplexMatrix], tol: f64) -> Result<SystemCheck> {
    let k = check_square_family(tuple)?;
    let cols = vectors(tuple);
    let ls = LeastSquares::from_columns(&cols)?;

    let (_, unit_residual) = ls.solve(&ComplexMatrix::identity(k).vectorize());
    let unit_ok = unit_residual <= tol * (k as f64).sqrt().max(1.0);

    let mut adjoint_residual = 0.0f64;
    let mut adjoint_ok = true;
    for m in tuple {
        let v = m.adjoint().vectorize();
        let (_, r) = ls.solve(&v);
        adjoint_residual = adjoint_residual.max(r);
        if r > tol * m.frobenius_norm().max(1.0) {
            adjoint_ok = false;
        }
    }

    let independent = gram_rank(&cols, tol)? == cols.len();

    let mut separation = f64::INFINITY;
    for j in 0..cols.len() {
        let d = if j == 0 {
            tuple[0].frobenius_norm()
        } else {
            LeastSquares::from_columns(&cols[..j])?.solve(&cols[j]).1
        };
        separation = separation.min(d);
    }

    let failed = if !unit_ok {
        Some(SystemCondition::ContainsIdentity)
    } else if !adjoint_ok {
        Some(SystemCondition::SelfAdjoint)
    } else if !independent {
        Some(SystemCondition::LinearlyIndependent)
    } else {
        None
    };
    Ok(SystemCheck {
        holds: failed.is_none(),
        failed,
        unit_residual,
        adjoint_residual,
        separation,
    })
}

/// Minimum-norm coefficients expressing the identity in terms of `span`.
pub fn find_unit_coeffs(span: &[ComplexMatrix]) -> Result<Vec<C64>> {
    let k = check_square_family(span)?;
    let identity = ComplexMatrix::identity(k).vectorize();
    let ls = LeastSquares::from_columns(&vectors(span))?;
    let (c, residual) = ls.solve(&identity);
    if residual > TOL_NUM * (k as f64).sqrt() {
        return Err(Error::NoUnit { residual });
    }
    Ok(c)
}

/// An element of `M_n(X)`: an `n x n` array of coefficient vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifiedElement {
    level: usize,
    /// Row-major `n x n` array; entry `(i, j)` holds coordinates in the basis.
    coeffs: Vec<Vec<C64>>,
}

impl AmplifiedElement {
    pub fn new(level: usize, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if level == 0 || coeffs.len() != level * level {
            return Err(Error::Dimension(format!(
                "level {level} element needs {} entries, got {}",
                level * level,
                coeffs.len()
            )));
        }
        let len = coeffs[0].len();
        if coeffs.iter().any(|c| c.len() != len) {
            return Err(Error::Dimension(
                "coefficient vectors of unequal length".into(),
            ));
        }
        Ok(Self { level, coeffs })
    }

    /// `I_n (x) e_X`.
    pub fn unit(x: &OperatorSystemSpan, level: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); x.dim()];
        let coeffs = (0..level * level)
            .map(|idx| {
                if idx / level == idx % level {
                    x.unit_coeffs().to_vec()
                } else {
                    zero.clone()
                }
            })
            .collect();
        Self { level, coeffs }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn entry(&self, i: usize, j: usize) -> &[C64] {
        &self.coeffs[i * self.level + j]
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    /// The `nk x nk` matrix `sum_ij E_ij (x) x_ij`.
    pub fn assemble(&self, x: &OperatorSystemSpan) -> Result<ComplexMatrix> {
        if self.coeffs[0].len() != x.dim() {
            return Err(Error::Dimension(format!(
                "coefficient vectors have length {}, system dimension is {}",
                self.coeffs[0].len(),
                x.dim()
            )));
        }
        let n = self.level;
        let k = x.ambient_dim();
        let mut out = ComplexMatrix::zeros(n * k, n * k);
        for i in 0..n {
            for j in 0..n {
                let block = x.element(self.entry(i, j));
                for p in 0..k {
                    for q in 0..k {
                        out[(i * k + p, j * k + q)] = block[(p, q)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Norm of `A` in `M_n(X)`, i.e. the operator norm of its assembled matrix.
pub fn amplified_norm(x: &OperatorSystemSpan, a: &AmplifiedElement) -> Result<f64> {
    op_norm(&a.assemble(x)?)
}

/// A finite-dimensional normed space whose dual unit ball is the absolutely
/// convex hull of finitely many functionals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyhedralDualBall {
    dim: usize,
    functionals: Vec<Vec<C64>>,
}

impl PolyhedralDualBall {
    pub fn new(dim: usize, functionals: Vec<Vec<C64>>) -> Result<Self> {
        if functionals.is_empty() {
            return Err(Error::Invalid(
                "dual ball needs at least one functional".into(),
            ));
        }
        for f in &functionals {
            if f.len() != dim {
                return Err(Error::Dimension(format!(
                    "functional of length {} in dimension {dim}",
                    f.len()
                )));
            }
            if f.iter().all(|z| z.norm() == 0.0) {
                return Err(Error::Invalid("zero functional in dual ball".into()));
            }
        }
        Ok(Self { dim, functionals })
    }

    /// `l_inf` on `C^dim`: the dual ball is spanned by coordinate functionals.
    pub fn l_infinity(dim: usize) -> Self {
        let functionals = (0..dim)
            .map(|i| {
                let mut f = vec![C64::new(0.0, 0.0); dim];
                f[i] = C64::new(1.0, 0.0);
                f
            })
            .collect();
        Self { dim, functionals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functionals(&self) -> &[Vec<C64>] {
        &self.functionals
    }

    /// The norm of a vector: `max_phi |phi(x)|`.
    pub fn norm(&self, x: &[C64]) -> Result<f64> {
        self.check(x)?;
        Ok(self
            .functionals
            .iter()
            .map(|f| apply(f, x).norm())
            .fold(0.0, f64::max))
    }

    fn check(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vector of length {} in dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

fn apply(f: &[C64], x: &[C64]) -> C64 {
    f.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Norm of `[x_ij]` in the minimal operator-space structure: the largest
/// `|[phi(x_ij)]|` over the extreme functionals of the dual ball.
///
/// `x` holds the `n x n` array row-major.
pub fn min_os_norm(ball: &PolyhedralDualBall, x: &[Vec<C64>]) -> Result<f64> {
    let n = (x.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != x.len() {
        return Err(Error::Dimension(format!(
            "{} entries do not form a square array",
            x.len()
        )));
    }
    for v in x {
        ball.check(v)?;
    }
    let mut best = 0.0f64;
    for f in &ball.functionals {
        let scalars: Vec<C64> = x.iter().map(|v| apply(f, v)).collect();
        let m = ComplexMatrix::new(n, n, scalars)?;
        best = best.max(op_norm(&m)?);
    }
    Ok(best)
}

/// Dimension of the commutant `{C : C g = g C for all g}` in `M_k`.
pub fn commutant_dimension(mats: &[ComplexMatrix], tol: f64) -> Result<usize> {
    let k = check_square_family(mats)?;
    let identity = ComplexMatrix::identity(k);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for g in mats {
        // vec_r(C g - g C) = (I (x) g^T - g (x) I) vec_r(C)
        let op = &kron(&identity, &g.transpose()) - &kron(g, &identity);
        for i in 0..op.rows() {
            rows.push(op.row(i).to_vec());
        }
    }
    // Row rank equals column rank; pass the rows as vectors.
    let rank = gram_rank(&rows, tol)?;
    Ok(k * k - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn wt(t: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, t, 0.0]])
            .unwrap()
    }

    fn e12() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn build_system_dimensions() {
        let u = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        assert_eq!(build_system(3, &[u], true).unwrap().dim(), 3);
        assert_eq!(
            build_system(2, &[ComplexMatrix::identity(2)], true)
                .unwrap()
                .dim(),
            1
        );
        let x = build_system(3, &[wt(0.5)], true).unwrap();
        assert_eq!(x.dim(), 3);
        // greedy order: I, W, W*
        assert_eq!(x.basis()[0], ComplexMatrix::identity(3));
        assert_eq!(x.basis()[1], wt(0.5));
        assert_eq!(x.basis()[2], wt(0.5).adjoint());
        let gram = vectors(&[ComplexMatrix::identity(3), wt(0.5), wt(0.5).adjoint()]);
        assert_eq!(gram_rank(&gram, 1e-9).unwrap(), 3);
    }

    #[test]
    fn build_system_identity_found_in_span() {
        // diag(1,1) appears as (Z + I) and (I - Z) combinations: generators I+Z, I-Z.
        let p = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 0.0)]);
        let q = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(2.0, 0.0)]);
        let x = build_system(2, &[p.clone(), q], false).unwrap();
        assert_eq!(x.dim(), 2);
        assert_eq!(x.basis()[0], ComplexMatrix::identity(2));
        assert_eq!(x.basis()[1], p);
    }

    #[test]
    fn build_system_errors() {
        assert!(matches!(
            build_system(2, &[], false),
            Err(Error::EmptySystem)
        ));
        assert!(matches!(
            build_system(2, &[ComplexMatrix::zeros(2, 2)], false),
            Err(Error::EmptySystem)
        ));
        assert!(matches!(
            build_system(3, &[ComplexMatrix::identity(2)], true),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            build_system(2, &[e12()], false),
            Err(Error::NoUnit { .. })
        ));
    }

    #[test]
    fn is_operator_system_examples() {
        let z = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(
            is_operator_system(&[ComplexMatrix::identity(2), z], 1e-9)
                .unwrap()
                .holds
        );

        let r = is_operator_system(&[e12()], 1e-9).unwrap();
        assert!(!r.holds);
        assert_eq!(r.failed, Some(SystemCondition::ContainsIdentity));

        let u = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        let r = is_operator_system(&[u.clone(), u.adjoint()], 1e-9).unwrap();
        assert_eq!(r.failed, Some(SystemCondition::ContainsIdentity));
        let cols = vectors(&[u.clone(), u.adjoint()]);
        assert!(
            span_membership(&ComplexMatrix::identity(3).vectorize(), &cols, 1e-9)
                .unwrap()
                .is_none()
        );

        let r = is_operator_system(&[ComplexMatrix::identity(3), wt(0.5)], 1e-9).unwrap();
        assert_eq!(r.failed, Some(SystemCondition::SelfAdjoint));

        let r = is_operator_system(
            &[ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            1e-9,
        )
        .unwrap();
        assert_eq!(r.failed, Some(SystemCondition::LinearlyIndependent));
        assert!(r.separation < 1e-12);
    }

    #[test]
    fn find_unit_coeffs_examples() {
        let w = wt(0.3);
        let c1 = find_unit_coeffs(&[ComplexMatrix::identity(3), w.clone(), w.adjoint()]).unwrap();
        assert!(
            (c1[0] - c(1.0, 0.0)).norm() < 1e-14 && c1[1].norm() < 1e-14 && c1[2].norm() < 1e-14
        );

        let flip = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let c2 = find_unit_coeffs(&[ComplexMatrix::identity(2).scale(c(2.0, 0.0)), flip]).unwrap();
        assert!((c2[0] - c(0.5, 0.0)).norm() < 1e-14 && c2[1].norm() < 1e-14);

        // basis (I+U, I-U, U*) with U = diag(i, -i); solved by hand:
        // a + b = 1, a - b - c = 0, minimum norm at c = 0.
        let u = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let i2 = ComplexMatrix::identity(2);
        let c3 = find_unit_coeffs(&[&i2 + &u, &i2 - &u, u.adjoint()]).unwrap();
        assert!((c3[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((c3[1] - c(0.5, 0.0)).norm() < 1e-12);
        assert!(c3[2].norm() < 1e-12);

        assert!(matches!(
            find_unit_coeffs(&[e12()]),
            Err(Error::NoUnit { .. })
        ));
    }

    #[test]
    fn amplified_norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = build_system(3, &[wt(0.5)], true).unwrap();
        for n in 1..=3 {
            let unit = AmplifiedElement::unit(&x, n);
            assert!((amplified_norm(&x, &unit).unwrap() - 1.0).abs() < 1e-14);
        }
        let wel =
            AmplifiedElement::new(1, vec![vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!((amplified_norm(&x, &wel).unwrap() - 1.0).abs() < 1e-14);

        // direct assembly oracle at level 2
        let coeffs: Vec<Vec<C64>> = (0..4)
            .map(|_| sample::complex_vector(&mut rng, 3))
            .collect();
        let a = AmplifiedElement::new(2, coeffs.clone()).unwrap();
        let mut big = ComplexMatrix::zeros(6, 6);
        for i in 0..2 {
            for j in 0..2 {
                let mut e = ComplexMatrix::zeros(2, 2);
                e[(i, j)] = c(1.0, 0.0);
                big = &big + &kron(&e, &x.element(&coeffs[i * 2 + j]));
            }
        }
        assert!((amplified_norm(&x, &a).unwrap() - op_norm(&big).unwrap()).abs() < 1e-12);

        let bad = AmplifiedElement::new(1, vec![vec![c(1.0, 0.0)]]).unwrap();
        assert!(matches!(amplified_norm(&x, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn min_os_norm_examples() {
        // level 1 recovers the norm
        let ball = PolyhedralDualBall::l_infinity(2);
        let v = vec![c(0.3, -1.2), c(0.5, 0.5)];
        assert!((min_os_norm(&ball, std::slice::from_ref(&v)).unwrap() - ball.norm(&v).unwrap()).abs() < 1e-15);

        // X = C: scalars
        let scalar = PolyhedralDualBall::new(1, vec![vec![c(1.0, 0.0)]]).unwrap();
        let xs = vec![
            vec![c(1.0, 0.0)],
            vec![c(2.0, 0.0)],
            vec![c(0.0, 1.0)],
            vec![c(-1.0, 0.0)],
        ];
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        assert!((min_os_norm(&scalar, &xs).unwrap() - op_norm(&m).unwrap()).abs() < 1e-14);

        assert!(PolyhedralDualBall::new(2, vec![]).is_err());
    }

    /// Dense grid over the l1 dual ball of l_inf(C^2): phi = (a e^{i s}, (1-a) e^{i t}).
    fn grid_oracle(x: &[Vec<C64>]) -> f64 {
        let steps = 60;
        let mut best = 0.0f64;
        for ai in 0..=steps {
            let a = ai as f64 / steps as f64;
            for si in 0..steps {
                for ti in 0..steps {
                    let s = std::f64::consts::TAU * si as f64 / steps as f64;
                    let t = std::f64::consts::TAU * ti as f64 / steps as f64;
                    let f = [C64::from_polar(a, s), C64::from_polar(1.0 - a, t)];
                    let m: Vec<C64> = x.iter().map(|v| f[0] * v[0] + f[1] * v[1]).collect();
                    best = best.max(op_norm(&ComplexMatrix::new(2, 2, m).unwrap()).unwrap());
                }
            }
        }
        best
    }

    #[test]
    fn min_os_norm_matches_grid_search() {
        let x = vec![
            vec![c(1.0, 0.5), c(-0.3, 0.2)],
            vec![c(0.0, 0.7), c(0.4, -0.1)],
            vec![c(0.2, 0.0), c(-0.9, 0.3)],
            vec![c(0.5, -0.5), c(0.1, 0.1)],
        ];
        let exact = min_os_norm(&PolyhedralDualBall::l_infinity(2), &x).unwrap();
        let grid = grid_oracle(&x);
        // the grid contains the extreme points, so it cannot exceed the exact value
        assert!(grid <= exact + 1e-12);
        assert!((grid - exact).abs() < 1e-6, "{grid} vs {exact}");
    }

    #[test]
    fn commutant_of_irreducible_and_diagonal() {
        let w = wt(0.5);
        assert_eq!(
            commutant_dimension(&[w.clone(), w.adjoint()], 1e-9).unwrap(),
            1
        );
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(commutant_dimension(&[d], 1e-9).unwrap(), 3);
    }
}
