//! Degree-1 maps between finite subsets of `C^n`.
//!
//! A map `f` on `D` has degree 1 when every coordinate `f_k` and every
//! product `f_k conj(f_l)` is a combination of the monomials `z_i conj(z_j)`
//! (`z_0 = 1`) restricted to `D`. Two finite sets are degree-1 homeomorphic
//! when some bijection has degree 1 in both directions; this is the same as
//! the operator systems of the diagonal normals being isomorphic through a
//! map carrying the generators to the generators, which [`deg1_via_opsys`]
//! decides by working in the system's own basis.

use serde::{Deserialize, Serialize};

use crate::exec::{factorial, find_first, invert_permutation, nth_permutation};
use crate::linalg::{ComplexMatrix, LeastSquares, C64};
use crate::opsys::{build_system, OperatorSystemSpan};
use crate::{Error, Result};

/// Relative residual threshold for span tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Distinct points of `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSet {
    ambient: usize,
    points: Vec<Vec<C64>>,
    tol: f64,
}

impl PointSet {
    pub fn new(ambient: usize, points: Vec<Vec<C64>>, tol: f64) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::Dimension(
                "ambient dimension must be positive".into(),
            ));
        }
        if points.is_empty() {
            return Err(Error::Invalid("empty point set".into()));
        }
        for p in &points {
            if p.len() != ambient {
                return Err(Error::Dimension(format!(
                    "point of length {} in C^{ambient}",
                    p.len()
                )));
            }
            if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Invalid("non-finite coordinate".into()));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if distance(&points[i], &points[j]) <= tol {
                    return Err(Error::Invalid(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(Self {
            ambient,
            points,
            tol,
        })
    }

    /// Points on the complex line.
    pub fn planar(points: &[C64], tol: f64) -> Result<Self> {
        Self::new(1, points.iter().map(|&z| vec![z]).collect(), tol)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Values of coordinate `k` (0-based) at every point.
    pub fn coordinate(&self, k: usize) -> Vec<C64> {
        self.points.iter().map(|p| p[k]).collect()
    }

    /// Image under `z -> a z + b` applied coordinatewise.
    pub fn affine(&self, a: C64, b: &[C64]) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|p| p.iter().zip(b).map(|(z, bb)| a * z + bb).collect())
            .collect();
        Self::new(self.ambient, pts, self.tol)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            ambient: self.ambient,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|z| z.conj()).collect())
                .collect(),
            tol: self.tol,
        }
    }

    /// Points reordered so that entry `i` is old point `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            ambient: self.ambient,
            points: order.iter().map(|&i| self.points[i].clone()).collect(),
            tol: self.tol,
        }
    }
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn monomial(p: &[C64], i: usize, j: usize) -> C64 {
    let zi = if i == 0 { C64::new(1.0, 0.0) } else { p[i - 1] };
    let zj = if j == 0 { C64::new(1.0, 0.0) } else { p[j - 1] };
    zi * zj.conj()
}

/// Evaluation matrix of `z_i conj(z_j)`, columns in lexicographic `(i, j)`.
pub fn monomial_matrix(d: &PointSet) -> ComplexMatrix {
    let n1 = d.ambient + 1;
    let mut m = ComplexMatrix::zeros(d.len(), n1 * n1);
    for (r, p) in d.points.iter().enumerate() {
        for i in 0..n1 {
            for j in 0..n1 {
                m[(r, i * n1 + j)] = monomial(p, i, j);
            }
        }
    }
    m
}

/// Coefficients `beta_ij^(k)` of a degree-1 map `C^n -> C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDegreeOneMap")]
pub struct DegreeOneMap {
    ambient: usize,
    /// `coeffs[k][i * (n + 1) + j]`
    coeffs: Vec<Vec<C64>>,
}

#[derive(Deserialize)]
struct RawDegreeOneMap {
    ambient: usize,
    coeffs: Vec<Vec<C64>>,
}

impl TryFrom<RawDegreeOneMap> for DegreeOneMap {
    type Error = Error;

    fn try_from(raw: RawDegreeOneMap) -> Result<Self> {
        Self::new(raw.ambient, raw.coeffs)
    }
}

impl DegreeOneMap {
    pub fn new(ambient: usize, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        let width = (ambient + 1) * (ambient + 1);
        if coeffs.len() != ambient || coeffs.iter().any(|c| c.len() != width) {
            return Err(Error::Dimension(format!(
                "expected {ambient} coefficient rows of length {width}"
            )));
        }
        if coeffs
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Ok(Self { ambient, coeffs })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    /// `beta_ij^(k)`, with `k` 0-based.
    pub fn beta_ij(&self, k: usize, i: usize, j: usize) -> C64 {
        self.coeffs[k][i * (self.ambient + 1) + j]
    }

    pub fn alpha(&self) -> C64 {
        self.beta_ij(0, 0, 0)
    }

    pub fn beta(&self) -> C64 {
        self.beta_ij(0, 1, 0)
    }

    pub fn gamma(&self) -> C64 {
        self.beta_ij(0, 0, 1)
    }

    pub fn delta(&self) -> C64 {
        self.beta_ij(0, 1, 1)
    }

    pub fn evaluate(&self, z: &[C64]) -> Vec<C64> {
        let n1 = self.ambient + 1;
        self.coeffs
            .iter()
            .map(|row| {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n1 {
                    for j in 0..n1 {
                        acc += row[i * n1 + j] * monomial(z, i, j);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Tests values and their pairwise products against a fixed function span.
struct SpanTester {
    ls: LeastSquares,
}

impl SpanTester {
    fn new(design: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            ls: LeastSquares::new(design)?,
        })
    }

    /// Coefficients for each coordinate and the worst relative residual over
    /// coordinates and products.
    fn test(&self, values: &[Vec<C64>], n: usize) -> (Vec<Vec<C64>>, f64) {
        let mut worst = 0.0f64;
        let mut coeffs = Vec::with_capacity(n);
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|k| values.iter().map(|p| p[k]).collect())
            .collect();
        for v in &cols {
            let (c, r) = self.ls.solve(v);
            worst = worst.max(r / (1.0 + norm(v)));
            coeffs.push(c);
        }
        // The span is closed under conjugation, so k <= l suffices.
        for k in 0..n {
            for l in k..n {
                let p: Vec<C64> = cols[k]
                    .iter()
                    .zip(&cols[l])
                    .map(|(a, b)| a * b.conj())
                    .collect();
                let (_, r) = self.ls.solve(&p);
                worst = worst.max(r / (1.0 + norm(&p)));
            }
        }
        (coeffs, worst)
    }
}

fn check_values(d: &PointSet, values: &[Vec<C64>]) -> Result<()> {
    if values.len() != d.len() {
        return Err(Error::Dimension(format!(
            "{} values for {} points",
            values.len(),
            d.len()
        )));
    }
    if values.iter().any(|v| v.len() != d.ambient) {
        return Err(Error::Dimension(format!(
            "values must lie in C^{}",
            d.ambient
        )));
    }
    Ok(())
}

/// The degree-1 map taking `D[r]` to `values[r]`, if one exists.
pub fn is_degree_one_assignment(
    d: &PointSet,
    values: &[Vec<C64>],
    tol: f64,
) -> Result<Option<DegreeOneMap>> {
    check_values(d, values)?;
    let tester = SpanTester::new(&monomial_matrix(d))?;
    let (coeffs, worst) = tester.test(values, d.ambient);
    if worst <= tol {
        Ok(Some(DegreeOneMap::new(d.ambient, coeffs)?))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Deg1Options {
    pub tol: f64,
    /// Largest set size searched; `None` selects 8 on the line, 6 otherwise.
    pub cap: Option<usize>,
    pub jobs: usize,
}

impl Default for Deg1Options {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            cap: None,
            jobs: 1,
        }
    }
}

impl Deg1Options {
    pub fn cap_for(&self, ambient: usize) -> usize {
        self.cap.unwrap_or(if ambient == 1 { 8 } else { 6 })
    }
}

/// Coordinates of a witness map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum MapCoords {
    Monomial(DegreeOneMap),
    /// `coords[k]` expands coordinate `k` over the diagonals of the basis of
    /// [`normal_system`] of the domain.
    SystemBasis {
        coords: Vec<Vec<C64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deg1Witness {
    /// `mapping[i] = j` sends `D[i]` to `E[j]`.
    pub mapping: Vec<usize>,
    pub forward: MapCoords,
    pub backward: MapCoords,
    pub forward_residual: f64,
    pub backward_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deg1Decision {
    pub homeomorphic: bool,
    pub witness: Option<Deg1Witness>,
    pub tried: usize,
}

/// Per-point distance profiles, sorted and normalized by the diameter.
fn profiles(d: &PointSet) -> Vec<Vec<f64>> {
    let m = d.len();
    let mut diam = 0.0f64;
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r: Vec<f64> = (0..m)
                .filter(|&j| j != i)
                .map(|j| distance(&d.points[i], &d.points[j]))
                .collect();
            r.sort_by(f64::total_cmp);
            diam = r.iter().copied().fold(diam, f64::max);
            r
        })
        .collect();
    if diam > 0.0 {
        rows.iter_mut().flatten().for_each(|x| *x /= diam);
    }
    rows
}

/// Bijection indices sorted by how well distance profiles line up, ties in
/// lexicographic order.
fn bijection_order(d: &PointSet, e: &PointSet) -> Vec<usize> {
    let (pd, pe) = (profiles(d), profiles(e));
    let m = d.len();
    let cost: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| pd[i].iter().zip(&pe[j]).map(|(a, b)| (a - b).abs()).sum())
                .collect()
        })
        .collect();
    let total = factorial(m);
    let mut scored: Vec<(f64, usize)> = (0..total)
        .map(|idx| {
            let p = nth_permutation(m, idx);
            (p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum(), idx)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, idx)| idx).collect()
}

fn search(
    d: &PointSet,
    e: &PointSet,
    opts: Deg1Options,
    forward: &SpanTester,
    backward: &SpanTester,
    wrap: impl Fn(Vec<Vec<C64>>) -> Result<MapCoords> + Sync,
) -> Result<Deg1Decision> {
    let m = d.len();
    let order = bijection_order(d, e);
    let n = d.ambient;
    let hit = find_first(order.len(), opts.jobs, |pos| {
        let mapping = nth_permutation(m, order[pos]);
        let image: Vec<Vec<C64>> = mapping.iter().map(|&j| e.points[j].clone()).collect();
        let (fc, fr) = forward.test(&image, n);
        if fr > opts.tol {
            return None;
        }
        let inv = invert_permutation(&mapping);
        let pre: Vec<Vec<C64>> = inv.iter().map(|&i| d.points[i].clone()).collect();
        let (bc, br) = backward.test(&pre, n);
        (br <= opts.tol).then_some((mapping, fc, fr, bc, br))
    });
    match hit {
        Some((pos, (mapping, fc, fr, bc, br))) => Ok(Deg1Decision {
            homeomorphic: true,
            witness: Some(Deg1Witness {
                mapping,
                forward: wrap(fc)?,
                backward: wrap(bc)?,
                forward_residual: fr,
                backward_residual: br,
            }),
            tried: pos + 1,
        }),
        None => Ok(Deg1Decision {
            homeomorphic: false,
            witness: None,
            tried: order.len(),
        }),
    }
}

fn precheck(d: &PointSet, e: &PointSet, opts: &Deg1Options) -> Result<Option<Deg1Decision>> {
    if d.ambient != e.ambient {
        return Err(Error::Dimension(format!(
            "point sets live in C^{} and C^{}",
            d.ambient, e.ambient
        )));
    }
    if d.len() != e.len() {
        return Ok(Some(Deg1Decision {
            homeomorphic: false,
            witness: None,
            tried: 0,
        }));
    }
    let cap = opts.cap_for(d.ambient);
    if d.len() > cap {
        return Err(Error::Capacity {
            what: "point set size",
            size: d.len(),
            cap,
        });
    }
    Ok(None)
}

/// Searches for a bijection of degree 1 in both directions.
pub fn degree_one_homeomorphic(
    d: &PointSet,
    e: &PointSet,
    opts: Deg1Options,
) -> Result<Deg1Decision> {
    if let Some(done) = precheck(d, e, &opts)? {
        return Ok(done);
    }
    let forward = SpanTester::new(&monomial_matrix(d))?;
    let backward = SpanTester::new(&monomial_matrix(e))?;
    let n = d.ambient;
    // Forward and backward maps share the ambient dimension.
    search(d, e, opts, &forward, &backward, |c| {
        Ok(MapCoords::Monomial(DegreeOneMap::new(n, c)?))
    })
}

/// Operator system generated by the diagonal matrices of the coordinates
/// `V_k` and the products `V_i V_j*`.
pub fn normal_system(d: &PointSet) -> Result<OperatorSystemSpan> {
    let m = d.len();
    let vs: Vec<ComplexMatrix> = (0..d.ambient)
        .map(|k| ComplexMatrix::from_diag(&d.coordinate(k)))
        .collect();
    let mut generators = vs.clone();
    for vi in &vs {
        for vj in &vs {
            generators.push(vi.matmul(&vj.adjoint()));
        }
    }
    build_system(m, &generators, true)
}

fn system_design(d: &PointSet) -> Result<ComplexMatrix> {
    let sys = normal_system(d)?;
    let cols: Vec<Vec<C64>> = sys.basis().iter().map(ComplexMatrix::diagonal).collect();
    let mut design = ComplexMatrix::zeros(d.len(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, &z) in c.iter().enumerate() {
            design[(i, j)] = z;
        }
    }
    Ok(design)
}

/// [`degree_one_homeomorphic`] computed in the basis of [`normal_system`].
pub fn deg1_via_opsys(d: &PointSet, e: &PointSet, opts: Deg1Options) -> Result<Deg1Decision> {
    if let Some(done) = precheck(d, e, &opts)? {
        return Ok(done);
    }
    let forward = SpanTester::new(&system_design(d)?)?;
    let backward = SpanTester::new(&system_design(e)?)?;
    search(d, e, opts, &forward, &backward, |coords| {
        Ok(MapCoords::SystemBasis { coords })
    })
}

fn evaluate_coords(coords: &MapCoords, domain: &PointSet) -> Result<Vec<Vec<C64>>> {
    match coords {
        MapCoords::Monomial(map) => Ok(domain.points.iter().map(|p| map.evaluate(p)).collect()),
        MapCoords::SystemBasis { coords } => {
            let design = system_design(domain)?;
            if coords.len() != domain.ambient || coords.iter().any(|c| c.len() != design.cols()) {
                return Err(Error::Dimension(
                    "witness coordinates do not match the system".into(),
                ));
            }
            let cols: Vec<Vec<C64>> = coords.iter().map(|c| design.matvec(c)).collect();
            Ok((0..domain.len())
                .map(|r| cols.iter().map(|c| c[r]).collect())
                .collect())
        }
    }
}

/// Re-evaluates a witness: the largest distance between a mapped point and
/// its partner, in either direction.
pub fn replay_witness(d: &PointSet, e: &PointSet, w: &Deg1Witness) -> Result<f64> {
    let m = d.len();
    if e.len() != m || w.mapping.len() != m {
        return Err(Error::Dimension(
            "witness size does not match the point sets".into(),
        ));
    }
    let mut sorted = w.mapping.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &j)| i != j) {
        return Err(Error::Invalid("witness mapping is not a bijection".into()));
    }
    let fwd = evaluate_coords(&w.forward, d)?;
    let bwd = evaluate_coords(&w.backward, e)?;
    let mut worst = 0.0f64;
    for (i, &j) in w.mapping.iter().enumerate() {
        worst = worst.max(distance(&fwd[i], &e.points[j]));
        worst = worst.max(distance(&bwd[j], &d.points[i]));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram_rank;
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_set(xs: &[f64]) -> PointSet {
        PointSet::planar(&xs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(), 1e-12).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PointSet {
        PointSet::new(n, sample::points(rng, n, m), 1e-9).unwrap()
    }

    /// Solves the 4x4 normal equations by Gaussian elimination and returns the
    /// relative residual of `v` against the columns `1, conj z, z, |z|^2`.
    fn normal_equations_residual(z: &[C64], v: &[C64]) -> f64 {
        let cols: Vec<Vec<C64>> = vec![
            z.iter().map(|_| c(1.0, 0.0)).collect(),
            z.iter().map(|w| w.conj()).collect(),
            z.to_vec(),
            z.iter().map(|w| w * w.conj()).collect(),
        ];
        let mut g = [[c(0.0, 0.0); 5]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
            }
            g[i][4] = cols[i].iter().zip(v).map(|(a, b)| a.conj() * b).sum();
        }
        for p in 0..4 {
            let piv = (p..4)
                .max_by(|&a, &b| g[a][p].norm().total_cmp(&g[b][p].norm()))
                .unwrap();
            g.swap(p, piv);
            let d = g[p][p];
            for r in 0..4 {
                if r != p {
                    let f = g[r][p] / d;
                    let pivot_row = g[p];
                    for (gk, t) in g[r].iter_mut().zip(pivot_row).skip(p) {
                        *gk -= f * t;
                    }
                }
            }
        }
        let x: Vec<C64> = (0..4).map(|i| g[i][4] / g[i][i]).collect();
        let res: f64 = (0..z.len())
            .map(|r| ((0..4).map(|k| x[k] * cols[k][r]).sum::<C64>() - v[r]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        res / (1.0 + v.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt())
    }

    fn second_implementation(d: &[C64], e: &[C64], tol: f64) -> bool {
        let m = d.len();
        (0..factorial(m)).any(|idx| {
            let p = nth_permutation(m, idx);
            let img: Vec<C64> = p.iter().map(|&j| e[j]).collect();
            let inv = invert_permutation(&p);
            let pre: Vec<C64> = inv.iter().map(|&i| d[i]).collect();
            let sq = |v: &[C64]| v.iter().map(|w| w * w.conj()).collect::<Vec<_>>();
            normal_equations_residual(d, &img) <= tol
                && normal_equations_residual(d, &sq(&img)) <= tol
                && normal_equations_residual(e, &pre) <= tol
                && normal_equations_residual(e, &sq(&pre)) <= tol
        })
    }

    #[test]
    fn monomial_matrix_examples() {
        let m = monomial_matrix(&real_set(&[0.0]));
        assert_eq!(m.rows(), 1);
        assert_eq!(
            m.row(0),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let m = monomial_matrix(&real_set(&[0.0, 1.0]));
        assert_eq!(m.row(1), &[c(1.0, 0.0); 4]);
    }

    #[test]
    fn monomial_matrix_rank_in_c2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_set(&mut rng, 2, 4);
        let mm = monomial_matrix(&d);
        assert_eq!((mm.rows(), mm.cols()), (4, 9));
        let cols: Vec<Vec<C64>> = (0..9)
            .map(|j| (0..4).map(|i| mm[(i, j)]).collect())
            .collect();
        assert_eq!(gram_rank(&cols, 1e-10).unwrap(), 4);
    }

    #[test]
    fn identity_and_conjugate_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_set(&mut rng, 1, 6);
        let id = is_degree_one_assignment(&d, d.points(), DEFAULT_TOL)
            .unwrap()
            .unwrap();
        assert!((id.beta() - 1.0).norm() < 1e-9);
        assert!(id.alpha().norm() < 1e-9 && id.gamma().norm() < 1e-9 && id.delta().norm() < 1e-9);
        let cj = is_degree_one_assignment(&d, d.conjugate().points(), DEFAULT_TOL)
            .unwrap()
            .unwrap();
        assert!((cj.gamma() - 1.0).norm() < 1e-9);
        assert!(cj.alpha().norm() < 1e-9 && cj.beta().norm() < 1e-9 && cj.delta().norm() < 1e-9);

        let d2 = random_set(&mut rng, 2, 12);
        let id2 = is_degree_one_assignment(&d2, d2.points(), DEFAULT_TOL)
            .unwrap()
            .unwrap();
        // coordinate k selects z_k = monomial (k, 0)
        for k in 0..2 {
            assert!((id2.beta_ij(k, k + 1, 0) - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn real_four_point_assignments_match_least_squares_oracle() {
        let d = real_set(&[0.0, 1.0, 2.0, 5.0]);
        let targets = [0.0, 1.0, 3.0, 5.0];
        let z: Vec<C64> = d.points().iter().map(|p| p[0]).collect();
        for idx in 0..24 {
            let p = nth_permutation(4, idx);
            let vals: Vec<Vec<C64>> = p.iter().map(|&j| vec![c(targets[j], 0.0)]).collect();
            let v: Vec<C64> = vals.iter().map(|x| x[0]).collect();
            let sq: Vec<C64> = v.iter().map(|w| w * w.conj()).collect();
            // real points: columns 1, x, x, x^2 have rank 3
            let x: Vec<C64> = z.clone();
            let basis = vec![
                vec![c(1.0, 0.0); 4],
                x.clone(),
                x.iter().map(|w| w * w).collect(),
            ];
            let oracle = crate::linalg::span_membership(&v, &basis, 1e-9)
                .unwrap()
                .is_some()
                && crate::linalg::span_membership(&sq, &basis, 1e-9)
                    .unwrap()
                    .is_some();
            let got = is_degree_one_assignment(&d, &vals, DEFAULT_TOL)
                .unwrap()
                .is_some();
            assert_eq!(got, oracle, "assignment {p:?}");
        }
    }

    #[test]
    fn length_mismatch() {
        let d = real_set(&[0.0, 1.0]);
        assert!(matches!(
            is_degree_one_assignment(&d, &[vec![c(0.0, 0.0)]], DEFAULT_TOL),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn affine_and_conjugate_images_are_homeomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=7 {
            let d = random_set(&mut rng, 1, m);
            let a = sample::complex_normal(&mut rng) + 0.5;
            let b = sample::complex_vector(&mut rng, 1);
            let e = d.affine(a, &b).unwrap();
            let r = degree_one_homeomorphic(&d, &e, Deg1Options::default()).unwrap();
            assert!(r.homeomorphic);
            assert!(replay_witness(&d, &e, r.witness.as_ref().unwrap()).unwrap() < 1e-8);
            let r = degree_one_homeomorphic(&d, &d.conjugate(), Deg1Options::default()).unwrap();
            assert!(r.homeomorphic);
        }
    }

    #[test]
    fn generic_five_points_match_second_implementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let d = random_set(&mut rng, 1, 5);
            let e = random_set(&mut rng, 1, 5);
            let r = degree_one_homeomorphic(&d, &e, Deg1Options::default()).unwrap();
            let zd: Vec<C64> = d.coordinate(0);
            let ze: Vec<C64> = e.coordinate(0);
            assert!(!r.homeomorphic);
            assert_eq!(r.tried, 120);
            assert_eq!(second_implementation(&zd, &ze, 1e-9), r.homeomorphic);
        }
        let d = random_set(&mut rng, 1, 5);
        let e = d
            .affine(c(0.3, -1.2), &[c(2.0, 1.0)])
            .unwrap()
            .reordered(&[3, 1, 4, 0, 2]);
        assert!(second_implementation(
            &d.coordinate(0),
            &e.coordinate(0),
            1e-9
        ));
        assert!(
            degree_one_homeomorphic(&d, &e, Deg1Options::default())
                .unwrap()
                .homeomorphic
        );
    }

    #[test]
    fn small_sets_always_homeomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for m in 1..=2 {
            for n in 1..=2 {
                let d = random_set(&mut rng, n, m);
                let e = random_set(&mut rng, n, m);
                assert!(
                    degree_one_homeomorphic(&d, &e, Deg1Options::default())
                        .unwrap()
                        .homeomorphic
                );
            }
        }
    }

    #[test]
    fn cardinality_and_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_set(&mut rng, 1, 3);
        let e = random_set(&mut rng, 1, 4);
        let r = degree_one_homeomorphic(&d, &e, Deg1Options::default()).unwrap();
        assert!(!r.homeomorphic);
        assert!(
            !deg1_via_opsys(&d, &e, Deg1Options::default())
                .unwrap()
                .homeomorphic
        );
        let big = random_set(&mut rng, 1, 9);
        assert!(matches!(
            degree_one_homeomorphic(&big, &big, Deg1Options::default()),
            Err(Error::Capacity { cap: 8, .. })
        ));
        let d2 = random_set(&mut rng, 2, 7);
        assert!(matches!(
            degree_one_homeomorphic(&d2, &d2, Deg1Options::default()),
            Err(Error::Capacity { cap: 6, .. })
        ));
    }

    #[test]
    fn normal_system_examples() {
        assert_eq!(normal_system(&real_set(&[0.0, 1.0])).unwrap().dim(), 2);
        assert_eq!(normal_system(&real_set(&[0.0])).unwrap().dim(), 1);
        let circle: Vec<C64> = [0.3, 1.9, 4.0]
            .iter()
            .map(|&a| C64::from_polar(1.0, a))
            .collect();
        let d = PointSet::planar(&circle, 1e-9).unwrap();
        let sys = normal_system(&d).unwrap();
        assert_eq!(sys.dim(), 3);
        let v = ComplexMatrix::from_diag(&circle);
        let vv = v.matmul(&v.adjoint());
        assert!(sys.coordinates(&vv, 1e-9).unwrap().is_some());
    }

    #[test]
    fn opsys_route_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..30 {
            let n = 1 + trial % 2;
            let m = rng.random_range(1..=5);
            let d = random_set(&mut rng, n, m);
            let e = if rng.random_bool(0.5) {
                d.affine(c(1.1, 0.4), &vec![c(0.2, 0.0); n])
                    .unwrap()
                    .reordered(&nth_permutation(m, factorial(m) - 1))
            } else {
                random_set(&mut rng, n, m)
            };
            let a = degree_one_homeomorphic(&d, &e, Deg1Options::default()).unwrap();
            let b = deg1_via_opsys(&d, &e, Deg1Options::default()).unwrap();
            assert_eq!(a.homeomorphic, b.homeomorphic, "trial {trial}");
            if let Some(w) = &b.witness {
                assert!(replay_witness(&d, &e, w).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn jobs_do_not_change_the_answer() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = random_set(&mut rng, 1, 6);
        let e = d.conjugate().reordered(&[5, 2, 0, 1, 4, 3]);
        let one = degree_one_homeomorphic(&d, &e, Deg1Options::default()).unwrap();
        let four = degree_one_homeomorphic(
            &d,
            &e,
            Deg1Options {
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one, four);
    }
}
