//! Distances between operator systems of equal dimension, amplified norms of
//! linear maps, and the `W_t` families.
//!
//! For `N`-dimensional systems `X`, `Y` and a linear isomorphism `u`,
//!
//! ```text
//! obj_n(u) = max{ |u(e_X) - e_Y|, log |id_n (x) u|, log |id_n (x) u^-1| }
//! ```
//!
//! and `d_n(X, Y)` is the infimum over `u`. Both the inner norms and the outer
//! infimum are nonconvex problems; everything reported here is the best value
//! found by a seeded search, never a certified bound.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::decision::{Certificate, CoisDecision, Method, Verdict, WtObstruction};
use crate::exec::map_indexed;
use crate::linalg::{inverse, op_norm, singular_values, ComplexMatrix, LeastSquares, C64};
use crate::opsys::{build_system, AmplifiedElement, OperatorSystemSpan};
use crate::optim::NelderMead;
use crate::{Error, Result};

/// Coordinates of a linear map between two `N`-dimensional systems: column
/// `j` holds the image of the `j`-th basis element of the source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearMapCoords {
    matrix: ComplexMatrix,
    condition: f64,
}

impl LinearMapCoords {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("map coordinates must be square".into()));
        }
        let s = singular_values(&matrix)?;
        let smin = *s.last().expect("nonempty");
        let condition = if smin > 0.0 {
            s[0] / smin
        } else {
            f64::INFINITY
        };
        Ok(Self { matrix, condition })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
            condition: 1.0,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Ratio of extreme singular values; infinite for singular maps.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn inverse(&self) -> Result<Self> {
        inverse(&self.matrix)
            .ok_or_else(|| Error::Invalid("map is not invertible".into()))
            .and_then(Self::new)
    }

    pub fn scale(&self, c: C64) -> Result<Self> {
        Self::new(self.matrix.scale(c))
    }
}

/// Work limits for the inner norm ascent.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AscentBudget {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for AscentBudget {
    fn default() -> Self {
        Self {
            starts: 16,
            iters: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub maximizer: AmplifiedElement,
}

type Mat = DMatrix<C64>;

fn to_mat(m: &ComplexMatrix) -> Mat {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn top_singular(m: &Mat) -> f64 {
    m.clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .map(|s| s.singular_values.iter().copied().fold(0.0, f64::max))
        .unwrap_or(f64::NAN)
}

fn top_triplet(m: &Mat) -> Option<(f64, Vec<C64>, Vec<C64>)> {
    let svd = m.clone().try_svd(true, true, f64::EPSILON, 0)?;
    let (idx, &s) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    let u = svd.u.as_ref()?.column(idx).iter().copied().collect();
    let v = svd
        .v_t
        .as_ref()?
        .row(idx)
        .iter()
        .map(|z| z.conj())
        .collect();
    Some((s, u, v))
}

/// `sum_{ij,l} c_{ijl} E_ij (x) mats_l` at level `n`.
fn assemble(mats: &[Mat], n: usize, c: &[C64]) -> Mat {
    let k = mats[0].nrows();
    let big = mats.len();
    let mut out = Mat::zeros(n * k, n * k);
    for i in 0..n {
        for j in 0..n {
            let base = (i * n + j) * big;
            for (l, m) in mats.iter().enumerate() {
                let cl = c[base + l];
                if cl == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..k {
                    for q in 0..k {
                        out[(i * k + p, j * k + q)] += cl * m[(p, q)];
                    }
                }
            }
        }
    }
    out
}

/// `conj(p_i^* mats_l q_j)`: the ascent direction of `|M(c)|` at a top
/// singular pair.
fn norm_gradient(mats: &[Mat], n: usize, p: &[C64], q: &[C64]) -> Vec<C64> {
    let k = mats[0].nrows();
    let big = mats.len();
    let mut g = vec![C64::new(0.0, 0.0); n * n * big];
    for i in 0..n {
        for j in 0..n {
            for (l, m) in mats.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..k {
                    let pa = p[i * k + a].conj();
                    for b in 0..k {
                        acc += pa * m[(a, b)] * q[j * k + b];
                    }
                }
                g[(i * n + j) * big + l] = acc.conj();
            }
        }
    }
    g
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Images `u(b_l)` as matrices in the ambient algebra of `y`.
fn image_matrices(y: &OperatorSystemSpan, u: &ComplexMatrix) -> Vec<Mat> {
    (0..u.cols())
        .map(|l| {
            let col: Vec<C64> = (0..u.rows()).map(|k| u[(k, l)]).collect();
            to_mat(&y.element(&col))
        })
        .collect()
}

/// Supremum of `|M_u(c)| / |M_x(c)|` over coefficient arrays `c`.
struct RatioProblem {
    n: usize,
    source: Vec<Mat>,
    image: Vec<Mat>,
}

impl RatioProblem {
    fn new(x: &OperatorSystemSpan, y: &OperatorSystemSpan, u: &ComplexMatrix, n: usize) -> Self {
        Self {
            n,
            source: x.basis().iter().map(to_mat).collect(),
            image: image_matrices(y, u),
        }
    }

    fn log_ratio(&self, c: &[C64]) -> f64 {
        let num = top_singular(&assemble(&self.image, self.n, c));
        let den = top_singular(&assemble(&self.source, self.n, c));
        if den <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (num / den).ln()
    }

    fn normalize(&self, c: &mut [C64]) {
        let den = top_singular(&assemble(&self.source, self.n, c));
        if den > 0.0 {
            c.iter_mut().for_each(|z| *z /= den);
        }
    }

    /// Gradient ascent with backtracking; returns the final log ratio.
    fn ascend(&self, c: &mut Vec<C64>, iters: usize) -> f64 {
        self.normalize(c);
        let mut f = self.log_ratio(c);
        if !f.is_finite() {
            return f;
        }
        let mut eta = 0.5;
        let mut stall = 0;
        for _ in 0..iters {
            let (Some((sn, pn, qn)), Some((sd, pd, qd))) = (
                top_triplet(&assemble(&self.image, self.n, c)),
                top_triplet(&assemble(&self.source, self.n, c)),
            ) else {
                break;
            };
            if sn <= 0.0 || sd <= 0.0 {
                break;
            }
            let gn = norm_gradient(&self.image, self.n, &pn, &qn);
            let gd = norm_gradient(&self.source, self.n, &pd, &qd);
            let g: Vec<C64> = gn.iter().zip(&gd).map(|(a, b)| a / sn - b / sd).collect();
            let gnorm = vnorm(&g);
            if gnorm < 1e-14 {
                break;
            }
            let cnorm = vnorm(c).max(1e-300);
            let mut accepted = None;
            while eta > 1e-12 {
                let step = eta * cnorm / gnorm;
                let trial: Vec<C64> = c.iter().zip(&g).map(|(a, b)| a + b * step).collect();
                let ft = self.log_ratio(&trial);
                if ft > f {
                    accepted = Some((trial, ft));
                    break;
                }
                eta *= 0.5;
            }
            let Some((mut trial, ft)) = accepted else {
                break;
            };
            self.normalize(&mut trial);
            let gain = ft - f;
            *c = trial;
            f = ft;
            eta = (eta * 2.0).min(1.0);
            if gain < 1e-15 {
                stall += 1;
                if stall >= 3 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        f
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn check_dims(x: &OperatorSystemSpan, y: &OperatorSystemSpan, u: &LinearMapCoords) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::NotComparable {
            left: x.dim(),
            right: y.dim(),
        });
    }
    if u.dim() != x.dim() {
        return Err(Error::Dimension(format!(
            "map is {0}x{0}, systems have dimension {1}",
            u.dim(),
            x.dim()
        )));
    }
    Ok(())
}

fn flat(a: &AmplifiedElement) -> Vec<C64> {
    a.coeffs().iter().flatten().copied().collect()
}

fn unflat(level: usize, big: usize, c: &[C64]) -> AmplifiedElement {
    AmplifiedElement::new(level, c.chunks(big).map(<[C64]>::to_vec).collect())
        .expect("consistent shape")
}

/// Lower-biased estimate of `|id_n (x) u|` over the unit ball of `M_n(X)`.
///
/// Starts from `I_n (x) e_X`, then `budget.starts - 1` random elements.
pub fn amplified_map_norm(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    u: &LinearMapCoords,
    level: usize,
    budget: AscentBudget,
) -> Result<NormEstimate> {
    amplified_map_norm_from(x, y, u, level, budget, &[])
}

/// [`amplified_map_norm`] with extra starting elements tried after the unit.
pub fn amplified_map_norm_from(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    u: &LinearMapCoords,
    level: usize,
    budget: AscentBudget,
    extra: &[AmplifiedElement],
) -> Result<NormEstimate> {
    check_dims(x, y, u)?;
    if level == 0 {
        return Err(Error::OutOfRange("level must be at least 1".into()));
    }
    let big = x.dim();
    let problem = RatioProblem::new(x, y, u.matrix(), level);
    let mut starts: Vec<Vec<C64>> = vec![flat(&AmplifiedElement::unit(x, level))];
    for e in extra {
        if e.level() != level || e.coeffs()[0].len() != big {
            return Err(Error::Dimension("extra start has the wrong shape".into()));
        }
        starts.push(flat(e));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 1..budget.starts.max(1) {
        starts.push(random_coeffs(&mut rng, level * level * big));
    }
    let mut best: Option<(f64, Vec<C64>)> = None;
    for mut c in starts {
        if vnorm(&c) == 0.0 {
            continue;
        }
        let f = problem.ascend(&mut c, budget.iters);
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, c));
        }
    }
    let (f, c) = best.ok_or_else(|| Error::Invalid("no usable starting element".into()))?;
    Ok(NormEstimate {
        value: f.exp(),
        maximizer: unflat(level, big, &c),
    })
}

/// The three terms of the level-`n` objective at a fixed map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    pub unit_defect: f64,
    pub log_forward: f64,
    pub log_backward: f64,
    pub value: f64,
}

struct Evaluation {
    terms: ObjectiveTerms,
    forward: AmplifiedElement,
    backward: AmplifiedElement,
}

fn unit_defect(x: &OperatorSystemSpan, y: &OperatorSystemSpan, u: &ComplexMatrix) -> f64 {
    let image = u.matvec(x.unit_coeffs());
    let diff = &y.element(&image) - &ComplexMatrix::identity(y.ambient_dim());
    op_norm(&diff).unwrap_or(f64::INFINITY)
}

const SINGULAR_CONDITION: f64 = 1e12;

fn evaluate(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    u: &LinearMapCoords,
    level: usize,
    budget: AscentBudget,
    warm: Option<(&AmplifiedElement, &AmplifiedElement)>,
) -> Result<Option<Evaluation>> {
    if u.condition() > SINGULAR_CONDITION {
        return Ok(None);
    }
    let inv = u.inverse()?;
    let (wf, wb): (Vec<AmplifiedElement>, Vec<AmplifiedElement>) = match warm {
        Some((f, b)) => (vec![f.clone()], vec![b.clone()]),
        None => (Vec::new(), Vec::new()),
    };
    let fwd = amplified_map_norm_from(x, y, u, level, budget, &wf)?;
    let bwd = amplified_map_norm_from(y, x, &inv, level, budget, &wb)?;
    let unit = unit_defect(x, y, u.matrix());
    let (lf, lb) = (fwd.value.ln(), bwd.value.ln());
    Ok(Some(Evaluation {
        terms: ObjectiveTerms {
            unit_defect: unit,
            log_forward: lf,
            log_backward: lb,
            value: unit.max(lf).max(lb),
        },
        forward: fwd.maximizer,
        backward: bwd.maximizer,
    }))
}

/// Objective terms of `u` at a single level.
pub fn map_objective(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    u: &LinearMapCoords,
    level: usize,
    budget: AscentBudget,
) -> Result<ObjectiveTerms> {
    check_dims(x, y, u)?;
    Ok(match evaluate(x, y, u, level, budget, None)? {
        Some(e) => e.terms,
        None => singular_terms(),
    })
}

fn singular_terms() -> ObjectiveTerms {
    ObjectiveTerms {
        unit_defect: f64::INFINITY,
        log_forward: f64::INFINITY,
        log_backward: f64::INFINITY,
        value: f64::INFINITY,
    }
}

/// `A -> diag(A, 0)` from level `n` to level `n + 1`.
pub fn embed_element(a: &AmplifiedElement) -> AmplifiedElement {
    let n = a.level();
    let big = a.coeffs()[0].len();
    let zero = vec![C64::new(0.0, 0.0); big];
    let coeffs = (0..(n + 1) * (n + 1))
        .map(|idx| {
            let (i, j) = (idx / (n + 1), idx % (n + 1));
            if i < n && j < n {
                a.entry(i, j).to_vec()
            } else {
                zero.clone()
            }
        })
        .collect();
    AmplifiedElement::new(n + 1, coeffs).expect("consistent shape")
}

/// Objective terms of one map at levels `1..=n_max`, each level's ascent
/// also started from the previous level's maximizers embedded one level up,
/// so the reported values are nondecreasing in the level.
pub fn map_objective_profile(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    u: &LinearMapCoords,
    n_max: usize,
    budget: AscentBudget,
) -> Result<Vec<ObjectiveTerms>> {
    check_dims(x, y, u)?;
    let mut out = Vec::with_capacity(n_max);
    let mut prev: Option<(AmplifiedElement, AmplifiedElement)> = None;
    for level in 1..=n_max {
        let warm = prev
            .as_ref()
            .map(|(f, b)| (embed_element(f), embed_element(b)));
        match evaluate(x, y, u, level, budget, warm.as_ref().map(|(f, b)| (f, b)))? {
            Some(e) => {
                out.push(e.terms);
                prev = Some((e.forward, e.backward));
            }
            None => out.push(singular_terms()),
        }
    }
    Ok(out)
}

/// Options for [`dn_estimate`] and [`dgh_weighted`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DnOptions {
    pub restarts: usize,
    pub seed: u64,
    pub budget: AscentBudget,
    /// Probe-refinement rounds per restart.
    pub rounds: usize,
    /// Simplex evaluations per round.
    pub simplex_evals: usize,
    /// Restarts stop once a value at or below this is found.
    pub target: f64,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for DnOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            budget: AscentBudget::default(),
            rounds: 3,
            simplex_evals: 1500,
            target: 1e-10,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelEstimate {
    pub level: usize,
    /// Best objective value found; an upper-style estimate of `d_n`.
    pub value: f64,
    pub terms: ObjectiveTerms,
    pub map: LinearMapCoords,
    /// Index of the restart that produced the map.
    pub best_restart: usize,
    pub restarts_used: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub per_level: Vec<LevelEstimate>,
    /// `sum_{n <= n_max} 2^-n d_n` over the per-level values.
    pub weighted: f64,
    pub seed: u64,
    pub restarts: usize,
}

/// Orthonormal Hermitian frame `I = h_0, h_1, ...` of the span under the
/// normalized trace pairing, as coordinate columns.
fn hermitian_frame(x: &OperatorSystemSpan) -> Option<ComplexMatrix> {
    let k = x.ambient_dim();
    let big = x.dim();
    let to_real =
        |m: &ComplexMatrix| -> Vec<f64> { m.entries().iter().flat_map(|z| [z.re, z.im]).collect() };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / k as f64;
    let mut frame: Vec<(ComplexMatrix, Vec<f64>)> = Vec::with_capacity(big);
    let id = ComplexMatrix::identity(k);
    let idv = to_real(&id);
    frame.push((id, idv));
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    for b in x.basis() {
        let ba = b.adjoint();
        for cand in [(b + &ba).scale(half), (b - &ba).scale(half_i)] {
            if frame.len() == big {
                break;
            }
            let mut v = to_real(&cand);
            let mut m = cand;
            for (h, hv) in &frame {
                let p = dot(&v, hv);
                v.iter_mut().zip(hv).for_each(|(a, b)| *a -= p * b);
                m = &m - &h.scale(C64::new(p, 0.0));
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-8 * (1.0 + b.frobenius_norm()) {
                v.iter_mut().for_each(|a| *a /= norm);
                frame.push((m.scale(C64::new(1.0 / norm, 0.0)), v));
            }
        }
    }
    if frame.len() != big {
        return None;
    }
    let mut coords = ComplexMatrix::zeros(big, big);
    for (j, (h, _)) in frame.iter().enumerate() {
        let c = x.coordinates(h, 1e-8).ok()??;
        for (i, z) in c.into_iter().enumerate() {
            coords[(i, j)] = z;
        }
    }
    Some(coords)
}

/// Rotation `exp(S)` for the skew-symmetric `S` with the given upper entries,
/// optionally composed with a reflection of the first axis.
fn orthogonal(dim: usize, params: &[f64], reflect: bool) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    let mut it = params.iter();
    for i in 0..dim {
        for j in i + 1..dim {
            let v = *it.next().unwrap_or(&0.0);
            s[(i, j)] = v;
            s[(j, i)] = -v;
        }
    }
    let mut o = s.exp();
    if reflect && dim > 0 {
        o.row_mut(0).iter_mut().for_each(|v| *v = -*v);
    }
    o
}

struct Frames {
    fx_inv: ComplexMatrix,
    fy: ComplexMatrix,
}

impl Frames {
    fn new(x: &OperatorSystemSpan, y: &OperatorSystemSpan) -> Option<Self> {
        let fx = hermitian_frame(x)?;
        let fy = hermitian_frame(y)?;
        Some(Self {
            fx_inv: inverse(&fx)?,
            fy,
        })
    }

    fn map(&self, params: &[f64], reflect: bool) -> ComplexMatrix {
        let big = self.fy.rows();
        let o = orthogonal(big - 1, params, reflect);
        let mut mid = ComplexMatrix::identity(big);
        for i in 1..big {
            for j in 1..big {
                mid[(i, j)] = C64::new(o[(i - 1, j - 1)], 0.0);
            }
        }
        &(&self.fy * &mid) * &self.fx_inv
    }
}

fn params_to_matrix(big: usize, p: &[f64]) -> ComplexMatrix {
    let data = (0..big * big)
        .map(|i| C64::new(p[2 * i], p[2 * i + 1]))
        .collect();
    ComplexMatrix::new(big, big, data).unwrap_or_else(|_| ComplexMatrix::zeros(big, big))
}

fn matrix_to_params(m: &ComplexMatrix) -> Vec<f64> {
    m.entries().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Cheap lower model of the objective over finite probe sets.
struct Surrogate<'a> {
    x: &'a OperatorSystemSpan,
    y: &'a OperatorSystemSpan,
    level: usize,
    forward: Vec<Vec<C64>>,
    backward: Vec<Vec<C64>>,
}

impl<'a> Surrogate<'a> {
    fn new(x: &'a OperatorSystemSpan, y: &'a OperatorSystemSpan, level: usize) -> Self {
        Self {
            x,
            y,
            level,
            forward: Vec::new(),
            backward: Vec::new(),
        }
    }

    fn add(&mut self, forward: &AmplifiedElement, backward: &AmplifiedElement) {
        let xs: Vec<Mat> = self.x.basis().iter().map(to_mat).collect();
        let ys: Vec<Mat> = self.y.basis().iter().map(to_mat).collect();
        for (mats, elem, list) in [
            (&xs, forward, &mut self.forward),
            (&ys, backward, &mut self.backward),
        ] {
            let mut c = flat(elem);
            let nrm = top_singular(&assemble(mats, self.level, &c));
            if nrm > 0.0 && nrm.is_finite() {
                c.iter_mut().for_each(|z| *z /= nrm);
                list.push(c);
            }
        }
    }

    fn add_random(&mut self, rng: &mut ChaCha8Rng, count: usize) {
        let len = self.level * self.level * self.x.dim();
        for _ in 0..count {
            let a = unflat(self.level, self.x.dim(), &random_coeffs(rng, len));
            let b = unflat(self.level, self.y.dim(), &random_coeffs(rng, len));
            self.add(&a, &b);
        }
    }

    fn value(&self, u: &ComplexMatrix) -> f64 {
        let Ok(map) = LinearMapCoords::new(u.clone()) else {
            return f64::INFINITY;
        };
        if map.condition() > SINGULAR_CONDITION {
            return 1e6;
        }
        let Some(inv) = inverse(u) else {
            return 1e6;
        };
        let mut worst = unit_defect(self.x, self.y, u);
        let fwd = image_matrices(self.y, u);
        for c in &self.forward {
            worst = worst.max(top_singular(&assemble(&fwd, self.level, c)).ln());
        }
        let bwd = image_matrices(self.x, &inv);
        for c in &self.backward {
            worst = worst.max(top_singular(&assemble(&bwd, self.level, c)).ln());
        }
        worst
    }
}

/// Random frame parameters scored on the probe model before each frame
/// restart's simplex search.
const FRAME_SCAN: usize = 32;

enum SeedKind {
    Given(ComplexMatrix),
    Frame { reflect: bool },
    Box,
}

struct RestartResult {
    value: f64,
    terms: ObjectiveTerms,
    map: ComplexMatrix,
}

#[allow(clippy::too_many_arguments)]
fn run_restart(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    level: usize,
    opts: &DnOptions,
    frames: Option<&Frames>,
    kind: SeedKind,
    restart: usize,
) -> Result<Option<RestartResult>> {
    let big = x.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let mut surrogate = Surrogate::new(x, y, level);
    surrogate.add_random(&mut rng, 6);

    let mut best: Option<RestartResult> = None;
    let consider =
        |u: ComplexMatrix, best: &mut Option<RestartResult>, sur: &mut Surrogate| -> Result<()> {
            let map = LinearMapCoords::new(u.clone())?;
            if let Some(e) = evaluate(x, y, &map, level, opts.budget, None)? {
                sur.add(&e.forward, &e.backward);
                if best.as_ref().is_none_or(|b| e.terms.value < b.value) {
                    *best = Some(RestartResult {
                        value: e.terms.value,
                        terms: e.terms,
                        map: u,
                    });
                }
            }
            Ok(())
        };
    let done = |best: &Option<RestartResult>| best.as_ref().is_some_and(|b| b.value <= opts.target);

    let nm = NelderMead {
        max_evals: opts.simplex_evals,
        step: 0.05,
        ..Default::default()
    };
    let seed = match kind {
        SeedKind::Given(u) => u,
        SeedKind::Frame { reflect } => {
            let Some(fr) = frames else {
                return Ok(None);
            };
            let dim = big.saturating_sub(1);
            let np = dim * dim.saturating_sub(1) / 2;
            let mut p: Vec<f64> = Vec::new();
            let mut p_value = f64::INFINITY;
            for _ in 0..FRAME_SCAN {
                let q: Vec<f64> = (0..np).map(|_| rng.random_range(-PI..PI)).collect();
                let v = surrogate.value(&fr.map(&q, reflect));
                if p.is_empty() || v < p_value {
                    (p, p_value) = (q, v);
                }
            }
            consider(fr.map(&p, reflect), &mut best, &mut surrogate)?;
            for _ in 0..opts.rounds {
                if done(&best) || np == 0 {
                    break;
                }
                let nm_frame = NelderMead { step: 0.3, ..nm };
                let r = nm_frame.minimize(&p, |q| surrogate.value(&fr.map(q, reflect)));
                p = r.x;
                consider(fr.map(&p, reflect), &mut best, &mut surrogate)?;
            }
            best.as_ref()
                .map(|b| b.map.clone())
                .unwrap_or_else(|| fr.map(&p, reflect))
        }
        SeedKind::Box => {
            let data = (0..big * big)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            ComplexMatrix::new(big, big, data)?
        }
    };
    if best.is_none() {
        consider(seed.clone(), &mut best, &mut surrogate)?;
    }
    let mut current = seed;
    for _ in 0..opts.rounds {
        if done(&best) {
            break;
        }
        let r = nm.minimize(&matrix_to_params(&current), |p| {
            surrogate.value(&params_to_matrix(big, p))
        });
        current = params_to_matrix(big, &r.x);
        consider(current.clone(), &mut best, &mut surrogate)?;
        if let Some(b) = &best {
            current = b.map.clone();
        }
    }
    Ok(best)
}

/// Restarts run in batches `[0], [1], [2, 4), [4, 8), ...` capped at this
/// size; the search stops after the first batch reaching the target.
const MAX_BATCH: usize = 8;

fn search_level(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    level: usize,
    opts: &DnOptions,
    warm: Option<&ComplexMatrix>,
) -> Result<LevelEstimate> {
    if x.dim() != y.dim() {
        return Err(Error::NotComparable {
            left: x.dim(),
            right: y.dim(),
        });
    }
    if level == 0 {
        return Err(Error::OutOfRange("level must be at least 1".into()));
    }
    let big = x.dim();
    let frames = Frames::new(x, y);
    let restarts = opts.restarts.max(1);
    let kind_of = |r: usize| -> SeedKind {
        match (r, warm) {
            (0, Some(w)) => SeedKind::Given(w.clone()),
            (0, None) | (1, Some(_)) => SeedKind::Given(ComplexMatrix::identity(big)),
            _ if r % 2 == 1 && frames.is_some() => SeedKind::Frame {
                reflect: (r / 2) % 2 == 1,
            },
            _ => SeedKind::Box,
        }
    };
    let mut best: Option<(usize, RestartResult)> = None;
    let mut start = 0;
    let mut stopped_early = false;
    while start < restarts {
        let end = (start + start.clamp(1, MAX_BATCH)).min(restarts);
        let results = map_indexed(end - start, opts.jobs, |i| {
            run_restart(
                x,
                y,
                level,
                opts,
                frames.as_ref(),
                kind_of(start + i),
                start + i,
            )
        });
        for (i, r) in results.into_iter().enumerate() {
            if let Some(r) = r? {
                if best.as_ref().is_none_or(|(_, b)| r.value < b.value) {
                    best = Some((start + i, r));
                }
            }
        }
        start = end;
        if best.as_ref().is_some_and(|(_, b)| b.value <= opts.target) {
            stopped_early = start < restarts;
            break;
        }
    }
    let (best_restart, r) = best.ok_or(Error::NoConvergence("no invertible map found"))?;
    Ok(LevelEstimate {
        level,
        value: r.value,
        terms: r.terms,
        map: LinearMapCoords::new(r.map)?,
        best_restart,
        restarts_used: start,
        stopped_early,
    })
}

/// Best-found value of the level-`n` objective.
///
/// Restart 0 is the identity in coordinates; odd restarts start from maps
/// carrying an orthonormal Hermitian frame of `X` to one of `Y`; even
/// restarts start from a random box. Each restart alternates a simplex
/// search on a probe model of the objective with full norm evaluations that
/// refine the probes.
pub fn dn_estimate(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    level: usize,
    opts: &DnOptions,
) -> Result<LevelEstimate> {
    search_level(x, y, level, opts, None)
}

/// Per-level estimates for `n = 1..=n_max` with each level warm-started from
/// the previous level's best map, and the truncated weighted sum.
pub fn dgh_weighted(
    x: &OperatorSystemSpan,
    y: &OperatorSystemSpan,
    n_max: usize,
    opts: &DnOptions,
) -> Result<DistanceReport> {
    if n_max == 0 {
        return Err(Error::OutOfRange("at least one level is required".into()));
    }
    let mut per_level: Vec<LevelEstimate> = Vec::with_capacity(n_max);
    for level in 1..=n_max {
        let warm = per_level.last().map(|e| e.map.matrix().clone());
        per_level.push(search_level(x, y, level, opts, warm.as_ref())?);
    }
    let weighted = weighted_sum(&per_level);
    Ok(DistanceReport {
        per_level,
        weighted,
        seed: opts.seed,
        restarts: opts.restarts,
    })
}

pub fn weighted_sum(levels: &[LevelEstimate]) -> f64 {
    levels
        .iter()
        .map(|e| e.value * 0.5f64.powi(e.level as i32))
        .sum()
}

/// The two matrix families indexed by `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WtVariant {
    ThreeByThree,
    TwoByTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WtParams {
    pub t: f64,
    pub variant: WtVariant,
}

impl WtParams {
    pub fn new(t: f64, variant: WtVariant) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::OutOfRange(format!("t = {t} is outside (0, 1]")));
        }
        Ok(Self { t, variant })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let t = self.t;
        match self.variant {
            WtVariant::ThreeByThree => {
                ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, t, 0.0]])
            }
            WtVariant::TwoByTwo => ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[t, 0.0]]),
        }
        .expect("fixed shape")
    }
}

/// `span{I, W_t, W_t*}`.
pub fn wt_system(p: WtParams) -> Result<OperatorSystemSpan> {
    let w = p.matrix();
    build_system(w.rows(), &[w], true)
}

/// Normalized `tau(g)` and `tau(g^2)`.
pub fn trace_invariants(x: &OperatorSystemSpan, g: &ComplexMatrix) -> Result<(C64, C64)> {
    if !g.is_square() || g.rows() != x.ambient_dim() {
        return Err(Error::Dimension(format!(
            "expected a {0}x{0} matrix",
            x.ambient_dim()
        )));
    }
    let k = g.rows() as f64;
    Ok((g.trace() / k, g.matmul(g).trace() / k))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WtOptions {
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Largest unitary-search residual accepted as an isomorphism.
    pub threshold: f64,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for WtOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            restarts: 128,
            seed: 0,
            threshold: 1e-7,
            jobs: 1,
        }
    }
}

/// Decides whether `X_t` and `X_s` are complete order isomorphic.
///
/// `M_3`: both systems have envelope `M_3`, so an isomorphism is a unitary
/// conjugation; trace invariants force `Phi(W_t)` to be `beta W_s` or
/// `gamma W_s*`, and singular values then force `s = t`. `M_2`: an
/// isomorphism is again a unitary conjugation and the search minimizes the
/// distance from `U W_t U*` to `span{I, W_s, W_s*}` over `SU(2)`.
pub fn wt_classify(t: f64, s: f64, variant: WtVariant, opts: &WtOptions) -> Result<CoisDecision> {
    let pt = WtParams::new(t, variant)?;
    let ps = WtParams::new(s, variant)?;
    match variant {
        WtVariant::ThreeByThree => Ok(classify_three(pt, ps, opts.tol)),
        WtVariant::TwoByTwo => classify_two(pt, ps, opts),
    }
}

fn classify_three(pt: WtParams, ps: WtParams, tol: f64) -> CoisDecision {
    let (t, s) = (pt.t, ps.t);
    let exact = |verdict, certificate| CoisDecision {
        verdict,
        method: Method::TheoremFastPath,
        certificate: Some(certificate),
        tried: 0,
    };
    if (t - s).abs() <= tol {
        return exact(Verdict::Isomorphic, Certificate::IdentityWitness { t, s });
    }
    let obstruction = wt_obstruction(t, s, tol);
    let forced = obstruction.trace_w.norm() <= tol
        && obstruction.trace_w2.norm() <= tol
        && obstruction.beta_gamma_coefficient > tol;
    if forced && obstruction.admissible_beta.is_empty() {
        exact(
            Verdict::NotIsomorphic,
            Certificate::TraceObstruction(obstruction),
        )
    } else {
        CoisDecision {
            verdict: Verdict::Unknown,
            method: Method::TheoremFastPath,
            certificate: Some(Certificate::TraceObstruction(obstruction)),
            tried: 0,
        }
    }
}

/// Recomputes every quantity used by the `M_3` argument.
pub fn wt_obstruction(t: f64, s: f64, tol: f64) -> WtObstruction {
    let wt = WtParams {
        t,
        variant: WtVariant::ThreeByThree,
    }
    .matrix();
    let ws = WtParams {
        t: s,
        variant: WtVariant::ThreeByThree,
    }
    .matrix();
    let k = 3.0;
    let trace_w = wt.trace() / k;
    let trace_w2 = wt.matmul(&wt).trace() / k;
    let wsa = ws.adjoint();
    let beta_gamma_coefficient = (ws.matmul(&wsa).trace() + wsa.matmul(&ws).trace()).re;
    let sv_t = singular_values(&wt).unwrap_or_default();
    let sv_s = singular_values(&ws).unwrap_or_default();
    // Phi(W_t) = beta W_s (or gamma W_s*, same singular values): the nonzero
    // singular values {sv_t[0], sv_t[1]} must equal |beta| {sv_s[0], sv_s[1]}.
    let mut admissible_beta = Vec::new();
    if sv_s.len() >= 2 && sv_t.len() >= 2 && sv_s[1] > tol {
        for b in [
            sv_t[0] / sv_s[0],
            sv_t[0] / sv_s[1],
            sv_t[1] / sv_s[0],
            sv_t[1] / sv_s[1],
        ] {
            let mut scaled = [b * sv_s[0], b * sv_s[1]];
            scaled.sort_by(|x, y| y.total_cmp(x));
            let ok = (scaled[0] - sv_t[0]).abs() <= tol && (scaled[1] - sv_t[1]).abs() <= tol;
            if ok && !admissible_beta.iter().any(|x: &f64| (x - b).abs() <= tol) {
                admissible_beta.push(b);
            }
        }
    }
    WtObstruction {
        t,
        s,
        trace_w,
        trace_w2,
        beta_gamma_coefficient,
        singular_values_t: sv_t,
        singular_values_s: sv_s,
        admissible_beta,
    }
}

/// `SU(2)` element from three angles.
pub fn su2(theta: f64, phi: f64, psi: f64) -> ComplexMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::from_polar(c, phi),
            C64::from_polar(s, psi),
            -C64::from_polar(s, -psi),
            C64::from_polar(c, -phi),
        ],
    )
    .expect("2x2")
}

/// Fits `U W_t U*` against `span{I, W_s, W_s*}`; returns the coefficients and
/// the residual relative to `|W_t|_F`.
pub fn conjugation_fit(
    wt: &ComplexMatrix,
    ws: &ComplexMatrix,
    u: &ComplexMatrix,
) -> Result<([C64; 3], f64)> {
    let k = ws.rows();
    let ls = LeastSquares::from_columns(&[
        ComplexMatrix::identity(k).vectorize(),
        ws.vectorize(),
        ws.adjoint().vectorize(),
    ])?;
    let target = &(u * wt) * &u.adjoint();
    let (c, r) = ls.solve(&target.vectorize());
    Ok(([c[0], c[1], c[2]], r / wt.frobenius_norm()))
}

fn classify_two(pt: WtParams, ps: WtParams, opts: &WtOptions) -> Result<CoisDecision> {
    let (wt, ws) = (pt.matrix(), ps.matrix());
    let ls = LeastSquares::from_columns(&[
        ComplexMatrix::identity(2).vectorize(),
        ws.vectorize(),
        ws.adjoint().vectorize(),
    ])?;
    let scale = wt.frobenius_norm();
    let residual = |p: &[f64]| {
        let u = su2(p[0], p[1], p[2]);
        let target = &(&u * &wt) * &u.adjoint();
        ls.solve(&target.vectorize()).1 / scale
    };
    let nm = NelderMead {
        max_evals: 3000,
        ftol: 1e-16,
        xtol: 1e-12,
        step: 0.4,
    };
    let restarts = opts.restarts.max(1);
    let results = map_indexed(restarts, opts.jobs, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let x0 = [
            rng.random_range(0.0..PI / 2.0),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        ];
        nm.minimize(&x0, residual)
    });
    let (_, best) = results
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    if best.value <= opts.threshold {
        let u = su2(best.x[0], best.x[1], best.x[2]);
        let (coeffs, res) = conjugation_fit(&wt, &ws, &u)?;
        Ok(CoisDecision {
            verdict: Verdict::Isomorphic,
            method: Method::Oracle,
            certificate: Some(Certificate::UnitaryWitness {
                t: pt.t,
                s: ps.t,
                unitary: u,
                coeffs,
                residual: res,
            }),
            tried: restarts,
        })
    } else {
        Ok(CoisDecision {
            verdict: Verdict::NotIsomorphic,
            method: Method::Oracle,
            certificate: Some(Certificate::SearchLowerBound {
                t: pt.t,
                s: ps.t,
                best_residual: best.value,
                restarts,
                seed: opts.seed,
            }),
            tried: restarts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opsys::{amplified_norm, commutant_dimension};
    use crate::sample;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_system(rng: &mut ChaCha8Rng, k: usize) -> OperatorSystemSpan {
        build_system(k, &[sample::complex_matrix(rng, k, k)], true).unwrap()
    }

    fn small_budget() -> AscentBudget {
        AscentBudget {
            starts: 6,
            iters: 100,
            seed: 1,
        }
    }

    #[test]
    fn identity_map_norm_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_system(&mut rng, 3);
        for level in 1..=2 {
            let e =
                amplified_map_norm(&x, &x, &LinearMapCoords::identity(3), level, small_budget())
                    .unwrap();
            assert!((e.value - 1.0).abs() < 1e-9, "{}", e.value);
        }
    }

    #[test]
    fn conjugation_is_complete_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_system(&mut rng, 3);
        let y = x.conjugated(&sample::unitary(&mut rng, 3));
        for level in 1..=3 {
            let e =
                amplified_map_norm(&x, &y, &LinearMapCoords::identity(3), level, small_budget())
                    .unwrap();
            assert!((e.value - 1.0).abs() < 1e-9, "level {level}: {}", e.value);
        }
    }

    #[test]
    fn homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_system(&mut rng, 3);
        let y = random_system(&mut rng, 3);
        let u = LinearMapCoords::new(sample::complex_matrix(&mut rng, 3, 3)).unwrap();
        let a = amplified_map_norm(&x, &y, &u, 1, small_budget())
            .unwrap()
            .value;
        let b = amplified_map_norm(&x, &y, &u.scale(c(0.0, 2.5)).unwrap(), 1, small_budget())
            .unwrap()
            .value;
        assert!((b - 2.5 * a).abs() < 1e-9 * b, "{a} {b}");
    }

    #[test]
    fn maximizer_attains_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_system(&mut rng, 3);
        let y = random_system(&mut rng, 3);
        let u = LinearMapCoords::new(sample::complex_matrix(&mut rng, 3, 3)).unwrap();
        let e = amplified_map_norm(&x, &y, &u, 2, small_budget()).unwrap();
        let a = &e.maximizer;
        let image: Vec<Vec<C64>> = a.coeffs().iter().map(|v| u.matrix().matvec(v)).collect();
        let ua = AmplifiedElement::new(2, image).unwrap();
        let ratio = amplified_norm(&y, &ua).unwrap() / amplified_norm(&x, a).unwrap();
        assert!((ratio - e.value).abs() < 1e-9 * e.value);
    }

    #[test]
    fn dimension_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_system(&mut rng, 3);
        let y = wt_system(WtParams::new(0.5, WtVariant::TwoByTwo).unwrap()).unwrap();
        let z = build_system(
            2,
            &[ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 0.0)])],
            true,
        )
        .unwrap();
        assert_eq!(x.dim(), y.dim());
        assert!(matches!(
            dn_estimate(&x, &z, 1, &DnOptions::default()),
            Err(Error::NotComparable { left: 3, right: 2 })
        ));
        assert!(matches!(
            amplified_map_norm(&x, &y, &LinearMapCoords::identity(2), 1, small_budget()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn dn_of_system_with_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_system(&mut rng, 3);
        let e = dn_estimate(&x, &x, 2, &DnOptions::default()).unwrap();
        assert!(e.value <= 1e-6, "{}", e.value);
        assert_eq!(e.best_restart, 0);
        assert!(e.stopped_early);
    }

    #[test]
    fn frame_seed_recovers_rebased_conjugate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_system(&mut rng, 3);
        let change = sample::complex_matrix(&mut rng, 3, 3);
        let y = x
            .conjugated(&sample::unitary(&mut rng, 3))
            .rebased(&change)
            .unwrap();
        let opts = DnOptions {
            restarts: 9,
            ..Default::default()
        };
        let e = dn_estimate(&x, &y, 1, &opts).unwrap();
        assert!(e.value <= 1e-6, "{e:?}");
    }

    #[test]
    fn profile_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_system(&mut rng, 3);
        let y = random_system(&mut rng, 3);
        let u = LinearMapCoords::new(sample::complex_matrix(&mut rng, 3, 3)).unwrap();
        let p = map_objective_profile(&x, &y, &u, 3, small_budget()).unwrap();
        for w in p.windows(2) {
            assert!(w[1].log_forward >= w[0].log_forward - 1e-12);
            assert!(w[1].log_backward >= w[0].log_backward - 1e-12);
            assert!(w[1].value >= w[0].value - 1e-12);
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_system(&mut rng, 3);
        let f = hermitian_frame(&x).unwrap();
        let hs: Vec<ComplexMatrix> = (0..3)
            .map(|j| x.element(&(0..3).map(|i| f[(i, j)]).collect::<Vec<_>>()))
            .collect();
        assert!((&hs[0] - &ComplexMatrix::identity(3)).max_abs() < 1e-10);
        for a in &hs {
            assert!((a - &a.adjoint()).max_abs() < 1e-10);
            for b in &hs {
                let ip = a.matmul(b).trace().re / 3.0;
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wt_examples() {
        let p1 = WtParams::new(1.0, WtVariant::ThreeByThree).unwrap();
        let sv = singular_values(&p1.matrix()).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-12 && (sv[1] - 1.0).abs() < 1e-12 && sv[2].abs() < 1e-12);
        let p = WtParams::new(0.4, WtVariant::ThreeByThree).unwrap();
        let x = wt_system(p).unwrap();
        assert_eq!(x.dim(), 3);
        let (t1, t2) = trace_invariants(&x, &p.matrix()).unwrap();
        assert_eq!((t1, t2), (c(0.0, 0.0), c(0.0, 0.0)));
        let (i1, i2) = trace_invariants(&x, &ComplexMatrix::identity(3)).unwrap();
        assert_eq!((i1, i2), (c(1.0, 0.0), c(1.0, 0.0)));
        assert_eq!(
            commutant_dimension(&[p.matrix(), p.matrix().adjoint()], 1e-9).unwrap(),
            1
        );

        let q = WtParams::new(0.4, WtVariant::TwoByTwo).unwrap();
        let y = wt_system(q).unwrap();
        let (a, b) = trace_invariants(&y, &q.matrix()).unwrap();
        assert!((a - 0.5).norm() < 1e-15 && (b - 0.5).norm() < 1e-15);

        assert!(matches!(
            WtParams::new(0.0, WtVariant::TwoByTwo),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            WtParams::new(1.5, WtVariant::ThreeByThree),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn wt_three_by_three_grid() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        for &t in &grid {
            for &s in &grid {
                let d = wt_classify(t, s, WtVariant::ThreeByThree, &WtOptions::default()).unwrap();
                let e = wt_classify(s, t, WtVariant::ThreeByThree, &WtOptions::default()).unwrap();
                assert_eq!(d.verdict, e.verdict);
                let expect = if (t - s).abs() <= 1e-9 {
                    Verdict::Isomorphic
                } else {
                    Verdict::NotIsomorphic
                };
                assert_eq!(d.verdict, expect, "t = {t}, s = {s}");
            }
        }
    }

    #[test]
    fn wt_obstruction_values() {
        let o = wt_obstruction(0.3, 0.7, 1e-9);
        assert!((o.beta_gamma_coefficient - 2.0 * (1.0 + 0.49)).abs() < 1e-12);
        assert!(o.admissible_beta.is_empty());
        let same = wt_obstruction(0.6, 0.6, 1e-9);
        assert_eq!(same.admissible_beta, vec![1.0]);
    }

    #[test]
    fn wt_two_by_two_has_unitary_witness() {
        let opts = WtOptions {
            restarts: 32,
            ..Default::default()
        };
        let d = wt_classify(0.3, 0.7, WtVariant::TwoByTwo, &opts).unwrap();
        assert_eq!(d.verdict, Verdict::Isomorphic);
        assert_eq!(d.method, Method::Oracle);
        match d.certificate {
            Some(Certificate::UnitaryWitness {
                unitary,
                coeffs,
                residual,
                ..
            }) => {
                assert!(residual < 1e-7);
                let wt = WtParams::new(0.3, WtVariant::TwoByTwo).unwrap().matrix();
                let ws = WtParams::new(0.7, WtVariant::TwoByTwo).unwrap().matrix();
                let lhs = &(&unitary * &wt) * &unitary.adjoint();
                let rhs = ComplexMatrix::combination(
                    &coeffs,
                    &[ComplexMatrix::identity(2), ws.clone(), ws.adjoint()],
                );
                assert!((&lhs - &rhs).frobenius_norm() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let o = orthogonal(3, &[0.3, -1.0, 2.0], true);
        let g = o.transpose() * &o;
        assert!((g - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
        assert!((o.determinant() + 1.0).abs() < 1e-12);
    }
}
