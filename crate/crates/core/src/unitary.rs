//! Operator systems generated by a single unitary.
//!
//! `OSy(U) = span{I, U, U*}` is determined up to complete order isomorphism by
//! the spectrum of `U`. With at least five spectral points the invariant is
//! the spectrum up to a rigid motion of the circle, which
//! [`canonical_form`] turns into a sequence that can be compared entrywise.
//! With at most three points only the cardinality matters. Four points are
//! decided instance by instance with [`cois_unitary_oracle`].

use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::decision::{BijectionFailure, Certificate, CoisDecision, Method, Verdict};
use crate::exec::{factorial, invert_permutation, map_indexed, nth_permutation, permutation_rank};
use crate::linalg::{determinant, eig_normal, unitarity_defect, ComplexMatrix, LeastSquares, C64};
use crate::{Error, Result};

/// Angles closer than this on the circle are the same spectral point.
pub const DEDUP_TOL: f64 = 1e-8;
/// Slack for comparing necklace gaps.
pub const NECKLACE_SLACK: f64 = 1e-9;
/// Default bound on the spectrum size for bijection enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 9;

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A finite subset of the unit circle, stored as sorted angles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleSet {
    angles: Vec<f64>,
    tol: f64,
}

impl CircleSet {
    /// Wraps `angles` into `[0, 2pi)`, sorts them and merges points within
    /// `tol` of each other (including across `0`).
    pub fn new(angles: &[f64], tol: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Invalid("empty circle set".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("non-finite angle".into()));
        }
        let mut a: Vec<f64> = angles.iter().map(|&x| wrap_angle(x)).collect();
        a.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(a.len());
        for x in a {
            match out.last() {
                Some(&last) if x - last <= tol => {}
                _ => out.push(x),
            }
        }
        while out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= tol {
            out.pop();
        }
        Ok(Self { angles: out, tol })
    }

    pub fn from_points(points: &[C64], tol: f64) -> Result<Self> {
        let angles: Vec<f64> = points.iter().map(|z| z.arg()).collect();
        Self::new(&angles, tol)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn points(&self) -> Vec<C64> {
        self.angles
            .iter()
            .map(|&a| C64::from_polar(1.0, a))
            .collect()
    }

    /// Circular gaps `a_{i+1} - a_i`, the last one wrapping around.
    pub fn gaps(&self) -> Vec<f64> {
        let m = self.angles.len();
        (0..m)
            .map(|i| {
                if i + 1 < m {
                    self.angles[i + 1] - self.angles[i]
                } else {
                    self.angles[0] + TAU - self.angles[i]
                }
            })
            .collect()
    }

    pub fn apply(&self, motion: &RigidMotion) -> Self {
        let moved: Vec<f64> = self.angles.iter().map(|&a| motion.apply_angle(a)).collect();
        Self::new(&moved, self.tol).expect("nonempty finite angles")
    }
}

/// `z -> lambda z` or `z -> lambda conj(z)` with `lambda = e^{i rotation}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub rotation: f64,
    pub reflect: bool,
}

impl RigidMotion {
    pub fn new(rotation: f64, reflect: bool) -> Self {
        Self {
            rotation: wrap_angle(rotation),
            reflect,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, false)
    }

    pub fn apply_angle(&self, a: f64) -> f64 {
        if self.reflect {
            wrap_angle(self.rotation - a)
        } else {
            wrap_angle(self.rotation + a)
        }
    }

    pub fn apply_point(&self, z: C64) -> C64 {
        let lambda = C64::from_polar(1.0, self.rotation);
        if self.reflect {
            lambda * z.conj()
        } else {
            lambda * z
        }
    }
}

/// Spectrum of a unitary as a set of angles.
///
/// Eigenvalues are radially projected onto the circle and deduplicated at
/// [`DEDUP_TOL`]; multiplicity is discarded.
pub fn spectrum(u: &ComplexMatrix, tol: f64) -> Result<CircleSet> {
    let defect = unitarity_defect(u)?;
    if defect > tol {
        return Err(Error::NotUnitary { defect });
    }
    let decomp = eig_normal(u, tol)?;
    let mut angles = Vec::with_capacity(decomp.eigenvalues.len());
    for lam in &decomp.eigenvalues {
        let r = lam.norm();
        if (r - 1.0).abs() > tol {
            return Err(Error::NotUnitary {
                defect: (r - 1.0).abs(),
            });
        }
        angles.push((lam / r).arg());
    }
    CircleSet::new(&angles, DEDUP_TOL)
}

/// Circular gap sequence in its least rotation, minimized over reflection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalNecklace {
    pub gaps: Vec<f64>,
    pub reflected: bool,
}

impl CanonicalNecklace {
    /// Entrywise comparison with the given slack.
    pub fn matches(&self, other: &Self, slack: f64) -> bool {
        self.gaps.len() == other.gaps.len()
            && self
                .gaps
                .iter()
                .zip(&other.gaps)
                .all(|(a, b)| (a - b).abs() <= slack)
    }
}

fn cmp_slack(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= NECKLACE_SLACK {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn cmp_seq(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_slack(*x, *y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Start index of the lexicographically least rotation (Booth's algorithm).
pub(crate) fn least_rotation<T>(s: &[T], cmp: impl Fn(&T, &T) -> Ordering) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = &s[j % n];
        let mut i = f[j - k - 1];
        while i != -1 {
            let other = &s[(k + i as usize + 1) % n];
            let o = cmp(sj, other);
            if o == Ordering::Equal {
                break;
            }
            if o == Ordering::Less {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 {
            let o = cmp(sj, &s[k % n]);
            if o != Ordering::Equal {
                if o == Ordering::Less {
                    k = j;
                }
                f[j - k] = -1;
            } else {
                f[j - k] = 0;
            }
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

fn rotated(s: &[f64], k: usize) -> Vec<f64> {
    s[k..].iter().chain(&s[..k]).copied().collect()
}

/// Canonical form of a circle set under rotations and reflections.
pub fn canonical_form(set: &CircleSet) -> CanonicalNecklace {
    let gaps = set.gaps();
    let plain = rotated(&gaps, least_rotation(&gaps, |a, b| cmp_slack(*a, *b)));
    let mut rev = gaps;
    rev.reverse();
    let mirrored = rotated(&rev, least_rotation(&rev, |a, b| cmp_slack(*a, *b)));
    if cmp_seq(&mirrored, &plain) == Ordering::Less {
        CanonicalNecklace {
            gaps: mirrored,
            reflected: true,
        }
    } else {
        CanonicalNecklace {
            gaps: plain,
            reflected: false,
        }
    }
}

/// Hausdorff distance on the circle between two angle sets.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_sided = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&p| {
                y.iter()
                    .map(|&q| circle_distance(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Candidate motions sending some point of `t` (reflected or not) onto the
/// first point of `s`, each with its Hausdorff residual.
fn motion_candidates(s: &CircleSet, t: &CircleSet) -> Vec<(RigidMotion, f64)> {
    let s0 = s.angles[0];
    let mut out = Vec::with_capacity(2 * t.len());
    for reflect in [false, true] {
        for &ta in &t.angles {
            let rotation = if reflect { s0 + ta } else { s0 - ta };
            let motion = RigidMotion::new(rotation, reflect);
            let moved: Vec<f64> = t.angles.iter().map(|&a| motion.apply_angle(a)).collect();
            out.push((motion, hausdorff(&s.angles, &moved)));
        }
    }
    out
}

/// A rigid motion `g` with `g(T) = S` up to `tol`, if one exists.
pub fn rigid_equivalent(s: &CircleSet, t: &CircleSet, tol: f64) -> Option<RigidMotion> {
    if s.len() != t.len() {
        return None;
    }
    let mut best: Option<(RigidMotion, f64)> = None;
    for (motion, res) in motion_candidates(s, t) {
        if res <= tol && best.is_none_or(|(_, r)| res < r) {
            best = Some((motion, res));
        }
    }
    best.map(|(m, _)| m)
}

/// Whether `(alpha, beta, gamma)` can be the image coefficients of a
/// unitary under a `*`-isomorphism onto `span{I, V, V*}` when `I, V, V*,
/// V^2, V*^2` are independent.
pub fn validate_unitary_image(alpha: C64, beta: C64, gamma: C64, tol: f64) -> bool {
    let r1 = alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr() - 1.0;
    let r2 = alpha.conj() * beta + alpha * gamma.conj();
    let r3 = alpha * beta.conj() + alpha.conj() * gamma;
    let r4 = beta.conj() * gamma;
    r1.abs() <= tol && r2.norm() <= tol && r3.norm() <= tol && r4.norm() <= tol
}

/// Options for the bijection-enumeration oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub tol: f64,
    pub cap: usize,
    pub jobs: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            cap: DEFAULT_ENUMERATION_CAP,
            jobs: 1,
        }
    }
}

/// Least-squares fit against `[1, z, conj z]` evaluated on a finite set.
struct DegreeOneSpan {
    ls: LeastSquares,
}

impl DegreeOneSpan {
    fn new(points: &[C64]) -> Result<Self> {
        let ones = vec![C64::new(1.0, 0.0); points.len()];
        let conj: Vec<C64> = points.iter().map(|z| z.conj()).collect();
        Ok(Self {
            ls: LeastSquares::from_columns(&[ones, points.to_vec(), conj])?,
        })
    }

    /// Coefficients and residual relative to `max(1, |v|)`.
    fn fit(&self, v: &[C64]) -> (Vec<C64>, f64) {
        let (c, r) = self.ls.solve(v);
        let scale = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        (c, r / scale)
    }
}

struct BijectionTest {
    forward: (Vec<C64>, f64),
    backward: (Vec<C64>, f64),
}

fn test_bijection(
    src: &[C64],
    dst: &[C64],
    fwd: &DegreeOneSpan,
    bwd: &DegreeOneSpan,
    mapping: &[usize],
) -> BijectionTest {
    let image: Vec<C64> = mapping.iter().map(|&j| dst[j]).collect();
    let inv = invert_permutation(mapping);
    let preimage: Vec<C64> = inv.iter().map(|&i| src[i]).collect();
    BijectionTest {
        forward: fwd.fit(&image),
        backward: bwd.fit(&preimage),
    }
}

fn bijection_certificate(
    src: &[C64],
    dst: &[C64],
    mapping: Vec<usize>,
    t: BijectionTest,
) -> Certificate {
    Certificate::SpectralBijection {
        source: src.to_vec(),
        target: dst.to_vec(),
        mapping,
        forward_coeffs: t.forward.0,
        backward_coeffs: t.backward.0,
        forward_residual: t.forward.1,
        backward_residual: t.backward.1,
    }
}

/// Replays a spectral-bijection certificate; returns the larger residual.
pub(crate) fn replay_bijection(
    source: &[C64],
    target: &[C64],
    mapping: &[usize],
    forward: &[C64],
    backward: &[C64],
) -> Option<f64> {
    let m = source.len();
    if target.len() != m || mapping.len() != m || forward.len() != 3 || backward.len() != 3 {
        return None;
    }
    let mut seen = vec![false; m];
    for &j in mapping {
        if j >= m || seen[j] {
            return None;
        }
        seen[j] = true;
    }
    let eval = |c: &[C64], z: C64| c[0] + c[1] * z + c[2] * z.conj();
    let mut worst = 0.0f64;
    for (i, &j) in mapping.iter().enumerate() {
        worst = worst.max((eval(forward, source[i]) - target[j]).norm());
        worst = worst.max((eval(backward, target[j]) - source[i]).norm());
    }
    Some(worst)
}

/// Fast decision from the classification theorem.
///
/// At most three spectral points: isomorphic iff the cardinalities agree.
/// When one spectrum has at least five points: isomorphic iff the spectra are
/// rigidly equivalent. Both of size four: rigid equivalence gives an
/// isomorphism, otherwise the verdict is [`Verdict::Unknown`].
pub fn cois_unitary_theorem(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<CoisDecision> {
    let su = spectrum(u, tol)?;
    let sv = spectrum(v, tol)?;
    let (m, mp) = (su.len(), sv.len());
    let fast = |verdict, certificate| CoisDecision {
        verdict,
        method: Method::TheoremFastPath,
        certificate,
        tried: 0,
    };
    if m.min(mp) <= 3 {
        if m != mp {
            return Ok(fast(
                Verdict::NotIsomorphic,
                Some(Certificate::Cardinality {
                    source: m,
                    target: mp,
                }),
            ));
        }
        // On at most three points span{1, z, conj z} contains every function,
        // so the order-preserving bijection already certifies.
        let (pu, pv) = (su.points(), sv.points());
        let mapping: Vec<usize> = (0..m).collect();
        let t = test_bijection(
            &pu,
            &pv,
            &DegreeOneSpan::new(&pu)?,
            &DegreeOneSpan::new(&pv)?,
            &mapping,
        );
        return Ok(fast(
            Verdict::Isomorphic,
            Some(bijection_certificate(&pu, &pv, mapping, t)),
        ));
    }
    if m != mp {
        return Ok(fast(
            Verdict::NotIsomorphic,
            Some(Certificate::Cardinality {
                source: m,
                target: mp,
            }),
        ));
    }
    let rigid_tol = tol.max(DEDUP_TOL);
    match rigid_equivalent(&su, &sv, rigid_tol) {
        Some(motion) => {
            let residual = hausdorff(su.angles(), sv.apply(&motion).angles());
            let lambda = C64::from_polar(1.0, motion.rotation);
            let zero = C64::new(0.0, 0.0);
            // phi(U) = lambda V or lambda V*
            let image_ok = if motion.reflect {
                validate_unitary_image(zero, zero, lambda, 1e-12)
            } else {
                validate_unitary_image(zero, lambda, zero, 1e-12)
            };
            debug_assert!(image_ok);
            Ok(fast(
                Verdict::Isomorphic,
                Some(Certificate::RigidMotion {
                    motion,
                    source_angles: sv.angles().to_vec(),
                    target_angles: su.angles().to_vec(),
                    residual,
                }),
            ))
        }
        None if m >= 5 => Ok(fast(
            Verdict::NotIsomorphic,
            Some(Certificate::NecklaceMismatch {
                source: canonical_form(&su),
                target: canonical_form(&sv),
            }),
        )),
        None => Ok(fast(Verdict::Unknown, None)),
    }
}

/// Exact decision by enumerating bijections of the spectra.
///
/// `OSy(U)` and `OSy(V)` are complete order isomorphic iff some bijection
/// `h: sigma(U) -> sigma(V)` lies in `span{1, z, conj z}` on `sigma(U)` with
/// `h^-1` in `span{1, w, conj w}` on `sigma(V)`. Bijections induced by rigid
/// motions are tried first, then all `m!` bijections in lexicographic order.
pub fn cois_unitary_oracle(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    opts: OracleOptions,
) -> Result<CoisDecision> {
    let su = spectrum(u, opts.tol)?;
    let sv = spectrum(v, opts.tol)?;
    spectra_oracle(&su, &sv, opts)
}

/// [`cois_unitary_oracle`] on precomputed spectra.
pub fn spectra_oracle(su: &CircleSet, sv: &CircleSet, opts: OracleOptions) -> Result<CoisDecision> {
    let (m, mp) = (su.len(), sv.len());
    let oracle = |verdict, certificate, tried| CoisDecision {
        verdict,
        method: Method::Oracle,
        certificate,
        tried,
    };
    if m != mp {
        return Ok(oracle(
            Verdict::NotIsomorphic,
            Some(Certificate::Cardinality {
                source: m,
                target: mp,
            }),
            0,
        ));
    }
    if m > opts.cap {
        return Err(Error::Capacity {
            what: "spectrum size",
            size: m,
            cap: opts.cap,
        });
    }
    let (pu, pv) = (su.points(), sv.points());
    let fwd = DegreeOneSpan::new(&pu)?;
    let bwd = DegreeOneSpan::new(&pv)?;
    let passes = |t: &BijectionTest| t.forward.1 <= opts.tol && t.backward.1 <= opts.tol;

    // Rigid-motion candidates: g(sigma(V)) ~ sigma(U), so h = g^-1 pairs
    // u_i with the v_j whose image is nearest.
    let mut tried = 0;
    let mut seen: Vec<usize> = Vec::new();
    let rigid_tol = opts.tol.max(DEDUP_TOL);
    for (motion, res) in motion_candidates(su, sv) {
        if res > rigid_tol {
            continue;
        }
        let moved: Vec<f64> = sv.angles().iter().map(|&a| motion.apply_angle(a)).collect();
        let mapping: Vec<usize> = su
            .angles()
            .iter()
            .map(|&a| {
                (0..m)
                    .min_by(|&x, &y| {
                        circle_distance(a, moved[x]).total_cmp(&circle_distance(a, moved[y]))
                    })
                    .expect("nonempty")
            })
            .collect();
        let mut check = mapping.clone();
        check.sort_unstable();
        check.dedup();
        if check.len() != m {
            continue;
        }
        let rank = permutation_rank(&mapping);
        if seen.contains(&rank) {
            continue;
        }
        seen.push(rank);
        tried += 1;
        let t = test_bijection(&pu, &pv, &fwd, &bwd, &mapping);
        if passes(&t) {
            return Ok(oracle(
                Verdict::Isomorphic,
                Some(bijection_certificate(&pu, &pv, mapping, t)),
                tried,
            ));
        }
    }

    let total = factorial(m);
    let results = map_indexed(total, opts.jobs, |idx| {
        let mapping = nth_permutation(m, idx);
        let t = test_bijection(&pu, &pv, &fwd, &bwd, &mapping);
        (t.forward.1, t.backward.1)
    });
    if let Some(idx) = results
        .iter()
        .position(|&(f, b)| f <= opts.tol && b <= opts.tol)
    {
        let mapping = nth_permutation(m, idx);
        let t = test_bijection(&pu, &pv, &fwd, &bwd, &mapping);
        return Ok(oracle(
            Verdict::Isomorphic,
            Some(bijection_certificate(&pu, &pv, mapping, t)),
            tried + idx + 1,
        ));
    }
    let failures = results
        .into_iter()
        .enumerate()
        .map(|(idx, (f, b))| BijectionFailure {
            mapping: nth_permutation(m, idx),
            forward_residual: f,
            backward_residual: b,
        })
        .collect();
    Ok(oracle(
        Verdict::NotIsomorphic,
        Some(Certificate::Exhaustion {
            tried: tried + total,
            failures,
        }),
        tried + total,
    ))
}

/// One row of [`four_point_obstruction`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminantEntry {
    /// `assignment[r]` indexes `sigma(U)`; row `r` pairs it with the `r`-th
    /// point of `sigma(V)`.
    pub assignment: Vec<usize>,
    pub values: Vec<C64>,
    pub determinant: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourPointReport {
    pub source: Vec<C64>,
    pub target: Vec<C64>,
    pub entries: Vec<DeterminantEntry>,
    pub min_modulus: f64,
    /// Every determinant is nonzero: no bijection `h` with `h` in the span
    /// of `{1, w, conj w}` on `sigma(V)` exists, ruling out the forward
    /// direction.
    pub all_nonzero: bool,
}

/// Determinants `det[a | 1 | sigma(V) | conj sigma(V)]` for each of the 24
/// assignments `a` of `sigma(U)` to the points of `sigma(V)`.
pub fn four_point_obstruction(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<FourPointReport> {
    let su = spectrum(u, tol)?;
    let sv = spectrum(v, tol)?;
    if su.len() != 4 || sv.len() != 4 {
        return Err(Error::Dimension(format!(
            "four-point obstruction needs spectra of size 4, got {} and {}",
            su.len(),
            sv.len()
        )));
    }
    let (pu, pv) = (su.points(), sv.points());
    let mut entries = Vec::with_capacity(24);
    for idx in 0..24 {
        let assignment = nth_permutation(4, idx);
        let values: Vec<C64> = assignment.iter().map(|&i| pu[i]).collect();
        let mut m = ComplexMatrix::zeros(4, 4);
        for r in 0..4 {
            m[(r, 0)] = values[r];
            m[(r, 1)] = C64::new(1.0, 0.0);
            m[(r, 2)] = pv[r];
            m[(r, 3)] = pv[r].conj();
        }
        entries.push(DeterminantEntry {
            assignment,
            values,
            determinant: determinant(&m),
        });
    }
    let min_modulus = entries
        .iter()
        .map(|e| e.determinant.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(FourPointReport {
        source: pu,
        target: pv,
        entries,
        min_modulus,
        all_nonzero: min_modulus > 1e-9,
    })
}
