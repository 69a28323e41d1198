//! Verdicts and certificates shared by the isomorphism deciders.

use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, C64};
use crate::osdist::{conjugation_fit, WtParams, WtVariant};
use crate::unitary::{hausdorff, replay_bijection, CanonicalNecklace, RigidMotion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Isomorphic,
    NotIsomorphic,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TheoremFastPath,
    Oracle,
}

/// One bijection rejected by an exhaustive search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BijectionFailure {
    /// `mapping[i] = j` sends source point `i` to target point `j`.
    pub mapping: Vec<usize>,
    pub forward_residual: f64,
    pub backward_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `target = motion(source)` as point sets on the circle.
    RigidMotion {
        motion: RigidMotion,
        source_angles: Vec<f64>,
        target_angles: Vec<f64>,
        residual: f64,
    },
    /// A bijection of finite spectra with `h` in `span{1, z, conj z}` on the
    /// source and `h^-1` in `span{1, w, conj w}` on the target.
    SpectralBijection {
        source: Vec<C64>,
        target: Vec<C64>,
        mapping: Vec<usize>,
        forward_coeffs: Vec<C64>,
        backward_coeffs: Vec<C64>,
        forward_residual: f64,
        backward_residual: f64,
    },
    /// The spectra have different cardinalities.
    Cardinality { source: usize, target: usize },
    /// Canonical necklaces of the two spectra differ.
    NecklaceMismatch {
        source: CanonicalNecklace,
        target: CanonicalNecklace,
    },
    /// Every bijection failed the span test.
    Exhaustion {
        tried: usize,
        failures: Vec<BijectionFailure>,
    },
    /// `t = s`: the identity map is the isomorphism.
    IdentityWitness { t: f64, s: f64 },
    /// Trace and singular-value argument ruling out `X_t ~ X_s` in `M_3`.
    TraceObstruction(WtObstruction),
    /// `U W_t U* = alpha I + beta W_s + gamma W_s*` up to `residual`.
    UnitaryWitness {
        t: f64,
        s: f64,
        unitary: ComplexMatrix,
        coeffs: [C64; 3],
        residual: f64,
    },
    /// Best residual of the multistart search stayed above the threshold.
    SearchLowerBound {
        t: f64,
        s: f64,
        best_residual: f64,
        restarts: usize,
        seed: u64,
    },
}

impl Certificate {
    /// Recomputes the residual of a positive certificate from its stored
    /// data. `None` for negative certificates and malformed data.
    pub fn replay(&self) -> Option<f64> {
        match self {
            Certificate::RigidMotion {
                motion,
                source_angles,
                target_angles,
                ..
            } => {
                let moved: Vec<f64> = source_angles
                    .iter()
                    .map(|&a| motion.apply_angle(a))
                    .collect();
                (moved.len() == target_angles.len()).then(|| hausdorff(target_angles, &moved))
            }
            Certificate::SpectralBijection {
                source,
                target,
                mapping,
                forward_coeffs,
                backward_coeffs,
                ..
            } => replay_bijection(source, target, mapping, forward_coeffs, backward_coeffs),
            Certificate::IdentityWitness { t, s } => Some((t - s).abs()),
            Certificate::UnitaryWitness { t, s, unitary, .. } => {
                let variant = match unitary.rows() {
                    3 => WtVariant::ThreeByThree,
                    2 => WtVariant::TwoByTwo,
                    _ => return None,
                };
                let wt = WtParams::new(*t, variant).ok()?.matrix();
                let ws = WtParams::new(*s, variant).ok()?.matrix();
                let defect = crate::linalg::unitarity_defect(unitary).ok()?;
                let (_, residual) = conjugation_fit(&wt, &ws, unitary).ok()?;
                Some(residual.max(defect))
            }
            _ => None,
        }
    }
}

/// Replayed steps of the `M_3` argument: a unitary conjugation `Phi` with
/// `Phi(W_t) = alpha I + beta W_s + gamma W_s*` must have `alpha = tau(W_t)`,
/// `beta gamma = 0` from `tau(W_t^2)`, and then singular values force `s = t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WtObstruction {
    pub t: f64,
    pub s: f64,
    /// Normalized `tau(W_t)`; forces `alpha = 0`.
    pub trace_w: C64,
    /// Normalized `tau(W_t^2)`.
    pub trace_w2: C64,
    /// Coefficient `2(1 + s^2)` in `tau(Phi(W_t)^2) = 2(1 + s^2) beta gamma`
    /// (unnormalized trace), recomputed from `W_s`.
    pub beta_gamma_coefficient: f64,
    pub singular_values_t: Vec<f64>,
    pub singular_values_s: Vec<f64>,
    /// Values of `|beta|` consistent with matching singular values.
    pub admissible_beta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoisDecision {
    pub verdict: Verdict,
    pub method: Method,
    pub certificate: Option<Certificate>,
    /// Number of candidate maps examined, when a search ran.
    pub tried: usize,
}
