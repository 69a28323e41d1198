//! Replays a saved report: positive certificates are re-evaluated from their
//! stored data, negative and exact results are recomputed from the embedded
//! inputs.

use osyclass::decision::Certificate;
use osyclass::degree1::{replay_witness, Deg1Witness};
use osyclass::metricgh::correspondence_eps;
use osyclass::osdist::{map_objective, LinearMapCoords, WtVariant};
use osyclass::unitary::{hausdorff, spectrum, CircleSet};
use osyclass::{ComplexMatrix, Verdict};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::commands::{self, Reply};
use crate::{input, CliError, EXIT_INVALID, EXIT_OK};

/// Residual bound for replayed positive certificates.
pub const REPLAY_TOL: f64 = 1e-8;

fn field<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Value, CliError> {
    let mut cur = v;
    for key in path {
        cur = cur.get(*key).ok_or_else(|| {
            CliError::input("parse", format!("report is missing `{}`", path.join(".")))
        })?;
    }
    Ok(cur)
}

fn get<T: DeserializeOwned>(v: &Value, path: &[&str]) -> Result<T, CliError> {
    T::deserialize(field(v, path)?)
        .map_err(|e| CliError::input("parse", format!("report field `{}`: {e}", path.join("."))))
}

struct Checks(Vec<Value>);

impl Checks {
    fn bound(&mut self, check: &str, residual: f64, tolerance: f64) {
        self.0.push(json!({
            "check": check,
            "residual": residual,
            "tolerance": tolerance,
            "pass": residual <= tolerance,
        }));
    }

    fn equal(&mut self, check: &str, pass: bool) {
        self.0.push(json!({"check": check, "pass": pass}));
    }

    fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c["pass"] == json!(true))
    }
}

/// Recomputes a report from its command echo and inputs.
fn rerun(report: &Value, jobs: usize) -> Reply {
    let name: String = get(report, &["command", "name"])?;
    let input = |k: &str| field(report, &["inputs", k]);
    match name.as_str() {
        "spectrum" => commands::spectrum(input("unitary")?, get(report, &["command", "tol"])?),
        "canon" => commands::canon(input("unitary")?, get(report, &["command", "tol"])?),
        "unitary-cois" => commands::unitary_cois(
            input("u")?,
            input("v")?,
            commands::CoisArgs {
                oracle: get(report, &["command", "oracle"])?,
                tol: get(report, &["command", "tol"])?,
                cap: get(report, &["command", "cap"])?,
            },
            jobs,
        ),
        "deg1" => commands::deg1(
            input("d")?,
            input("e")?,
            commands::Deg1Args {
                cap: Some(get(report, &["command", "cap"])?),
                tol: get(report, &["command", "tol"])?,
                via_opsys: get(report, &["command", "via_opsys"])?,
            },
            jobs,
        ),
        "norm" => commands::norm(
            input("system")?,
            input("element")?,
            get(report, &["command", "level"])?,
            get(report, &["command", "tol"])?,
        ),
        "family" => commands::family_wt(wt_args(report)?, jobs),
        "gh-dist" => commands::gh_dist(
            input("m")?,
            input("n")?,
            get(report, &["command", "kmax"])?,
            get(report, &["command", "cap"])?,
        ),
        "gh-theory" => commands::gh_theory(input("m")?, get(report, &["command", "depth"])?),
        other => Err(CliError::input(
            "parse",
            format!("cannot rerun command `{other}`"),
        )),
    }
}

fn wt_args(report: &Value) -> Result<commands::WtArgs, CliError> {
    Ok(commands::WtArgs {
        variant: get::<WtVariant>(report, &["command", "variant"])?,
        t: get(report, &["command", "t"])?,
        s: get(report, &["command", "s"])?,
        restarts: get(report, &["command", "restarts"])?,
        seed: get(report, &["command", "seed"])?,
        tol: get(report, &["command", "tol"])?,
    })
}

fn without_timing(v: &Value) -> Value {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.remove("wall_time_seconds");
    }
    v
}

/// Angle set of the spectral points stored in a certificate.
fn angles_of(points: &[osyclass::C64]) -> Result<Vec<f64>, CliError> {
    Ok(CircleSet::from_points(points, 0.0)?.angles().to_vec())
}

fn check_certificate(
    checks: &mut Checks,
    label: &str,
    cert: &Certificate,
    spectra: Option<(&CircleSet, &CircleSet)>,
) -> Result<(), CliError> {
    let residual = cert
        .replay()
        .ok_or_else(|| CliError::input("invalid", format!("{label}: certificate is malformed")))?;
    checks.bound(
        &format!("{label}: certificate residual"),
        residual,
        REPLAY_TOL,
    );
    if let Some((su, sv)) = spectra {
        let (src, dst) = match cert {
            Certificate::RigidMotion {
                source_angles,
                target_angles,
                ..
            } => (source_angles.clone(), target_angles.clone()),
            Certificate::SpectralBijection { source, target, .. } => {
                (angles_of(source)?, angles_of(target)?)
            }
            _ => return Ok(()),
        };
        let (a, b) = if matches!(cert, Certificate::RigidMotion { .. }) {
            (sv, su)
        } else {
            (su, sv)
        };
        let r = hausdorff(&src, a.angles()).max(hausdorff(&dst, b.angles()));
        checks.bound(
            &format!("{label}: certificate matches the input spectra"),
            r,
            REPLAY_TOL,
        );
    }
    Ok(())
}

fn verdict_of(v: &Value, path: &[&str]) -> Result<Verdict, CliError> {
    get(v, path)
}

fn verify_cois(report: &Value, fresh: &Value, checks: &mut Checks) -> Result<(), CliError> {
    let tol: f64 = get(report, &["command", "tol"])?;
    let mu = input::matrix(field(report, &["inputs", "u"])?)?;
    let mv = input::matrix(field(report, &["inputs", "v"])?)?;
    let (su, sv) = (spectrum(&mu, tol)?, spectrum(&mv, tol)?);
    let mut parts = vec![("decision", report.clone(), fresh.clone())];
    if let Some(f) = report.get("oracle_followup") {
        parts.push((
            "oracle follow-up",
            f.clone(),
            fresh.get("oracle_followup").cloned().unwrap_or(Value::Null),
        ));
    }
    for (label, stored, again) in parts {
        let verdict = verdict_of(&stored, &["verdict"])?;
        let cert: Option<Certificate> = get(&stored, &["certificate"])?;
        match (verdict, &cert) {
            (Verdict::Isomorphic, Some(c)) => {
                check_certificate(checks, label, c, Some((&su, &sv)))?
            }
            (Verdict::Isomorphic, None) => checks.equal(
                &format!("{label}: isomorphic verdict carries a certificate"),
                false,
            ),
            _ => {}
        }
        checks.equal(
            &format!("{label}: verdict recomputed"),
            again.get("verdict") == stored.get("verdict"),
        );
    }
    Ok(())
}

fn verify_deg1(report: &Value, fresh: &Value, checks: &mut Checks) -> Result<(), CliError> {
    let tol: f64 = get(report, &["command", "tol"])?;
    let d = input::point_set(field(report, &["inputs", "d"])?, tol)?;
    let e = input::point_set(field(report, &["inputs", "e"])?, tol)?;
    let homeomorphic: bool = get(report, &["homeomorphic"])?;
    let witness: Option<Deg1Witness> = get(report, &["witness"])?;
    match (homeomorphic, witness) {
        (true, Some(w)) => {
            let scale = d
                .points()
                .iter()
                .chain(e.points())
                .flatten()
                .map(|z| z.norm())
                .fold(1.0, f64::max);
            checks.bound(
                "witness residual",
                replay_witness(&d, &e, &w)?,
                REPLAY_TOL * scale,
            );
        }
        (true, None) => checks.equal("homeomorphic verdict carries a witness", false),
        _ => {}
    }
    checks.equal(
        "verdict recomputed",
        fresh.get("homeomorphic") == report.get("homeomorphic"),
    );
    Ok(())
}

fn verify_wt(report: &Value, fresh: &Value, checks: &mut Checks) -> Result<(), CliError> {
    let verdict = verdict_of(report, &["verdict"])?;
    let cert: Option<Certificate> = get(report, &["certificate"])?;
    if verdict == Verdict::Isomorphic {
        match &cert {
            Some(c @ Certificate::UnitaryWitness { .. }) => {
                let threshold: f64 = get(report, &["options", "threshold"])?;
                let r = c
                    .replay()
                    .ok_or_else(|| CliError::input("invalid", "malformed unitary witness"))?;
                checks.bound("unitary witness residual", r, threshold);
            }
            Some(c) => check_certificate(checks, "decision", c, None)?,
            None => checks.equal("isomorphic verdict carries a certificate", false),
        }
    }
    if let Some(Certificate::TraceObstruction(o)) = &cert {
        if verdict == Verdict::NotIsomorphic {
            checks.equal("no admissible beta", o.admissible_beta.is_empty());
        }
    }
    checks.equal(
        "verdict recomputed",
        fresh.get("verdict") == report.get("verdict"),
    );
    Ok(())
}

fn verify_osdist(report: &Value, checks: &mut Checks) -> Result<(), CliError> {
    let x = input::system(field(report, &["inputs", "x"])?)?;
    let y = input::system(field(report, &["inputs", "y"])?)?;
    let budget = get(report, &["options", "budget"])?;
    let levels: Vec<Value> = get(report, &["per_level"])?;
    let mut weighted = 0.0;
    for (i, lv) in levels.iter().enumerate() {
        let level: usize = get(lv, &["level"])?;
        let value: f64 = get(lv, &["value"])?;
        let map = LinearMapCoords::new(get::<ComplexMatrix>(lv, &["map", "matrix"])?)?;
        let again = map_objective(&x, &y, &map, level, budget)?;
        checks.bound(
            &format!("level {level} objective replay"),
            (again.value - value).abs(),
            1e-9 * value.abs().max(1.0),
        );
        checks.equal(&format!("level {level} in order"), level == i + 1);
        weighted += value * 0.5f64.powi(level as i32);
    }
    let reported: f64 = get(report, &["weighted"])?;
    checks.bound(
        "weighted sum",
        (weighted - reported).abs(),
        1e-12 * reported.abs().max(1.0),
    );
    Ok(())
}

fn verify_gh(report: &Value, checks: &mut Checks) -> Result<(), CliError> {
    let m = input::structure(field(report, &["inputs", "m"])?)?;
    let n = input::structure(field(report, &["inputs", "n"])?)?;
    let levels: Vec<Value> = get(report, &["levels"])?;
    let mut total = 0.0;
    for lv in &levels {
        let k: usize = get(lv, &["k"])?;
        let value: f64 = get(lv, &["value"])?;
        let r: Vec<(usize, usize)> = get(lv, &["correspondence"])?;
        let eps = correspondence_eps(&m, &n, k, &r)?;
        checks.bound(
            &format!("level {k} correspondence"),
            (eps - value).abs(),
            1e-12,
        );
        total += value * 0.5f64.powi(k as i32);
    }
    let reported: f64 = get(report, &["value"])?;
    checks.bound("weighted sum", (total - reported).abs(), 1e-12);
    Ok(())
}

pub(crate) fn verify(report: &Value, jobs: usize) -> Reply {
    if report.get("error").is_some() {
        return Err(CliError::input("invalid", "cannot verify an error report"));
    }
    let name: String = get(report, &["command", "name"])?;
    let mut checks = Checks(Vec::new());
    match name.as_str() {
        "osdist" => verify_osdist(report, &mut checks)?,
        "verify" => {
            return Err(CliError::input(
                "invalid",
                "cannot verify a verification report",
            ))
        }
        _ => {
            let (fresh, _) = rerun(report, jobs)?;
            match name.as_str() {
                "unitary-cois" => verify_cois(report, &fresh, &mut checks)?,
                "deg1" => verify_deg1(report, &fresh, &mut checks)?,
                "family" => verify_wt(report, &fresh, &mut checks)?,
                "gh-dist" => {
                    verify_gh(report, &mut checks)?;
                    checks.equal(
                        "values recomputed",
                        fresh.get("levels") == report.get("levels"),
                    );
                }
                _ => checks.equal("report recomputed", fresh == without_timing(report)),
            }
        }
    }
    let verified = checks.all_pass();
    Ok((
        json!({
            "command": {"name": "verify", "report_command": name},
            "verified": verified,
            "checks": checks.0,
        }),
        if verified { EXIT_OK } else { EXIT_INVALID },
    ))
}
