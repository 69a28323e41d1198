use osyclass::degree1::{deg1_via_opsys, degree_one_homeomorphic, Deg1Options};
use osyclass::metricgh::{dgh_structures, universal_fingerprint, universal_sentences};
use osyclass::opsys::{amplified_norm, min_os_norm};
use osyclass::osdist::{dgh_weighted, wt_classify, DnOptions, WtOptions, WtVariant};
use osyclass::unitary::{
    canonical_form, cois_unitary_oracle, cois_unitary_theorem, four_point_obstruction,
    spectrum as unitary_spectrum, OracleOptions,
};
use osyclass::Verdict;
use serde::Serialize;
use serde_json::{json, Value};

use crate::input;
use crate::{CliError, EXIT_OK, EXIT_UNKNOWN};

pub(crate) type Reply = Result<(Value, i32), CliError>;

pub(crate) fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report part")
}

fn verdict_code(v: Verdict) -> i32 {
    if v == Verdict::Unknown {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    }
}

pub(crate) fn spectrum(u: &Value, tol: f64) -> Reply {
    let s = unitary_spectrum(&input::matrix(u)?, tol)?;
    Ok((
        json!({
            "command": {"name": "spectrum", "tol": tol},
            "inputs": {"unitary": u},
            "size": s.len(),
            "angles": s.angles(),
            "points": to_value(&s.points()),
        }),
        EXIT_OK,
    ))
}

pub(crate) fn canon(u: &Value, tol: f64) -> Reply {
    let s = unitary_spectrum(&input::matrix(u)?, tol)?;
    Ok((
        json!({
            "command": {"name": "canon", "tol": tol},
            "inputs": {"unitary": u},
            "size": s.len(),
            "angles": s.angles(),
            "canonical_form": to_value(&canonical_form(&s)),
        }),
        EXIT_OK,
    ))
}

#[derive(Clone, Copy)]
pub(crate) struct CoisArgs {
    pub oracle: bool,
    pub tol: f64,
    pub cap: usize,
}

/// Fast path first. With `--oracle` the enumeration decides; otherwise an
/// unknown fast-path verdict keeps exit code 3 and carries the oracle's
/// answer as a follow-up.
pub(crate) fn unitary_cois(u: &Value, v: &Value, args: CoisArgs, jobs: usize) -> Reply {
    let (mu, mv) = (input::matrix(u)?, input::matrix(v)?);
    let opts = OracleOptions {
        tol: args.tol,
        cap: args.cap,
        jobs,
    };
    let theorem = cois_unitary_theorem(&mu, &mv, args.tol)?;
    let (su, sv) = (
        unitary_spectrum(&mu, args.tol)?,
        unitary_spectrum(&mv, args.tol)?,
    );
    let mut report = json!({
        "command": {"name": "unitary-cois", "oracle": args.oracle, "tol": args.tol, "cap": args.cap},
        "inputs": {"u": u, "v": v},
        "spectra": {"u": su.angles(), "v": sv.angles()},
    });
    let map = report.as_object_mut().expect("object");
    let decision = if args.oracle {
        map.insert("theorem".into(), to_value(&theorem));
        cois_unitary_oracle(&mu, &mv, opts)?
    } else {
        if theorem.verdict == Verdict::Unknown {
            map.insert(
                "oracle_followup".into(),
                to_value(&cois_unitary_oracle(&mu, &mv, opts)?),
            );
        }
        theorem
    };
    if su.len() == 4 && sv.len() == 4 {
        map.insert(
            "four_point".into(),
            to_value(&four_point_obstruction(&mu, &mv, args.tol)?),
        );
    }
    map.insert("verdict".into(), to_value(&decision.verdict));
    map.insert("method".into(), to_value(&decision.method));
    map.insert("certificate".into(), to_value(&decision.certificate));
    map.insert("tried".into(), json!(decision.tried));
    Ok((report, verdict_code(decision.verdict)))
}

#[derive(Clone, Copy)]
pub(crate) struct Deg1Args {
    pub cap: Option<usize>,
    pub tol: f64,
    pub via_opsys: bool,
}

pub(crate) fn deg1(d: &Value, e: &Value, args: Deg1Args, jobs: usize) -> Reply {
    let (pd, pe) = (
        input::point_set(d, args.tol)?,
        input::point_set(e, args.tol)?,
    );
    let opts = Deg1Options {
        tol: args.tol,
        cap: args.cap,
        jobs,
    };
    let decision = if args.via_opsys {
        deg1_via_opsys(&pd, &pe, opts)?
    } else {
        degree_one_homeomorphic(&pd, &pe, opts)?
    };
    let verdict = if decision.homeomorphic {
        Verdict::Isomorphic
    } else {
        Verdict::NotIsomorphic
    };
    Ok((
        json!({
            "command": {
                "name": "deg1",
                "cap": opts.cap_for(pd.ambient()),
                "tol": args.tol,
                "via_opsys": args.via_opsys,
            },
            "inputs": {"d": d, "e": e},
            "verdict": to_value(&verdict),
            "homeomorphic": decision.homeomorphic,
            "witness": to_value(&decision.witness),
            "tried": decision.tried,
        }),
        EXIT_OK,
    ))
}

pub(crate) fn norm(system: &Value, element: &Value, level: usize, tol: f64) -> Reply {
    if level == 0 {
        return Err(CliError::input("out_of_range", "level must be at least 1"));
    }
    let (kind, value) = if system.get("functionals").is_some() {
        let ball = input::ball(system)?;
        let x = input::vector_element(element, level)?;
        ("minimal_quantization", min_os_norm(&ball, &x)?)
    } else {
        let x = input::system(system)?;
        let a = input::system_element(element, &x, level, tol)?;
        ("operator_system", amplified_norm(&x, &a)?)
    };
    Ok((
        json!({
            "command": {"name": "norm", "level": level, "tol": tol},
            "inputs": {"system": system, "element": element},
            "kind": kind,
            "norm": value,
        }),
        EXIT_OK,
    ))
}

#[derive(Clone, Copy)]
pub(crate) struct OsdistArgs {
    pub levels: usize,
    pub restarts: usize,
    pub seed: u64,
}

pub(crate) fn dn_options(args: OsdistArgs, jobs: usize) -> DnOptions {
    DnOptions {
        restarts: args.restarts,
        seed: args.seed,
        jobs,
        ..Default::default()
    }
}

pub(crate) fn osdist(x: &Value, y: &Value, args: OsdistArgs, jobs: usize) -> Reply {
    let (sx, sy) = (input::system(x)?, input::system(y)?);
    let opts = dn_options(args, jobs);
    let report = dgh_weighted(&sx, &sy, args.levels, &opts)?;
    Ok((
        json!({
            "command": {"name": "osdist", "levels": args.levels, "restarts": args.restarts, "seed": args.seed},
            "inputs": {"x": x, "y": y},
            "options": to_value(&opts),
            "estimate": "best_found",
            "per_level": to_value(&report.per_level),
            "weighted": report.weighted,
            "restarts": report.restarts,
            "seed": report.seed,
        }),
        EXIT_OK,
    ))
}

#[derive(Clone, Copy)]
pub(crate) struct WtArgs {
    pub variant: WtVariant,
    pub t: f64,
    pub s: f64,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
}

pub(crate) fn wt_options(args: WtArgs, jobs: usize) -> WtOptions {
    WtOptions {
        tol: args.tol,
        restarts: args.restarts,
        seed: args.seed,
        jobs,
        ..Default::default()
    }
}

pub(crate) fn family_wt(args: WtArgs, jobs: usize) -> Reply {
    let opts = wt_options(args, jobs);
    let d = wt_classify(args.t, args.s, args.variant, &opts)?;
    Ok((
        json!({
            "command": {
                "name": "family",
                "family": "wt",
                "variant": to_value(&args.variant),
                "t": args.t,
                "s": args.s,
                "restarts": args.restarts,
                "seed": args.seed,
                "tol": args.tol,
            },
            "options": to_value(&opts),
            "verdict": to_value(&d.verdict),
            "method": to_value(&d.method),
            "certificate": to_value(&d.certificate),
            "tried": d.tried,
        }),
        verdict_code(d.verdict),
    ))
}

pub(crate) fn gh_dist(m: &Value, n: &Value, kmax: usize, cap: usize) -> Reply {
    let (sm, sn) = (input::structure(m)?, input::structure(n)?);
    let d = dgh_structures(&sm, &sn, kmax, cap)?;
    Ok((
        json!({
            "command": {"name": "gh-dist", "kmax": kmax, "cap": cap},
            "inputs": {"m": m, "n": n},
            "levels": to_value(&d.levels),
            "value": d.value,
        }),
        EXIT_OK,
    ))
}

pub(crate) fn gh_theory(m: &Value, depth: usize) -> Reply {
    let s = input::structure(m)?;
    let values = universal_fingerprint(&s, depth)?;
    let sentences: Vec<String> = universal_sentences(&s, depth)
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok((
        json!({
            "command": {"name": "gh-theory", "depth": depth},
            "inputs": {"m": m},
            "sentences": sentences,
            "values": values,
        }),
        EXIT_OK,
    ))
}
