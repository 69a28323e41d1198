//! Finite metric structures: Katětov functions, approximate isometries, the
//! level distances `d_k` and their weighted sum, and universal sentences.
//!
//! A (D_k, L_k, eps)-approximate isomorphism is taken to be an approximate
//! isometry `psi` between the `k`-th domains such that `psi` and every lifted
//! `psi^B`, `B` in `L_k` (the metric included), is an eps-bijection. For a
//! correspondence `R` the least such `psi` is
//! `psi(x, y) = min_{(x', y') in R} eps + d(x, x') + d(y', y)`, which is an
//! approximate isometry exactly when `eps >= dis(R) / 2`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::{Error, Result};

/// Name reserved for the metric.
pub const METRIC: &str = "d";
/// Slack for metric axioms and Katětov inequalities.
pub const AXIOM_SLACK: f64 = 1e-12;
/// Default bound on domain sizes for the exhaustive distance.
pub const DEFAULT_CAP: usize = 6;

/// Values of a relation symbol on every tuple, in lexicographic tuple order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relation {
    pub arity: usize,
    /// Declared bound on `|value|`; `None` leaves the values unconstrained.
    pub bound: Option<f64>,
    pub values: Vec<f64>,
}

/// Relation names with arities, the nested languages and the domain count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Signature {
    pub relations: Vec<(String, usize)>,
    pub languages: Vec<Vec<String>>,
    pub domains: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteStructure {
    metric: Vec<Vec<f64>>,
    relations: BTreeMap<String, Relation>,
    domains: Vec<Vec<usize>>,
    languages: Vec<Vec<String>>,
}

fn tuple_index(tuple: &[usize], m: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * m + x)
}

/// All tuples of length `arity` over `items`, lexicographic.
fn tuples(items: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

impl FiniteStructure {
    /// Validates the metric axioms, relation tables, nested domains and
    /// nested languages. Empty `domains` means a single domain with every
    /// point; `None` languages means every `L_k` holds every relation.
    pub fn new(
        metric: Vec<Vec<f64>>,
        relations: BTreeMap<String, Relation>,
        domains: Vec<Vec<usize>>,
        languages: Option<Vec<Vec<String>>>,
    ) -> Result<Self> {
        let m = metric.len();
        if m == 0 {
            return Err(Error::Invalid("empty structure".into()));
        }
        for (i, row) in metric.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "metric row {i} has length {}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Invalid(format!(
                    "metric row {i} has a negative or non-finite entry"
                )));
            }
            if row[i].abs() > AXIOM_SLACK {
                return Err(Error::Invalid(format!("d({i}, {i}) is not zero")));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if (metric[i][j] - metric[j][i]).abs() > AXIOM_SLACK {
                    return Err(Error::Invalid(format!(
                        "metric is not symmetric at ({i}, {j})"
                    )));
                }
                if i != j && metric[i][j] <= AXIOM_SLACK {
                    return Err(Error::Invalid(format!(
                        "points {i} and {j} are at distance zero"
                    )));
                }
                for k in 0..m {
                    if metric[i][k] > metric[i][j] + metric[j][k] + AXIOM_SLACK {
                        return Err(Error::Invalid(format!(
                            "triangle inequality fails for ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        for (name, r) in &relations {
            if name == METRIC {
                return Err(Error::Invalid(format!(
                    "relation name `{METRIC}` is reserved for the metric"
                )));
            }
            if r.values.len() != m.pow(r.arity as u32) {
                return Err(Error::Dimension(format!(
                    "relation `{name}` of arity {} needs {} values, got {}",
                    r.arity,
                    m.pow(r.arity as u32),
                    r.values.len()
                )));
            }
            if r.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!(
                    "relation `{name}` has a non-finite value"
                )));
            }
            if let Some(b) = r.bound {
                if r.values.iter().any(|v| v.abs() > b + AXIOM_SLACK) {
                    return Err(Error::Invalid(format!(
                        "relation `{name}` exceeds its bound {b}"
                    )));
                }
            }
        }
        let mut domains: Vec<Vec<usize>> = domains
            .into_iter()
            .map(|mut d| {
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect();
        if domains.is_empty() {
            domains.push((0..m).collect());
        }
        for (i, d) in domains.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::Invalid(format!("domain {} is empty", i + 1)));
            }
            if d.iter().any(|&x| x >= m) {
                return Err(Error::OutOfRange(format!(
                    "domain {} mentions a point outside 0..{m}",
                    i + 1
                )));
            }
            if i > 0 && !domains[i - 1].iter().all(|x| d.contains(x)) {
                return Err(Error::Invalid(format!(
                    "domain {i} is not contained in domain {}",
                    i + 1
                )));
            }
        }
        if domains.last().map(Vec::len) != Some(m) {
            return Err(Error::Invalid(
                "domains do not exhaust the structure".into(),
            ));
        }
        let languages = match languages {
            None => vec![relations.keys().cloned().collect()],
            Some(ls) if ls.is_empty() => vec![relations.keys().cloned().collect()],
            Some(ls) => {
                let mut out: Vec<Vec<String>> = Vec::with_capacity(ls.len());
                for (i, mut l) in ls.into_iter().enumerate() {
                    l.retain(|n| n != METRIC);
                    l.sort();
                    l.dedup();
                    if let Some(bad) = l.iter().find(|n| !relations.contains_key(*n)) {
                        return Err(Error::MissingRelation(bad.clone()));
                    }
                    if i > 0 && !out[i - 1].iter().all(|n| l.contains(n)) {
                        return Err(Error::Invalid(format!(
                            "language {i} is not contained in language {}",
                            i + 1
                        )));
                    }
                    out.push(l);
                }
                out
            }
        };
        Ok(Self {
            metric,
            relations,
            domains,
            languages,
        })
    }

    /// A bare metric space with one domain.
    pub fn metric_space(metric: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(metric, BTreeMap::new(), Vec::new(), None)
    }

    pub fn size(&self) -> usize {
        self.metric.len()
    }

    pub fn metric(&self) -> &[Vec<f64>] {
        &self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric[i][j]
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    /// Domain `D_k` (1-based); indices past the last give the last domain.
    pub fn domain(&self, k: usize) -> &[usize] {
        &self.domains[k.clamp(1, self.domains.len()) - 1]
    }

    /// Relation names of `L_k` (1-based), the metric first.
    pub fn language(&self, k: usize) -> Vec<String> {
        let l = &self.languages[k.clamp(1, self.languages.len()) - 1];
        std::iter::once(METRIC.to_string())
            .chain(l.iter().cloned())
            .collect()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            relations: self
                .relations
                .iter()
                .map(|(n, r)| (n.clone(), r.arity))
                .collect(),
            languages: self.languages.clone(),
            domains: self.domains.len(),
        }
    }

    pub fn arity(&self, name: &str) -> Result<usize> {
        if name == METRIC {
            return Ok(2);
        }
        self.relations
            .get(name)
            .map(|r| r.arity)
            .ok_or_else(|| Error::MissingRelation(name.to_string()))
    }

    /// `B(tuple)`; the metric is the relation named [`METRIC`].
    pub fn value(&self, name: &str, tuple: &[usize]) -> Result<f64> {
        if name == METRIC {
            if tuple.len() != 2 {
                return Err(Error::Dimension("the metric is binary".into()));
            }
            return Ok(self.metric[tuple[0]][tuple[1]]);
        }
        let r = self
            .relations
            .get(name)
            .ok_or_else(|| Error::MissingRelation(name.to_string()))?;
        if tuple.len() != r.arity {
            return Err(Error::Dimension(format!("`{name}` has arity {}", r.arity)));
        }
        Ok(r.values[tuple_index(tuple, self.size())])
    }

    /// The copy in which old point `i` becomes point `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let m = self.size();
        let mut seen = vec![false; m];
        if perm.len() != m
            || perm
                .iter()
                .any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Invalid("relabeling is not a permutation".into()));
        }
        let mut inv = vec![0; m];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let metric = (0..m)
            .map(|i| (0..m).map(|j| self.metric[inv[i]][inv[j]]).collect())
            .collect();
        let relations = self
            .relations
            .iter()
            .map(|(n, r)| {
                let all: Vec<usize> = (0..m).collect();
                let values = tuples(&all, r.arity)
                    .iter()
                    .map(|t| {
                        let old: Vec<usize> = t.iter().map(|&x| inv[x]).collect();
                        r.values[tuple_index(&old, m)]
                    })
                    .collect();
                (
                    n.clone(),
                    Relation {
                        arity: r.arity,
                        bound: r.bound,
                        values,
                    },
                )
            })
            .collect();
        let domains = self
            .domains
            .iter()
            .map(|d| d.iter().map(|&x| perm[x]).collect())
            .collect();
        Self::new(metric, relations, domains, Some(self.languages.clone()))
    }
}

/// `|f(x) - f(y)| <= d(x, y) <= f(x) + f(y)` for all pairs.
pub fn katetov_check(f: &[f64], x: &FiniteStructure) -> Result<bool> {
    katetov_metric(f, x.metric())
}

fn katetov_metric(f: &[f64], metric: &[Vec<f64>]) -> Result<bool> {
    if f.len() != metric.len() {
        return Err(Error::Dimension(format!(
            "{} values for {} points",
            f.len(),
            metric.len()
        )));
    }
    for i in 0..f.len() {
        for j in 0..f.len() {
            let d = metric[i][j];
            if (f[i] - f[j]).abs() > d + AXIOM_SLACK || d > f[i] + f[j] + AXIOM_SLACK {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Nonnegative table `psi(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxIsometry {
    psi: Vec<Vec<f64>>,
}

impl ApproxIsometry {
    pub fn new(psi: Vec<Vec<f64>>) -> Result<Self> {
        let cols = psi.first().map(Vec::len).unwrap_or(0);
        if psi.is_empty() || cols == 0 || psi.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension(
                "psi must be a nonempty rectangular table".into(),
            ));
        }
        if psi.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Invalid(
                "psi entries must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { psi })
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.psi
    }

    /// Katětov in `x` for every `y` and in `y` for every `x`.
    pub fn is_separately_katetov(&self, m: &FiniteStructure, n: &FiniteStructure) -> Result<bool> {
        if self.psi.len() != m.size() || self.psi[0].len() != n.size() {
            return Err(Error::Dimension("psi does not match the structures".into()));
        }
        for y in 0..n.size() {
            let col: Vec<f64> = self.psi.iter().map(|r| r[y]).collect();
            if !katetov_metric(&col, m.metric())? {
                return Ok(false);
            }
        }
        for row in &self.psi {
            if !katetov_metric(row, n.metric())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Least `eps` for which `psi` is an eps-bijection: the largest row or
/// column minimum.
pub fn eps_of_bijection(psi: &ApproxIsometry) -> f64 {
    let t = &psi.psi;
    let rows = t
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min));
    let cols = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min));
    rows.chain(cols).fold(0.0, f64::max)
}

/// `psi^B(x, y) = max{psi(x_1, y_1), ..., psi(x_a, y_a), |B(x) - B(y)|}` on
/// all tuple pairs, rows and columns in lexicographic tuple order.
pub fn lift_relation(
    psi: &ApproxIsometry,
    b: &str,
    m: &FiniteStructure,
    n: &FiniteStructure,
) -> Result<ApproxIsometry> {
    let arity = m.arity(b)?;
    if n.arity(b)? != arity {
        return Err(Error::Invalid(format!("`{b}` has different arities")));
    }
    if psi.psi.len() != m.size() || psi.psi[0].len() != n.size() {
        return Err(Error::Dimension("psi does not match the structures".into()));
    }
    let xs = tuples(&(0..m.size()).collect::<Vec<_>>(), arity);
    let ys = tuples(&(0..n.size()).collect::<Vec<_>>(), arity);
    let mut table = Vec::with_capacity(xs.len());
    for xt in &xs {
        let bx = m.value(b, xt)?;
        let mut row = Vec::with_capacity(ys.len());
        for yt in &ys {
            let mut v = (bx - n.value(b, yt)?).abs();
            for (&x, &y) in xt.iter().zip(yt) {
                v = v.max(psi.psi[x][y]);
            }
            row.push(v);
        }
        table.push(row);
    }
    ApproxIsometry::new(table)
}

/// Correspondence between the `k`-th domains, as index pairs into them.
type Pairs = Vec<(usize, usize)>;

struct LevelProblem<'a> {
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    dm: Vec<usize>,
    dn: Vec<usize>,
    language: Vec<String>,
}

impl LevelProblem<'_> {
    fn pair(&self, v: usize) -> (usize, usize) {
        (self.dm[v / self.dn.len()], self.dn[v % self.dn.len()])
    }

    fn vertices(&self) -> usize {
        self.dm.len() * self.dn.len()
    }

    fn compatible(&self, a: usize, b: usize, eps: f64) -> bool {
        let ((x, y), (x2, y2)) = (self.pair(a), self.pair(b));
        (self.m.distance(x, x2) - self.n.distance(y, y2)).abs() <= 2.0 * eps + AXIOM_SLACK
    }

    /// Largest over tuples of one side of the smallest `|B(x) - B(y)|` over
    /// partner tuples through `r`; infinite when some tuple has no partner.
    fn coverage(&self, r: &Pairs) -> Result<f64> {
        let mut worst = 0.0f64;
        for name in &self.language {
            let arity = self.m.arity(name)?;
            for flip in [false, true] {
                let (src, dst, from, to) = if flip {
                    (&self.dn, &self.dm, self.n, self.m)
                } else {
                    (&self.dm, &self.dn, self.m, self.n)
                };
                let partners: Vec<Vec<usize>> = src
                    .iter()
                    .map(|&a| {
                        r.iter()
                            .filter(|&&(x, y)| if flip { y == a } else { x == a })
                            .map(|&(x, y)| if flip { x } else { y })
                            .collect()
                    })
                    .collect();
                let _ = dst;
                for t in tuples(&(0..src.len()).collect::<Vec<_>>(), arity) {
                    let pts: Vec<usize> = t.iter().map(|&i| src[i]).collect();
                    let bx = from.value(name, &pts)?;
                    let mut best = f64::INFINITY;
                    let choices: Vec<&[usize]> =
                        t.iter().map(|&i| partners[i].as_slice()).collect();
                    for img in product(&choices) {
                        best = best.min((bx - to.value(name, &img)?).abs());
                    }
                    worst = worst.max(best);
                }
            }
        }
        Ok(worst)
    }

    fn covers(&self, r: &Pairs) -> bool {
        self.dm.iter().all(|&x| r.iter().any(|p| p.0 == x))
            && self.dn.iter().all(|&y| r.iter().any(|p| p.1 == y))
    }

    /// Some maximal clique of the compatibility graph at `eps` is a covering
    /// correspondence whose coverage is at most `eps`.
    fn feasible(&self, eps: f64) -> Result<Option<Pairs>> {
        let nv = self.vertices();
        let adj: Vec<u64> = (0..nv)
            .map(|a| {
                (0..nv)
                    .filter(|&b| b != a && self.compatible(a, b, eps))
                    .fold(0u64, |acc, b| acc | (1 << b))
            })
            .collect();
        let all = if nv == 64 { u64::MAX } else { (1u64 << nv) - 1 };
        let mut found = None;
        let mut err = None;
        bron_kerbosch(0, all, 0, &adj, &mut |clique| {
            let r: Pairs = (0..nv)
                .filter(|&v| clique >> v & 1 == 1)
                .map(|v| self.pair(v))
                .collect();
            if !self.covers(&r) {
                return false;
            }
            match self.coverage(&r) {
                Ok(c) if c <= eps + AXIOM_SLACK => {
                    found = Some(r);
                    true
                }
                Ok(_) => false,
                Err(e) => {
                    err = Some(e);
                    true
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(found),
        }
    }

    fn candidates(&self) -> Result<Vec<f64>> {
        let mut c = vec![0.0];
        for name in &self.language {
            let arity = self.m.arity(name)?;
            let xs = tuples(&self.dm, arity);
            let ys = tuples(&self.dn, arity);
            for xt in &xs {
                let bx = self.m.value(name, xt)?;
                for yt in &ys {
                    let v = (bx - self.n.value(name, yt)?).abs();
                    c.push(v);
                    if name == METRIC {
                        c.push(v / 2.0);
                    }
                }
            }
        }
        c.sort_by(f64::total_cmp);
        c.dedup();
        Ok(c)
    }
}

/// Cartesian product of choice lists.
fn product(choices: &[&[usize]]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|t| {
                c.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Maximal cliques with pivoting; `visit` returns `true` to stop.
fn bron_kerbosch(r: u64, p: u64, x: u64, adj: &[u64], visit: &mut dyn FnMut(u64) -> bool) -> bool {
    if p == 0 && x == 0 {
        return visit(r);
    }
    let pu = (p | x).trailing_zeros() as usize;
    let mut cand = p & !adj[pu];
    let (mut p, mut x) = (p, x);
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if bron_kerbosch(r | (1 << v), p & adj[v], x & adj[v], adj, visit) {
            return true;
        }
        p &= !(1 << v);
        x |= 1 << v;
    }
    false
}

/// `eps(R)` of a correspondence between the `k`-th domains: half its
/// metric distortion or the worst relation coverage, whichever is larger.
/// Infinite when `R` does not cover both domains.
pub fn correspondence_eps(
    m: &FiniteStructure,
    n: &FiniteStructure,
    k: usize,
    r: &[(usize, usize)],
) -> Result<f64> {
    check_compatible(m, n)?;
    let problem = level_problem(m, n, k);
    if r.iter()
        .any(|(x, y)| !problem.dm.contains(x) || !problem.dn.contains(y))
    {
        return Err(Error::OutOfRange(
            "correspondence leaves the domains".into(),
        ));
    }
    let r = r.to_vec();
    if !problem.covers(&r) {
        return Ok(f64::INFINITY);
    }
    let mut eps = 0.0f64;
    for &(x, y) in &r {
        for &(x2, y2) in &r {
            eps = eps.max((m.distance(x, x2) - n.distance(y, y2)).abs() / 2.0);
        }
    }
    Ok(eps.max(problem.coverage(&r)?))
}

fn level_problem<'a>(m: &'a FiniteStructure, n: &'a FiniteStructure, k: usize) -> LevelProblem<'a> {
    let mut language = m.language(k);
    for name in n.language(k) {
        if !language.contains(&name) {
            language.push(name);
        }
    }
    LevelProblem {
        m,
        n,
        dm: m.domain(k).to_vec(),
        dn: n.domain(k).to_vec(),
        language,
    }
}

/// Result of [`dk_bruteforce`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDistance {
    pub k: usize,
    pub value: f64,
    /// A correspondence realizing the value, as point indices.
    pub correspondence: Vec<(usize, usize)>,
}

fn check_compatible(m: &FiniteStructure, n: &FiniteStructure) -> Result<()> {
    let (sm, sn) = (m.signature(), n.signature());
    if sm.relations != sn.relations {
        return Err(Error::Invalid(
            "structures have different signatures".into(),
        ));
    }
    Ok(())
}

/// Exact `d_k(M, N)`: the least `eps` admitting a
/// (D_k, L_k, eps)-approximate isomorphism.
pub fn dk_bruteforce(
    m: &FiniteStructure,
    n: &FiniteStructure,
    k: usize,
    cap: usize,
) -> Result<LevelDistance> {
    check_compatible(m, n)?;
    if k == 0 {
        return Err(Error::OutOfRange("levels start at 1".into()));
    }
    let problem = level_problem(m, n, k);
    for d in [&problem.dm, &problem.dn] {
        if d.len() > cap.min(8) {
            return Err(Error::Capacity {
                what: "domain size",
                size: d.len(),
                cap: cap.min(8),
            });
        }
    }
    let cands = problem.candidates()?;
    let (mut lo, mut hi) = (0, cands.len() - 1);
    let mut witness = problem.feasible(cands[hi])?.ok_or(Error::NoConvergence(
        "no correspondence at the largest candidate",
    ))?;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match problem.feasible(cands[mid])? {
            Some(r) => {
                witness = r;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok(LevelDistance {
        k,
        value: cands[hi],
        correspondence: witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureDistance {
    pub levels: Vec<LevelDistance>,
    /// `sum_{k <= k_max} 2^-k d_k`.
    pub value: f64,
}

pub fn dgh_structures(
    m: &FiniteStructure,
    n: &FiniteStructure,
    k_max: usize,
    cap: usize,
) -> Result<StructureDistance> {
    let levels = (1..=k_max)
        .map(|k| dk_bruteforce(m, n, k, cap))
        .collect::<Result<Vec<_>>>()?;
    let value = levels
        .iter()
        .map(|l| l.value * 0.5f64.powi(l.k as i32))
        .sum();
    Ok(StructureDistance { levels, value })
}

/// Formulas built from atoms with lattice and affine connectives and
/// quantifiers over domains. Variables are numbered; quantifiers bind them.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom {
        relation: String,
        vars: Vec<usize>,
    },
    Const(f64),
    Max(Box<Formula>, Box<Formula>),
    Min(Box<Formula>, Box<Formula>),
    Scale(f64, Box<Formula>),
    Shift(f64, Box<Formula>),
    Sup {
        var: usize,
        domain: usize,
        body: Box<Formula>,
    },
    Inf {
        var: usize,
        domain: usize,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(relation: &str, vars: &[usize]) -> Self {
        Formula::Atom {
            relation: relation.to_string(),
            vars: vars.to_vec(),
        }
    }

    pub fn sup(var: usize, domain: usize, body: Formula) -> Self {
        Formula::Sup {
            var,
            domain,
            body: Box::new(body),
        }
    }

    pub fn inf(var: usize, domain: usize, body: Formula) -> Self {
        Formula::Inf {
            var,
            domain,
            body: Box::new(body),
        }
    }

    pub fn max(a: Formula, b: Formula) -> Self {
        Formula::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: Formula, b: Formula) -> Self {
        Formula::Min(Box::new(a), Box::new(b))
    }

    pub fn scale(c: f64, a: Formula) -> Self {
        Formula::Scale(c, Box::new(a))
    }

    pub fn shift(c: f64, a: Formula) -> Self {
        Formula::Shift(c, Box::new(a))
    }

    /// Uses no `inf`.
    pub fn is_universal(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Const(_) => true,
            Formula::Max(a, b) | Formula::Min(a, b) => a.is_universal() && b.is_universal(),
            Formula::Scale(_, a) | Formula::Shift(_, a) => a.is_universal(),
            Formula::Sup { body, .. } => body.is_universal(),
            Formula::Inf { .. } => false,
        }
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formula::Atom { relation, vars } => {
                let vs: Vec<String> = vars.iter().map(|v| format!("x{v}")).collect();
                write!(f, "{relation}({})", vs.join(", "))
            }
            Formula::Const(c) => write!(f, "{c}"),
            Formula::Max(a, b) => write!(f, "max({a}, {b})"),
            Formula::Min(a, b) => write!(f, "min({a}, {b})"),
            Formula::Scale(c, a) if *c == -1.0 => write!(f, "-{a}"),
            Formula::Scale(c, a) => write!(f, "{c}*{a}"),
            Formula::Shift(c, a) => write!(f, "({c} + {a})"),
            Formula::Sup { var, domain, body } => write!(f, "sup x{var} in D{domain}. {body}"),
            Formula::Inf { var, domain, body } => write!(f, "inf x{var} in D{domain}. {body}"),
        }
    }
}

/// Value of `phi` in `m`; `assignment[v]` interprets free variable `v`.
pub fn eval_formula(phi: &Formula, m: &FiniteStructure, assignment: &[usize]) -> Result<f64> {
    if assignment.iter().any(|&x| x >= m.size()) {
        return Err(Error::OutOfRange(
            "assignment mentions a point outside the structure".into(),
        ));
    }
    let mut env: Vec<Option<usize>> = assignment.iter().map(|&x| Some(x)).collect();
    eval_in(phi, m, &mut env)
}

fn eval_in(phi: &Formula, m: &FiniteStructure, env: &mut Vec<Option<usize>>) -> Result<f64> {
    match phi {
        Formula::Atom { relation, vars } => {
            let pts = vars
                .iter()
                .map(|&v| {
                    env.get(v)
                        .copied()
                        .flatten()
                        .ok_or_else(|| Error::UnboundVariable(format!("x{v}")))
                })
                .collect::<Result<Vec<_>>>()?;
            m.value(relation, &pts)
        }
        Formula::Const(c) => Ok(*c),
        Formula::Max(a, b) => Ok(eval_in(a, m, env)?.max(eval_in(b, m, env)?)),
        Formula::Min(a, b) => Ok(eval_in(a, m, env)?.min(eval_in(b, m, env)?)),
        Formula::Scale(c, a) => Ok(c * eval_in(a, m, env)?),
        Formula::Shift(c, a) => Ok(c + eval_in(a, m, env)?),
        Formula::Sup { var, domain, body } | Formula::Inf { var, domain, body } => {
            let is_sup = matches!(phi, Formula::Sup { .. });
            if *domain == 0 || *domain > m.domain_count() {
                return Err(Error::OutOfRange(format!("no domain D_{domain}")));
            }
            if env.len() <= *var {
                env.resize(var + 1, None);
            }
            let saved = env[*var];
            let mut acc = if is_sup {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            for &x in m.domain(*domain) {
                env[*var] = Some(x);
                let v = eval_in(body, m, env);
                let v = match v {
                    Ok(v) => v,
                    Err(e) => {
                        env[*var] = saved;
                        return Err(e);
                    }
                };
                acc = if is_sup { acc.max(v) } else { acc.min(v) };
            }
            env[*var] = saved;
            Ok(acc)
        }
    }
}

/// Universal sentences of quantifier depth exactly `depth` over domain
/// `domain`: `sup x_0 ... sup x_{depth-1}` of each atom mentioning
/// `x_{depth-1}`, its negation, and for `depth >= 2` each
/// `min(a, -b)` of two such atoms.
fn sentences_at(signature: &[(String, usize)], domains: usize, depth: usize) -> Vec<Formula> {
    let vars: Vec<usize> = (0..depth).collect();
    let mut out = Vec::new();
    for domain in 1..=domains {
        let mut atoms = Vec::new();
        for (name, arity) in signature {
            for t in tuples(&vars, *arity) {
                if t.contains(&(depth - 1)) {
                    atoms.push(Formula::atom(name, &t));
                }
            }
        }
        let mut bodies: Vec<Formula> = Vec::new();
        for a in &atoms {
            bodies.push(a.clone());
            bodies.push(Formula::scale(-1.0, a.clone()));
        }
        if depth >= 2 {
            for (i, a) in atoms.iter().enumerate() {
                for (j, b) in atoms.iter().enumerate() {
                    if i != j {
                        bodies.push(Formula::min(a.clone(), Formula::scale(-1.0, b.clone())));
                    }
                }
            }
        }
        for body in bodies {
            let sentence = (0..depth)
                .rev()
                .fold(body, |acc, v| Formula::sup(v, domain, acc));
            out.push(sentence);
        }
    }
    out
}

/// The fixed enumeration of universal sentences up to quantifier depth
/// `depth`; a prefix of the enumeration at any larger depth.
pub fn universal_sentences(m: &FiniteStructure, depth: usize) -> Vec<Formula> {
    let mut signature: Vec<(String, usize)> = vec![(METRIC.to_string(), 2)];
    signature.extend(m.signature().relations);
    (1..=depth)
        .flat_map(|d| sentences_at(&signature, m.domain_count(), d))
        .collect()
}

/// Values of [`universal_sentences`] in `m`.
pub fn universal_fingerprint(m: &FiniteStructure, depth: usize) -> Result<Vec<f64>> {
    if depth == 0 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    universal_sentences(m, depth)
        .iter()
        .map(|s| eval_formula(s, m, &[]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{factorial, nth_permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_point(a: f64) -> FiniteStructure {
        FiniteStructure::metric_space(vec![vec![0.0, a], vec![a, 0.0]]).unwrap()
    }

    fn random_space(rng: &mut ChaCha8Rng, m: usize) -> FiniteStructure {
        // Euclidean points in the plane.
        let pts: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        let metric = pts
            .iter()
            .map(|p| {
                pts.iter()
                    .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        FiniteStructure::metric_space(metric).unwrap()
    }

    fn with_unary(base: &FiniteStructure, values: Vec<f64>) -> FiniteStructure {
        let mut rels = BTreeMap::new();
        rels.insert(
            "P".to_string(),
            Relation {
                arity: 1,
                bound: None,
                values,
            },
        );
        FiniteStructure::new(base.metric().to_vec(), rels, Vec::new(), None).unwrap()
    }

    /// Direct recursive evaluation of eps(R) over every covering subset of
    /// pairs.
    fn exhaustive_dk(m: &FiniteStructure, n: &FiniteStructure) -> f64 {
        let (a, b) = (m.size(), n.size());
        let pairs: Vec<(usize, usize)> = (0..a).flat_map(|x| (0..b).map(move |y| (x, y))).collect();
        let mut names = vec![METRIC.to_string()];
        names.extend(m.relations().keys().cloned());
        let mut best = f64::INFINITY;
        for mask in 1u64..(1 << pairs.len()) {
            let r: Vec<(usize, usize)> = (0..pairs.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| pairs[i])
                .collect();
            if !(0..a).all(|x| r.iter().any(|p| p.0 == x))
                || !(0..b).all(|y| r.iter().any(|p| p.1 == y))
            {
                continue;
            }
            let mut eps = 0.0f64;
            for p in &r {
                for q in &r {
                    eps = eps.max((m.distance(p.0, q.0) - n.distance(p.1, q.1)).abs() / 2.0);
                }
            }
            for name in &names {
                let ar = m.arity(name).unwrap();
                for (s, t, flip) in [(m, n, false), (n, m, true)] {
                    for xt in tuples(&(0..s.size()).collect::<Vec<_>>(), ar) {
                        let mut low = f64::INFINITY;
                        for yt in tuples(&(0..t.size()).collect::<Vec<_>>(), ar) {
                            let ok = xt.iter().zip(&yt).all(|(&x, &y)| {
                                let pr = if flip { (y, x) } else { (x, y) };
                                r.contains(&pr)
                            });
                            if ok {
                                low = low.min(
                                    (s.value(name, &xt).unwrap() - t.value(name, &yt).unwrap())
                                        .abs(),
                                );
                            }
                        }
                        eps = eps.max(low);
                    }
                }
            }
            best = best.min(eps);
        }
        best
    }

    #[test]
    fn katetov_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_space(&mut rng, 5);
        let f: Vec<f64> = (0..5).map(|i| x.distance(i, 2)).collect();
        assert!(katetov_check(&f, &x).unwrap());
        assert!(!katetov_check(&[0.0, 0.0], &two_point(1.0)).unwrap());
        for _ in 0..50 {
            let g: Vec<f64> = f
                .iter()
                .map(|v| v + rng.random_range(-0.05..0.05))
                .collect();
            let mut expect = true;
            for i in 0..5 {
                for j in 0..5 {
                    let d = x.distance(i, j);
                    if (g[i] - g[j]).abs() > d + 1e-12 || d > g[i] + g[j] + 1e-12 {
                        expect = false;
                    }
                }
            }
            assert_eq!(katetov_check(&g, &x).unwrap(), expect);
        }
        assert!(katetov_check(&[1.0], &x).is_err());
    }

    #[test]
    fn structure_validation() {
        assert!(FiniteStructure::metric_space(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteStructure::metric_space(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0]
        ])
        .is_err());
        let base = two_point(1.0);
        let bad_domains =
            FiniteStructure::new(base.metric().to_vec(), BTreeMap::new(), vec![vec![0]], None);
        assert!(bad_domains.is_err());
        let nested = FiniteStructure::new(
            base.metric().to_vec(),
            BTreeMap::new(),
            vec![vec![1], vec![0, 1]],
            None,
        )
        .unwrap();
        assert_eq!(nested.domain(1), &[1]);
        assert_eq!(nested.domain(5), &[0, 1]);
    }

    #[test]
    fn eps_of_bijection_examples() {
        let exact = ApproxIsometry::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(eps_of_bijection(&exact), 0.0);
        let constant = ApproxIsometry::new(vec![vec![0.7; 3]; 2]).unwrap();
        assert_eq!(eps_of_bijection(&constant), 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let t: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..4).map(|_| rng.random_range(0.0..2.0)).collect())
                .collect();
            let mut scan = 0.0f64;
            for r in &t {
                scan = scan.max(r.iter().copied().fold(f64::INFINITY, f64::min));
            }
            for j in 0..4 {
                scan = scan.max(t.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min));
            }
            assert_eq!(eps_of_bijection(&ApproxIsometry::new(t).unwrap()), scan);
        }
    }

    #[test]
    fn lift_relation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = random_space(&mut rng, 3);
        let m = with_unary(&base, vec![0.1, 0.5, 0.9]);
        let n = m.relabeled(&[2, 0, 1]).unwrap();
        let psi: Vec<Vec<f64>> = (0..3)
            .map(|x| [1, 2, 0].iter().map(|&y| base.distance(x, y)).collect())
            .collect();
        let psi = ApproxIsometry::new(psi).unwrap();
        assert!(psi.is_separately_katetov(&m, &n).unwrap());
        assert_eq!(eps_of_bijection(&psi), 0.0);
        let lifted = lift_relation(&psi, "P", &m, &n).unwrap();
        assert_eq!(eps_of_bijection(&lifted), 0.0);
        let lifted_d = lift_relation(&psi, METRIC, &m, &n).unwrap();
        assert!(eps_of_bijection(&lifted_d) < 1e-15);

        let shifted = with_unary(&base, vec![0.4, 0.8, 1.2]);
        let id_psi = ApproxIsometry::new(base.metric().to_vec()).unwrap();
        let l = lift_relation(&id_psi, "P", &m, &shifted).unwrap();
        for i in 0..3 {
            assert!(l.table()[i][i] >= 0.3 - 1e-12);
        }
        // direct formula
        let r = lift_relation(&id_psi, METRIC, &m, &shifted).unwrap();
        let row = 3 + 2;
        let col = 2 * 3 + 1;
        let expect = (m.distance(1, 2) - shifted.distance(2, 1))
            .abs()
            .max(id_psi.table()[1][2])
            .max(id_psi.table()[2][1]);
        assert_eq!(r.table()[row][col], expect);
        assert!(matches!(
            lift_relation(&id_psi, "Q", &m, &shifted),
            Err(Error::MissingRelation(_))
        ));
    }

    #[test]
    fn dk_two_point_spaces_match_exhaustive_oracle() {
        for (a, b) in [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0), (2.0, 0.7)] {
            let (m, n) = (two_point(a), two_point(b));
            let got = dk_bruteforce(&m, &n, 1, DEFAULT_CAP).unwrap().value;
            assert!(
                (got - exhaustive_dk(&m, &n)).abs() < 1e-12,
                "{a} {b}: {got}"
            );
        }
    }

    #[test]
    fn dk_random_instances_match_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
            let m = with_unary(
                &random_space(&mut rng, a),
                (0..a).map(|_| rng.random_range(0.0..1.0)).collect(),
            );
            let n = with_unary(
                &random_space(&mut rng, b),
                (0..b).map(|_| rng.random_range(0.0..1.0)).collect(),
            );
            let got = dk_bruteforce(&m, &n, 1, DEFAULT_CAP).unwrap();
            assert!((got.value - exhaustive_dk(&m, &n)).abs() < 1e-12);
        }
    }

    #[test]
    fn dk_relabeled_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_space(&mut rng, 5);
        let n = m.relabeled(&[3, 1, 4, 0, 2]).unwrap();
        assert_eq!(dk_bruteforce(&m, &m, 1, DEFAULT_CAP).unwrap().value, 0.0);
        assert!(dgh_structures(&m, &n, 2, DEFAULT_CAP).unwrap().value <= 1e-12);
    }

    #[test]
    fn dgh_zero_iff_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let grid = [1.0, 2.0];
        for _ in 0..30 {
            let mk = |rng: &mut ChaCha8Rng| loop {
                let (p, q, r) = (
                    grid[rng.random_range(0..2)],
                    grid[rng.random_range(0..2)],
                    grid[rng.random_range(0..2)],
                );
                if let Ok(s) = FiniteStructure::metric_space(vec![
                    vec![0.0, p, q],
                    vec![p, 0.0, r],
                    vec![q, r, 0.0],
                ]) {
                    return s;
                }
            };
            let (m, n) = (mk(&mut rng), mk(&mut rng));
            let iso = (0..factorial(3)).any(|i| {
                let p = nth_permutation(3, i);
                (0..3).all(|a| (0..3).all(|b| m.distance(a, b) == n.distance(p[a], p[b])))
            });
            let d = dgh_structures(&m, &n, 1, DEFAULT_CAP).unwrap().value;
            assert_eq!(d == 0.0, iso);
        }
    }

    #[test]
    fn dgh_pseudometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let s: Vec<FiniteStructure> = (0..3)
                .map(|_| {
                    let k = rng.random_range(1..=4);
                    random_space(&mut rng, k)
                })
                .collect();
            let d = |a: &FiniteStructure, b: &FiniteStructure| {
                dgh_structures(a, b, 1, DEFAULT_CAP).unwrap().value
            };
            assert_eq!(d(&s[0], &s[1]), d(&s[1], &s[0]));
            assert!(d(&s[0], &s[2]) <= d(&s[0], &s[1]) + d(&s[1], &s[2]) + 1e-9);
        }
    }

    #[test]
    fn correspondence_eps_replays_level_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let m = with_unary(
                &random_space(&mut rng, 3),
                (0..3).map(|_| rng.random_range(0.0..1.0)).collect(),
            );
            let n = with_unary(
                &random_space(&mut rng, 3),
                (0..3).map(|_| rng.random_range(0.0..1.0)).collect(),
            );
            let d = dk_bruteforce(&m, &n, 1, DEFAULT_CAP).unwrap();
            let e = correspondence_eps(&m, &n, 1, &d.correspondence).unwrap();
            assert!((e - d.value).abs() < 1e-12, "{e} {}", d.value);
        }
        let m = two_point(1.0);
        assert_eq!(
            correspondence_eps(&m, &m, 1, &[(0, 0)]).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_space(&mut rng, 7);
        assert!(matches!(
            dk_bruteforce(&m, &m, 1, DEFAULT_CAP),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn formula_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_space(&mut rng, 4);
        let phi = Formula::sup(0, 1, Formula::atom(METRIC, &[0, 0]));
        assert_eq!(eval_formula(&phi, &m, &[]).unwrap(), 0.0);
        let psi = Formula::sup(0, 1, Formula::inf(1, 1, Formula::atom(METRIC, &[0, 1])));
        assert_eq!(eval_formula(&psi, &m, &[]).unwrap(), 0.0);
        assert!(!psi.is_universal());
        assert_eq!(psi.to_string(), "sup x0 in D1. inf x1 in D1. d(x0, x1)");
        assert!(matches!(
            eval_formula(&Formula::atom(METRIC, &[0, 3]), &m, &[1]),
            Err(Error::UnboundVariable(_))
        ));
        assert!(matches!(
            eval_formula(&Formula::atom("R", &[0]), &m, &[1]),
            Err(Error::MissingRelation(_))
        ));
    }

    /// Independent evaluator: expands quantifiers into explicit loops over
    /// all assignments of the two variables.
    #[test]
    fn lattice_sentence_matches_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let m = with_unary(
                &random_space(&mut rng, 4),
                (0..4).map(|_| rng.random_range(0.0..1.0)).collect(),
            );
            let (c1, c2) = (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
            let body = Formula::max(
                Formula::min(
                    Formula::atom(METRIC, &[0, 1]),
                    Formula::scale(c1, Formula::atom("P", &[1])),
                ),
                Formula::shift(c2, Formula::atom("P", &[0])),
            );
            let phi = Formula::sup(0, 1, Formula::inf(1, 1, body));
            let mut expect = f64::NEG_INFINITY;
            for x in 0..4 {
                let mut low = f64::INFINITY;
                for y in 0..4 {
                    let p = |i: usize| m.value("P", &[i]).unwrap();
                    let v = (m.distance(x, y).min(c1 * p(y))).max(c2 + p(x));
                    low = low.min(v);
                }
                expect = expect.max(low);
            }
            assert_eq!(eval_formula(&phi, &m, &[]).unwrap(), expect);
        }
    }

    #[test]
    fn fingerprints() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = with_unary(&random_space(&mut rng, 4), vec![0.2, 0.4, 0.6, 0.8]);
        let n = m.relabeled(&[1, 3, 0, 2]).unwrap();
        for depth in 1..=3 {
            assert_eq!(
                universal_fingerprint(&m, depth).unwrap(),
                universal_fingerprint(&n, depth).unwrap()
            );
        }
        let (a, b) = (two_point(1.0), two_point(2.0));
        let (fa, fb) = (
            universal_fingerprint(&a, 2).unwrap(),
            universal_fingerprint(&b, 2).unwrap(),
        );
        assert_ne!(fa, fb);
        let sentences = universal_sentences(&a, 2);
        let target = Formula::sup(0, 1, Formula::sup(1, 1, Formula::atom(METRIC, &[0, 1])));
        let idx = sentences.iter().position(|s| *s == target).unwrap();
        assert_eq!((fa[idx], fb[idx]), (1.0, 2.0));
        assert!(sentences.iter().all(Formula::is_universal));
        let short = universal_fingerprint(&m, 2).unwrap();
        let long = universal_fingerprint(&m, 3).unwrap();
        assert_eq!(&long[..short.len()], &short[..]);
    }
}
