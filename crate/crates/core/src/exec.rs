//! Enumeration and deterministic fan-out helpers.

use rayon::prelude::*;

/// Applies `f` to `0..count`, returning results in index order.
///
/// With `jobs > 1` the work runs on a dedicated pool of that many threads; the
/// output does not depend on the number of threads.
pub(crate) fn map_indexed<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

/// Smallest index in `0..count` for which `f` returns `Some`, evaluated in
/// chunks so the search stops early. Schedule-independent.
pub(crate) fn find_first<T, F>(count: usize, jobs: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    let pool = if jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .ok()
    } else {
        None
    };
    let chunk = 64 * jobs.max(1);
    let mut start = 0;
    while start < count {
        let end = (start + chunk).min(count);
        let hits: Vec<Option<T>> = match &pool {
            Some(p) => p.install(|| (start..end).into_par_iter().map(&f).collect()),
            None => (start..end).map(&f).collect(),
        };
        if let Some((k, t)) = hits
            .into_iter()
            .enumerate()
            .find_map(|(k, h)| h.map(|t| (k, t)))
        {
            return Some((start + k, t));
        }
        start = end;
    }
    None
}

pub(crate) fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// The `idx`-th permutation of `0..m` in lexicographic order.
pub(crate) fn nth_permutation(m: usize, mut idx: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    let mut out = Vec::with_capacity(m);
    for i in (0..m).rev() {
        let f = factorial(i);
        out.push(pool.remove(idx / f));
        idx %= f;
    }
    out
}

/// All permutations of `0..m` in lexicographic order.
#[cfg(test)]
pub(crate) fn permutations(m: usize) -> Vec<Vec<usize>> {
    (0..factorial(m)).map(|i| nth_permutation(m, i)).collect()
}

pub(crate) fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// Lexicographic rank of a permutation.
pub(crate) fn permutation_rank(p: &[usize]) -> usize {
    let m = p.len();
    let mut rank = 0;
    for i in 0..m {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank += smaller * factorial(m - 1 - i);
    }
    rank
}
