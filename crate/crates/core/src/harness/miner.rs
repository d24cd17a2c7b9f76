//! A naive constant-tricluster miner, good enough to produce candidates
//! for end-to-end runs on small tensors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::significance::log_binomial;
use crate::tensor::{Category, Tensor3, Tricluster};

/// Largest number of `(J, K)` subspaces the exhaustive mode will visit.
pub const MAX_SUBSPACES: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub min_obs: usize,
    pub min_vars: usize,
    pub max_vars: usize,
    pub min_ctx: usize,
    pub max_ctx: usize,
    /// Restrict `K` to runs of consecutive contexts.
    pub contiguous: bool,
}

impl MinerConfig {
    fn validate(&self, t: &Tensor3) -> Result<()> {
        if self.min_obs == 0 || self.min_vars == 0 || self.min_ctx == 0 {
            return Err(Error::InvalidArgument(
                "minimum sizes must be positive".into(),
            ));
        }
        if self.min_vars > self.max_vars || self.min_ctx > self.max_ctx {
            return Err(Error::InvalidArgument("minimum size above maximum".into()));
        }
        if let Some(j) = (0..t.n_vars()).find(|&j| !t.domain(j).is_ordinal()) {
            return Err(Error::NotOrdinal(j));
        }
        Ok(())
    }
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

fn context_sets(p: usize, cfg: &MinerConfig) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in cfg.min_ctx..=cfg.max_ctx.min(p) {
        if cfg.contiguous {
            out.extend((0..=p - len).map(|s| (s..s + len).collect()));
        } else {
            combinations(p, len, |c| out.push(c.to_vec()));
        }
    }
    out
}

fn search_space(t: &Tensor3, cfg: &MinerConfig) -> u128 {
    let subsets = |n: usize, lo: usize, hi: usize| -> f64 {
        (lo..=hi.min(n))
            .map(|k| log_binomial(n as u64, k as u64).exp())
            .sum()
    };
    let p = t.n_ctx();
    let ctx_sets = if cfg.contiguous {
        (cfg.min_ctx..=cfg.max_ctx.min(p))
            .map(|k| (p - k + 1) as f64)
            .sum()
    } else {
        subsets(p, cfg.min_ctx, cfg.max_ctx)
    };
    (subsets(t.n_vars(), cfg.min_vars, cfg.max_vars) * ctx_sets).round() as u128
}

fn contains(outer: &Tricluster, inner: &Tricluster) -> bool {
    let sub = |a: &[usize], b: &[usize]| b.iter().all(|x| a.binary_search(x).is_ok());
    sub(&outer.obs, &inner.obs) && sub(&outer.vars, &inner.vars) && sub(&outer.ctxs, &inner.ctxs)
}

/// Drops every tricluster contained in another one of the list. Constant
/// blocks nested in each other necessarily share their pattern.
fn maximal(mut found: Vec<Tricluster>) -> Vec<Tricluster> {
    found.sort();
    found.dedup();
    // larger volumes first so that containers are seen before contents
    let volume = |t: &Tricluster| t.obs.len() * t.vars.len() * t.ctxs.len();
    let mut by_size: Vec<usize> = (0..found.len()).collect();
    by_size.sort_by_key(|&i| std::cmp::Reverse(volume(&found[i])));
    let mut keep = vec![true; found.len()];
    for (a, &i) in by_size.iter().enumerate() {
        if by_size[..a]
            .iter()
            .any(|&o| keep[o] && contains(&found[o], &found[i]))
        {
            keep[i] = false;
        }
    }
    found
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then_some(t))
        .collect()
}

/// Exhaustive search: for every admissible `(J, K)`, groups observations
/// by their values on `J x K` and emits each group of at least `min_obs`
/// rows. Only maximal triclusters are returned, sorted lexicographically.
pub fn naive_miner(t: &Tensor3, cfg: &MinerConfig) -> Result<Vec<Tricluster>> {
    cfg.validate(t)?;
    let size = search_space(t, cfg);
    if size > MAX_SUBSPACES {
        return Err(Error::SearchSpaceTooLarge(size));
    }
    let ctx_sets = context_sets(t.n_ctx(), cfg);
    let mut found = Vec::new();
    for n_j in cfg.min_vars..=cfg.max_vars.min(t.n_vars()) {
        combinations(t.n_vars(), n_j, |vars| {
            for ctxs in &ctx_sets {
                let mut groups: BTreeMap<Vec<Category>, Vec<usize>> = BTreeMap::new();
                'obs: for i in 0..t.n_obs() {
                    let mut key = Vec::with_capacity(vars.len() * ctxs.len());
                    for &j in vars {
                        for &k in ctxs {
                            match t.cat(i, j, k) {
                                Some(c) => key.push(c),
                                None => continue 'obs,
                            }
                        }
                    }
                    groups.entry(key).or_default().push(i);
                }
                for obs in groups.into_values().filter(|g| g.len() >= cfg.min_obs) {
                    found.push(Tricluster {
                        obs,
                        vars: vars.to_vec(),
                        ctxs: ctxs.clone(),
                        contiguous: cfg.contiguous,
                    });
                }
            }
        });
    }
    Ok(maximal(found))
}

/// Greedy search for tensors too large to enumerate. Seeds on the
/// `max_seeds` most frequent `(j, k, category)` cells, then repeatedly adds
/// the variable or context (adjacent one, when contiguous) whose modal
/// value keeps the largest block volume, while at least `min_obs` rows
/// agree. Results that reach the minimum sizes are returned maximal and
/// sorted.
pub fn greedy_miner(t: &Tensor3, cfg: &MinerConfig, max_seeds: usize) -> Result<Vec<Tricluster>> {
    cfg.validate(t)?;
    let mut seeds: Vec<(usize, usize, usize, Category)> = Vec::new();
    for j in 0..t.n_vars() {
        let card = t.domain(j).cardinality().unwrap_or(0);
        for k in 0..t.n_ctx() {
            let mut counts = vec![0usize; card];
            for i in 0..t.n_obs() {
                if let Some(c) = t.cat(i, j, k) {
                    counts[c as usize] += 1;
                }
            }
            for (c, &n) in counts.iter().enumerate() {
                if n >= cfg.min_obs {
                    seeds.push((n, j, k, c as Category));
                }
            }
        }
    }
    // most frequent first, ties by position
    seeds.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3))));
    seeds.truncate(max_seeds);

    let mut found = Vec::new();
    for &(_, j0, k0, c0) in &seeds {
        let mut obs: Vec<usize> = (0..t.n_obs())
            .filter(|&i| t.cat(i, j0, k0) == Some(c0))
            .collect();
        let mut vars = vec![j0];
        let mut ctxs = vec![k0];
        loop {
            let mut best: Option<(usize, Vec<usize>, Vec<usize>, Vec<usize>)> = None;
            let volume = |o: &[usize], v: &[usize], c: &[usize]| o.len() * v.len() * c.len();
            let mut consider =
                |new_vars: Vec<usize>, new_ctxs: Vec<usize>, added: &[(usize, usize)]| {
                    let kept = agreeing_rows(t, &obs, added);
                    if kept.len() < cfg.min_obs {
                        return;
                    }
                    let vol = volume(&kept, &new_vars, &new_ctxs);
                    if best.as_ref().is_none_or(|b| vol > b.0) {
                        best = Some((vol, kept, new_vars, new_ctxs));
                    }
                };
            if vars.len() < cfg.max_vars {
                for j in (0..t.n_vars()).filter(|j| !vars.contains(j)) {
                    let added: Vec<(usize, usize)> = ctxs.iter().map(|&k| (j, k)).collect();
                    let mut v = vars.clone();
                    v.push(j);
                    v.sort_unstable();
                    consider(v, ctxs.clone(), &added);
                }
            }
            if ctxs.len() < cfg.max_ctx {
                let candidates: Vec<usize> = if cfg.contiguous {
                    let (lo, hi) = (ctxs[0], *ctxs.last().expect("non-empty"));
                    lo.checked_sub(1)
                        .into_iter()
                        .chain((hi + 1 < t.n_ctx()).then_some(hi + 1))
                        .collect()
                } else {
                    (0..t.n_ctx()).filter(|k| !ctxs.contains(k)).collect()
                };
                for k in candidates {
                    let added: Vec<(usize, usize)> = vars.iter().map(|&j| (j, k)).collect();
                    let mut c = ctxs.clone();
                    c.push(k);
                    c.sort_unstable();
                    consider(vars.clone(), c, &added);
                }
            }
            match best {
                Some((vol, kept, v, c)) if vol > volume(&obs, &vars, &ctxs) => {
                    obs = kept;
                    vars = v;
                    ctxs = c;
                }
                _ => break,
            }
        }
        if vars.len() >= cfg.min_vars && ctxs.len() >= cfg.min_ctx {
            found.push(Tricluster::new(obs, vars, ctxs, cfg.contiguous)?);
        }
    }
    Ok(maximal(found))
}

/// Rows of `obs` that agree on the modal value of each added cell.
fn agreeing_rows(t: &Tensor3, obs: &[usize], cells: &[(usize, usize)]) -> Vec<usize> {
    let mut modes = Vec::with_capacity(cells.len());
    for &(j, k) in cells {
        let card = t.domain(j).cardinality().unwrap_or(0);
        let mut counts = vec![0usize; card];
        for &i in obs {
            if let Some(c) = t.cat(i, j, k) {
                counts[c as usize] += 1;
            }
        }
        let mode = counts
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, &n)| n)
            .map(|(c, _)| c as Category);
        modes.push(mode);
    }
    obs.iter()
        .copied()
        .filter(|&i| {
            cells
                .iter()
                .zip(&modes)
                .all(|(&(j, k), m)| m.is_some() && t.cat(i, j, k) == *m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate, GenSpec, SizeRange};
    use crate::tensor::{TensorBuilder, Value, VariableDomain};

    fn cfg(min_obs: usize, contiguous: bool) -> MinerConfig {
        MinerConfig {
            min_obs,
            min_vars: 1,
            max_vars: 3,
            min_ctx: 1,
            max_ctx: 3,
            contiguous,
        }
    }

    #[test]
    fn one_block_on_a_distinct_background() {
        // every background cell distinct, one 3x2x2 block of zeros
        let (n, m, p) = (6, 4, 4);
        let card = n * m * p + 1;
        let mut b = TensorBuilder::with_shape(
            n,
            m,
            p,
            vec![VariableDomain::ordinal_indexed(card); m],
            true,
        )
        .unwrap();
        let mut next = 1;
        for i in 0..n {
            for j in 0..m {
                for k in 0..p {
                    let inside =
                        [1, 2, 4].contains(&i) && [0, 3].contains(&j) && [1, 2].contains(&k);
                    let c = if inside { 0 } else { next };
                    next += 1;
                    b.set(i, j, k, Value::Cat(c as Category)).unwrap();
                }
            }
        }
        let t = b.build();
        let found = naive_miner(&t, &cfg(2, true)).unwrap();
        assert_eq!(
            found,
            vec![Tricluster::new(vec![1, 2, 4], vec![0, 3], vec![1, 2], true).unwrap()]
        );
        let greedy = greedy_miner(&t, &cfg(2, true), 10).unwrap();
        assert_eq!(greedy, found);
    }

    #[test]
    fn distinct_values_give_nothing() {
        let cells: Vec<Vec<Vec<Option<Category>>>> = (0..5)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        (0..2)
                            .map(|k| Some((i * 4 + j * 2 + k) as Category))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let t = Tensor3::from_categories(&cells, &[20, 20], false).unwrap();
        assert!(naive_miner(&t, &cfg(2, false)).unwrap().is_empty());
    }

    #[test]
    fn planted_triclusters_are_recovered() {
        for seed in 0..5 {
            let spec = GenSpec {
                n_obs: 40,
                n_vars: 6,
                n_ctx: 5,
                cardinality: 7,
                n_planted: 2,
                obs_range: SizeRange(6, 10),
                var_range: SizeRange(2, 3),
                ctx_range: SizeRange(2, 3),
                contiguous: true,
                seed,
                ..GenSpec::default()
            };
            let g = generate(&spec).unwrap();
            let found = naive_miner(
                &g.tensor,
                &MinerConfig {
                    min_obs: 5,
                    min_vars: 2,
                    ..cfg(5, true)
                },
            )
            .unwrap();
            for (tc, _) in &g.planted {
                assert!(
                    found.iter().any(|f| contains(f, tc)),
                    "seed {seed}: {tc:?} not recovered"
                );
            }
            let mut sorted = found.clone();
            sorted.sort();
            assert_eq!(sorted, found);
            for (a, x) in found.iter().enumerate() {
                for (b, y) in found.iter().enumerate() {
                    assert!(a == b || !contains(x, y));
                }
            }
        }
    }

    #[test]
    fn oversized_searches_are_refused() {
        let cells = vec![vec![vec![Some(0); 30]; 30]; 2];
        let t = Tensor3::from_categories(&cells, &[2; 30], false).unwrap();
        let big = MinerConfig {
            max_vars: 10,
            max_ctx: 10,
            ..cfg(1, false)
        };
        assert!(matches!(
            naive_miner(&t, &big),
            Err(Error::SearchSpaceTooLarge(_))
        ));
    }
}
