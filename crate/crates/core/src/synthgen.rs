//! Synthetic ordinal tensors with planted constant triclusters.
//!
//! Background cells are drawn i.i.d., either uniformly over the categories
//! or from a Gaussian discretized into equal-width bins over `mu +- 3 sigma`
//! (values beyond are clipped into the outer bins). Each planting draws its
//! sizes uniformly from the configured ranges, its index sets uniformly, and
//! one category per `(j, k)` cell uniformly; the planted block is constant
//! across its observations and overwrites the background. Plantings may
//! overlap only where they agree; a conflicting draw is resampled.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    Category, Pattern, Tensor3, TensorBuilder, Tricluster, TriclusterRecord, Value, VariableDomain,
};

/// Attempts per planting before giving up with [`Error::PlantingConflict`].
pub const MAX_PLANTING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Background {
    Uniform,
    Gaussian { mu: f64, sigma: f64 },
}

/// Inclusive size range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange(pub usize, pub usize);

impl SizeRange {
    fn range(self) -> RangeInclusive<usize> {
        self.0..=self.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub n_obs: usize,
    pub n_vars: usize,
    pub n_ctx: usize,
    pub background: Background,
    pub cardinality: usize,
    pub n_planted: usize,
    pub obs_range: SizeRange,
    pub var_range: SizeRange,
    pub ctx_range: SizeRange,
    /// Planted contexts form runs, and the tensor's context axis is marked
    /// temporal.
    pub contiguous: bool,
    pub seed: u64,
}

impl Default for GenSpec {
    /// 1000 x 50 x 50, five plantings of 50-500 observations, 2-4 variables
    /// and 2-4 contiguous contexts over a uniform 5-category background.
    fn default() -> Self {
        Self {
            n_obs: 1000,
            n_vars: 50,
            n_ctx: 50,
            background: Background::Uniform,
            cardinality: 5,
            n_planted: 5,
            obs_range: SizeRange(50, 500),
            var_range: SizeRange(2, 4),
            ctx_range: SizeRange(2, 4),
            contiguous: true,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_obs == 0 || self.n_vars == 0 || self.n_ctx == 0 {
            return bad("tensor dimensions must be positive".into());
        }
        if self.cardinality < 2 || self.cardinality > Category::MAX as usize {
            return bad(format!("cardinality must be in 2..{}", Category::MAX));
        }
        let ranges = if self.n_planted == 0 {
            &[][..]
        } else {
            &[
                ("obs_range", self.obs_range, self.n_obs),
                ("var_range", self.var_range, self.n_vars),
                ("ctx_range", self.ctx_range, self.n_ctx),
            ][..]
        };
        for &(name, r, n) in ranges {
            if r.0 == 0 || r.0 > r.1 || r.1 > n {
                return bad(format!(
                    "{name} [{}, {}] must satisfy 1 <= lo <= hi <= {n}",
                    r.0, r.1
                ));
            }
        }
        if let Background::Gaussian { mu, sigma } = self.background {
            if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
                return bad(format!(
                    "gaussian background needs finite mu and sigma > 0, got ({mu}, {sigma})"
                ));
            }
        }
        Ok(())
    }
}

/// One planted tricluster with its pattern rendered as category labels,
/// one row per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTricluster {
    #[serde(flatten)]
    pub tricluster: TriclusterRecord,
    pub pattern: Vec<Vec<String>>,
}

/// Ground truth for a generated tensor. Readable as tricluster JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantingManifest {
    pub spec: GenSpec,
    pub triclusters: Vec<PlantedTricluster>,
}

impl PlantingManifest {
    pub fn write<W: Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer_pretty(sink, self)?;
        Ok(())
    }

    pub fn triclusters(&self) -> Result<Vec<Tricluster>> {
        self.triclusters
            .iter()
            .map(|p| {
                let r = &p.tricluster;
                Tricluster::new(r.obs.clone(), r.vars.clone(), r.ctxs.clone(), r.contiguous)
            })
            .collect()
    }
}

/// A generated tensor, its ground truth and the planted patterns.
#[derive(Debug, Clone)]
pub struct Generated {
    pub tensor: Tensor3,
    pub planted: Vec<(Tricluster, Pattern)>,
    pub manifest: PlantingManifest,
}

fn background_sampler(spec: &GenSpec) -> Result<Box<dyn Fn(&mut ChaCha8Rng) -> Category>> {
    let card = spec.cardinality;
    Ok(match spec.background {
        Background::Uniform => {
            Box::new(move |rng: &mut ChaCha8Rng| rng.random_range(0..card) as Category)
        }
        Background::Gaussian { mu, sigma } => {
            let normal =
                Normal::new(mu, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let lo = mu - 3.0 * sigma;
            let width = 6.0 * sigma / card as f64;
            Box::new(move |rng: &mut ChaCha8Rng| {
                let x = normal.sample(rng);
                ((x - lo) / width).floor().clamp(0.0, (card - 1) as f64) as Category
            })
        }
    })
}

fn sorted_sample(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Generates a tensor and its planting manifest. Identical specs, seed
/// included, give identical output.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let (n, m, p) = (spec.n_obs, spec.n_vars, spec.n_ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw = background_sampler(spec)?;
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * p + k;

    let mut cells: Vec<Category> = Vec::with_capacity(n * m * p);
    for _ in 0..n * m * p {
        cells.push(draw(&mut rng));
    }

    // category already planted at each cell, if any
    let mut planted_at: Vec<Option<Category>> = vec![None; n * m * p];
    let mut planted = Vec::with_capacity(spec.n_planted);
    for t in 0..spec.n_planted {
        let mut attempts = 0;
        let (tc, pattern) = loop {
            attempts += 1;
            let n_i = rng.random_range(spec.obs_range.range());
            let n_j = rng.random_range(spec.var_range.range());
            let n_k = rng.random_range(spec.ctx_range.range());
            let obs = sorted_sample(&mut rng, n, n_i);
            let vars = sorted_sample(&mut rng, m, n_j);
            let ctxs = if spec.contiguous {
                let start = rng.random_range(0..=p - n_k);
                (start..start + n_k).collect()
            } else {
                sorted_sample(&mut rng, p, n_k)
            };
            let rows: Vec<Vec<Category>> = (0..n_j)
                .map(|_| {
                    (0..n_k)
                        .map(|_| rng.random_range(0..spec.cardinality) as Category)
                        .collect()
                })
                .collect();
            let conflict = vars.iter().zip(&rows).any(|(&j, row)| {
                ctxs.iter().zip(row).any(|(&k, &c)| {
                    obs.iter()
                        .any(|&i| planted_at[idx(i, j, k)].is_some_and(|prev| prev != c))
                })
            });
            if !conflict {
                let tc = Tricluster::new(obs, vars.clone(), ctxs.clone(), spec.contiguous)?;
                break (tc, Pattern::new(vars, ctxs, rows)?);
            }
            if attempts == MAX_PLANTING_ATTEMPTS {
                return Err(Error::PlantingConflict {
                    attempts,
                    detail: format!(
                        "planting {t} of {} kept contradicting earlier plantings",
                        spec.n_planted
                    ),
                });
            }
        };
        for (jp, &j) in tc.vars.iter().enumerate() {
            for (kp, &k) in tc.ctxs.iter().enumerate() {
                let c = pattern.at(jp, kp);
                for &i in &tc.obs {
                    cells[idx(i, j, k)] = c;
                    planted_at[idx(i, j, k)] = Some(c);
                }
            }
        }
        planted.push((tc, pattern));
    }

    let domain = VariableDomain::ordinal_indexed(spec.cardinality);
    let mut b = TensorBuilder::with_shape(n, m, p, vec![domain.clone(); m], spec.contiguous)?;
    for i in 0..n {
        for j in 0..m {
            for k in 0..p {
                b.set(i, j, k, Value::Cat(cells[idx(i, j, k)]))?;
            }
        }
    }
    let tensor = b.build();
    let labels = domain.categories();
    let manifest = PlantingManifest {
        spec: spec.clone(),
        triclusters: planted
            .iter()
            .map(|(tc, pat)| PlantedTricluster {
                tricluster: TriclusterRecord::from(tc),
                pattern: pat
                    .rows()
                    .map(|row| row.iter().map(|&c| labels[c as usize].clone()).collect())
                    .collect(),
            })
            .collect(),
    };
    Ok(Generated {
        tensor,
        planted,
        manifest,
    })
}
