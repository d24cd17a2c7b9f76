use serde::{Deserialize, Serialize};

use super::{Category, Tensor3};
use crate::error::{Error, Result};

/// Subspace `(I, J, K)` of a tensor. Index sets are kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tricluster {
    pub obs: Vec<usize>,
    pub vars: Vec<usize>,
    pub ctxs: Vec<usize>,
    pub contiguous: bool,
}

impl Tricluster {
    /// Sorts the index sets and checks for duplicates, emptiness and
    /// (when `contiguous`) that the contexts form a run.
    pub fn new(
        mut obs: Vec<usize>,
        mut vars: Vec<usize>,
        mut ctxs: Vec<usize>,
        contiguous: bool,
    ) -> Result<Self> {
        for (name, set) in [("I", &mut obs), ("J", &mut vars), ("K", &mut ctxs)] {
            if set.is_empty() {
                return Err(Error::InvalidTricluster(format!("{name} is empty")));
            }
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTricluster(format!(
                    "{name} has duplicate indices"
                )));
            }
        }
        if contiguous && ctxs.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidTricluster(
                "contexts are flagged contiguous but do not form a run".into(),
            ));
        }
        Ok(Self {
            obs,
            vars,
            ctxs,
            contiguous,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.obs.len(), self.vars.len(), self.ctxs.len())
    }

    pub fn check_bounds(&self, t: &Tensor3) -> Result<()> {
        let out = |name: &str, set: &[usize], n: usize| {
            set.last()
                .filter(|&&m| m >= n)
                .map(|m| Error::InvalidTricluster(format!("{name} index {m} out of bounds ({n})")))
        };
        if let Some(e) = out("I", &self.obs, t.n_obs())
            .or_else(|| out("J", &self.vars, t.n_vars()))
            .or_else(|| out("K", &self.ctxs, t.n_ctx()))
        {
            return Err(e);
        }
        Ok(())
    }

    /// Whether the two triclusters share at least one cell.
    pub fn overlaps(&self, other: &Tricluster) -> bool {
        fn intersects(a: &[usize], b: &[usize]) -> bool {
            let (mut x, mut y) = (0, 0);
            while x < a.len() && y < b.len() {
                match a[x].cmp(&b[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => return true,
                }
            }
            false
        }
        intersects(&self.obs, &other.obs)
            && intersects(&self.vars, &other.vars)
            && intersects(&self.ctxs, &other.ctxs)
    }
}

/// Value expectations `c_jk` over `J x K`, stored variable-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub vars: Vec<usize>,
    pub ctxs: Vec<usize>,
    cells: Vec<Category>,
    /// `(j, k)` blocks whose values were not constant across `I`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_constant: Vec<(usize, usize)>,
}

impl Pattern {
    /// `cells` holds one row per variable, each with one entry per context.
    pub fn new(vars: Vec<usize>, ctxs: Vec<usize>, cells: Vec<Vec<Category>>) -> Result<Self> {
        if cells.len() != vars.len() || cells.iter().any(|r| r.len() != ctxs.len()) {
            return Err(Error::InvalidArgument(format!(
                "pattern must be {}x{}",
                vars.len(),
                ctxs.len()
            )));
        }
        Ok(Self {
            vars,
            ctxs,
            cells: cells.into_iter().flatten().collect(),
            non_constant: Vec::new(),
        })
    }

    /// Category at positions `(jp, kp)` within `J` and `K`.
    #[inline]
    pub fn at(&self, jp: usize, kp: usize) -> Category {
        self.cells[jp * self.ctxs.len() + kp]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Category]> {
        self.cells.chunks(self.ctxs.len())
    }

    /// Slice pattern at the `kp`-th context of `K`: `(j, c_jk)` for each `j`.
    pub fn slice(&self, kp: usize) -> Vec<(usize, Category)> {
        self.vars
            .iter()
            .enumerate()
            .map(|(jp, &j)| (j, self.at(jp, kp)))
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.non_constant.is_empty()
    }

    /// Whether observation `i` exhibits the pattern on every cell.
    pub fn matches(&self, t: &Tensor3, i: usize) -> bool {
        self.vars.iter().enumerate().all(|(jp, &j)| {
            self.ctxs
                .iter()
                .enumerate()
                .all(|(kp, &k)| t.cat(i, j, k) == Some(self.at(jp, kp)))
        })
    }

    /// Restriction to a subset of the pattern's variables, in order.
    pub fn restrict_vars(&self, keep: &[usize]) -> Pattern {
        let mut vars = Vec::new();
        let mut cells = Vec::new();
        for (jp, &j) in self.vars.iter().enumerate() {
            if keep.contains(&j) {
                vars.push(j);
                cells.extend((0..self.ctxs.len()).map(|kp| self.at(jp, kp)));
            }
        }
        Pattern {
            non_constant: self
                .non_constant
                .iter()
                .copied()
                .filter(|(j, _)| keep.contains(j))
                .collect(),
            vars,
            ctxs: self.ctxs.clone(),
            cells,
        }
    }
}

/// Modal category of each `(j, k)` block over `I`; ties go to the lowest
/// category. Blocks that are not constant are recorded in `non_constant`.
pub fn extract_pattern(t: &Tensor3, tc: &Tricluster) -> Result<Pattern> {
    tc.check_bounds(t)?;
    let mut cells = Vec::with_capacity(tc.vars.len() * tc.ctxs.len());
    let mut non_constant = Vec::new();
    for &j in &tc.vars {
        let card = t.domain(j).cardinality().ok_or(Error::NotOrdinal(j))?;
        let mut counts = vec![0usize; card];
        for &k in &tc.ctxs {
            counts.iter_mut().for_each(|c| *c = 0);
            for &i in &tc.obs {
                let c = t.cat(i, j, k).ok_or(Error::MissingData {
                    obs: i,
                    var: j,
                    ctx: k,
                })?;
                counts[c as usize] += 1;
            }
            // max_by_key returns the last maximum; scan in reverse to keep the lowest.
            let (mode, &n) = counts
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|(_, &n)| n)
                .expect("cardinality >= 1");
            if n != tc.obs.len() {
                non_constant.push((j, k));
            }
            cells.push(mode as Category);
        }
    }
    Ok(Pattern {
        vars: tc.vars.clone(),
        ctxs: tc.ctxs.clone(),
        cells,
        non_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{TensorBuilder, Value, VariableDomain};

    fn tensor(cells: &[[[u16; 2]; 2]]) -> Tensor3 {
        let mut b = TensorBuilder::with_shape(
            cells.len(),
            2,
            2,
            vec![VariableDomain::ordinal(["a", "b", "c"]); 2],
            false,
        )
        .unwrap();
        for (i, obs) in cells.iter().enumerate() {
            for (j, var) in obs.iter().enumerate() {
                for (k, &c) in var.iter().enumerate() {
                    b.set(i, j, k, Value::Cat(c)).unwrap();
                }
            }
        }
        b.build()
    }

    #[test]
    fn constant_tensor_gives_constant_pattern() {
        let t = tensor(&[[[0, 0], [0, 0]], [[0, 0], [0, 0]]]);
        let tc = Tricluster::new(vec![0, 1], vec![0, 1], vec![0, 1], false).unwrap();
        let p = extract_pattern(&t, &tc).unwrap();
        assert!(p.rows().all(|r| r.iter().all(|&c| c == 0)));
        assert!(p.is_constant());
    }

    #[test]
    fn majority_wins_and_block_is_flagged() {
        let t = tensor(&[[[0, 0], [0, 0]], [[0, 0], [0, 0]], [[1, 0], [0, 0]]]);
        let tc = Tricluster::new(vec![0, 1, 2], vec![0], vec![0], false).unwrap();
        let p = extract_pattern(&t, &tc).unwrap();
        assert_eq!(p.at(0, 0), 0);
        assert_eq!(p.non_constant, vec![(0, 0)]);
    }

    #[test]
    fn ties_break_to_lowest_category() {
        let t = tensor(&[[[2, 0], [0, 0]], [[1, 0], [0, 0]]]);
        let tc = Tricluster::new(vec![0, 1], vec![0], vec![0], false).unwrap();
        assert_eq!(extract_pattern(&t, &tc).unwrap().at(0, 0), 1);
    }

    #[test]
    fn missing_cell_is_an_error() {
        let mut b =
            TensorBuilder::with_shape(2, 1, 1, vec![VariableDomain::ordinal_indexed(2)], false)
                .unwrap();
        b.set(0, 0, 0, Value::Cat(1)).unwrap();
        let t = b.build();
        let tc = Tricluster::new(vec![0, 1], vec![0], vec![0], false).unwrap();
        assert!(matches!(
            extract_pattern(&t, &tc),
            Err(Error::MissingData {
                obs: 1,
                var: 0,
                ctx: 0
            })
        ));
    }

    #[test]
    fn tricluster_validation() {
        assert!(Tricluster::new(vec![], vec![0], vec![0], false).is_err());
        assert!(Tricluster::new(vec![1, 1], vec![0], vec![0], false).is_err());
        assert!(Tricluster::new(vec![0], vec![0], vec![1, 3], true).is_err());
        let tc = Tricluster::new(vec![3, 1], vec![0], vec![2, 1], true).unwrap();
        assert_eq!(tc.obs, vec![1, 3]);
        assert_eq!(tc.ctxs, vec![1, 2]);
    }

    #[test]
    fn overlap_requires_all_three_axes() {
        let a = Tricluster::new(vec![0, 1], vec![0], vec![0, 1], false).unwrap();
        let b = Tricluster::new(vec![1, 2], vec![0], vec![1], false).unwrap();
        let c = Tricluster::new(vec![1, 2], vec![1], vec![1], false).unwrap();
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
    }
}
