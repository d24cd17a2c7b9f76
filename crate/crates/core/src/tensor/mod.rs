//! Three-way tensor data model.
//!
//! A [`Tensor3`] relates observations (axis X), variables (axis Y) and
//! contexts (axis Z). Each variable carries its own domain: either ordinal
//! with an ordered list of category labels, or real-valued. Cells may be
//! missing. Storage is column-major per variable, indexed by `i * n_ctx + k`.

mod io;
mod pattern;
mod preprocess;
mod triclusters;

pub use io::{
    read_tensor, read_tensor_csv, read_tensor_json, write_tensor, write_tensor_csv,
    write_tensor_json, TensorFormat,
};
pub use pattern::{extract_pattern, Pattern, Tricluster};
pub use preprocess::{discretize, paa, BinStrategy, Discretized, PaaOutput};
pub use triclusters::{read_triclusters, write_triclusters, TriclusterRecord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a category within an ordinal domain.
pub type Category = u16;

const MISSING_CAT: Category = Category::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VariableDomain {
    Ordinal {
        categories: Vec<String>,
        /// Bin edges when the variable was produced by discretization.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<f64>>,
    },
    Real,
}

impl VariableDomain {
    pub fn ordinal<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        VariableDomain::Ordinal {
            categories: labels.into_iter().map(Into::into).collect(),
            edges: None,
        }
    }

    /// Ordinal domain labelled `"0"`, `"1"`, ... `"n-1"`.
    pub fn ordinal_indexed(cardinality: usize) -> Self {
        Self::ordinal((0..cardinality).map(|c| c.to_string()))
    }

    pub fn is_ordinal(&self) -> bool {
        matches!(self, VariableDomain::Ordinal { .. })
    }

    /// Number of categories; `None` for real-valued variables.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            VariableDomain::Ordinal { categories, .. } => Some(categories.len()),
            VariableDomain::Real => None,
        }
    }

    /// An ordinal variable with a single category carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.cardinality() == Some(1)
    }

    pub fn categories(&self) -> &[String] {
        match self {
            VariableDomain::Ordinal { categories, .. } => categories,
            VariableDomain::Real => &[],
        }
    }

    pub fn category_index(&self, label: &str) -> Option<Category> {
        self.categories()
            .iter()
            .position(|c| c == label)
            .map(|p| p as Category)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if let VariableDomain::Ordinal { categories, .. } = self {
            if categories.is_empty() {
                return Err(Error::InvalidTensor(format!(
                    "ordinal variable `{name}` has no categories"
                )));
            }
            if categories.len() >= MISSING_CAT as usize {
                return Err(Error::InvalidTensor(format!(
                    "variable `{name}` has too many categories"
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for c in categories {
                if !seen.insert(c.as_str()) {
                    return Err(Error::InvalidTensor(format!(
                        "variable `{name}` repeats category `{c}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A single non-missing cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Cat(Category),
    Real(f64),
}

#[derive(Debug, Clone)]
enum Column {
    Ordinal(Vec<Category>),
    Real(Vec<f64>),
}

// Missing reals are NaN; two missing cells are equal.
impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Column::Ordinal(a), Column::Ordinal(b)) => a == b,
            (Column::Real(a), Column::Real(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
            }
            _ => false,
        }
    }
}

/// Immutable three-way dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    obs: Vec<String>,
    vars: Vec<String>,
    ctxs: Vec<String>,
    temporal: bool,
    domains: Vec<VariableDomain>,
    columns: Vec<Column>,
}

impl Tensor3 {
    pub fn n_obs(&self) -> usize {
        self.obs.len()
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_ctx(&self) -> usize {
        self.ctxs.len()
    }

    pub fn is_temporal(&self) -> bool {
        self.temporal
    }

    pub fn obs_labels(&self) -> &[String] {
        &self.obs
    }

    pub fn var_labels(&self) -> &[String] {
        &self.vars
    }

    pub fn ctx_labels(&self) -> &[String] {
        &self.ctxs
    }

    pub fn domains(&self) -> &[VariableDomain] {
        &self.domains
    }

    pub fn domain(&self, j: usize) -> &VariableDomain {
        &self.domains[j]
    }

    #[inline]
    fn offset(&self, i: usize, k: usize) -> usize {
        i * self.ctxs.len() + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Option<Value> {
        let at = self.offset(i, k);
        match &self.columns[j] {
            Column::Ordinal(v) => (v[at] != MISSING_CAT).then(|| Value::Cat(v[at])),
            Column::Real(v) => (!v[at].is_nan()).then(|| Value::Real(v[at])),
        }
    }

    /// Category at `(i, j, k)`; `None` when missing or when `j` is real-valued.
    #[inline]
    pub fn cat(&self, i: usize, j: usize, k: usize) -> Option<Category> {
        match &self.columns[j] {
            Column::Ordinal(v) => {
                let c = v[self.offset(i, k)];
                (c != MISSING_CAT).then_some(c)
            }
            Column::Real(_) => None,
        }
    }

    /// Real value at `(i, j, k)`; `None` when missing or when `j` is ordinal.
    pub fn real(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        match &self.columns[j] {
            Column::Real(v) => {
                let x = v[self.offset(i, k)];
                (!x.is_nan()).then_some(x)
            }
            Column::Ordinal(_) => None,
        }
    }

    /// Raw ordinal column of variable `j` as `Option`s in `(i, k)` order.
    pub fn ordinal_values(&self, j: usize) -> Result<impl Iterator<Item = Option<Category>> + '_> {
        match &self.columns[j] {
            Column::Ordinal(v) => Ok(v.iter().map(|&c| (c != MISSING_CAT).then_some(c))),
            Column::Real(_) => Err(Error::NotOrdinal(j)),
        }
    }

    /// Non-missing real values of variable `j`, pooled over observations and contexts.
    pub fn real_values(&self, j: usize) -> Result<Vec<f64>> {
        match &self.columns[j] {
            Column::Real(v) => Ok(v.iter().copied().filter(|x| !x.is_nan()).collect()),
            Column::Ordinal(_) => Err(Error::NotReal(j)),
        }
    }

    pub fn is_fully_ordinal(&self) -> bool {
        self.domains.iter().all(VariableDomain::is_ordinal)
    }

    /// Number of non-missing cells.
    pub fn count_present(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Ordinal(v) => v.iter().filter(|&&x| x != MISSING_CAT).count(),
                Column::Real(v) => v.iter().filter(|x| !x.is_nan()).count(),
            })
            .sum()
    }

    /// Renders a cell as text: category label or shortest round-trip float.
    pub fn format_value(&self, j: usize, value: Value) -> String {
        match value {
            Value::Cat(c) => self.domains[j].categories()[c as usize].clone(),
            Value::Real(x) => format!("{x:?}"),
        }
    }
}

/// Incremental construction of a [`Tensor3`]; every cell starts missing.
#[derive(Debug, Clone)]
pub struct TensorBuilder {
    tensor: Tensor3,
}

impl TensorBuilder {
    pub fn new(
        obs: Vec<String>,
        vars: Vec<String>,
        ctxs: Vec<String>,
        domains: Vec<VariableDomain>,
        temporal: bool,
    ) -> Result<Self> {
        if obs.is_empty() || vars.is_empty() || ctxs.is_empty() {
            return Err(Error::InvalidTensor(
                "every axis needs at least one entry".into(),
            ));
        }
        if domains.len() != vars.len() {
            return Err(Error::InvalidTensor(format!(
                "{} domains for {} variables",
                domains.len(),
                vars.len()
            )));
        }
        for (name, axis) in [
            ("observation", &obs),
            ("variable", &vars),
            ("context", &ctxs),
        ] {
            let mut seen = std::collections::HashSet::new();
            for label in axis.iter() {
                if !seen.insert(label.as_str()) {
                    return Err(Error::InvalidTensor(format!(
                        "duplicate {name} label `{label}`"
                    )));
                }
            }
        }
        for (d, name) in domains.iter().zip(&vars) {
            d.validate(name)?;
        }
        let len = obs.len() * ctxs.len();
        let columns = domains
            .iter()
            .map(|d| match d {
                VariableDomain::Ordinal { .. } => Column::Ordinal(vec![MISSING_CAT; len]),
                VariableDomain::Real => Column::Real(vec![f64::NAN; len]),
            })
            .collect();
        Ok(Self {
            tensor: Tensor3 {
                obs,
                vars,
                ctxs,
                temporal,
                domains,
                columns,
            },
        })
    }

    /// Builder with labels `x0..`, `y0..`, `z0..`.
    pub fn with_shape(
        n_obs: usize,
        n_vars: usize,
        n_ctx: usize,
        domains: Vec<VariableDomain>,
        temporal: bool,
    ) -> Result<Self> {
        let labels = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        Self::new(
            labels("x", n_obs),
            labels("y", n_vars),
            labels("z", n_ctx),
            domains,
            temporal,
        )
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.tensor
    }

    fn check_bounds(&self, i: usize, j: usize, k: usize) -> Result<()> {
        let t = &self.tensor;
        if i >= t.n_obs() || j >= t.n_vars() || k >= t.n_ctx() {
            return Err(Error::InvalidArgument(format!(
                "cell ({i}, {j}, {k}) outside tensor of shape {}x{}x{}",
                t.n_obs(),
                t.n_vars(),
                t.n_ctx()
            )));
        }
        Ok(())
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Value) -> Result<()> {
        self.check_bounds(i, j, k)?;
        let at = self.tensor.offset(i, k);
        let var = &self.tensor.vars[j];
        match (&mut self.tensor.columns[j], value) {
            (Column::Ordinal(col), Value::Cat(c)) => {
                let card = self.tensor.domains[j].cardinality().unwrap_or(0);
                if (c as usize) >= card {
                    return Err(Error::DomainMismatch {
                        var: var.clone(),
                        value: c.to_string(),
                    });
                }
                col[at] = c;
            }
            (Column::Real(col), Value::Real(x)) => {
                if !x.is_finite() {
                    return Err(Error::DomainMismatch {
                        var: var.clone(),
                        value: x.to_string(),
                    });
                }
                col[at] = x;
            }
            (_, v) => {
                return Err(Error::DomainMismatch {
                    var: var.clone(),
                    value: format!("{v:?}"),
                })
            }
        }
        Ok(())
    }

    /// Sets an ordinal cell by category label.
    pub fn set_label(&mut self, i: usize, j: usize, k: usize, label: &str) -> Result<()> {
        let c = self.tensor.domains[j]
            .category_index(label)
            .ok_or_else(|| Error::DomainMismatch {
                var: self.tensor.vars[j].clone(),
                value: label.to_string(),
            })?;
        self.set(i, j, k, Value::Cat(c))
    }

    pub fn clear(&mut self, i: usize, j: usize, k: usize) -> Result<()> {
        self.check_bounds(i, j, k)?;
        let at = self.tensor.offset(i, k);
        match &mut self.tensor.columns[j] {
            Column::Ordinal(col) => col[at] = MISSING_CAT,
            Column::Real(col) => col[at] = f64::NAN,
        }
        Ok(())
    }

    pub fn build(self) -> Tensor3 {
        self.tensor
    }
}

impl Tensor3 {
    /// Ordinal tensor from a dense `[i][j][k]` array of category indices.
    pub fn from_categories(
        cells: &[Vec<Vec<Option<Category>>>],
        cardinalities: &[usize],
        temporal: bool,
    ) -> Result<Self> {
        let n_obs = cells.len();
        let n_vars = cardinalities.len();
        let n_ctx = cells.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let domains = cardinalities
            .iter()
            .map(|&c| VariableDomain::ordinal_indexed(c))
            .collect();
        let mut b = TensorBuilder::with_shape(n_obs, n_vars, n_ctx, domains, temporal)?;
        for (i, row) in cells.iter().enumerate() {
            if row.len() != n_vars {
                return Err(Error::InvalidTensor(format!(
                    "observation {i} has {} variables",
                    row.len()
                )));
            }
            for (j, series) in row.iter().enumerate() {
                if series.len() != n_ctx {
                    return Err(Error::InvalidTensor(format!(
                        "cell ({i}, {j}) has {} contexts",
                        series.len()
                    )));
                }
                for (k, c) in series.iter().enumerate() {
                    if let Some(c) = c {
                        b.set(i, j, k, Value::Cat(*c))?;
                    }
                }
            }
        }
        Ok(b.build())
    }

    pub(crate) fn with_columns_replaced(
        &self,
        ctxs: Vec<String>,
        domains: Vec<VariableDomain>,
        builder: impl FnOnce(&mut TensorBuilder) -> Result<()>,
    ) -> Result<Tensor3> {
        let mut b = TensorBuilder::new(
            self.obs.clone(),
            self.vars.clone(),
            ctxs,
            domains,
            self.temporal,
        )?;
        builder(&mut b)?;
        Ok(b.build())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_empty_axis() {
        let err = TensorBuilder::with_shape(0, 1, 1, vec![VariableDomain::Real], false);
        assert!(matches!(err, Err(Error::InvalidTensor(_))));
    }

    #[test]
    fn out_of_domain_category_is_rejected() {
        let mut b =
            TensorBuilder::with_shape(1, 1, 1, vec![VariableDomain::ordinal(["a", "b"])], false)
                .unwrap();
        assert!(matches!(
            b.set(0, 0, 0, Value::Cat(2)),
            Err(Error::DomainMismatch { .. })
        ));
        assert!(matches!(
            b.set_label(0, 0, 0, "c"),
            Err(Error::DomainMismatch { .. })
        ));
        b.set_label(0, 0, 0, "b").unwrap();
        assert_eq!(b.build().cat(0, 0, 0), Some(1));
    }

    #[test]
    fn cells_start_missing() {
        let t = TensorBuilder::with_shape(
            2,
            2,
            3,
            vec![VariableDomain::Real, VariableDomain::ordinal_indexed(3)],
            true,
        )
        .unwrap()
        .build();
        assert_eq!(t.get(1, 0, 2), None);
        assert_eq!(t.get(1, 1, 2), None);
        assert_eq!(t.count_present(), 0);
    }

    #[test]
    fn duplicate_categories_rejected() {
        let err =
            TensorBuilder::with_shape(1, 1, 1, vec![VariableDomain::ordinal(["a", "a"])], false);
        assert!(err.is_err());
    }
}
