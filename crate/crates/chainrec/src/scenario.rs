//! Scenario files: one TOML document describing an operator, a truncation
//! window, a norm and the suites to run against them. Every report records
//! the SHA-256 of the scenario source, so results stay traceable to their
//! exact configuration.

use crate::classical::{ClassicalShift, ShiftKind, SpaceKind, WeightSeq};
use crate::error::{Error, Result};
use crate::norm::{Exhaustion, NormSpec};
use crate::operator::{
    build_grid_t, build_grid_t_inverse, shift_from_weights, LinearOp, WeightAssignment,
};
use crate::scalar::{rat_from_decimal, Mode, Rat, Scalar};
use crate::tree::{build_comb_tree, build_grid_tree, DirectedTree, TruncationParams, VertexId};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    /// "exact" (default) or "float".
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
    pub operator: OperatorSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub norm: NormSection,
    pub chains: Option<ChainsSection>,
    pub certify: Option<CertifySection>,
    pub classify: Option<ClassifySection>,
    /// SHA-256 of the source text, filled in by [`Scenario::from_str`].
    #[serde(skip)]
    pub sha256: String,
}

fn default_mode() -> String {
    "exact".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    /// "comb", "grid", "grid_inverse" or "classical".
    pub family: String,
    pub mu1: Option<String>,
    pub mu2: Option<String>,
    pub classical: Option<ClassicalSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    /// "unilateral" or "bilateral".
    pub kind: String,
    /// "banach" (default) or "product".
    #[serde(default = "default_space")]
    pub space: String,
    /// Constant weight away from `zeros`.
    pub lambda: String,
    /// Indices with λ_n = 0.
    #[serde(default)]
    pub zeros: Vec<i64>,
    /// When set, every weight above the largest explicit index.
    pub right_tail: Option<String>,
    /// When set, every weight below the smallest explicit index.
    pub left_tail: Option<String>,
}

fn default_space() -> String {
    "banach".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default = "default_n_min")]
    pub n_min: i64,
    #[serde(default = "default_n_max")]
    pub n_max: i64,
    #[serde(default)]
    pub k_max: u32,
    pub j_min: Option<i64>,
    pub j_max: Option<i64>,
}

fn default_n_min() -> i64 {
    -24
}

fn default_n_max() -> i64 {
    12
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection { n_min: default_n_min(), n_max: default_n_max(), k_max: 0, j_min: None, j_max: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    /// "lp" (with `p`), "sup" or "product" (with `levels`).
    #[serde(default = "default_norm_kind")]
    pub kind: String,
    pub p: Option<f64>,
    pub levels: Option<usize>,
    /// "breadth_first" (default) or "line_segments".
    pub exhaustion: Option<String>,
}

fn default_norm_kind() -> String {
    "lp".into()
}

impl Default for NormSection {
    fn default() -> Self {
        NormSection { kind: default_norm_kind(), p: Some(2.0), levels: None, exhaustion: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainsSection {
    /// Decimal or rational δ values; may be empty.
    #[serde(default)]
    pub deltas: Vec<String>,
    /// Basis vectors, e.g. "3" or "(-2,1)".
    #[serde(default)]
    pub targets: Vec<String>,
    /// "from_zero", "to_zero" or "return" (e_0 → 0 → e_0).
    #[serde(default = "default_direction")]
    pub direction: String,
}

fn default_direction() -> String {
    "from_zero".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    /// Certify every branch vector e_{(-k,j)} with k <= k_max.
    pub k_max: u32,
    /// Grid branches only: restrict j to this range (default 1..=k on the
    /// comb, j_min..=j_max of the window on the grid).
    pub j_min: Option<i64>,
    pub j_max: Option<i64>,
    /// Horizon for the oracle cross-check inf_m min_delta_reach.
    #[serde(default = "default_horizon")]
    pub oracle_horizon: u32,
    /// Random search at δ̄/2; 0 disables it.
    #[serde(default)]
    pub search_trials: u32,
    #[serde(default = "default_search_len")]
    pub search_max_len: u32,
    /// Line vertices whose membership chains are summarized.
    #[serde(default)]
    pub line_targets: Vec<i64>,
    /// δ used for the membership chains.
    pub membership_delta: Option<String>,
}

fn default_horizon() -> u32 {
    40
}

fn default_search_len() -> u32 {
    25
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    #[serde(default = "default_n0_min")]
    pub n0_min: i64,
    #[serde(default = "default_n0_max")]
    pub n0_max: i64,
    /// Partial sums of both criterion series are traced to this many terms.
    #[serde(default = "default_terms")]
    pub partial_sum_terms: u32,
}

fn default_n0_min() -> i64 {
    -5
}

fn default_n0_max() -> i64 {
    5
}

fn default_terms() -> u32 {
    30
}

/// Operator families a scenario can instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Comb,
    Grid,
    GridInverse,
    Classical,
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Scenario> {
        let mut s: Scenario =
            toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.sha256 = hex_digest(text);
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_str(&text)
    }

    fn check(&self) -> Result<()> {
        self.mode()?;
        self.family()?;
        Ok(())
    }

    pub fn mode(&self) -> Result<Mode> {
        match self.mode.as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Scenario(format!("mode must be exact or float, got {other:?}"))),
        }
    }

    pub fn family(&self) -> Result<Family> {
        match self.operator.family.as_str() {
            "comb" => Ok(Family::Comb),
            "grid" => Ok(Family::Grid),
            "grid_inverse" => Ok(Family::GridInverse),
            "classical" => Ok(Family::Classical),
            other => Err(Error::Scenario(format!(
                "operator.family must be comb, grid, grid_inverse or classical, got {other:?}"
            ))),
        }
    }

    fn mu(&self, field: &str, value: &Option<String>) -> Result<Scalar> {
        let text = value
            .as_ref()
            .ok_or_else(|| Error::Scenario(format!("operator.{field} is required for this family")))?;
        Scalar::parse(text, self.mode()?)
            .map_err(|e| Error::Scenario(format!("operator.{field}: {e}")))
    }

    pub fn weights(&self) -> Result<WeightAssignment> {
        WeightAssignment::comb(self.mu("mu1", &self.operator.mu1)?, self.mu("mu2", &self.operator.mu2)?)
    }

    pub fn window(&self) -> Result<TruncationParams> {
        let w = &self.window;
        Ok(match self.family()? {
            Family::Comb => TruncationParams::comb(w.n_min, w.n_max, w.k_max),
            Family::Grid | Family::GridInverse => TruncationParams::grid(
                w.n_min,
                w.n_max,
                w.k_max,
                w.j_min.unwrap_or(-(w.k_max as i64) - 2),
                w.j_max.unwrap_or(w.k_max as i64 + 2),
            ),
            Family::Classical => TruncationParams::line(w.n_min, w.n_max),
        })
    }

    pub fn build_tree(&self) -> Result<Arc<DirectedTree>> {
        let params = self.window()?;
        let tree = match self.family()? {
            Family::Comb => build_comb_tree(params)?,
            Family::Grid | Family::GridInverse => build_grid_tree(params)?,
            Family::Classical => {
                return Ok(self.classical()?.build_op(params.n_min, params.n_max)?.tree().clone())
            }
        };
        Ok(Arc::new(tree))
    }

    pub fn build_op(&self) -> Result<Arc<LinearOp>> {
        match self.family()? {
            Family::Classical => {
                let w = self.window()?;
                self.classical()?.build_op(w.n_min, w.n_max)
            }
            family => {
                let weights = self.weights()?;
                let tree = self.build_tree()?;
                let op = match family {
                    Family::Comb => shift_from_weights(&tree, &weights)?,
                    Family::Grid => build_grid_t(&tree, &weights)?,
                    Family::GridInverse => build_grid_t_inverse(&tree, &weights)?,
                    Family::Classical => unreachable!(),
                };
                Ok(Arc::new(op))
            }
        }
    }

    pub fn classical(&self) -> Result<ClassicalShift> {
        let section = self
            .operator
            .classical
            .as_ref()
            .ok_or_else(|| Error::Scenario("operator.classical section is required".into()))?;
        let kind = match section.kind.as_str() {
            "unilateral" => ShiftKind::Unilateral,
            "bilateral" => ShiftKind::Bilateral,
            other => {
                return Err(Error::Scenario(format!(
                    "classical.kind must be unilateral or bilateral, got {other:?}"
                )))
            }
        };
        let space = match section.space.as_str() {
            "banach" => SpaceKind::Banach,
            "product" => SpaceKind::Product,
            other => {
                return Err(Error::Scenario(format!(
                    "classical.space must be banach or product, got {other:?}"
                )))
            }
        };
        let mode = self.mode()?;
        let lambda = Scalar::parse(&section.lambda, mode)
            .map_err(|e| Error::Scenario(format!("classical.lambda: {e}")))?;
        let mut core = BTreeMap::new();
        for n in &section.zeros {
            core.insert(*n, Scalar::zero(mode));
        }
        let parse_tail = |field: &str, v: &Option<String>| -> Result<Scalar> {
            match v {
                None => Ok(lambda.clone()),
                Some(text) => Scalar::parse(text, mode)
                    .map_err(|e| Error::Scenario(format!("classical.{field}: {e}"))),
            }
        };
        let weights = WeightSeq::with_core(
            core,
            parse_tail("left_tail", &section.left_tail)?,
            parse_tail("right_tail", &section.right_tail)?,
        );
        Ok(ClassicalShift::new(kind, space, weights))
    }

    pub fn norm_spec(&self, tree: &DirectedTree) -> Result<NormSpec> {
        let n = &self.norm;
        match n.kind.as_str() {
            "lp" => Ok(NormSpec::Lp(n.p.unwrap_or(2.0))),
            "sup" => Ok(NormSpec::Sup),
            "product" => {
                let levels = n.levels.unwrap_or(8);
                let exh = match n.exhaustion.as_deref() {
                    None | Some("breadth_first") => Exhaustion::breadth_first(tree, levels)?,
                    Some("line_segments") => Exhaustion::by_line_segments(tree, levels)?,
                    Some(other) => {
                        return Err(Error::Scenario(format!(
                            "norm.exhaustion must be breadth_first or line_segments, got {other:?}"
                        )))
                    }
                };
                Ok(NormSpec::ProductSeminorms(Arc::new(exh)))
            }
            other => Err(Error::Scenario(format!(
                "norm.kind must be lp, sup or product, got {other:?}"
            ))),
        }
    }

    pub fn deltas(&self) -> Result<Vec<Rat>> {
        let Some(chains) = &self.chains else { return Ok(Vec::new()) };
        chains
            .deltas
            .iter()
            .map(|d| rat_from_decimal(d).map_err(|e| Error::Scenario(format!("chains.deltas: {e}"))))
            .collect()
    }

    pub fn chain_targets(&self) -> Result<Vec<VertexId>> {
        let Some(chains) = &self.chains else { return Ok(Vec::new()) };
        chains
            .targets
            .iter()
            .map(|t| VertexId::parse(t).map_err(|e| Error::Scenario(format!("chains.targets: {e}"))))
            .collect()
    }
}

pub fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
