//! Experiment configuration: a TOML document with sections `[system]`,
//! `[group]`, `[labels]`, `[potential]`, `[roof]`, `[observable]`,
//! `[params]` and `[output]`. See `docs/config.md` for the grammar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{CountMethod, SkewSystem};
use crate::groups::{Element, Group, Letter};
use crate::sft::Sft;
use crate::thermo::EdgePotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Entropy,
    Pressure,
    Gurevich,
    AbelianMin,
    AmenabilityGap,
    FlowCount,
    Equidistribution,
    Ld,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Entropy => "entropy",
            ExperimentKind::Pressure => "pressure",
            ExperimentKind::Gurevich => "gurevich",
            ExperimentKind::AbelianMin => "abelian-min",
            ExperimentKind::AmenabilityGap => "amenability-gap",
            ExperimentKind::FlowCount => "flow-count",
            ExperimentKind::Equidistribution => "equidistribution",
            ExperimentKind::Ld => "ld",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub alphabet: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKindSpec {
    #[default]
    Trivial,
    Lattice,
    Free,
    Heisenberg,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub kind: GroupKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<usize>,
    /// Finite groups: table indices of the distinguished generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_elements: Option<Vec<usize>>,
    /// Infinite groups: alternative generators as words in the standard
    /// basis (used for balls only; label words stay in the standard basis).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeWord {
    pub i: usize,
    pub j: usize,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    /// `ψ(i, j) = by_source[i]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_source: Option<Vec<String>>,
    /// `ψ(i, j) = by_target[j]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_target: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeWord>>,
    /// Word for allowed transitions not listed in `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub default: f64,
    /// `f(i, j) = by_source[i]`; overrides `default`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_source: Option<Vec<f64>>,
    /// Per-transition values; override everything else.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<EdgeValue>,
}

fn default_n_max() -> usize {
    40
}
fn default_t_max() -> usize {
    40
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_verdict_tolerance() -> f64 {
    0.05
}
fn default_ball_cap() -> usize {
    crate::groups::DEFAULT_BALL_CAP
}
fn default_depth() -> usize {
    8
}
fn default_delta() -> f64 {
    0.05
}
fn default_max_depth() -> usize {
    256
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    #[default]
    Auto,
    BallDp,
    Radial,
}

impl From<MethodSpec> for CountMethod {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Auto => CountMethod::Auto,
            MethodSpec::BallDp => CountMethod::BallDp,
            MethodSpec::Radial => CountMethod::Radial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_verdict_tolerance")]
    pub verdict_tolerance: f64,
    #[serde(default = "default_ball_cap")]
    pub ball_cap: usize,
    /// Ball radius for the transitivity search on non-abelian groups.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Largest loop length for flow-orbit counting.
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub method: MethodSpec,
    /// Truncation radii for transfer-operator bounds.
    #[serde(default)]
    pub radii: Vec<usize>,
    /// Loop lengths for equidistribution and ld experiments.
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_max: default_n_max(),
            t_max: default_t_max(),
            tolerance: default_tolerance(),
            verdict_tolerance: default_verdict_tolerance(),
            ball_cap: default_ball_cap(),
            depth: default_depth(),
            max_depth: default_max_depth(),
            method: MethodSpec::Auto,
            radii: Vec::new(),
            ns: Vec::new(),
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn default_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    pub system: SystemSpec,
    #[serde(default)]
    pub group: GroupSpec,
    #[serde(default)]
    pub labels: LabelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<PotentialSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Built {
    pub sft: Sft,
    pub skew: SkewSystem,
    pub potential: Option<EdgePotential>,
    pub roof: Option<EdgePotential>,
    pub observable: Option<EdgePotential>,
}

fn invalid(section: &str, e: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{section}: {e}"))
}

impl SystemSpec {
    pub fn build(&self) -> Result<Sft> {
        let given = self.full as u8 + self.edges.is_some() as u8 + self.matrix.is_some() as u8;
        if given != 1 {
            return Err(invalid(
                "system",
                "exactly one of `full`, `edges`, `matrix` is required",
            ));
        }
        let sft = if self.full {
            Sft::full(self.alphabet)
        } else if let Some(edges) = &self.edges {
            let e: Vec<(usize, usize)> = edges.iter().map(|p| (p[0], p[1])).collect();
            Sft::from_edges(self.alphabet, &e)
        } else {
            let m = self.matrix.as_ref().expect("checked above");
            if m.len() != self.alphabet {
                return Err(invalid(
                    "system",
                    format!("matrix has {} rows, alphabet is {}", m.len(), self.alphabet),
                ));
            }
            Sft::new(self.alphabet, m)
        };
        sft.map_err(|e| invalid("system", e))
    }
}

impl GroupSpec {
    /// Returns the group used for label words and the final group (with
    /// any alternative generators installed).
    fn build(&self) -> Result<(Group, Group)> {
        let need_rank = || {
            self.rank
                .ok_or_else(|| invalid("group", "`rank` is required for this kind"))
        };
        let base = match self.kind {
            GroupKindSpec::Trivial => Group::trivial(),
            GroupKindSpec::Lattice => Group::lattice(need_rank()?),
            GroupKindSpec::Free => Group::free(need_rank()?),
            GroupKindSpec::Heisenberg => Group::heisenberg(),
            GroupKindSpec::Finite => {
                let table = self
                    .table
                    .clone()
                    .ok_or_else(|| invalid("group", "`table` is required for finite groups"))?;
                let g = Group::finite(table, self.identity.unwrap_or(0)).map_err(|e| invalid("group", e))?;
                match &self.generator_elements {
                    Some(gens) => g
                        .with_generators(gens.iter().map(|&i| Element::Finite(i)).collect())
                        .map_err(|e| invalid("group.generator_elements", e))?,
                    None => g,
                }
            }
        };
        let full = match &self.generators {
            Some(words) => {
                if self.kind == GroupKindSpec::Finite {
                    return Err(invalid(
                        "group",
                        "finite groups take `generator_elements`, not `generators`",
                    ));
                }
                let gens = words
                    .iter()
                    .map(|w| base.evaluate_word(&Letter::parse_word(w)?))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| invalid("group.generators", e))?;
                base.clone()
                    .with_generators(gens)
                    .map_err(|e| invalid("group.generators", e))?
            }
            None => base.clone(),
        };
        Ok((base, full))
    }
}

impl PotentialSpec {
    pub fn build(&self, sft: &Sft, section: &str) -> Result<EdgePotential> {
        let mut p = match &self.by_source {
            Some(v) => EdgePotential::from_vertex(sft, v).map_err(|e| invalid(section, e))?,
            None => EdgePotential::constant(sft, self.default),
        };
        if !self.values.is_empty() {
            let triples: Vec<(usize, usize, f64)> = self.values.iter().map(|v| (v.i, v.j, v.value)).collect();
            for &(i, j, _) in &triples {
                if i >= sft.alphabet_size() || j >= sft.alphabet_size() || !sft.allows(i, j) {
                    return Err(invalid(section, format!("transition ({i}, {j}) is not allowed")));
                }
            }
            p = p.map(sft, |i, j, v| {
                triples.iter().rev().find(|t| t.0 == i && t.1 == j).map_or(v, |t| t.2)
            });
        }
        Ok(p)
    }
}

impl LabelSpec {
    fn build(&self, sft: &Sft, words: &Group, group: Group) -> Result<SkewSystem> {
        let k = sft.alphabet_size();
        let eval = |w: &str| -> Result<Element> {
            words
                .evaluate_word(&Letter::parse_word(w)?)
                .map_err(|e| invalid("labels", format!("word {w:?}: {e}")))
        };
        let modes = self.by_source.is_some() as u8 + self.by_target.is_some() as u8 + self.edges.is_some() as u8;
        if modes > 1 {
            return Err(invalid("labels", "use only one of `by_source`, `by_target`, `edges`"));
        }
        let per_symbol = |v: &Vec<String>, field: &str| -> Result<Vec<Element>> {
            if v.len() != k {
                return Err(invalid(
                    "labels",
                    format!("`{field}` has {} words for {k} symbols", v.len()),
                ));
            }
            v.iter().map(|w| eval(w)).collect()
        };
        let triples: Vec<(usize, usize, Element)> = if let Some(v) = &self.by_source {
            let per = per_symbol(v, "by_source")?;
            sft.edges().into_iter().map(|(i, j)| (i, j, per[i].clone())).collect()
        } else if let Some(v) = &self.by_target {
            let per = per_symbol(v, "by_target")?;
            sft.edges().into_iter().map(|(i, j)| (i, j, per[j].clone())).collect()
        } else {
            let listed = self.edges.clone().unwrap_or_default();
            let mut out = Vec::new();
            for e in &listed {
                if e.i >= k || e.j >= k {
                    return Err(invalid(
                        "labels",
                        format!("edge ({}, {}) is outside the alphabet", e.i, e.j),
                    ));
                }
                out.push((e.i, e.j, eval(&e.word)?));
            }
            let fill = match (&self.default, self.edges.is_none()) {
                (Some(w), _) => Some(eval(w)?),
                (None, true) => Some(words.identity()),
                (None, false) => None,
            };
            if let Some(g) = fill {
                for (i, j) in sft.edges() {
                    if !listed.iter().any(|e| e.i == i && e.j == j) {
                        out.push((i, j, g.clone()));
                    }
                }
            }
            out
        };
        SkewSystem::new(sft.clone(), group, triples).map_err(|e| invalid("labels", e))
    }
}

impl ExperimentConfig {
    /// Builds every object the experiment needs, checking all cross
    /// references.
    pub fn build(&self) -> Result<Built> {
        let sft = self.system.build()?;
        let (words, group) = self.group.build()?;
        let skew = self.labels.build(&sft, &words, group)?;
        let potential = self
            .potential
            .as_ref()
            .map(|p| p.build(&sft, "potential"))
            .transpose()?;
        let roof = self.roof.as_ref().map(|p| p.build(&sft, "roof")).transpose()?;
        let observable = self
            .observable
            .as_ref()
            .map(|p| p.build(&sft, "observable"))
            .transpose()?;
        let p = &self.params;
        if !(p.tolerance > 0.0) || !(p.verdict_tolerance >= 0.0) || !(p.delta > 0.0) {
            return Err(invalid("params", "tolerances and delta must be positive"));
        }
        match self.experiment {
            ExperimentKind::Gurevich | ExperimentKind::AmenabilityGap | ExperimentKind::AbelianMin if p.n_max < 3 => {
                return Err(invalid("params", "n_max must be at least 3"));
            }
            ExperimentKind::FlowCount if p.t_max < 3 => return Err(invalid("params", "t_max must be at least 3")),
            ExperimentKind::Equidistribution | ExperimentKind::Ld if p.ns.is_empty() => {
                return Err(invalid("params", "`ns` must list at least one loop length"));
            }
            ExperimentKind::Ld if observable.is_none() => {
                return Err(invalid("observable", "required for ld experiments"))
            }
            _ => {}
        }
        if let Some(r) = &roof {
            let min = r.min_on(&sft);
            if !(min > 0.0) {
                return Err(invalid("roof", format!("must be strictly positive (minimum {min})")));
            }
        }
        Ok(Built {
            sft,
            skew,
            potential,
            roof,
            observable,
        })
    }
}

/// Parses and validates a config, filling defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
    config.build()?;
    Ok(config)
}

/// Canonical TOML rendering; `parse_config(render(c)) == c`.
pub fn render(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("config types serialize to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_entropy_config() {
        let c =
            parse_config("name = \"full3\"\nexperiment = \"entropy\"\n[system]\nalphabet = 3\nfull = true\n").unwrap();
        assert_eq!(c.experiment, ExperimentKind::Entropy);
        assert_eq!(c.params.n_max, 40);
        assert_eq!(c.params.tolerance, 1e-9);
        assert_eq!(c.params.ball_cap, 100_000_000);
        assert_eq!(parse_config(&render(&c)).unwrap(), c);
    }

    #[test]
    fn forbidden_label_is_a_validation_error() {
        let text = r#"
name = "bad"
experiment = "gurevich"
[system]
alphabet = 2
matrix = [[1, 1], [1, 0]]
[group]
kind = "lattice"
rank = 1
[labels]
edges = [{ i = 0, j = 0, word = "a" }, { i = 0, j = 1, word = "a" }, { i = 1, j = 0, word = "A" }, { i = 1, j = 1, word = "a" }]
"#;
        match parse_config(text) {
            Err(Error::Validation(m)) => assert!(m.contains("(1, 1)"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        match parse_config("name = \nexperiment = \"entropy\"") {
            Err(Error::Parse(m)) => assert!(m.contains("line 1"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config("name = \"x\"\nexperiment = \"entropy\"\n[system]\nalphabet = 2\nfull = true\nbogus = 1\n"),
            Err(Error::Parse(_))
        ));
    }
}
