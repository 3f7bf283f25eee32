//! Ground truth for applicability questions and label-balanced benchmark items.
//!
//! A provision applies to a person who "is a T" exactly when T appears on the
//! right-hand side of a definition housed in that provision.

mod brute;

use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brute::{brute_force_applies, parse_rendered, ParsedDefinition, ParsedText};

use crate::prompt::PhrasingVariant;
use crate::rng::{self, choose, pick};
use crate::statute::{
    generate_tree, render_sentences, render_statute, Citation, DefTree, Definition, StatuteError, StatuteSpec,
    TermMode,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("term `{0}` does not occur in the statute")]
    UnknownTerm(String),
    #[error("`{0}` does not resolve to a provision of the statute")]
    Unresolvable(String),
    #[error("the root term has no derivation chain")]
    RootTerm,
    #[error("batch size {0} is odd; balanced batches need an even count")]
    OddCount(usize),
    #[error("cannot realise the requested label: {0}")]
    Infeasible(String),
    #[error("cannot parse rendered text: {0}")]
    Parse(String),
    #[error(transparent)]
    Statute(#[from] StatuteError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub name: String,
    pub gender: Gender,
}

/// The 30 first names (15 female, 15 male) used for facts.
pub static NAMES: LazyLock<Vec<Person>> = LazyLock::new(|| {
    serde_json::from_str(include_str!("../../assets/names.json")).expect("bundled name list is valid JSON")
});

/// "<Name> is a <term>."
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub person_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    pub fact_term: String,
}

impl Fact {
    pub fn new(person: &Person, fact_term: impl Into<String>) -> Self {
        Fact { person_name: person.name.clone(), gender: Some(person.gender), fact_term: fact_term.into() }
    }

    /// Looks the gender up in the bundled name list.
    pub fn named(name: &str, fact_term: impl Into<String>) -> Self {
        let gender = NAMES.iter().find(|p| p.name == name).map(|p| p.gender);
        Fact { person_name: name.to_string(), gender, fact_term: fact_term.into() }
    }
}

/// The provision or sentence a question asks about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Provision(Citation),
    Sentence(usize),
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Provision(c) => write!(f, "{c}"),
            Target::Sentence(k) => write!(f, "sentence {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supporting_definition: Option<Definition>,
}

/// Indices of the definitions housed in `target`.
pub fn resolve_target(tree: &DefTree, target: &Target) -> Result<Vec<usize>, OracleError> {
    match target {
        Target::Provision(c) if c.path.is_empty() && c.section_number == crate::statute::SECTION_NUMBER => {
            Ok((0..tree.definitions().len()).collect())
        }
        Target::Provision(c) => tree
            .find_provision(c)
            .map(|p| p.definition_indices())
            .ok_or_else(|| OracleError::Unresolvable(c.to_string())),
        Target::Sentence(k) => {
            if (1..=tree.definitions().len()).contains(k) {
                Ok(vec![k - 1])
            } else {
                Err(OracleError::Unresolvable(target.to_string()))
            }
        }
    }
}

/// Whether `target` applies to someone who is a `fact_term`.
pub fn applies(tree: &DefTree, target: &Target, fact_term: &str) -> Result<GroundTruth, OracleError> {
    if !tree.contains_term(fact_term) {
        return Err(OracleError::UnknownTerm(fact_term.to_string()));
    }
    let defs = tree.definitions();
    let supporting = resolve_target(tree, target)?
        .into_iter()
        .map(|i| &defs[i])
        .find(|d| d.rhs_terms.iter().any(|t| t == fact_term))
        .cloned();
    Ok(GroundTruth { applicable: supporting.is_some(), supporting_definition: supporting })
}

/// Definitions applied bottom-up to get from `term` to the root term.
pub fn derivation_chain(tree: &DefTree, term: &str) -> Result<Vec<Definition>, OracleError> {
    if !tree.contains_term(term) {
        return Err(OracleError::UnknownTerm(term.to_string()));
    }
    if term == tree.root_term() {
        return Err(OracleError::RootTerm);
    }
    let mut chain = Vec::new();
    let mut current = term;
    while let Some(parent) = tree.parent_of(current) {
        chain.push(tree.definition_of(parent).expect("every parent is defined").clone());
        current = parent;
    }
    Ok(chain)
}

/// The provision after `target` among its siblings, wrapping to the first;
/// for sentences, the next sentence number. The whole section maps to itself.
pub fn next_sibling(tree: &DefTree, target: &Target) -> Result<Target, OracleError> {
    match target {
        Target::Sentence(k) => {
            let n = tree.definitions().len();
            if !(1..=n).contains(k) {
                return Err(OracleError::Unresolvable(target.to_string()));
            }
            Ok(Target::Sentence(k % n + 1))
        }
        Target::Provision(c) => {
            let Some(parent) = c.parent() else {
                return Ok(target.clone());
            };
            let siblings: &[crate::statute::Provision] = if parent.path.is_empty() {
                tree.provisions()
            } else {
                match tree.find_provision(&parent).map(|p| &p.body) {
                    Some(crate::statute::ProvisionBody::Container(children)) => children,
                    _ => return Err(OracleError::Unresolvable(c.to_string())),
                }
            };
            let i = siblings
                .iter()
                .position(|p| &p.citation == c)
                .ok_or_else(|| OracleError::Unresolvable(c.to_string()))?;
            Ok(Target::Provision(siblings[(i + 1) % siblings.len()].citation.clone()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rendering {
    Statute,
    Sentence,
}

impl std::fmt::Display for Rendering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rendering::Statute => "statute",
            Rendering::Sentence => "sentence",
        })
    }
}

impl std::str::FromStr for Rendering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "statute" | "statutes" => Ok(Rendering::Statute),
            "sentence" | "sentences" => Ok(Rendering::Sentence),
            other => Err(format!("unknown rendering `{other}` (expected statute or sentence)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemMeta {
    pub width: usize,
    pub depth: usize,
    pub term_mode: TermMode,
    /// Seed that regenerates `tree` via [`crate::statute::generate_tree_seeded`].
    pub seed: u64,
    pub fact_term_is_leaf: bool,
    pub target_is_root_definition: bool,
}

/// One benchmark question with its ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestItem {
    pub id: usize,
    pub rendering: Rendering,
    pub text: String,
    pub fact: Fact,
    pub target_citation: Citation,
    pub target_sentence: usize,
    pub phrasing: PhrasingVariant,
    pub label: GroundTruth,
    pub meta: ItemMeta,
    pub tree: DefTree,
}

impl TestItem {
    /// Item asking whether the `definition_index`-th definition's provision
    /// applies under `fact`.
    pub fn new(
        id: usize,
        tree: DefTree,
        rendering: Rendering,
        fact: Fact,
        definition_index: usize,
    ) -> Result<Self, OracleError> {
        let def = tree
            .definitions()
            .get(definition_index)
            .ok_or_else(|| OracleError::Unresolvable(format!("definition #{definition_index}")))?
            .clone();
        let label = applies(&tree, &Target::Provision(def.citation.clone()), &fact.fact_term)?;
        let spec = *tree.spec();
        let meta = ItemMeta {
            width: spec.width,
            depth: spec.depth,
            term_mode: spec.term_mode,
            seed: spec.seed,
            fact_term_is_leaf: tree.node(&fact.fact_term).is_some_and(|n| n.is_leaf()),
            target_is_root_definition: def.definiendum == tree.root_term(),
        };
        let text = render(&tree, rendering);
        Ok(TestItem {
            id,
            rendering,
            text,
            fact,
            target_citation: def.citation,
            target_sentence: def.sentence_index,
            phrasing: PhrasingVariant::default(),
            label,
            meta,
            tree,
        })
    }

    pub fn target(&self) -> Target {
        match self.rendering {
            Rendering::Statute => Target::Provision(self.target_citation.clone()),
            Rendering::Sentence => Target::Sentence(self.target_sentence),
        }
    }

    /// Same question posed against the other rendering of the same tree.
    pub fn with_rendering(&self, rendering: Rendering) -> TestItem {
        if rendering == self.rendering {
            return self.clone();
        }
        TestItem { rendering, text: render(&self.tree, rendering), ..self.clone() }
    }

    pub fn with_phrasing(mut self, phrasing: PhrasingVariant) -> TestItem {
        self.phrasing = phrasing;
        self
    }
}

pub fn render(tree: &DefTree, rendering: Rendering) -> String {
    match rendering {
        Rendering::Statute => render_statute(tree).text,
        Rendering::Sentence => render_sentences(tree).text,
    }
}

/// `n` items for `spec`, exactly half of them applicable.
///
/// Item `i` draws everything from its own stream of `spec.seed`, so any item
/// can be regenerated on its own. Each item gets a fresh tree.
pub fn sample_batch(spec: &StatuteSpec, n: usize, rendering: Rendering) -> Result<Vec<TestItem>, OracleError> {
    spec.validate()?;
    if !n.is_multiple_of(2) {
        return Err(OracleError::OddCount(n));
    }
    let mut labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    rng::shuffle(&mut rng::stream(spec.seed, 0), &mut labels);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, want)| sample_item(spec, i, want, rendering, &mut rng::stream(spec.seed, i as u64 + 1)))
        .collect()
}

fn sample_item<R: Rng + ?Sized>(
    spec: &StatuteSpec,
    id: usize,
    applicable: bool,
    rendering: Rendering,
    rng: &mut R,
) -> Result<TestItem, OracleError> {
    let tree_seed: u64 = rng.gen();
    let tree = generate_tree(&spec.with_seed(tree_seed), &mut rng::seeded(tree_seed))?;
    let def_index = pick(rng, tree.definitions().len());
    let def = &tree.definitions()[def_index];
    let candidates: Vec<&str> = tree
        .non_root_terms()
        .into_iter()
        .filter(|t| def.rhs_terms.iter().any(|r| r == t) == applicable)
        .collect();
    let term = *choose(rng, &candidates).ok_or_else(|| {
        OracleError::Infeasible(format!("no {} term for {}", if applicable { "positive" } else { "negative" }, def.citation))
    })?;
    let person = choose(rng, &NAMES).expect("name list is not empty");
    let fact = Fact::new(person, term);
    let item = TestItem::new(id, tree.clone(), rendering, fact, def_index)?;
    debug_assert_eq!(item.label.applicable, applicable);
    Ok(item)
}
