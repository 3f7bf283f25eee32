//! Balanced definitional trees over invented terms, and their renderings as a
//! U.S.-Code-style statute and as numbered sentences.

mod citation;
mod render;
mod terms;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use citation::{format_citation, parse_citation, Citation, Level, SECTION_NUMBER};
pub use render::{list_of_terms, render_sentences, render_statute, RenderedSentences, RenderedStatute};
pub use terms::{
    capitalize, generate_terms, indefinite_article, is_english_word, is_id_term, TermMode, ID_SPACE, NONCE_MAX_LEN,
    NONCE_MIN_LEN,
};

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 4;
pub const MIN_DEPTH: usize = 2;
pub const MAX_DEPTH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatuteError {
    #[error("width {0} outside the supported range {MIN_WIDTH}..={MAX_WIDTH}")]
    InvalidWidth(usize),
    #[error("depth {0} outside the supported range {MIN_DEPTH}..={MAX_DEPTH}")]
    InvalidDepth(usize),
    #[error("cannot draw {requested} distinct id terms; only {available} exist")]
    TermSpaceExhausted { requested: usize, available: usize },
    #[error("malformed citation `{0}`")]
    MalformedCitation(String),
    #[error("tree is not balanced: {0}")]
    UnbalancedTree(String),
    #[error("term `{0}` occurs more than once")]
    DuplicateTerm(String),
    #[error("invalid term `{0}`: terms are non-empty lowercase letters and digits")]
    InvalidTerm(String),
}

/// Shape and seed of a synthetic statute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatuteSpec {
    pub width: usize,
    pub depth: usize,
    pub term_mode: TermMode,
    pub seed: u64,
}

impl StatuteSpec {
    pub fn new(width: usize, depth: usize, term_mode: TermMode, seed: u64) -> Result<Self, StatuteError> {
        let spec = StatuteSpec { width, depth, term_mode, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), StatuteError> {
        if !(MIN_WIDTH..=MAX_WIDTH).contains(&self.width) {
            return Err(StatuteError::InvalidWidth(self.width));
        }
        if !(MIN_DEPTH..=MAX_DEPTH).contains(&self.depth) {
            return Err(StatuteError::InvalidDepth(self.depth));
        }
        Ok(())
    }

    /// (w^(d+1) - 1) / (w - 1)
    pub fn node_count(&self) -> usize {
        (self.width.pow(self.depth as u32 + 1) - 1) / (self.width - 1)
    }

    /// (w^d - 1) / (w - 1)
    pub fn definition_count(&self) -> usize {
        (self.width.pow(self.depth as u32) - 1) / (self.width - 1)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        StatuteSpec { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefNode {
    pub term: String,
    #[serde(default)]
    pub children: Vec<DefNode>,
}

impl DefNode {
    pub fn leaf(term: impl Into<String>) -> Self {
        DefNode { term: term.into(), children: Vec::new() }
    }

    pub fn new(term: impl Into<String>, children: Vec<DefNode>) -> Self {
        DefNode { term: term.into(), children }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Definitional levels below this node; leaves have height 0.
    pub fn height(&self) -> usize {
        self.children.first().map_or(0, |c| 1 + c.height())
    }
}

/// One "The term X means any A or any B" definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definition {
    pub definiendum: String,
    pub rhs_terms: Vec<String>,
    /// Atomic provision housing the definition.
    pub citation: Citation,
    /// 1-based position in the sentence rendering.
    pub sentence_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProvisionBody {
    /// Index into [`DefTree::definitions`].
    Definition(usize),
    Container(Vec<Provision>),
}

/// A subsection, paragraph, ... of the rendered statute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provision {
    pub citation: Citation,
    pub heading: String,
    pub body: ProvisionBody,
}

impl Provision {
    pub fn is_atomic(&self) -> bool {
        matches!(self.body, ProvisionBody::Definition(_))
    }

    /// Indices of every definition housed in this provision, in statute order.
    pub fn definition_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_definitions(&mut out);
        out
    }

    fn collect_definitions(&self, out: &mut Vec<usize>) {
        match &self.body {
            ProvisionBody::Definition(i) => out.push(*i),
            ProvisionBody::Container(children) => children.iter().for_each(|c| c.collect_definitions(out)),
        }
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a Provision>) {
        out.push(self);
        if let ProvisionBody::Container(children) = &self.body {
            children.iter().for_each(|c| c.walk(out));
        }
    }
}

/// The logical content of a synthetic statute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeDoc", into = "TreeDoc")]
pub struct DefTree {
    spec: StatuteSpec,
    root: DefNode,
    term_index: HashMap<String, Vec<usize>>,
    definitions: Vec<Definition>,
    provisions: Vec<Provision>,
}

/// JSON form of a tree: `{width, depth, term_mode, seed, root: {term, children}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TreeDoc {
    width: usize,
    depth: usize,
    term_mode: TermMode,
    seed: u64,
    root: DefNode,
}

impl TryFrom<TreeDoc> for DefTree {
    type Error = StatuteError;

    fn try_from(doc: TreeDoc) -> Result<Self, Self::Error> {
        let tree = DefTree::from_root(doc.root, doc.term_mode, doc.seed)?;
        if tree.spec.width != doc.width || tree.spec.depth != doc.depth {
            return Err(StatuteError::UnbalancedTree(format!(
                "declared {}x{} but the tree is {}x{}",
                doc.width, doc.depth, tree.spec.width, tree.spec.depth
            )));
        }
        Ok(tree)
    }
}

impl From<DefTree> for TreeDoc {
    fn from(tree: DefTree) -> Self {
        TreeDoc {
            width: tree.spec.width,
            depth: tree.spec.depth,
            term_mode: tree.spec.term_mode,
            seed: tree.spec.seed,
            root: tree.root,
        }
    }
}

/// Draws a balanced tree for `spec`; terms are assigned in breadth-first order.
pub fn generate_tree<R: Rng + ?Sized>(spec: &StatuteSpec, rng: &mut R) -> Result<DefTree, StatuteError> {
    spec.validate()?;
    let terms = generate_terms(spec.term_mode, spec.node_count(), rng)?;
    let root = build_complete(&terms, spec.width, 0, spec.depth);
    DefTree::from_root(root, spec.term_mode, spec.seed)
}

/// Tree for `spec` drawn from a generator seeded with `spec.seed`.
pub fn generate_tree_seeded(spec: &StatuteSpec) -> Result<DefTree, StatuteError> {
    generate_tree(spec, &mut crate::rng::seeded(spec.seed))
}

fn build_complete(terms: &[String], width: usize, index: usize, levels_left: usize) -> DefNode {
    let children = if levels_left == 0 {
        Vec::new()
    } else {
        (1..=width).map(|k| build_complete(terms, width, index * width + k, levels_left - 1)).collect()
    };
    DefNode::new(terms[index].clone(), children)
}

impl DefTree {
    /// Validates a hand-built tree and infers its width and depth.
    pub fn from_root(root: DefNode, term_mode: TermMode, seed: u64) -> Result<Self, StatuteError> {
        let width = root.children.len();
        let depth = root.height();
        let spec = StatuteSpec::new(width, depth, term_mode, seed)?;
        check_balanced(&root, width, depth)?;

        let mut term_index = HashMap::new();
        index_terms(&root, &mut Vec::new(), &mut term_index)?;

        let mut definitions = Vec::new();
        let provisions = layout_container(&root, &Citation::section(), &mut definitions);
        Ok(DefTree { spec, root, term_index, definitions, provisions })
    }

    pub fn spec(&self) -> &StatuteSpec {
        &self.spec
    }

    pub fn root(&self) -> &DefNode {
        &self.root
    }

    pub fn root_term(&self) -> &str {
        &self.root.term
    }

    /// Definitions in sentence (pre-order) order.
    pub fn definitions(&self) -> &[Definition] {
        &self.definitions
    }

    /// Top-level provisions, i.e. the subsections.
    pub fn provisions(&self) -> &[Provision] {
        &self.provisions
    }

    /// Every provision of the statute in document order.
    pub fn all_provisions(&self) -> Vec<&Provision> {
        let mut out = Vec::new();
        self.provisions.iter().for_each(|p| p.walk(&mut out));
        out
    }

    pub fn find_provision(&self, citation: &Citation) -> Option<&Provision> {
        self.all_provisions().into_iter().find(|p| &p.citation == citation)
    }

    pub fn node_count(&self) -> usize {
        self.term_index.len()
    }

    pub fn contains_term(&self, term: &str) -> bool {
        self.term_index.contains_key(term)
    }

    pub fn node(&self, term: &str) -> Option<&DefNode> {
        let path = self.term_index.get(term)?;
        Some(path.iter().fold(&self.root, |node, &i| &node.children[i]))
    }

    /// Parent term, `None` for the root or unknown terms.
    pub fn parent_of(&self, term: &str) -> Option<&str> {
        let path = self.term_index.get(term)?;
        let (_, parent_path) = path.split_last()?;
        Some(&parent_path.iter().fold(&self.root, |node, &i| &node.children[i]).term)
    }

    /// Number of definitional steps from `term` up to the root.
    pub fn depth_of(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).map(Vec::len)
    }

    pub fn definition_of(&self, term: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.definiendum == term)
    }

    pub fn sentence(&self, index: usize) -> Option<&Definition> {
        index.checked_sub(1).and_then(|i| self.definitions.get(i))
    }

    /// All terms in pre-order.
    pub fn terms(&self) -> Vec<&str> {
        fn walk<'a>(node: &'a DefNode, out: &mut Vec<&'a str>) {
            out.push(&node.term);
            node.children.iter().for_each(|c| walk(c, out));
        }
        let mut out = Vec::with_capacity(self.term_index.len());
        walk(&self.root, &mut out);
        out
    }

    pub fn non_root_terms(&self) -> Vec<&str> {
        self.terms().into_iter().skip(1).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trees always serialize")
    }
}

fn check_balanced(node: &DefNode, width: usize, levels_left: usize) -> Result<(), StatuteError> {
    if levels_left == 0 {
        if !node.is_leaf() {
            return Err(StatuteError::UnbalancedTree(format!("`{}` lies below the leaf level", node.children[0].term)));
        }
        return Ok(());
    }
    if node.children.len() != width {
        return Err(StatuteError::UnbalancedTree(format!(
            "`{}` has {} children, expected {width}",
            node.term,
            node.children.len()
        )));
    }
    node.children.iter().try_for_each(|c| check_balanced(c, width, levels_left - 1))
}

fn index_terms(
    node: &DefNode,
    path: &mut Vec<usize>,
    index: &mut HashMap<String, Vec<usize>>,
) -> Result<(), StatuteError> {
    let valid = !node.term.is_empty() && node.term.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit());
    if !valid {
        return Err(StatuteError::InvalidTerm(node.term.clone()));
    }
    if index.insert(node.term.clone(), path.clone()).is_some() {
        return Err(StatuteError::DuplicateTerm(node.term.clone()));
    }
    for (i, child) in node.children.iter().enumerate() {
        path.push(i);
        index_terms(child, path, index)?;
        path.pop();
    }
    Ok(())
}

fn push_definition(node: &DefNode, citation: &Citation, defs: &mut Vec<Definition>) -> usize {
    defs.push(Definition {
        definiendum: node.term.clone(),
        rhs_terms: node.children.iter().map(|c| c.term.clone()).collect(),
        citation: citation.clone(),
        sentence_index: defs.len() + 1,
    });
    defs.len() - 1
}

/// Provisions under `parent` for a node of height >= 2: a "General rule" defining
/// the node, then one provision per child.
fn layout_container(node: &DefNode, parent: &Citation, defs: &mut Vec<Definition>) -> Vec<Provision> {
    let general = parent.child(1);
    let idx = push_definition(node, &general, defs);
    let mut out = vec![Provision {
        citation: general,
        heading: "General rule".to_string(),
        body: ProvisionBody::Definition(idx),
    }];
    for (i, child) in node.children.iter().enumerate() {
        let citation = parent.child(i + 2);
        let body = if child.height() == 1 {
            ProvisionBody::Definition(push_definition(child, &citation, defs))
        } else {
            ProvisionBody::Container(layout_container(child, &citation, defs))
        };
        out.push(Provision { citation, heading: capitalize(&child.term), body });
    }
    out
}

/// Small hand-built trees with known renderings, used by tests and demos.
pub mod examples {
    use super::*;

    fn two_level(root: &str, kids: [(&str, [&str; 2]); 2]) -> DefNode {
        DefNode::new(
            root,
            kids.iter()
                .map(|(t, leaves)| DefNode::new(*t, leaves.iter().map(|l| DefNode::leaf(*l)).collect()))
                .collect(),
        )
    }

    /// Width 2, depth 2, rooted at "rolang".
    pub fn rolang() -> DefTree {
        let root = two_level("rolang", [("soultratessly", ["oxideney", "chastiles"]), ("parkinse", ["portle", "frestes"])]);
        DefTree::from_root(root, TermMode::Nonce, 0).unwrap()
    }

    /// Width 2, depth 2, rooted at "infarber".
    pub fn infarber() -> DefTree {
        let root = two_level(
            "infarber",
            [("purentiable", ["packle", "amperseced"]), ("digirderasters", ["artion", "irtityrating"])],
        );
        DefTree::from_root(root, TermMode::Nonce, 0).unwrap()
    }

    /// Width 2, depth 3, rooted at "bowlery".
    pub fn bowlery() -> DefTree {
        let a = two_level("waitormenteed", [("redeba", ["ersubs", "pushotyptopses"]), ("dischieviders", ["nookede", "chastiles"])]);
        let b = two_level("kiterrupider", [("bruselers", ["legimetar", "exematess"]), ("fashiple", ["tanded", "goghts"])]);
        DefTree::from_root(DefNode::new("bowlery", vec![a, b]), TermMode::Nonce, 0).unwrap()
    }
}
