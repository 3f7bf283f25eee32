//! Prompt construction for synthetic statutes and two-stage answer extraction.

mod answer;

use std::collections::BTreeMap;
use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use answer::{parse_answer, ExtractedAnswer, Verdict};

use crate::oracle::{Fact, Gender, Rendering, TestItem, NAMES};
use crate::rng::{choose, pick};
use crate::statute::{indefinite_article, list_of_terms, Citation, TermMode};

pub const STEP_BY_STEP: &str = "Let's think step by step.";
pub const YES_NO_SUFFIX: &str = "Therefore, the answer (Yes or No) is";
pub const ENTAIL_CONTRA_SUFFIX: &str = "Therefore, the answer (Entailment or Contradiction) is";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("phrasing {0} needs the person's gender, which the item does not record")]
    MissingGender(PhrasingVariant),
    #[error("two-shot prompts need a statute rendering with nonce terms")]
    TwoShotRequiresNonceStatute,
    #[error("cannot build two-shot examples: {0}")]
    TwoShot(String),
}

/// Question phrasings P1-P7; P1 ("Is S applicable to N?") is the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhrasingVariant {
    #[default]
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

static PHRASINGS: LazyLock<BTreeMap<PhrasingVariant, String>> = LazyLock::new(|| {
    serde_json::from_str(include_str!("../../assets/phrasings.json")).expect("bundled phrasing table is valid JSON")
});

impl PhrasingVariant {
    pub const ALL: [PhrasingVariant; 7] = [
        PhrasingVariant::P1,
        PhrasingVariant::P2,
        PhrasingVariant::P3,
        PhrasingVariant::P4,
        PhrasingVariant::P5,
        PhrasingVariant::P6,
        PhrasingVariant::P7,
    ];

    /// Template with `{S}`, `{N}`, `{T}` and `{her/him}` slots.
    pub fn template(self) -> &'static str {
        PHRASINGS.get(&self).expect("every variant has a template")
    }

    /// Fills the template. The article before `{T}` agrees with the term.
    pub fn question(self, subject: &str, name: &str, top_term: &str, gender: Option<Gender>) -> Result<String, PromptError> {
        let template = self.template();
        let mut q = template.replace("{S}", subject).replace("{N}", name);
        if q.contains("{her/him}") {
            let pronoun = match gender {
                Some(Gender::Female) => "her",
                Some(Gender::Male) => "him",
                None => return Err(PromptError::MissingGender(self)),
            };
            q = q.replace("{her/him}", pronoun);
        }
        let article = indefinite_article(top_term);
        Ok(q.replace("a {T}", &format!("{article} {top_term}")).replace("{T}", top_term))
    }
}

impl std::fmt::Display for PhrasingVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for PhrasingVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown phrasing `{s}` (expected P1..P7)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expects {
    YesNo,
    EntailContra,
}

impl Expects {
    pub fn extraction_suffix(self) -> &'static str {
        match self {
            Expects::YesNo => YES_NO_SUFFIX,
            Expects::EntailContra => ENTAIL_CONTRA_SUFFIX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub stage1_prompt: String,
    pub extraction_suffix: String,
    pub expects: Expects,
}

impl PromptBundle {
    pub fn new(stage1_prompt: String, expects: Expects) -> Self {
        PromptBundle { stage1_prompt, extraction_suffix: expects.extraction_suffix().to_string(), expects }
    }

    pub fn extraction_prompt(&self, response: &str) -> String {
        build_extraction_with(&self.stage1_prompt, response, &self.extraction_suffix)
    }
}

/// "<Name> is a/an <term>."
pub fn fact_sentence(fact: &Fact) -> String {
    format!("{} is {} {}.", fact.person_name, indefinite_article(&fact.fact_term), fact.fact_term)
}

fn subject(item: &TestItem) -> String {
    match item.rendering {
        Rendering::Statute => item.target_citation.to_string(),
        Rendering::Sentence => format!("sentence {}", item.target_sentence),
    }
}

/// Rendered text, a blank line, then fact, question and "Let's think step by step."
pub fn build_zero_shot(item: &TestItem, phrasing: PhrasingVariant) -> Result<PromptBundle, PromptError> {
    let question = phrasing.question(&subject(item), &item.fact.person_name, item.tree.root_term(), item.fact.gender)?;
    let prompt = format!("{}\n\n{} {} {}", item.text, fact_sentence(&item.fact), question, STEP_BY_STEP);
    Ok(PromptBundle::new(prompt, Expects::YesNo))
}

/// Worked examples preceding a two-shot question: both about one provision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoShotPlan {
    /// Index into the tree's definitions of the example provision.
    pub example_definition: usize,
    pub yes: Fact,
    pub no: Fact,
    pub yes_first: bool,
}

fn worked_example(citation: &Citation, definiendum: &str, rhs: &[String], fact: &Fact, applies: bool) -> String {
    let cite = citation.to_string();
    let conclusion = if applies {
        format!("{} is {} {}, so {cite} does apply to {}.", fact.person_name, indefinite_article(&fact.fact_term), fact.fact_term, fact.person_name)
    } else {
        format!("{} is none of these, so {cite} does NOT apply to {}.", fact.person_name, fact.person_name)
    };
    format!(
        "{} Is {cite} applicable to {}? {} says that {definiendum} means {}. {conclusion}",
        fact_sentence(fact),
        fact.person_name,
        citation.to_sentence_start(),
        list_of_terms(rhs),
    )
}

fn check_two_shot_item(item: &TestItem) -> Result<(), PromptError> {
    if item.rendering != Rendering::Statute || item.meta.term_mode != TermMode::Nonce {
        return Err(PromptError::TwoShotRequiresNonceStatute);
    }
    Ok(())
}

/// Two-shot prompt with explicitly chosen examples.
pub fn build_two_shot_with(item: &TestItem, plan: &TwoShotPlan) -> Result<PromptBundle, PromptError> {
    check_two_shot_item(item)?;
    let bad = |msg: &str| Err(PromptError::TwoShot(msg.to_string()));
    let def = item
        .tree
        .definitions()
        .get(plan.example_definition)
        .ok_or_else(|| PromptError::TwoShot("example provision out of range".into()))?;
    if def.citation == item.target_citation {
        return bad("example provision equals the test provision");
    }
    if !def.rhs_terms.contains(&plan.yes.fact_term) {
        return bad("Yes-example term is not on the example provision's right-hand side");
    }
    if def.rhs_terms.contains(&plan.no.fact_term) || !item.tree.contains_term(&plan.no.fact_term) {
        return bad("No-example term must be a statute term off the example provision's right-hand side");
    }
    let names = [&plan.yes.person_name, &plan.no.person_name, &item.fact.person_name];
    let terms = [&plan.yes.fact_term, &plan.no.fact_term, &item.fact.fact_term];
    if names[0] == names[1] || names[0] == names[2] || names[1] == names[2] {
        return bad("names must be pairwise distinct");
    }
    if terms[0] == terms[1] || terms[0] == terms[2] || terms[1] == terms[2] {
        return bad("fact terms must be pairwise distinct");
    }

    let yes = worked_example(&def.citation, &def.definiendum, &def.rhs_terms, &plan.yes, true);
    let no = worked_example(&def.citation, &def.definiendum, &def.rhs_terms, &plan.no, false);
    let (first, second) = if plan.yes_first { (yes, no) } else { (no, yes) };
    let test = format!(
        "{} Is {} applicable to {}?",
        fact_sentence(&item.fact),
        item.target_citation,
        item.fact.person_name
    );
    let prompt = format!("{}\n\n{first}\n\n{second}\n\n{test}", item.text);
    Ok(PromptBundle::new(prompt, Expects::YesNo))
}

/// Draws a [`TwoShotPlan`]: an example provision other than the test's, one
/// Yes and one No example with fresh names and terms, Yes first half the time.
pub fn plan_two_shot<R: Rng + ?Sized>(item: &TestItem, rng: &mut R) -> Result<TwoShotPlan, PromptError> {
    check_two_shot_item(item)?;
    let defs = item.tree.definitions();
    let candidates: Vec<usize> = (0..defs.len()).filter(|&i| defs[i].citation != item.target_citation).collect();
    let example_definition = *choose(rng, &candidates).ok_or_else(|| PromptError::TwoShot("no other provision".into()))?;
    let def = &defs[example_definition];
    let test_term = item.fact.fact_term.as_str();

    let yes_terms: Vec<&String> = def.rhs_terms.iter().filter(|t| *t != test_term).collect();
    let yes_term = (*choose(rng, &yes_terms).ok_or_else(|| PromptError::TwoShot("no Yes term available".into()))?).clone();
    let no_terms: Vec<&str> = item
        .tree
        .non_root_terms()
        .into_iter()
        .filter(|t| !def.rhs_terms.iter().any(|r| r == t) && *t != test_term)
        .collect();
    let no_term = choose(rng, &no_terms).ok_or_else(|| PromptError::TwoShot("no No term available".into()))?.to_string();

    let people: Vec<_> = NAMES.iter().filter(|p| p.name != item.fact.person_name).collect();
    let a = pick(rng, people.len());
    let mut b = pick(rng, people.len() - 1);
    if b >= a {
        b += 1;
    }
    let yes_first = rng.gen_bool(0.5);
    Ok(TwoShotPlan {
        example_definition,
        yes: Fact::new(people[a], yes_term),
        no: Fact::new(people[b], no_term),
        yes_first,
    })
}

pub fn build_two_shot<R: Rng + ?Sized>(item: &TestItem, rng: &mut R) -> Result<PromptBundle, PromptError> {
    let plan = plan_two_shot(item, rng)?;
    build_two_shot_with(item, &plan)
}

fn build_extraction_with(stage1_prompt: &str, response: &str, suffix: &str) -> String {
    format!("{stage1_prompt}{response}\n\n{suffix}")
}

/// Stage-1 prompt, the model's response, a blank line, then the extraction suffix.
pub fn build_extraction(stage1_prompt: &str, response: &str, expects: Expects) -> String {
    build_extraction_with(stage1_prompt, response, expects.extraction_suffix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{sample_batch, TestItem};
    use crate::rng::seeded;
    use crate::statute::examples::{rolang, infarber, bowlery};
    use crate::statute::StatuteSpec;

    fn item_for(tree: crate::statute::DefTree, rendering: Rendering, name: &str, term: &str, def: usize) -> TestItem {
        TestItem::new(0, tree, rendering, Fact::named(name, term), def).unwrap()
    }

    #[test]
    fn table_strings() {
        let q = |p: PhrasingVariant, g| p.question("section 1001(b)", "Alexis", "rolang", g).unwrap();
        let f = Some(Gender::Female);
        assert_eq!(q(PhrasingVariant::P1, f), "Is section 1001(b) applicable to Alexis?");
        assert_eq!(q(PhrasingVariant::P2, f), "Does section 1001(b) apply to Alexis?");
        assert_eq!(q(PhrasingVariant::P3, f), "Does section 1001(b) apply to Alexis, making her a rolang?");
        assert_eq!(q(PhrasingVariant::P3, Some(Gender::Male)), "Does section 1001(b) apply to Alexis, making him a rolang?");
        assert_eq!(q(PhrasingVariant::P4, f), "Does section 1001(b) apply to make Alexis a rolang?");
        assert_eq!(q(PhrasingVariant::P5, f), "Is Alexis a rolang because of section 1001(b)?");
        assert_eq!(q(PhrasingVariant::P6, f), "Is Alexis a rolang owing to section 1001(b)?");
        assert_eq!(q(PhrasingVariant::P7, f), "Is Alexis a rolang as per section 1001(b)?");
        assert_eq!(
            PhrasingVariant::P3.question("section 1001(b)", "Kim", "rolang", None),
            Err(PromptError::MissingGender(PhrasingVariant::P3))
        );
        assert_eq!(
            PhrasingVariant::P5.question("sentence 1", "Emma", "infarber", f).unwrap(),
            "Is Emma an infarber because of sentence 1?"
        );
    }

    #[test]
    fn rolang_prompt_tail() {
        let item = item_for(rolang(), Rendering::Statute, "Alexis", "portle", 1);
        let bundle = build_zero_shot(&item, PhrasingVariant::P1).unwrap();
        assert!(bundle
            .stage1_prompt
            .ends_with("    (2) any frestes.\n\nAlexis is a portle. Is section 1001(b) applicable to Alexis? Let's think step by step."));
        assert_eq!(bundle.expects, Expects::YesNo);
    }

    #[test]
    fn infarber_sentence_prompt() {
        let item = item_for(infarber(), Rendering::Sentence, "Emma", "artion", 1);
        let bundle = build_zero_shot(&item, PhrasingVariant::P1).unwrap();
        assert!(bundle.stage1_prompt.ends_with("\n\nEmma is an artion. Is sentence 2 applicable to Emma? Let's think step by step."));
        let p2 = build_zero_shot(&item, PhrasingVariant::P2).unwrap();
        assert!(p2.stage1_prompt.contains("Does sentence 2 apply to Emma?"));
    }

    #[test]
    fn extraction_suffixes() {
        assert_eq!(build_extraction("P", " R", Expects::YesNo), "P R\n\nTherefore, the answer (Yes or No) is");
        assert_eq!(
            build_extraction("P", "", Expects::EntailContra),
            "P\n\nTherefore, the answer (Entailment or Contradiction) is"
        );
    }

    #[test]
    fn bowlery_two_shot_examples() {
        let tree = bowlery();
        // test: Nicholas / pushotyptopses / (c)(2)
        let item = item_for(tree.clone(), Rendering::Statute, "Nicholas", "pushotyptopses", 5);
        let plan = TwoShotPlan {
            example_definition: 6,
            yes: Fact::named("Alyssa", "goghts"),
            no: Fact::named("Hannah", "chastiles"),
            yes_first: false,
        };
        let prompt = build_two_shot_with(&item, &plan).unwrap().stage1_prompt;
        let tail = "\
Hannah is a chastiles. Is section 1001(c)(3) applicable to Hannah? Section 1001(c)(3) says that fashiple means any tanded or any goghts. Hannah is none of these, so section 1001(c)(3) does NOT apply to Hannah.

Alyssa is a goghts. Is section 1001(c)(3) applicable to Alyssa? Section 1001(c)(3) says that fashiple means any tanded or any goghts. Alyssa is a goghts, so section 1001(c)(3) does apply to Alyssa.

Nicholas is a pushotyptopses. Is section 1001(c)(2) applicable to Nicholas?";
        assert!(prompt.ends_with(tail), "{prompt}");

        let mut bad = plan.clone();
        bad.example_definition = 5;
        assert!(build_two_shot_with(&item, &bad).is_err());
        let mut bad = plan.clone();
        bad.no.person_name = "Nicholas".into();
        assert!(build_two_shot_with(&item, &bad).is_err());
        let mut bad = plan;
        bad.no.fact_term = "tanded".into();
        assert!(build_two_shot_with(&item, &bad).is_err());
    }

    #[test]
    fn two_shot_preconditions() {
        let sentence_item = item_for(bowlery(), Rendering::Sentence, "Nicholas", "pushotyptopses", 5);
        assert_eq!(build_two_shot(&sentence_item, &mut seeded(0)), Err(PromptError::TwoShotRequiresNonceStatute));
        let spec = StatuteSpec::new(2, 2, TermMode::Ids, 4).unwrap();
        let ids_item = &sample_batch(&spec, 2, Rendering::Statute).unwrap()[0];
        assert_eq!(build_two_shot(ids_item, &mut seeded(0)), Err(PromptError::TwoShotRequiresNonceStatute));
    }

    #[test]
    fn sampled_two_shot_constraints() {
        let spec = StatuteSpec::new(2, 2, TermMode::Nonce, 8).unwrap();
        let items = sample_batch(&spec, 20, Rendering::Statute).unwrap();
        let mut rng = seeded(1);
        let mut yes_first = 0;
        for i in 0..1000 {
            let item = &items[i % items.len()];
            let plan = plan_two_shot(item, &mut rng).unwrap();
            let def = &item.tree.definitions()[plan.example_definition];
            assert_ne!(def.citation, item.target_citation);
            let names = [&plan.yes.person_name, &plan.no.person_name, &item.fact.person_name];
            assert!(names[0] != names[1] && names[0] != names[2] && names[1] != names[2]);
            yes_first += plan.yes_first as usize;
            let prompt = build_two_shot_with(item, &plan).unwrap().stage1_prompt;
            assert_eq!(prompt.matches("does apply").count(), 1);
            assert_eq!(prompt.matches("does NOT apply").count(), 1);
        }
        assert!((400..=600).contains(&yes_first), "{yes_first}");
    }
}
