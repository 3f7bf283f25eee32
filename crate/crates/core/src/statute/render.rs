use std::fmt::Write;

use super::{capitalize, Definition, DefTree, Provision, ProvisionBody, SECTION_NUMBER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedStatute {
    pub text: String,
    pub definitions: Vec<Definition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedSentences {
    pub text: String,
    pub definitions: Vec<Definition>,
}

/// `any a or any b`, or `any a, any b, or any c` for longer lists.
pub fn list_of_terms(terms: &[String]) -> String {
    match terms {
        [] => String::new(),
        [only] => format!("any {only}"),
        [a, b] => format!("any {a} or any {b}"),
        [init @ .., last] => {
            let head: Vec<String> = init.iter().map(|t| format!("any {t}")).collect();
            format!("{}, or any {last}", head.join(", "))
        }
    }
}

/// Renders the tree as `Section 1001.` with nested, labelled provisions.
///
/// Lines are joined by single newlines, with no trailing newline. Lines housed at
/// a subsection are flush left and each deeper level adds four spaces.
pub fn render_statute(tree: &DefTree) -> RenderedStatute {
    let mut lines = vec![format!("Section {SECTION_NUMBER}.  Definition of {}.", capitalize(tree.root_term()))];
    for p in tree.provisions() {
        render_provision(tree, p, &mut lines);
    }
    RenderedStatute { text: lines.join("\n"), definitions: tree.definitions().to_vec() }
}

fn render_provision(tree: &DefTree, p: &Provision, lines: &mut Vec<String>) {
    let (level, label) = p.citation.path.last().expect("provisions sit below the section");
    let pad = " ".repeat(level.indent());
    lines.push(format!("{pad}({label}) {}", p.heading));
    match &p.body {
        ProvisionBody::Container(children) => children.iter().for_each(|c| render_provision(tree, c, lines)),
        ProvisionBody::Definition(i) => {
            let def = &tree.definitions()[*i];
            lines.push(format!("{pad}The term \"{}\" means-", def.definiendum));
            let item_level = level.next().expect("definitions never sit at subclause level");
            let item_pad = " ".repeat(item_level.indent());
            let n = def.rhs_terms.len();
            for (k, term) in def.rhs_terms.iter().enumerate() {
                let tail = if k + 1 == n {
                    "."
                } else if k + 2 == n {
                    ", or"
                } else {
                    ","
                };
                lines.push(format!("{item_pad}({}) any {term}{tail}", item_level.label(k + 1)));
            }
        }
    }
}

/// One `Sentence k: The term "t" means ...` line per definition, in pre-order.
pub fn render_sentences(tree: &DefTree) -> RenderedSentences {
    let mut text = String::new();
    for (i, def) in tree.definitions().iter().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        write!(
            text,
            "Sentence {}: The term \"{}\" means {}.",
            def.sentence_index,
            def.definiendum,
            list_of_terms(&def.rhs_terms)
        )
        .unwrap();
    }
    RenderedSentences { text, definitions: tree.definitions().to_vec() }
}

#[cfg(test)]
mod tests {
    use super::super::examples::*;
    use super::super::{DefNode, TermMode};
    use super::*;

    #[test]
    fn rolang_statute() {
        let expected = "\
Section 1001.  Definition of Rolang.
(a) General rule
The term \"rolang\" means-
    (1) any soultratessly, or
    (2) any parkinse.
(b) Soultratessly
The term \"soultratessly\" means-
    (1) any oxideney, or
    (2) any chastiles.
(c) Parkinse
The term \"parkinse\" means-
    (1) any portle, or
    (2) any frestes.";
        assert_eq!(render_statute(&rolang()).text, expected);
    }

    #[test]
    fn infarber_sentences() {
        let expected = "\
Sentence 1: The term \"infarber\" means any purentiable or any digirderasters.
Sentence 2: The term \"purentiable\" means any packle or any amperseced.
Sentence 3: The term \"digirderasters\" means any artion or any irtityrating.";
        assert_eq!(render_sentences(&infarber()).text, expected);
    }

    #[test]
    fn bowlery_sentence_two() {
        let s = render_sentences(&bowlery());
        assert_eq!(s.text.lines().count(), 7);
        assert!(s.text.lines().nth(1).unwrap().starts_with("Sentence 2: The term \"waitormenteed\""));
    }

    #[test]
    fn wide_lists() {
        let terms: Vec<String> = ["t1", "t2", "t3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(list_of_terms(&terms), "any t1, any t2, or any t3");
        let root = DefNode::new(
            "root",
            (1..=3)
                .map(|i| {
                    DefNode::new(format!("c{i}"), (1..=3).map(|j| DefNode::leaf(format!("l{i}{j}"))).collect())
                })
                .collect(),
        );
        let tree = DefTree::from_root(root, TermMode::Nonce, 0).unwrap();
        let text = render_statute(&tree).text;
        let head: Vec<&str> = text.lines().take(6).collect();
        assert_eq!(
            head,
            [
                "Section 1001.  Definition of Root.",
                "(a) General rule",
                "The term \"root\" means-",
                "    (1) any c1,",
                "    (2) any c2, or",
                "    (3) any c3.",
            ]
        );
        assert!(render_sentences(&tree).text.starts_with("Sentence 1: The term \"root\" means any c1, any c2, or any c3."));
    }
}
