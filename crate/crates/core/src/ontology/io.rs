//! Line-oriented ontology files.
//!
//! ```text
//! # comment
//! DeclareClass(Atom)
//! SubClassOf(Carbon, Atom)
//! EquivalentTo(phi_8_m, "hasStructure some Ring_size_5")
//! Type(feature_100_5, Nitrogen)
//! Role(hasAtom, graph_100, feature_100_5)
//! Value(hasThreeOrMoreFusedRings, graph_100, true)
//! ```

use std::fs;
use std::path::Path;

use super::{parse_manchester, Axiom, Ontology, OntologyError};

pub fn load_ontology(path: impl AsRef<Path>) -> Result<Ontology, OntologyError> {
    let text = fs::read_to_string(path)?;
    parse_ontology(&text)
}

pub fn save_ontology(ontology: &Ontology, path: impl AsRef<Path>) -> Result<(), OntologyError> {
    fs::write(path, render_ontology(ontology))?;
    Ok(())
}

/// Declarations for names not used by any axiom come first, then one line
/// per axiom in sorted order.
pub fn render_ontology(ontology: &Ontology) -> String {
    let mut out = String::new();
    let (classes, roles, props, individuals) = ontology.declaration_only();
    for c in classes {
        out.push_str(&format!("DeclareClass({c})\n"));
    }
    for r in roles {
        out.push_str(&format!("DeclareRole({r})\n"));
    }
    for p in props {
        out.push_str(&format!("DeclareBool({p})\n"));
    }
    for i in individuals {
        out.push_str(&format!("DeclareIndividual({i})\n"));
    }
    for axiom in ontology.axioms() {
        out.push_str(&axiom.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_ontology(text: &str) -> Result<Ontology, OntologyError> {
    let mut ontology = Ontology::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| OntologyError::Parse { line, message };
        let (head, args) = split_call(content).map_err(err)?;
        let arity = |n: usize| -> Result<(), OntologyError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(OntologyError::Parse {
                    line,
                    message: format!("{head} expects {n} arguments, found {}", args.len()),
                })
            }
        };
        let result = match head {
            "DeclareClass" => arity(1).and_then(|_| ontology.declare_class(&args[0])),
            "DeclareRole" => arity(1).and_then(|_| ontology.declare_role(&args[0])),
            "DeclareBool" => arity(1).and_then(|_| ontology.declare_bool(&args[0])),
            "DeclareIndividual" => arity(1).and_then(|_| ontology.declare_individual(&args[0])),
            "SubClassOf" => {
                arity(2)?;
                ontology.add_axiom(Axiom::subclass(&args[0], &args[1])).map(|_| ())
            }
            "Type" => {
                arity(2)?;
                ontology.add_axiom(Axiom::class(&args[1], &args[0])).map(|_| ())
            }
            "Role" => {
                arity(3)?;
                ontology.add_axiom(Axiom::role(&args[0], &args[1], &args[2])).map(|_| ())
            }
            "Value" => {
                arity(3)?;
                let value = match args[2].as_str() {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(format!("expected true or false, found {other:?}"))),
                };
                ontology.add_axiom(Axiom::bool_value(&args[0], &args[1], value)).map(|_| ())
            }
            "EquivalentTo" => {
                arity(2)?;
                let quoted = &args[1];
                let inner = quoted
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| err("EquivalentTo expression must be quoted".to_string()))?;
                let expr = parse_manchester(inner).map_err(|e| err(e.to_string()))?;
                ontology.add_axiom(Axiom::equivalent(&args[0], expr)).map(|_| ())
            }
            other => return Err(err(format!("unknown axiom kind {other:?}"))),
        };
        result.map_err(|e| match e {
            OntologyError::Parse { .. } => e,
            other => OntologyError::Parse { line, message: other.to_string() },
        })?;
    }
    Ok(ontology)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn split_call(content: &str) -> Result<(&str, Vec<String>), String> {
    let open = content.find('(').ok_or_else(|| "expected '('".to_string())?;
    if !content.ends_with(')') {
        return Err("expected ')' at end of line".to_string());
    }
    let head = content[..open].trim();
    let body = &content[open + 1..content.len() - 1];
    let mut args = Vec::new();
    let mut current = String::new();
    let mut in_quote = false;
    for c in body.chars() {
        match c {
            '"' => {
                in_quote = !in_quote;
                current.push(c);
            }
            ',' if !in_quote => {
                args.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if in_quote {
        return Err("unterminated quoted expression".to_string());
    }
    if !current.trim().is_empty() || !args.is_empty() {
        args.push(current.trim().to_string());
    }
    Ok((head, args))
}
