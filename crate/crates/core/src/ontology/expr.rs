//! Class expressions over the supported fragment: `Thing`, named classes,
//! conjunction, disjunction, existential restriction and boolean value
//! restriction.

use std::collections::BTreeSet;
use std::fmt;

/// A Manchester-style class expression tree.
///
/// `And`/`Or` are expected to carry at least two children; [`canonical`](Self::canonical)
/// enforces that by collapsing singletons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassExpression {
    Top,
    Atomic(String),
    And(Vec<ClassExpression>),
    Or(Vec<ClassExpression>),
    /// `role some filler`
    Exists(String, Box<ClassExpression>),
    /// `property value true|false`
    Value(String, bool),
}

/// Names referenced by an expression, split by kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExprSignature {
    pub classes: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub bool_props: BTreeSet<String>,
}

impl ClassExpression {
    pub fn atomic(name: impl Into<String>) -> Self {
        ClassExpression::Atomic(name.into())
    }

    pub fn exists(role: impl Into<String>, filler: ClassExpression) -> Self {
        ClassExpression::Exists(role.into(), Box::new(filler))
    }

    pub fn value(prop: impl Into<String>, value: bool) -> Self {
        ClassExpression::Value(prop.into(), value)
    }

    /// Conjunction of `parts`, canonicalized.
    pub fn and(parts: Vec<ClassExpression>) -> Self {
        ClassExpression::And(parts).canonical()
    }

    /// Disjunction of `parts`, canonicalized.
    pub fn or(parts: Vec<ClassExpression>) -> Self {
        ClassExpression::Or(parts).canonical()
    }

    /// Canonical form: nested `And`/`And` and `Or`/`Or` flattened, children
    /// canonicalized, deduplicated and sorted by their printed form, and
    /// single-child connectives collapsed.
    pub fn canonical(&self) -> ClassExpression {
        match self {
            ClassExpression::Top | ClassExpression::Atomic(_) | ClassExpression::Value(..) => {
                self.clone()
            }
            ClassExpression::Exists(role, filler) => {
                ClassExpression::Exists(role.clone(), Box::new(filler.canonical()))
            }
            ClassExpression::And(children) => {
                canonical_nary(children, true).unwrap_or(ClassExpression::Top)
            }
            ClassExpression::Or(children) => {
                canonical_nary(children, false).unwrap_or(ClassExpression::Top)
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    /// Number of symbols in the printed form, parentheses excluded.
    /// `hasStructure some Ring_size_5` has length 3.
    pub fn length(&self) -> usize {
        match self {
            ClassExpression::Top | ClassExpression::Atomic(_) => 1,
            ClassExpression::Value(..) => 3,
            ClassExpression::Exists(_, filler) => 2 + filler.length(),
            ClassExpression::And(children) | ClassExpression::Or(children) => {
                children.iter().map(|c| c.length()).sum::<usize>() + children.len().saturating_sub(1)
            }
        }
    }

    /// Quantifier nesting depth: named classes are depth 0, each `some` adds one.
    pub fn depth(&self) -> usize {
        match self {
            ClassExpression::Top | ClassExpression::Atomic(_) | ClassExpression::Value(..) => 0,
            ClassExpression::Exists(_, filler) => 1 + filler.depth(),
            ClassExpression::And(children) | ClassExpression::Or(children) => {
                children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn signature(&self) -> ExprSignature {
        let mut sig = ExprSignature::default();
        self.collect_signature(&mut sig);
        sig
    }

    fn collect_signature(&self, sig: &mut ExprSignature) {
        match self {
            ClassExpression::Top => {}
            ClassExpression::Atomic(name) => {
                sig.classes.insert(name.clone());
            }
            ClassExpression::Value(prop, _) => {
                sig.bool_props.insert(prop.clone());
            }
            ClassExpression::Exists(role, filler) => {
                sig.roles.insert(role.clone());
                filler.collect_signature(sig);
            }
            ClassExpression::And(children) | ClassExpression::Or(children) => {
                for child in children {
                    child.collect_signature(sig);
                }
            }
        }
    }
}

fn canonical_nary(children: &[ClassExpression], conjunction: bool) -> Option<ClassExpression> {
    let mut flat = Vec::with_capacity(children.len());
    for child in children {
        match (child.canonical(), conjunction) {
            (ClassExpression::And(inner), true) | (ClassExpression::Or(inner), false) => {
                flat.extend(inner)
            }
            (other, _) => flat.push(other),
        }
    }
    let mut keyed: Vec<(String, ClassExpression)> =
        flat.into_iter().map(|e| (e.to_string(), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut parts: Vec<ClassExpression> = keyed.into_iter().map(|(_, e)| e).collect();
    match parts.len() {
        0 => None,
        1 => parts.pop(),
        _ if conjunction => Some(ClassExpression::And(parts)),
        _ => Some(ClassExpression::Or(parts)),
    }
}

impl fmt::Display for ClassExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::manchester::print_manchester(self))
    }
}
