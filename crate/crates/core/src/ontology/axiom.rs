use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::ClassExpression;

/// A named individual (`graph_100`, `edge_1_2_3`, `structure_1_Methyl_1`, ...).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Individual(pub String);

impl Individual {
    pub fn new(id: impl Into<String>) -> Self {
        Individual(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Individual {
    fn from(s: &str) -> Self {
        Individual(s.to_string())
    }
}

/// Axioms of the supported fragment.
///
/// Variant order is significant: sorted axiom sets list ABox facts first
/// (role, type, value) and TBox axioms last, which is also the reading order
/// used for rendered justifications.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    RoleAssertion { role: String, subject: Individual, object: Individual },
    ClassAssertion { class: String, individual: Individual },
    BoolAssertion { property: String, individual: Individual, value: bool },
    SubClassOf { sub: String, sup: String },
    EquivalentTo { name: String, expr: ClassExpression },
}

impl Axiom {
    pub fn role(role: &str, subject: &str, object: &str) -> Self {
        Axiom::RoleAssertion {
            role: role.to_string(),
            subject: Individual::new(subject),
            object: Individual::new(object),
        }
    }

    pub fn class(class: &str, individual: &str) -> Self {
        Axiom::ClassAssertion { class: class.to_string(), individual: Individual::new(individual) }
    }

    pub fn bool_value(property: &str, individual: &str, value: bool) -> Self {
        Axiom::BoolAssertion {
            property: property.to_string(),
            individual: Individual::new(individual),
            value,
        }
    }

    pub fn subclass(sub: &str, sup: &str) -> Self {
        Axiom::SubClassOf { sub: sub.to_string(), sup: sup.to_string() }
    }

    pub fn equivalent(name: &str, expr: ClassExpression) -> Self {
        Axiom::EquivalentTo { name: name.to_string(), expr: expr.canonical() }
    }

    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Axiom::RoleAssertion { .. } | Axiom::ClassAssertion { .. } | Axiom::BoolAssertion { .. }
        )
    }

    /// Individuals mentioned by the axiom, in argument order.
    pub fn individuals(&self) -> Vec<&Individual> {
        match self {
            Axiom::RoleAssertion { subject, object, .. } => vec![subject, object],
            Axiom::ClassAssertion { individual, .. } | Axiom::BoolAssertion { individual, .. } => {
                vec![individual]
            }
            _ => Vec::new(),
        }
    }

    /// Frame-style rendering, one statement per line:
    /// `graph_1 hasStructure structure_1_1_1`, `A SubClassOf B`, ...
    pub fn readable(&self) -> String {
        match self {
            Axiom::RoleAssertion { role, subject, object } => format!("{subject} {role} {object}"),
            Axiom::ClassAssertion { class, individual } => format!("{individual} Type {class}"),
            Axiom::BoolAssertion { property, individual, value } => {
                format!("{individual} {property} {value}")
            }
            Axiom::SubClassOf { sub, sup } => format!("{sub} SubClassOf {sup}"),
            Axiom::EquivalentTo { name, expr } => format!("{name} EquivalentTo {expr}"),
        }
    }
}

/// Functional-style line used by ontology files.
impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::RoleAssertion { role, subject, object } => {
                write!(f, "Role({role}, {subject}, {object})")
            }
            Axiom::ClassAssertion { class, individual } => write!(f, "Type({individual}, {class})"),
            Axiom::BoolAssertion { property, individual, value } => {
                write!(f, "Value({property}, {individual}, {value})")
            }
            Axiom::SubClassOf { sub, sup } => write!(f, "SubClassOf({sub}, {sup})"),
            Axiom::EquivalentTo { name, expr } => write!(f, "EquivalentTo({name}, \"{expr}\")"),
        }
    }
}
