//! Description-logic data model: class expressions, axioms and ontologies,
//! plus the Manchester-syntax and line-oriented file formats.

mod axiom;
mod expr;
mod io;
mod manchester;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use axiom::{Axiom, Individual};
pub use expr::{ClassExpression, ExprSignature};
pub use io::{load_ontology, parse_ontology, render_ontology, save_ontology};
pub use manchester::{is_valid_name, parse_manchester, print_manchester, ParseError};

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("class {name} already has a different EquivalentTo definition")]
    ConflictingDefinition { name: String },
    #[error("invalid name {name:?}")]
    InvalidName { name: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A set of axioms together with its signature.
///
/// The signature is the set of names occurring in the axioms plus any
/// explicitly declared names. Adding an axiom twice has no effect.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    classes: BTreeSet<String>,
    roles: BTreeSet<String>,
    bool_props: BTreeSet<String>,
    individuals: BTreeSet<Individual>,
    axioms: BTreeSet<Axiom>,
    definitions: BTreeMap<String, ClassExpression>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_axioms<I: IntoIterator<Item = Axiom>>(axioms: I) -> Result<Self, OntologyError> {
        let mut ontology = Ontology::new();
        for axiom in axioms {
            ontology.add_axiom(axiom)?;
        }
        Ok(ontology)
    }

    /// Adds `axiom`, extending the signature. Returns `false` if it was
    /// already present.
    pub fn add_axiom(&mut self, axiom: Axiom) -> Result<bool, OntologyError> {
        let axiom = match axiom {
            Axiom::EquivalentTo { name, expr } => {
                Axiom::EquivalentTo { name, expr: expr.canonical() }
            }
            other => other,
        };
        if self.axioms.contains(&axiom) {
            return Ok(false);
        }
        self.validate(&axiom)?;
        match &axiom {
            Axiom::RoleAssertion { role, subject, object } => {
                self.roles.insert(role.clone());
                self.individuals.insert(subject.clone());
                self.individuals.insert(object.clone());
            }
            Axiom::ClassAssertion { class, individual } => {
                self.classes.insert(class.clone());
                self.individuals.insert(individual.clone());
            }
            Axiom::BoolAssertion { property, individual, .. } => {
                self.bool_props.insert(property.clone());
                self.individuals.insert(individual.clone());
            }
            Axiom::SubClassOf { sub, sup } => {
                self.classes.insert(sub.clone());
                self.classes.insert(sup.clone());
            }
            Axiom::EquivalentTo { name, expr } => {
                self.classes.insert(name.clone());
                let sig = expr.signature();
                self.classes.extend(sig.classes);
                self.roles.extend(sig.roles);
                self.bool_props.extend(sig.bool_props);
                self.definitions.insert(name.clone(), expr.clone());
            }
        }
        self.axioms.insert(axiom);
        Ok(true)
    }

    fn validate(&self, axiom: &Axiom) -> Result<(), OntologyError> {
        let check = |name: &str| {
            if is_valid_name(name) {
                Ok(())
            } else {
                Err(OntologyError::InvalidName { name: name.to_string() })
            }
        };
        for ind in axiom.individuals() {
            check(ind.as_str())?;
        }
        match axiom {
            Axiom::RoleAssertion { role, .. } => check(role),
            Axiom::ClassAssertion { class, .. } => check(class),
            Axiom::BoolAssertion { property, .. } => check(property),
            Axiom::SubClassOf { sub, sup } => check(sub).and_then(|_| check(sup)),
            Axiom::EquivalentTo { name, expr } => {
                check(name)?;
                let sig = expr.signature();
                for n in sig.classes.iter().chain(&sig.roles).chain(&sig.bool_props) {
                    check(n)?;
                }
                match self.definitions.get(name) {
                    Some(existing) if existing != expr => {
                        Err(OntologyError::ConflictingDefinition { name: name.clone() })
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    pub fn declare_class(&mut self, name: &str) -> Result<(), OntologyError> {
        self.declare(name, |o| &mut o.classes)
    }

    pub fn declare_role(&mut self, name: &str) -> Result<(), OntologyError> {
        self.declare(name, |o| &mut o.roles)
    }

    pub fn declare_bool(&mut self, name: &str) -> Result<(), OntologyError> {
        self.declare(name, |o| &mut o.bool_props)
    }

    pub fn declare_individual(&mut self, name: &str) -> Result<(), OntologyError> {
        if !is_valid_name(name) {
            return Err(OntologyError::InvalidName { name: name.to_string() });
        }
        self.individuals.insert(Individual::new(name));
        Ok(())
    }

    fn declare(
        &mut self,
        name: &str,
        set: impl FnOnce(&mut Self) -> &mut BTreeSet<String>,
    ) -> Result<(), OntologyError> {
        if !is_valid_name(name) {
            return Err(OntologyError::InvalidName { name: name.to_string() });
        }
        set(self).insert(name.to_string());
        Ok(())
    }

    /// Union of two ontologies. Commutative and idempotent on axiom sets.
    pub fn merge(&self, other: &Ontology) -> Result<Ontology, OntologyError> {
        let mut merged = self.clone();
        merged.extend(other)?;
        Ok(merged)
    }

    pub fn extend(&mut self, other: &Ontology) -> Result<(), OntologyError> {
        for axiom in &other.axioms {
            self.add_axiom(axiom.clone())?;
        }
        self.classes.extend(other.classes.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
        self.bool_props.extend(other.bool_props.iter().cloned());
        self.individuals.extend(other.individuals.iter().cloned());
        Ok(())
    }

    /// Restricts the axiom set to `axioms` (which must be a subset) while
    /// keeping this ontology's signature.
    pub fn with_axiom_subset<'a, I>(&self, axioms: I) -> Ontology
    where
        I: IntoIterator<Item = &'a Axiom>,
    {
        let axioms: BTreeSet<Axiom> = axioms.into_iter().cloned().collect();
        let definitions = axioms
            .iter()
            .filter_map(|a| match a {
                Axiom::EquivalentTo { name, expr } => Some((name.clone(), expr.clone())),
                _ => None,
            })
            .collect();
        Ontology {
            classes: self.classes.clone(),
            roles: self.roles.clone(),
            bool_props: self.bool_props.clone(),
            individuals: self.individuals.clone(),
            axioms,
            definitions,
        }
    }

    pub fn axioms(&self) -> &BTreeSet<Axiom> {
        &self.axioms
    }

    pub fn contains(&self, axiom: &Axiom) -> bool {
        self.axioms.contains(axiom)
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn roles(&self) -> &BTreeSet<String> {
        &self.roles
    }

    pub fn bool_props(&self) -> &BTreeSet<String> {
        &self.bool_props
    }

    pub fn individuals(&self) -> &BTreeSet<Individual> {
        &self.individuals
    }

    pub fn definition(&self, class: &str) -> Option<&ClassExpression> {
        self.definitions.get(class)
    }

    pub fn definitions(&self) -> &BTreeMap<String, ClassExpression> {
        &self.definitions
    }

    /// Names that are in the signature but occur in no axiom.
    pub(crate) fn declaration_only(&self) -> (Vec<&str>, Vec<&str>, Vec<&str>, Vec<&Individual>) {
        let mut used = Ontology::new();
        for axiom in &self.axioms {
            // Re-adding existing axioms cannot fail.
            let _ = used.add_axiom(axiom.clone());
        }
        (
            self.classes.iter().filter(|c| !used.classes.contains(*c)).map(String::as_str).collect(),
            self.roles.iter().filter(|r| !used.roles.contains(*r)).map(String::as_str).collect(),
            self.bool_props
                .iter()
                .filter(|p| !used.bool_props.contains(*p))
                .map(String::as_str)
                .collect(),
            self.individuals.iter().filter(|i| !used.individuals.contains(*i)).collect(),
        )
    }
}
