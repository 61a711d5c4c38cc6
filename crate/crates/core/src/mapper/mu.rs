use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::ontology::Individual;

/// Structure individual to the edge individuals it consists of. Anything not
/// in the map is its own image in both directions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MuMap {
    forward: BTreeMap<Individual, BTreeSet<Individual>>,
}

impl MuMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, structure: Individual, edges: BTreeSet<Individual>) {
        self.forward.insert(structure, edges);
    }

    pub fn extend(&mut self, other: MuMap) {
        self.forward.extend(other.forward);
    }

    pub fn edges_of(&self, structure: &Individual) -> Option<&BTreeSet<Individual>> {
        self.forward.get(structure)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Individual, &BTreeSet<Individual>)> {
        self.forward.iter()
    }

    /// The structure whose edge set is exactly `edges`, or `edges` itself.
    pub fn image(&self, edges: &BTreeSet<Individual>) -> BTreeSet<Individual> {
        self.forward
            .iter()
            .find(|(_, set)| *set == edges)
            .map(|(psi, _)| BTreeSet::from([psi.clone()]))
            .unwrap_or_else(|| edges.clone())
    }
}

/// Replaces each structure individual by its edge set; everything else passes
/// through.
pub fn mu_inverse(mu: &MuMap, individuals: &BTreeSet<Individual>) -> BTreeSet<Individual> {
    let mut out = BTreeSet::new();
    for ind in individuals {
        match mu.edges_of(ind) {
            Some(edges) => out.extend(edges.iter().cloned()),
            None => {
                out.insert(ind.clone());
            }
        }
    }
    out
}

/// One `mu(structure) = [edge, ...]` line per structure.
pub fn render_mu(mu: &MuMap) -> String {
    let mut out = String::new();
    for (psi, edges) in mu.iter() {
        let list: Vec<&str> = edges.iter().map(Individual::as_str).collect();
        let _ = writeln!(out, "mu({psi}) = [{}]", list.join(", "));
    }
    out
}

pub fn parse_mu(text: &str) -> Result<MuMap, String> {
    let mut mu = MuMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = || format!("line {}: malformed mu entry", i + 1);
        let rest = line.strip_prefix("mu(").ok_or_else(err)?;
        let (psi, rest) = rest.split_once(") = [").ok_or_else(err)?;
        let list = rest.strip_suffix(']').ok_or_else(err)?;
        let edges = list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Individual::from).collect();
        mu.insert(Individual::from(psi), edges);
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<Individual> {
        items.iter().map(|s| Individual::from(*s)).collect()
    }

    fn example() -> MuMap {
        let mut mu = MuMap::new();
        mu.insert("structure_1_1_1".into(), set(&["edge_1_2", "edge_1_3", "edge_1_4"]));
        mu
    }

    #[test]
    fn inverse_expands_structures() {
        let mu = example();
        assert_eq!(mu_inverse(&mu, &set(&["structure_1_1_1"])), set(&["edge_1_2", "edge_1_3", "edge_1_4"]));
        assert_eq!(mu_inverse(&mu, &set(&["edge_1_2"])), set(&["edge_1_2"]));
        assert!(mu_inverse(&mu, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn round_trip() {
        let mu = example();
        let psi = set(&["structure_1_1_1"]);
        assert_eq!(mu.image(&mu_inverse(&mu, &psi)), psi);
        assert_eq!(parse_mu(&render_mu(&mu)).unwrap(), mu);
        assert_eq!(render_mu(&mu), "mu(structure_1_1_1) = [edge_1_2, edge_1_3, edge_1_4]\n");
    }
}
