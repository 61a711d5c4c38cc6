//! Serializes class expressions as Manchester-syntax strings.

use serde::{de::Error, Deserialize, Deserializer, Serializer};

use crate::ontology::{parse_manchester, ClassExpression};

pub fn serialize<S: Serializer>(expr: &ClassExpression, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(expr)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ClassExpression, D::Error> {
    let text = String::deserialize(d)?;
    parse_manchester(&text).map_err(D::Error::custom)
}
