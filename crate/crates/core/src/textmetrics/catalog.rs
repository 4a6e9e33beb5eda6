use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Readability,
    Lexical,
    Syntactic,
    Discourse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Numeric,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub id: String,
    pub kind: DescriptorKind,
    pub value_type: ValueType,
}

impl FeatureDescriptor {
    pub fn is_binary(&self) -> bool {
        self.value_type == ValueType::Binary
    }
}

pub const FLESCH_KINCAID: &str = "flesch_kincaid";
pub const GUNNING_FOG: &str = "gunning_fog";
pub const DALE_CHALL: &str = "dale_chall";
pub const NAMED_ENTITY_COUNT: &str = "named_entity_count";
pub const AVG_WORD_LENGTH: &str = "avg_word_length";
pub const AVG_SENTENCE_LENGTH: &str = "avg_sentence_length";
pub const COORDINATION_COUNT: &str = "coordination_count";
pub const SUBORDINATION_COUNT: &str = "subordination_count";
pub const PRONOUN_DENSITY: &str = "pronoun_density";
pub const INDIRECT_SPEECH: &str = "indirect_speech";

/// Every descriptor the extractor knows how to compute, in default catalog order.
pub const KNOWN_DESCRIPTORS: [(&str, DescriptorKind, ValueType); 10] = [
    (FLESCH_KINCAID, DescriptorKind::Readability, ValueType::Numeric),
    (GUNNING_FOG, DescriptorKind::Readability, ValueType::Numeric),
    (DALE_CHALL, DescriptorKind::Readability, ValueType::Numeric),
    (NAMED_ENTITY_COUNT, DescriptorKind::Lexical, ValueType::Numeric),
    (AVG_WORD_LENGTH, DescriptorKind::Lexical, ValueType::Numeric),
    (AVG_SENTENCE_LENGTH, DescriptorKind::Syntactic, ValueType::Numeric),
    (COORDINATION_COUNT, DescriptorKind::Syntactic, ValueType::Numeric),
    (SUBORDINATION_COUNT, DescriptorKind::Syntactic, ValueType::Numeric),
    (PRONOUN_DENSITY, DescriptorKind::Discourse, ValueType::Numeric),
    (INDIRECT_SPEECH, DescriptorKind::Discourse, ValueType::Binary),
];

/// Ordered descriptor list; its order is the column order of every vector,
/// matrix and tree built from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct FeatureCatalog {
    descriptors: Vec<FeatureDescriptor>,
}

impl<'de> Deserialize<'de> for FeatureCatalog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let descriptors = Vec::<FeatureDescriptor>::deserialize(d)?;
        FeatureCatalog::new(descriptors).map_err(serde::de::Error::custom)
    }
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        let descriptors = KNOWN_DESCRIPTORS
            .iter()
            .map(|&(id, kind, value_type)| FeatureDescriptor {
                id: id.to_string(),
                kind,
                value_type,
            })
            .collect();
        FeatureCatalog { descriptors }
    }
}

impl FeatureCatalog {
    /// Validates a descriptor list: non-empty, unique ids, and each id one of
    /// [`KNOWN_DESCRIPTORS`] with its documented kind and value type.
    pub fn new(descriptors: Vec<FeatureDescriptor>) -> Result<Self> {
        if descriptors.is_empty() {
            return Err(Error::InvalidCatalog("catalog has no descriptors".into()));
        }
        let mut seen = HashSet::new();
        for d in &descriptors {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::InvalidCatalog(format!("duplicate descriptor {:?}", d.id)));
            }
            let known = KNOWN_DESCRIPTORS
                .iter()
                .find(|(id, _, _)| *id == d.id)
                .ok_or_else(|| Error::UnknownDescriptor(d.id.clone()))?;
            if (known.1, known.2) != (d.kind, d.value_type) {
                return Err(Error::InvalidCatalog(format!(
                    "descriptor {:?} must be {:?}/{:?}",
                    d.id, known.1, known.2
                )));
            }
        }
        Ok(FeatureCatalog { descriptors })
    }

    /// Subset of the default catalog, in the given order.
    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        let all = FeatureCatalog::default();
        let descriptors = ids
            .iter()
            .map(|id| {
                all.get(id.as_ref())
                    .cloned()
                    .ok_or_else(|| Error::UnknownDescriptor(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureCatalog::new(descriptors)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FeatureDescriptor> {
        self.descriptors.iter()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&FeatureDescriptor> {
        self.descriptors.iter().find(|d| d.id == id)
    }
}

impl std::ops::Index<usize> for FeatureCatalog {
    type Output = FeatureDescriptor;

    fn index(&self, i: usize) -> &FeatureDescriptor {
        &self.descriptors[i]
    }
}
