//! The 25 x 25 adjective-noun composition grid and the color phrase
//! variants used for the semantically-similar-phrase comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjectiveCategory {
    Color,
    Material,
    SizeShape,
}

/// The 25 adjectives with their categories: 12 colors, 7 materials,
/// 6 size/shape attributes.
pub const ADJECTIVES: &[(&str, AdjectiveCategory)] = &[
    ("beige", AdjectiveCategory::Color),
    ("big", AdjectiveCategory::SizeShape),
    ("black", AdjectiveCategory::Color),
    ("blue", AdjectiveCategory::Color),
    ("brown", AdjectiveCategory::Color),
    ("glass", AdjectiveCategory::Material),
    ("green", AdjectiveCategory::Color),
    ("iron", AdjectiveCategory::Material),
    ("large", AdjectiveCategory::SizeShape),
    ("magenta", AdjectiveCategory::Color),
    ("maroon", AdjectiveCategory::Color),
    ("metal", AdjectiveCategory::Material),
    ("pink", AdjectiveCategory::Color),
    ("plastic", AdjectiveCategory::Material),
    ("purple", AdjectiveCategory::Color),
    ("red", AdjectiveCategory::Color),
    ("round", AdjectiveCategory::SizeShape),
    ("rubber", AdjectiveCategory::Material),
    ("short", AdjectiveCategory::SizeShape),
    ("small", AdjectiveCategory::SizeShape),
    ("steel", AdjectiveCategory::Material),
    ("tall", AdjectiveCategory::SizeShape),
    ("white", AdjectiveCategory::Color),
    ("wooden", AdjectiveCategory::Material),
    ("yellow", AdjectiveCategory::Color),
];

/// The 25 nouns.
pub const NOUNS: &[&str] = &[
    "apple",
    "ball",
    "banana",
    "book",
    "bottle",
    "box",
    "cat",
    "chair",
    "cup",
    "dog",
    "dress",
    "fish",
    "flower",
    "fork",
    "glass",
    "pants",
    "papaya",
    "phone",
    "plate",
    "rock",
    "shirt",
    "spoon",
    "table",
    "tree",
    "watermelon",
];

/// One cell of the adjective-noun grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjNounRecord {
    pub adjective: String,
    pub noun: String,
    pub category: AdjectiveCategory,
    /// `"<adjective> <noun>"`; derived, so it stays out of the JSONL form.
    #[serde(skip_serializing, default)]
    pub composition: String,
}

/// All 625 adjective-noun compositions, adjective-major, both word lists in
/// their fixed order. A pure constant function.
pub fn generate_sanc() -> Vec<AdjNounRecord> {
    let mut records = Vec::with_capacity(ADJECTIVES.len() * NOUNS.len());
    for &(adjective, category) in ADJECTIVES {
        for &noun in NOUNS {
            records.push(AdjNounRecord {
                adjective: adjective.to_string(),
                noun: noun.to_string(),
                category,
                composition: format!("{adjective} {noun}"),
            });
        }
    }
    records
}

/// The base composition, its three semantically-similar rephrasings and the
/// three baseline strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseVariantSet {
    /// `"X N"`
    pub base: String,
    /// `"X-colored N"`
    pub hyphenated: String,
    /// `"N is X-colored"`
    pub predicate: String,
    /// `"color of N is X"`
    pub attributive: String,
    /// bare adjective
    pub adjective_only: String,
    /// bare noun
    pub noun_only: String,
    /// the fixed unrelated phrase
    pub distractor: String,
}

impl PhraseVariantSet {
    /// Variant strings paired with stable labels, base first.
    pub fn labelled(&self) -> Vec<(&'static str, &str)> {
        vec![
            ("base", &self.base),
            ("hyphenated", &self.hyphenated),
            ("predicate", &self.predicate),
            ("attributive", &self.attributive),
            ("adjective_only", &self.adjective_only),
            ("noun_only", &self.noun_only),
            ("distractor", &self.distractor),
        ]
    }
}

const DISTRACTOR: &str = "color of door is green";

fn normalize_word(word: &str) -> String {
    word.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Fill the color phrase templates for `(adjective, noun)`. The templates
/// are color-specific, so a non-color adjective is a usage error.
pub fn generate_phrase_variants(adjective: &str, noun: &str) -> Result<PhraseVariantSet> {
    let adjective = normalize_word(adjective);
    let noun = normalize_word(noun);
    let is_color = ADJECTIVES
        .iter()
        .any(|&(a, c)| a == adjective && c == AdjectiveCategory::Color);
    if !is_color {
        return Err(Error::Usage(format!(
            "'{adjective}' is not one of the color adjectives; the phrase templates are color-specific"
        )));
    }
    if noun.is_empty() {
        return Err(Error::Usage("noun must be non-empty".into()));
    }
    Ok(PhraseVariantSet {
        base: format!("{adjective} {noun}"),
        hyphenated: format!("{adjective}-colored {noun}"),
        predicate: format!("{noun} is {adjective}-colored"),
        attributive: format!("color of {noun} is {adjective}"),
        adjective_only: adjective,
        noun_only: noun,
        distractor: DISTRACTOR.to_string(),
    })
}
