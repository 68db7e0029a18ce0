//! Prompt templates. Each template holds exactly one `{text}` placeholder.

use serde::{Deserialize, Serialize};

pub const PLACEHOLDER: &str = "{text}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ZhToEn,
    EnToZh,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ZhToEn => "zh_to_en",
            Direction::EnToZh => "en_to_zh",
        }
    }
}

/// Shipped variants differ only in how the instruction is phrased.
pub const FORWARD_TEMPLATES: [&str; 3] = [
    "Translate the following Chinese text into English. Output only the translation.\n\n{text}",
    "Render this Chinese passage in English. Reply with the English text and nothing else.\n\n{text}",
    "You are a professional translator. Give the English version of the Chinese text below, without notes or commentary.\n\n{text}",
];

pub const BACKWARD_TEMPLATES: [&str; 3] = [
    "Translate the following English text into Simplified Chinese. Output only the translation.\n\n{text}",
    "Render this English passage in Simplified Chinese. Reply with the Chinese text and nothing else.\n\n{text}",
    "You are a professional translator. Give the Simplified Chinese version of the English text below, without notes or commentary.\n\n{text}",
];

/// Forward and backward template lists for one backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSet {
    pub forward: Vec<String>,
    pub backward: Vec<String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            forward: FORWARD_TEMPLATES.iter().map(|s| s.to_string()).collect(),
            backward: BACKWARD_TEMPLATES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PromptSet {
    pub fn templates(&self, direction: Direction) -> &[String] {
        match direction {
            Direction::ZhToEn => &self.forward,
            Direction::EnToZh => &self.backward,
        }
    }

    /// Variant count used for cycling; the longer of the two lists.
    pub fn variants(&self) -> usize {
        self.forward.len().max(self.backward.len())
    }

    /// Fills template `variant` (taken modulo the list length).
    pub fn render(&self, direction: Direction, variant: usize, text: &str) -> String {
        let list = self.templates(direction);
        list[variant % list.len()].replacen(PLACEHOLDER, text, 1)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (direction, list) in [("forward", &self.forward), ("backward", &self.backward)] {
            if list.is_empty() {
                return Err(format!("no {direction} prompt templates"));
            }
            for (i, t) in list.iter().enumerate() {
                let count = t.matches(PLACEHOLDER).count();
                if count != 1 {
                    return Err(format!(
                        "{direction} template {i} has {count} `{{text}}` placeholders, expected exactly one"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Repetition `rep` (1-based) uses variant `(rep - 1) mod variants`.
pub fn variant_for(rep: usize, variants: usize) -> usize {
    (rep - 1) % variants.max(1)
}
