use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::segmentation::TokenList;

/// Document frequencies with smoothed inverse document frequency
/// `ln((1 + N) / (1 + df)) + 1`. Tokens never seen get `df = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfModel {
    pub document_count: usize,
    pub document_frequency: HashMap<String, usize>,
}

impl IdfModel {
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.document_frequency.get(token).copied().unwrap_or(0);
        ((1.0 + self.document_count as f64) / (1.0 + df as f64)).ln() + 1.0
    }

    pub fn df(&self, token: &str) -> usize {
        self.document_frequency.get(token).copied().unwrap_or(0)
    }
}

pub fn fit_idf<'a, I>(documents: I) -> Result<IdfModel, MetricError>
where
    I: IntoIterator<Item = &'a TokenList>,
{
    let mut document_count = 0usize;
    let mut document_frequency: HashMap<String, usize> = HashMap::new();
    for doc in documents {
        document_count += 1;
        let unique: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for token in unique {
            *document_frequency.entry(token.to_owned()).or_insert(0) += 1;
        }
    }
    if document_count < 2 {
        return Err(MetricError::TooFewDocuments(document_count));
    }
    Ok(IdfModel {
        document_count,
        document_frequency,
    })
}

/// Cosine of the raw-count × idf vectors; 0 when either vector is zero.
pub fn semantic_similarity(candidate: &[String], reference: &[String], idf: &IdfModel) -> f64 {
    let mut counts: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for t in candidate {
        counts.entry(t.as_str()).or_default().0 += 1.0;
    }
    for t in reference {
        counts.entry(t.as_str()).or_default().1 += 1.0;
    }
    let (mut dot, mut norm_c, mut norm_r) = (0.0, 0.0, 0.0);
    for (token, (c, r)) in counts {
        let w = idf.idf(token);
        let (a, b) = (c * w, r * w);
        dot += a * b;
        norm_c += a * a;
        norm_r += b * b;
    }
    if norm_c == 0.0 || norm_r == 0.0 {
        return 0.0;
    }
    (dot / (norm_c * norm_r).sqrt()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::Level;
    use approx::assert_abs_diff_eq;

    fn doc(xs: &[&str]) -> TokenList {
        TokenList::new(xs.iter().map(|s| s.to_string()).collect(), Level::Word)
    }

    #[test]
    fn disjoint_documents_have_df_one() {
        let docs = [doc(&["a", "b"]), doc(&["c"])];
        let model = fit_idf(&docs).unwrap();
        assert_eq!(model.document_count, 2);
        for t in ["a", "b", "c"] {
            assert_eq!(model.df(t), 1);
        }
    }

    #[test]
    fn document_frequency_counts_documents_not_occurrences() {
        let docs = [doc(&["a", "a", "a"]), doc(&["a"]), doc(&["b"])];
        let model = fit_idf(&docs).unwrap();
        assert_eq!(model.df("a"), 2);
    }

    #[test]
    fn idf_closed_forms() {
        let docs = [doc(&["x", "t"]), doc(&["x", "t"]), doc(&["x"]), doc(&["x"])];
        let model = fit_idf(&docs).unwrap();
        assert_eq!(model.idf("x"), 1.0);
        assert_abs_diff_eq!(model.idf("t"), (5.0f64 / 3.0).ln() + 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(model.idf("t"), 1.5108, epsilon = 1e-4);
        assert_abs_diff_eq!(model.idf("unseen"), 5.0f64.ln() + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn too_few_documents() {
        assert!(matches!(fit_idf(&[doc(&["a"])]), Err(MetricError::TooFewDocuments(1))));
    }

    #[test]
    fn cosine_examples() {
        let uniform = fit_idf(&[doc(&["a", "b", "c"]), doc(&["a", "b", "c"])]).unwrap();
        let ab = doc(&["a", "b"]).tokens;
        let ac = doc(&["a", "c"]).tokens;
        assert_eq!(semantic_similarity(&ab, &ab, &uniform), 1.0);
        assert_eq!(semantic_similarity(&ab, &doc(&["c", "d"]).tokens, &uniform), 0.0);
        assert_abs_diff_eq!(semantic_similarity(&ab, &ac, &uniform), 0.5, epsilon = 1e-15);
        assert_eq!(semantic_similarity(&[], &ab, &uniform), 0.0);
    }
}
