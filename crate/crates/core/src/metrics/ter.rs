use super::MetricError;

/// Unit-cost Levenshtein distance over arbitrary token sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Translation edit rate without shift moves: edit distance divided by the
/// reference length. Lower is better.
pub fn ter(candidate: &[String], reference: &[String]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    Ok(edit_distance(candidate, reference) as f64 / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn examples() {
        let r = toks(&["a", "b", "c", "d", "e"]);
        assert_eq!(ter(&r, &r).unwrap(), 0.0);
        assert_eq!(ter(&toks(&["a", "b", "x", "d", "e"]), &r).unwrap(), 0.2);
        assert_eq!(ter(&[], &toks(&["a", "b", "c", "d"])).unwrap(), 1.0);
        assert!(matches!(ter(&r, &[]), Err(MetricError::EmptyReference)));
    }

    #[test]
    fn distance_basics() {
        assert_eq!(edit_distance(b"kitten", b"sitting"), 3);
        assert_eq!(edit_distance::<u8>(b"", b"abc"), 3);
        assert_eq!(edit_distance(b"flaw", b"lawn"), 2);
    }

    #[test]
    fn can_exceed_one_for_long_candidates() {
        let got = ter(&toks(&["a", "x", "y", "z"]), &toks(&["a"])).unwrap();
        assert_eq!(got, 3.0);
    }
}
