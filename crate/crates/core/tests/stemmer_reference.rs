use rationale_core::text::{stem, SNOWBALL_REFERENCE};

#[test]
fn agrees_with_reference_vocabulary() {
    let mut total = 0;
    let mut mismatches = Vec::new();
    for line in SNOWBALL_REFERENCE.lines().filter(|l| !l.is_empty()) {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    assert!(total >= 2000, "reference sample too small: {total}");
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches.join("\n"));
}

#[test]
fn stems_are_lowercase_and_non_empty() {
    for line in SNOWBALL_REFERENCE.lines().filter(|l| !l.is_empty()) {
        let (word, _) = line.split_once('\t').unwrap();
        let s = stem(&word.to_uppercase());
        assert!(!s.is_empty(), "{word}");
        assert_eq!(s, s.to_lowercase(), "{word}");
    }
}
