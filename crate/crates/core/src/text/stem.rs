//! English Porter2 (Snowball) stemmer.
//!
//! Output matches NLTK's `SnowballStemmer("english")` word for word,
//! including its handling of the R1/R2 regions (see [`Word`]). Letters other
//! than `a-z` are treated as consonants.

/// A word stemmer. Implementations must be stateless between calls.
pub trait Stemmer: Send + Sync {
    fn stem(&self, word: &str) -> String;
}

/// The Snowball English stemmer (Porter2).
#[derive(Debug, Default, Clone, Copy)]
pub struct Porter2;

impl Stemmer for Porter2 {
    fn stem(&self, word: &str) -> String {
        stem(word)
    }
}

/// Stems one word with [`Porter2`].
pub fn stem(word: &str) -> String {
    let lower = word.to_lowercase();
    if lower.chars().count() <= 2 {
        return lower;
    }
    if let Some(s) = exception1(&lower) {
        return s.to_string();
    }
    let normalized: String = lower
        .chars()
        .map(|c| match c {
            '\u{2019}' | '\u{2018}' | '\u{201b}' => '\'',
            c => c,
        })
        .collect();
    let mut w = Word::new(normalized.strip_prefix('\'').unwrap_or(&normalized));
    w.step0();
    w.step1a();
    if let Some(s) = exception2(&w.as_string()) {
        return s.to_string();
    }
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5();
    w.as_string().replace('Y', "y")
}

fn exception1(word: &str) -> Option<&'static str> {
    Some(match word {
        "skis" => "ski",
        "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "idly" => "idl",
        "gently" => "gentl",
        "ugly" => "ugli",
        "early" => "earli",
        "only" => "onli",
        "singly" => "singl",
        "sky" => "sky",
        "news" => "news",
        "howe" => "howe",
        "atlas" => "atlas",
        "cosmos" => "cosmos",
        "bias" => "bias",
        "andes" => "andes",
        _ => return None,
    })
}

// Words left invariant once step 1a has run.
fn exception2(word: &str) -> Option<&'static str> {
    Some(match word {
        "inning" => "inning",
        "outing" => "outing",
        "canning" => "canning",
        "herring" => "herring",
        "earring" => "earring",
        "proceed" => "proceed",
        "exceed" => "exceed",
        "succeed" => "succeed",
        _ => return None,
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_double(a: char, b: char) -> bool {
    a == b && matches!(a, 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

fn is_li_ending(c: char) -> bool {
    matches!(c, 'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't')
}

type Chars = Vec<char>;

fn ends(v: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    n <= v.len() && v[v.len() - n..].iter().copied().eq(suffix.chars())
}

fn chop(v: &mut Chars, n: usize) {
    v.truncate(v.len().saturating_sub(n));
}

fn push_str(v: &mut Chars, s: &str) {
    v.extend(s.chars());
}

/// Region after the first non-vowel that follows a vowel.
fn region(v: &[char]) -> Chars {
    (1..v.len())
        .find(|&i| !is_vowel(v[i]) && is_vowel(v[i - 1]))
        .map(|i| v[i + 1..].to_vec())
        .unwrap_or_default()
}

/// Word plus its R1/R2 regions.
///
/// The regions are kept as their own strings and edited alongside the word.
/// When a replacement is longer than a region could hold, the region is
/// reset rather than recomputed; this reproduces the NLTK port of the
/// algorithm, which differs from the Snowball reference on a few words such
/// as "realization" (NLTK: "realize").
struct Word {
    w: Chars,
    r1: Chars,
    r2: Chars,
}

impl Word {
    fn new(s: &str) -> Self {
        let mut w: Chars = s.chars().collect();
        if w.first() == Some(&'y') {
            w[0] = 'Y';
        }
        for i in 1..w.len() {
            if is_vowel(w[i - 1]) && w[i] == 'y' {
                w[i] = 'Y';
            }
        }
        let (r1, r2) = if s.starts_with("gener") || s.starts_with("arsen") || s.starts_with("commun")
        {
            let skip = if s.starts_with("commun") { 6 } else { 5 };
            let r1 = w[skip..].to_vec();
            let r2 = region(&r1);
            (r1, r2)
        } else {
            let r1 = region(&w);
            let r2 = region(&r1);
            (r1, r2)
        };
        Word { w, r1, r2 }
    }

    fn as_string(&self) -> String {
        self.w.iter().collect()
    }

    fn first_suffix<'a>(&self, candidates: &[&'a str]) -> Option<&'a str> {
        candidates.iter().find(|s| ends(&self.w, s)).copied()
    }

    /// Removes `n` chars from the word and both regions.
    fn chop_all(&mut self, n: usize) {
        chop(&mut self.w, n);
        chop(&mut self.r1, n);
        chop(&mut self.r2, n);
    }

    /// Replaces `suffix` by `with` in the word and in each region long enough
    /// to contain it. A shorter R1 becomes empty, a shorter R2 becomes `r2_else`.
    fn replace(&mut self, suffix: &str, with: &str, r2_else: &str) {
        let n = suffix.chars().count();
        chop(&mut self.w, n);
        push_str(&mut self.w, with);
        for (region, fallback) in [(&mut self.r1, ""), (&mut self.r2, r2_else)] {
            if region.len() >= n {
                chop(region, n);
                push_str(region, with);
            } else {
                *region = fallback.chars().collect();
            }
        }
    }

    /// Replaces the final char by `c` in the word and in non-empty regions.
    fn replace_last(&mut self, c: char) {
        self.w.pop();
        self.w.push(c);
        for region in [&mut self.r1, &mut self.r2] {
            if !region.is_empty() {
                region.pop();
                region.push(c);
            }
        }
    }

    fn step0(&mut self) {
        if let Some(s) = self.first_suffix(&["'s'", "'s", "'"]) {
            self.chop_all(s.len());
        }
    }

    fn step1a(&mut self) {
        match self.first_suffix(&["sses", "ied", "ies", "us", "ss", "s"]) {
            Some("sses") => self.chop_all(2),
            Some("ied" | "ies") => {
                if self.w.len() - 3 > 1 {
                    self.chop_all(2);
                } else {
                    self.chop_all(1);
                }
            }
            Some("s") => {
                let n = self.w.len();
                if n >= 2 && self.w[..n - 2].iter().any(|&c| is_vowel(c)) {
                    self.chop_all(1);
                }
            }
            _ => {}
        }
    }

    fn step1b(&mut self) {
        let Some(s) = self.first_suffix(&["eedly", "ingly", "edly", "eed", "ing", "ed"]) else {
            return;
        };
        if s == "eed" || s == "eedly" {
            if ends(&self.r1, s) {
                self.replace(s, "ee", "");
            }
            return;
        }
        let stem_len = self.w.len() - s.len();
        if !self.w[..stem_len].iter().any(|&c| is_vowel(c)) {
            return;
        }
        self.chop_all(s.len());
        let n = self.w.len();
        if ends(&self.w, "at") || ends(&self.w, "bl") || ends(&self.w, "iz") {
            self.w.push('e');
            self.r1.push('e');
            if self.w.len() > 5 || self.r1.len() >= 3 {
                self.r2.push('e');
            }
        } else if n >= 2 && is_double(self.w[n - 2], self.w[n - 1]) {
            self.chop_all(1);
        } else if self.r1.is_empty() && self.ends_short_syllable() {
            self.w.push('e');
            if !self.r1.is_empty() {
                self.r1.push('e');
            }
            if !self.r2.is_empty() {
                self.r2.push('e');
            }
        }
    }

    fn ends_short_syllable(&self) -> bool {
        let w = &self.w;
        let n = w.len();
        (n >= 3
            && !is_vowel(w[n - 1])
            && !matches!(w[n - 1], 'w' | 'x' | 'Y')
            && is_vowel(w[n - 2])
            && !is_vowel(w[n - 3]))
            || (n == 2 && is_vowel(w[0]) && !is_vowel(w[1]))
    }

    fn step1c(&mut self) {
        let n = self.w.len();
        if n > 2 && matches!(self.w[n - 1], 'y' | 'Y') && !is_vowel(self.w[n - 2]) {
            self.replace_last('i');
        }
    }

    fn step2(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ization", "ational", "fulness", "ousness", "iveness", "tional", "biliti", "lessli",
            "entli", "ation", "alism", "aliti", "ousli", "iviti", "fulli", "enci", "anci", "abli",
            "izer", "ator", "alli", "bli", "ogi", "li",
        ];
        let Some(s) = self.first_suffix(SUFFIXES) else {
            return;
        };
        if !ends(&self.r1, s) {
            return;
        }
        let n = self.w.len();
        match s {
            "tional" | "entli" | "fulli" | "lessli" => self.chop_all(2),
            "enci" | "anci" | "abli" => self.replace_last('e'),
            "izer" | "ization" => self.replace(s, "ize", ""),
            "ational" | "ation" | "ator" => self.replace(s, "ate", "e"),
            "alism" | "aliti" | "alli" => self.replace(s, "al", ""),
            "fulness" => self.chop_all(4),
            "ousli" | "ousness" => self.replace(s, "ous", ""),
            "iveness" | "iviti" => self.replace(s, "ive", "e"),
            "biliti" | "bli" => self.replace(s, "ble", ""),
            "ogi" if self.w[n - 4] == 'l' => self.chop_all(1),
            "li" if is_li_ending(self.w[n - 3]) => self.chop_all(2),
            _ => {}
        }
    }

    fn step3(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ational", "tional", "alize", "icate", "iciti", "ative", "ical", "ness", "ful",
        ];
        let Some(s) = self.first_suffix(SUFFIXES) else {
            return;
        };
        if !ends(&self.r1, s) {
            return;
        }
        match s {
            "tional" => self.chop_all(2),
            "ational" => self.replace(s, "ate", ""),
            "alize" => self.chop_all(3),
            "icate" | "iciti" | "ical" => self.replace(s, "ic", ""),
            "ful" | "ness" => self.chop_all(s.len()),
            "ative" if ends(&self.r2, s) => self.chop_all(5),
            _ => {}
        }
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti",
            "ous", "ive", "ize", "ion", "al", "er", "ic",
        ];
        let Some(s) = self.first_suffix(SUFFIXES) else {
            return;
        };
        if !ends(&self.r2, s) {
            return;
        }
        if s == "ion" {
            let n = self.w.len();
            if n >= 4 && matches!(self.w[n - 4], 's' | 't') {
                self.chop_all(3);
            }
        } else {
            self.chop_all(s.len());
        }
    }

    fn step5(&mut self) {
        let w = &self.w;
        let n = w.len();
        let double_l = ends(&self.r2, "l") && n >= 2 && w[n - 2] == 'l';
        let e_in_r1_not_short = ends(&self.r1, "e")
            && n >= 4
            && (is_vowel(w[n - 2])
                || matches!(w[n - 2], 'w' | 'x' | 'Y')
                || !is_vowel(w[n - 3])
                || is_vowel(w[n - 4]));
        if double_l || ends(&self.r2, "e") || e_in_r1_not_short {
            self.w.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_pairs() {
        assert_eq!(stem("detained"), "detain");
        assert_eq!(stem("a"), "a");
        assert_eq!(stem("caresses"), "caress");
        assert_eq!(stem("generically"), "generic");
        assert_eq!(stem("dying"), "die");
        assert_eq!(stem("succeeding"), "succeed");
    }

    #[test]
    fn output_is_lowercase() {
        assert_eq!(stem("Detained"), "detain");
        assert_eq!(stem("YELLOW"), "yellow");
    }

    #[test]
    fn curly_apostrophes_are_normalized() {
        assert_eq!(stem("applicant\u{2019}s"), stem("applicant's"));
    }
}
