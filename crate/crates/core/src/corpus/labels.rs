use std::sync::OnceLock;

const BUNDLED_ARTICLES: &str = include_str!("../../data/articles.txt");

/// The ordered article label list (`k` labels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> crate::Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(crate::Error::Config(format!("duplicate article label {l}")));
            }
        }
        if labels.is_empty() {
            return Err(crate::Error::Config("empty article label list".into()));
        }
        Ok(LabelSet { labels })
    }

    /// One label per line; blank lines and `#` comments ignored.
    pub fn parse(list: &str) -> crate::Result<Self> {
        LabelSet::new(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect(),
        )
    }

    /// The bundled 10-article list.
    pub fn bundled() -> &'static LabelSet {
        static SET: OnceLock<LabelSet> = OnceLock::new();
        SET.get_or_init(|| LabelSet::parse(BUNDLED_ARTICLES).expect("bundled label list"))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Multi-hot encoding; labels outside the set are ignored.
    pub fn multi_hot(&self, labels: &[String]) -> Vec<u8> {
        let mut v = vec![0; self.len()];
        for l in labels {
            if let Some(i) = self.index_of(l) {
                v[i] = 1;
            }
        }
        v
    }

    /// Sorts labels in list order; unknown labels go last, lexicographically.
    pub fn sort(&self, labels: &mut [String]) {
        labels.sort_by(|a, b| {
            let key = |l: &String| (self.index_of(l).unwrap_or(usize::MAX), l.clone());
            key(a).cmp(&key(b))
        });
    }
}
