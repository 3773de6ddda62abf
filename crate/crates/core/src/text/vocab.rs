use serde::{Deserialize, Serialize};

/// Hash-bucketed vocabulary: a word's id is the FNV-1a hash of its lowercase
/// form modulo the bucket count. No fitting step, stable across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashVocab {
    pub buckets: u32,
}

impl Default for HashVocab {
    fn default() -> Self {
        HashVocab { buckets: 4096 }
    }
}

impl HashVocab {
    pub fn new(buckets: u32) -> Self {
        assert!(buckets > 0, "vocabulary needs at least one bucket");
        HashVocab { buckets }
    }

    pub fn id(&self, word: &str) -> u32 {
        (fnv1a(word.to_lowercase().as_bytes()) % u64::from(self.buckets)) as u32
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
