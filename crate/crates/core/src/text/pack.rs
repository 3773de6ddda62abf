use serde::{Deserialize, Serialize};

/// One input token: a vocabulary id and the case word it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: u32,
    pub word: usize,
}

/// A bounded window of tokens fed to the encoder as one unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub tokens: Vec<u32>,
    pub word_index: Vec<usize>,
    pub source_paragraphs: Vec<usize>,
}

impl Packet {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Greedily fills packets of `cap` tokens, merging consecutive paragraphs and
/// breaking a paragraph across a packet boundary when it does not fit.
///
/// Every packet but the last holds exactly `cap` tokens.
///
/// # Panics
///
/// If `cap` is zero.
pub fn greedy_pack(paragraphs: &[Vec<Token>], cap: usize) -> Vec<Packet> {
    assert!(cap >= 1, "packet cap must be positive");
    let mut packets = Vec::new();
    let mut current = Packet::default();
    for (p, tokens) in paragraphs.iter().enumerate() {
        for tok in tokens {
            if current.len() == cap {
                packets.push(std::mem::take(&mut current));
            }
            if current.source_paragraphs.last() != Some(&p) {
                current.source_paragraphs.push(p);
            }
            current.tokens.push(tok.id);
            current.word_index.push(tok.word);
        }
    }
    if !current.is_empty() {
        packets.push(current);
    }
    packets
}

/// Total token count over a packet sequence.
pub fn token_count(packets: &[Packet]) -> usize {
    packets.iter().map(Packet::len).sum()
}
