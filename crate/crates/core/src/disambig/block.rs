use std::collections::BTreeMap;

use crate::corpus::{Corpus, MentionRef};

/// Mentions sharing one `last_name|first_initial` key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub key: String,
    /// Sorted by `(pub_id, position)`.
    pub mentions: Vec<MentionRef>,
}

/// Partitions every mention of the corpus by block key. Blocks come out
/// ordered by key; mentions with different keys are never compared.
pub fn block_mentions(corpus: &Corpus) -> Vec<Block> {
    let mut blocks: BTreeMap<String, Vec<MentionRef>> = BTreeMap::new();
    for p in corpus.publications() {
        for (i, m) in p.mentions.iter().enumerate() {
            blocks
                .entry(m.block_key())
                .or_default()
                .push(MentionRef::new(p.pub_id.clone(), i as u32));
        }
    }
    blocks
        .into_iter()
        .map(|(key, mut mentions)| {
            mentions.sort();
            Block { key, mentions }
        })
        .collect()
}
