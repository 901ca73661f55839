//! Shared inputs for the criterion benches.

use rightsaudit_core::annotate::{LabelVector, LABEL_DIM};
use rightsaudit_core::embed::{EmbeddingProvider, EmbeddingVector, StubEmbedder};

pub const HEADLINES: [&str; 4] = [
    "Trump falsely claims immigrants are eating pets in US, Harris and debate moderator fact-check him",
    "Trump Repeats Debunked Claims About Haitian Immigrants During Debate",
    "Trump Renews Claim Haitian Migrants in Ohio Are Eating Pets",
    "Springfield Haitians, other residents respond to being at center of immigration debate",
];

/// `n` label vectors with a deterministic bit pattern, paired with stub
/// embeddings of a text derived from the pattern.
pub fn training_pairs(n: usize, dimension: usize) -> Vec<(LabelVector, EmbeddingVector)> {
    let stub = StubEmbedder::new(dimension);
    (0..n)
        .map(|i| {
            let bits: Vec<f64> = (0..LABEL_DIM)
                .map(|j| f64::from(u8::from((i * 7 + j * 3) % 5 < 2)))
                .collect();
            let text = format!("headline pattern {i}");
            let e = stub.embed_batch(&[&text]).expect("stub embeds").remove(0);
            (
                LabelVector::new(bits).expect("binary"),
                EmbeddingVector::new(e).expect("finite"),
            )
        })
        .collect()
}
