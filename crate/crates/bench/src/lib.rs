//! Inputs shared by the benchmarks in `benches/`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dijkstra_core::corpus::{corpus_signature, load_corpus};
use dijkstra_core::dm::DmFile;
use dijkstra_core::state::{gen_stateful, to_emf};
use dijkstra_core::{Signature, Term};

/// A corpus file by name.
pub fn corpus_file(n: &str) -> DmFile {
    let (_, files) = load_corpus().expect("corpus loads");
    files.into_iter().find(|(m, _)| *m == n).expect("known corpus file").1
}

pub fn signature() -> Signature {
    corpus_signature().expect("corpus installs")
}

/// `count` stateful programs of depth at most `depth`, as EMF* terms.
pub fn stateful_programs(seed: u64, count: usize, depth: usize) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| to_emf(&gen_stateful(&mut rng, depth))).collect()
}
