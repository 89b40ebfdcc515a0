//! Synthetic question families for offline runs under the hash encoder.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Question templates with little vocabulary in common.
pub const TEMPLATES: [&str; 6] = [
    "Maria bakes twelve muffins each morning; yesterday she sold nine muffins. How many muffins remain",
    "Would a penguin survive unaided inside Sahara dunes during July heat",
    "Which polygon comes next: triangle, square, pentagon, hexagon",
    "Concatenate final letters from words: lemon kiwi grape",
    "Today is Tuesday; what weekday arrives eleven days later",
    "Alphabetize volcano names: Etna Fuji Krakatoa Vesuvius",
];

/// Generates family questions: a template followed by a bracketed code of
/// two random words. No letter trigram of a code word repeats anywhere in
/// one generator's output, so same-family questions overlap only through
/// the template and sit at nearly uniform distances.
///
/// One generator yields about 2,000 questions before its trigram space runs
/// out, after which it panics.
pub struct FamilyGen {
    rng: ChaCha8Rng,
    used: HashSet<[u8; 3]>,
}

impl FamilyGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: HashSet::new(),
        }
    }

    fn word(&mut self) -> String {
        for _ in 0..1_000_000 {
            let w: Vec<u8> = (0..6).map(|_| self.rng.gen_range(b'a'..=b'z')).collect();
            let grams: Vec<[u8; 3]> = w.windows(3).map(|g| [g[0], g[1], g[2]]).collect();
            if grams.iter().all(|g| !self.used.contains(g)) {
                self.used.extend(grams);
                return format!("k{}q", String::from_utf8(w).unwrap());
            }
        }
        panic!("family generator exhausted its code space");
    }

    /// # Panics
    ///
    /// If `family >= TEMPLATES.len()`.
    pub fn question(&mut self, family: usize) -> String {
        let (a, b) = (self.word(), self.word());
        format!("{} [{a} {b}]?", TEMPLATES[family])
    }

    pub fn family(&mut self, family: usize, n: usize) -> Vec<String> {
        (0..n).map(|_| self.question(family)).collect()
    }
}
