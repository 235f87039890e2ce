//! Random utterances for parser fuzzing.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use oat_core::parser::{ParseContext, Phase};

pub const WORDS: &[&str] = &[
    "next", "back", "step", "yes", "no", "timer", "minutes", "set", "go", "the", "first", "last", "three",
    "2", "pizza", "halloween", "what", "how", "much", "option", "stop", "cancel", "thanks", "uh", "idk",
    "previous", "one", "continue", "done", "ok", "for", "5", "hours", "seconds", "quick", "please", "?",
    "!", "café", "🍕", "  ",
];

/// `n` random non-blank utterances drawn from command vocabulary, noise and
/// arbitrary characters, each paired with a random consistent context.
pub fn fuzz_inputs(seed: u64, n: usize) -> Vec<(String, ParseContext)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..8);
            let mut text: Vec<String> = (0..len).map(|_| WORDS.choose(&mut rng).unwrap().to_string()).collect();
            if rng.random_bool(0.2) {
                text.push((0..rng.random_range(1..12)).map(|_| rng.random::<char>()).collect());
            }
            let mut ctx = if rng.random_bool(0.5) {
                ParseContext::planning()
            } else {
                let total = rng.random_range(1..15);
                ParseContext::execution(rng.random_range(1..=total), total)
            };
            ctx.pending_condition = ctx.phase == Phase::Execution && rng.random_bool(0.3);
            ctx.candidate_count = rng.random_range(0..4);
            let mut text = text.join(" ");
            if text.trim().is_empty() {
                text.push_str("ok");
            }
            (text, ctx)
        })
        .collect()
}
