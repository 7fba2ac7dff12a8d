//! Adaptive backward digit span and Corsi block runs with a simulated
//! participant whose recall fails above a fixed span.

use csqvr::tasks::span::{corsi_sample_layout, recall_is_correct, SpanTaskConfig, SpanTaskState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(config: SpanTaskConfig, ability: usize, rng: &mut ChaCha8Rng) {
    let mut task = SpanTaskState::new(config);
    while !task.finished {
        let stimulus = task.next_sequence(rng).expect("task is running");
        let mut response: Vec<u8> = stimulus.iter().rev().copied().collect();
        if stimulus.len() > ability {
            response.swap(0, 1);
        }
        let correct = recall_is_correct(&stimulus, &response);
        println!("  len {} {:?} -> {}", stimulus.len(), stimulus, if correct { "correct" } else { "wrong" });
        task.advance(correct).expect("task is running");
    }
    println!("  score {}", task.score().expect("task finished"));
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("BDST");
    run(SpanTaskConfig::bdst(), 5, &mut rng);
    println!("BCBT, layout {:?}", corsi_sample_layout(&mut rng));
    run(SpanTaskConfig::bcbt(), 4, &mut rng);
}
