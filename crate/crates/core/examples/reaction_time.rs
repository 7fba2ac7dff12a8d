//! Splits choice reaction times into attentional and motor parts using the
//! first gaze sample on the target, over one 40-trial CRT block.

use csqvr::tasks::rt::{attach_gaze, crt_summary, RtTaskKind, RtTrial, CRT_TARGETS, CRT_TRIALS};
use csqvr::{GazeSample, Pupil};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut trials = Vec::new();
    for k in 0..CRT_TRIALS {
        let target = rng.random_range(0..CRT_TARGETS);
        // every tenth touch lands on a neighbour
        let chosen = if k % 10 == 9 { (target + 1) % CRT_TARGETS } else { target };
        let onset = rng.random_range(800..2000);
        let look = onset + rng.random_range(200..350);
        let touch = look + rng.random_range(150..300);
        let mut t = RtTrial::new(RtTaskKind::Crt, target, chosen, onset, touch);
        let stream: Vec<GazeSample> = (0..120)
            .map(|i| {
                let ts = onset - 100 + i * 8;
                GazeSample { t: ts, gaze_target_hit: ts >= look, pupil_left: Pupil::Valid(4.1), pupil_right: Pupil::Invalid }
            })
            .collect();
        attach_gaze(&mut t, &stream).expect("stream is ordered");
        if k < 5 {
            println!(
                "trial {k}: correct {} RT {} AT {:?} MT {:?}",
                t.correct,
                t.reaction_time(),
                t.attentional_time(),
                t.motor_time()
            );
        }
        trials.push(t);
    }
    // wrong touches are left out of every mean
    println!("{:?}", crt_summary(&trials).expect("full block"));
}
