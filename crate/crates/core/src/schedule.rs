//! Running a session under a seeded random scheduler.

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::label::CommLabel;
use crate::session::Session;

/// Fires up to `steps` labels, each chosen uniformly among the enabled ones.
/// Stops early when nothing is enabled.
pub fn random_schedule(s: &Session, steps: usize, seed: u64) -> Vec<CommLabel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = s.graph();
    let mut state = s.state().clone();
    let mut trace = Vec::new();
    while trace.len() < steps {
        let Some(label) = state.enabled_labels(graph).into_iter().choose(&mut rng) else {
            break;
        };
        state = state.step(graph, &label).expect("enabled label steps");
        trace.push(label);
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::run_trace;
    use crate::syntax::load_program;

    const SRC: &str = "
        participant P = s!req . (s?res . P + s?halt . s?res . end)
        participant Q = c?req . c!res . Q + c!halt . c?req . c!res . end
        session CS = c :: P || s :: Q with []
        session Stuck = q :: p?l . end with [<p, l2, q>]
    ";

    #[test]
    fn schedules_replay() {
        let r = load_program(SRC).unwrap();
        let cs = r.session("CS").unwrap();
        assert!(random_schedule(cs, 0, 1).is_empty());
        for seed in 0..20 {
            let t = random_schedule(cs, 4, seed);
            assert!(t.len() <= 4);
            run_trace(cs, &t).unwrap();
            assert_eq!(t, random_schedule(cs, 4, seed));
        }
        assert!(random_schedule(r.session("Stuck").unwrap(), 10, 3).is_empty());
    }
}
