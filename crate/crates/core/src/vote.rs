//! Monte Carlo estimate of the pairwise majority-vote error of an ensemble
//! whose members are independently correct with probability `q`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct VoteErrorRate {
    pub runs: usize,
    pub error_rate: f64,
}

/// For each ensemble size in `sizes`, simulates `trials` object pairs. Each
/// pair is truly co-clustered with probability 1/2; each of the votes is
/// correct with probability `q`; the ensemble joins the pair iff votes for
/// joining strictly outnumber votes for separating.
pub fn simulate_vote_convergence(q: f64, sizes: &[usize], trials: usize, seed: u64) -> Result<Vec<VoteErrorRate>> {
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::WeakLearnability(q));
    }
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(idx, &runs)| {
            let mut rng = seed::rng(seed::derive_seed(seed, idx as u64, "vote"));
            let mut errors = 0usize;
            for _ in 0..trials {
                let same = rng.random_bool(0.5);
                let mut join = 0usize;
                for _ in 0..runs {
                    let correct = rng.random::<f64>() < q;
                    if correct == same {
                        join += 1;
                    }
                }
                let decided_join = join > runs - join;
                if decided_join != same {
                    errors += 1;
                }
            }
            VoteErrorRate { runs, error_rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 } }
        })
        .collect())
}
