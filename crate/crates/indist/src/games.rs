//! The Dealer/Gambler betting games: the two-distribution distinguisher game,
//! Games 1 and 2 over increasing tuples, the strategy adapters between them,
//! and seeded Monte Carlo simulation.
//!
//! Exact values (rational advantages, best responses) are computed by
//! summation; floats appear only in simulation estimates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exactdist::{ExactDist, Value};
use crate::rational::{rat, Rat};
use crate::sampling::{rng_for_sample, DistSampler, Estimate, Prng};
use crate::subsets::{all_nm1_max_tvd, drop_index, MaxTvd};

/// A deterministic guess rule for the two-distribution game: observed value
/// to a choice in {1, 2}. Total via a default of 1 off the stored map.
#[derive(Debug, Clone)]
pub struct GuessStrategy {
    choices: BTreeMap<Value, u8>,
}

impl GuessStrategy {
    pub fn from_map(choices: BTreeMap<Value, u8>) -> GuessStrategy {
        GuessStrategy { choices }
    }

    pub fn decide(&self, v: &Value) -> u8 {
        self.choices.get(v).copied().unwrap_or(1)
    }

    fn decide_tuple(&self, observed: &[BigInt]) -> u8 {
        self.decide(&Value::Tuple(observed.to_vec()))
    }
}

/// The maximum-a-posteriori rule: guess 1 iff Pr1(x) >= Pr2(x) (ties to 1).
/// Its exact expected advantage equals tvd(d1, d2).
pub fn optimal_guesser(d1: &ExactDist, d2: &ExactDist) -> GuessStrategy {
    let mut choices = BTreeMap::new();
    for (v, p2) in d2.iter() {
        if d1.prob(v) < *p2 {
            choices.insert(v.clone(), 2);
        }
    }
    GuessStrategy { choices }
}

/// Exact expected advantage of a guess rule in the fair-coin distinguisher
/// game: 1/2 sum_x [Pr1(x) s1(x) + Pr2(x) s2(x)] with s_i = +/-1.
pub fn exact_advantage(d1: &ExactDist, d2: &ExactDist, strat: &GuessStrategy) -> Result<Rat> {
    let mut sum = Rat::zero();
    for (v, p1) in d1.iter() {
        if strat.decide(v) == 1 {
            sum += p1;
        } else {
            sum -= p1;
        }
    }
    for (v, p2) in d2.iter() {
        if strat.decide(v) == 2 {
            sum += p2;
        } else {
            sum -= p2;
        }
    }
    Ok(sum / rat(2, 1))
}

/// Simulate the distinguisher game: fair coin picks the source, the rule
/// guesses, payoff +1 on a correct guess and -1 otherwise.
pub fn play_betting_game(
    d1: &ExactDist,
    d2: &ExactDist,
    strat: &GuessStrategy,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let s1 = DistSampler::new(d1);
    let s2 = DistSampler::new(d2);
    let payoffs = (0..trials).map(|t| {
        let mut rng = rng_for_sample(seed, t);
        let source: u8 = if rng.gen_bool(0.5) { 1 } else { 2 };
        let v = if source == 1 {
            s1.draw(&mut rng)
        } else {
            s2.draw(&mut rng)
        };
        if strat.decide(v) == source {
            1.0
        } else {
            -1.0
        }
    });
    Ok(crate::sampling::estimate_from_payoffs(payoffs))
}

/// Dealer's mixed strategy: an exact law over increasing n-tuples within
/// [1..N].
#[derive(Debug, Clone)]
pub struct DealerMixedStrategy {
    pub dist: ExactDist,
    pub n: usize,
    pub horizon: BigInt,
}

impl DealerMixedStrategy {
    pub fn new(dist: ExactDist, horizon: BigInt) -> Result<DealerMixedStrategy> {
        let n = dist
            .arity()
            .ok_or_else(|| Error::Domain("dealer strategy must be a tuple law".into()))?;
        for (v, _) in dist.iter() {
            let t = v.as_tuple().expect("tuple kind");
            if t[0] < BigInt::one() || t[n - 1] > horizon {
                return Err(Error::Domain(format!(
                    "dealer atom {v} outside [1..{horizon}]"
                )));
            }
            for w in t.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Domain(format!("dealer atom {v} not increasing")));
                }
            }
        }
        Ok(DealerMixedStrategy { dist, n, horizon })
    }
}

/// Gambler's exact best-response value in Game 2: max over coordinate pairs
/// (i, j) of tvd(X_{-i}, X_{-j}), with the achieving pair as witness.
pub fn game2_value_of_dealer(d: &DealerMixedStrategy) -> Result<MaxTvd> {
    all_nm1_max_tvd(&d.dist)
}

/// (2/n) eps0 <= v1 <= (n-1) eps0, widened by `tol` on both sides for
/// approximate inputs.
pub fn sandwich_check(v1: &Rat, eps0: &Rat, n: u32, tol: &Rat) -> bool {
    if n < 2 || tol.is_negative() {
        return false;
    }
    let lower = rat(2, n as i64) * eps0 - tol;
    let upper = Rat::from_integer(BigInt::from(n - 1)) * eps0 + tol;
    &lower <= v1 && v1 <= &upper
}

/// A Game-1 decision rule: observe the n-1 remaining values, name a win
/// position and a lose position (1-based, distinct).
pub trait Game1Play {
    fn choose(&self, observed: &[BigInt], rng: &mut Prng) -> (usize, usize);
}

impl<F> Game1Play for F
where
    F: Fn(&[BigInt], &mut Prng) -> (usize, usize),
{
    fn choose(&self, observed: &[BigInt], rng: &mut Prng) -> (usize, usize) {
        self(observed, rng)
    }
}

/// A Game-2 strategy: a precommitted coordinate pair (possibly randomized
/// per round) and a guess rule for which of the two was hidden.
pub trait Game2Play {
    fn pair(&self, rng: &mut Prng) -> (usize, usize);
    /// 1 means "the hidden coordinate is pair.0", 2 means pair.1.
    fn guess(&self, pair: (usize, usize), observed: &[BigInt], rng: &mut Prng) -> u8;
}

/// The concrete Game-2 strategy of the definition: a fixed pair plus a
/// deterministic rule over observed (n-1)-tuples.
#[derive(Debug, Clone)]
pub struct GamblerGame2Strategy {
    pub pair: (usize, usize),
    pub rule: GuessStrategy,
}

impl GamblerGame2Strategy {
    pub fn new(pair: (usize, usize), rule: GuessStrategy) -> Result<GamblerGame2Strategy> {
        if pair.0 == pair.1 {
            return Err(Error::Domain("Game-2 pair must be distinct".into()));
        }
        Ok(GamblerGame2Strategy { pair, rule })
    }

    /// The pair-optimal strategy against a known dealer: the witness pair of
    /// the best-response value with the MAP rule on the two projections.
    pub fn best_response(dealer: &DealerMixedStrategy) -> Result<GamblerGame2Strategy> {
        let best = game2_value_of_dealer(dealer)?;
        // witness sets are complements of single dropped indices
        let (i, j) = witness_to_pair(&best.witness, dealer.n);
        let di = drop_index(&dealer.dist, i)?;
        let dj = drop_index(&dealer.dist, j)?;
        GamblerGame2Strategy::new((i, j), optimal_guesser(&di, &dj))
    }
}

/// Recover the dropped-coordinate pair from an all_nm1 witness.
fn witness_to_pair(witness: &(Vec<usize>, Vec<usize>), n: usize) -> (usize, usize) {
    let missing = |s: &[usize]| (1..=n).find(|k| !s.contains(k)).expect("one index dropped");
    (missing(&witness.0), missing(&witness.1))
}

impl Game2Play for GamblerGame2Strategy {
    fn pair(&self, _rng: &mut Prng) -> (usize, usize) {
        self.pair
    }

    fn guess(&self, _pair: (usize, usize), observed: &[BigInt], _rng: &mut Prng) -> u8 {
        self.rule.decide_tuple(observed)
    }
}

fn observed_without(tuple: &[BigInt], position: usize) -> Vec<BigInt> {
    tuple
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != position - 1)
        .map(|(_, v)| v.clone())
        .collect()
}

/// Simulate Game 1: hidden coordinate uniform on [n]; payoff +1 when the win
/// index hits it, -1 when the lose index does, 0 otherwise.
pub fn play_game1(
    dealer: &DealerMixedStrategy,
    strat: &impl Game1Play,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let sampler = DistSampler::new(&dealer.dist);
    let n = dealer.n;
    let payoffs = (0..trials).map(|t| {
        let mut rng = rng_for_sample(seed, t);
        let x = sampler.draw(&mut rng).as_tuple().expect("tuple").to_vec();
        let i0 = rng.gen_range(1..=n);
        let observed = observed_without(&x, i0);
        let (win, lose) = strat.choose(&observed, &mut rng);
        debug_assert!(win != lose && (1..=n).contains(&win) && (1..=n).contains(&lose));
        if win == i0 {
            1.0
        } else if lose == i0 {
            -1.0
        } else {
            0.0
        }
    });
    Ok(crate::sampling::estimate_from_payoffs(payoffs))
}

/// Simulate Game 2: the strategy's pair, a fair coin hiding one of the two,
/// payoff +1 on a correct guess and -1 otherwise.
pub fn play_game2(
    dealer: &DealerMixedStrategy,
    strat: &impl Game2Play,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let sampler = DistSampler::new(&dealer.dist);
    let payoffs = (0..trials).map(|t| {
        let mut rng = rng_for_sample(seed, t);
        let x = sampler.draw(&mut rng).as_tuple().expect("tuple").to_vec();
        let pair = strat.pair(&mut rng);
        let coin: u8 = if rng.gen_bool(0.5) { 1 } else { 2 };
        let hidden = if coin == 1 { pair.0 } else { pair.1 };
        let observed = observed_without(&x, hidden);
        if strat.guess(pair, &observed, &mut rng) == coin {
            1.0
        } else {
            -1.0
        }
    });
    Ok(crate::sampling::estimate_from_payoffs(payoffs))
}

/// The Game-2-to-Game-1 adapter: precommit the strategy's pair; on an
/// observation, bet win on whichever element of the pair the rule picks.
/// Expected Game-1 payoff is (2/n) times the Game-2 payoff.
#[derive(Debug, Clone)]
pub struct AdaptedGame1 {
    inner: GamblerGame2Strategy,
}

pub fn adapt_game2_to_game1(s: GamblerGame2Strategy) -> AdaptedGame1 {
    AdaptedGame1 { inner: s }
}

impl Game1Play for AdaptedGame1 {
    fn choose(&self, observed: &[BigInt], _rng: &mut Prng) -> (usize, usize) {
        let (i1, i2) = self.inner.pair;
        if self.inner.rule.decide_tuple(observed) == 1 {
            (i1, i2)
        } else {
            (i2, i1)
        }
    }
}

/// The Game-1-to-Game-2 adapter (the intermediate game with a uniformly
/// random precommitted pair): follow the inner bet when it lands on the
/// pair, otherwise guess uniformly. Expected Game-2 payoff is the inner
/// strategy's Game-1 payoff divided by n-1.
pub struct AdaptedGame2<S> {
    inner: S,
    n: usize,
}

pub fn adapt_game1_to_game2<S: Game1Play>(s: S, n: usize) -> AdaptedGame2<S> {
    AdaptedGame2 { inner: s, n }
}

impl<S: Game1Play> Game2Play for AdaptedGame2<S> {
    fn pair(&self, rng: &mut Prng) -> (usize, usize) {
        let i1 = rng.gen_range(1..=self.n);
        let mut i2 = rng.gen_range(1..=self.n - 1);
        if i2 >= i1 {
            i2 += 1;
        }
        if i1 < i2 {
            (i1, i2)
        } else {
            (i2, i1)
        }
    }

    fn guess(&self, pair: (usize, usize), observed: &[BigInt], rng: &mut Prng) -> u8 {
        let (win, lose) = self.inner.choose(observed, rng);
        if (win, lose) == pair {
            1
        } else if (lose, win) == pair {
            2
        } else if rng.gen_bool(0.5) {
            1
        } else {
            2
        }
    }
}
