//! Minimax value solvers for Games 1 and 2 at tiny (n, N).
//!
//! Dealer mixtures over the C(N, n) pure tuples are optimized by a
//! multiplicative-weights (Hedge) loop against an exact best-response
//! oracle. The inner loop runs in floats for speed; certification is exact:
//! the reported upper bound is the exact best-response value against a
//! rationalized dealer mixture, and the lower bound is the exact average
//! payoff of the best pure tuple against the collected best responses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactdist::{ExactDist, Value};
use crate::games::{game2_value_of_dealer, DealerMixedStrategy};
use crate::rational::Rat;

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: u64 = 100_000;
/// Refuse instances with more than this many dealer pure strategies.
pub const SUPPORT_CAP: u64 = 10_000;

/// Solver output: an interval [lower, upper] certified exactly, the midpoint
/// as the value estimate, and the dealer mixture witnessing the upper bound.
#[derive(Debug, Clone)]
pub struct ValueReport {
    pub game: u8,
    pub n: usize,
    pub horizon: u64,
    pub value: f64,
    pub lower: Rat,
    pub upper: Rat,
    pub duality_gap: f64,
    pub iterations: u64,
    pub converged: bool,
    pub dealer: DealerMixedStrategy,
}

/// Shared instance data: pure tuples, distinct observations, and the
/// observation id of each tuple with one coordinate dropped.
struct Instance {
    n: usize,
    tuples: Vec<Vec<u64>>,
    /// proj[x][k] = id of tuples[x] without coordinate k (0-based)
    proj: Vec<Vec<usize>>,
    obs_count: usize,
}

impl Instance {
    fn new(n: usize, horizon: u64) -> Result<Instance> {
        if n < 2 || (horizon as usize) < n {
            return Err(Error::Domain(format!(
                "instance requires N >= n >= 2, got n={n}, N={horizon}"
            )));
        }
        // predicted count first: C(N, n) can dwarf memory
        let mut predicted: u128 = 1;
        for i in 0..n as u128 {
            predicted = predicted.saturating_mul(horizon as u128 - i) / (i + 1);
            if predicted > SUPPORT_CAP as u128 {
                return Err(Error::Capacity {
                    predicted: format!("C({horizon},{n}) pure tuples"),
                    cap: SUPPORT_CAP,
                });
            }
        }
        let tuples: Vec<Vec<u64>> = crate::subsets::combinations(horizon as usize, n)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as u64).collect())
            .collect();
        let mut obs_ids: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut proj = Vec::with_capacity(tuples.len());
        for t in &tuples {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                let mut o = t.clone();
                o.remove(k);
                let next = obs_ids.len();
                row.push(*obs_ids.entry(o).or_insert(next));
            }
            proj.push(row);
        }
        Ok(Instance {
            n,
            tuples,
            proj,
            obs_count: obs_ids.len(),
        })
    }

    /// Rationalize float weights into an exact dealer mixture (weights
    /// rounded to a 2^32 grid, residual assigned to the heaviest atom).
    fn rationalize(&self, weights: &[f64], horizon: u64) -> Result<DealerMixedStrategy> {
        const GRID: u64 = 1 << 32;
        let mut nums: Vec<(usize, u64)> = Vec::new();
        for (x, w) in weights.iter().enumerate() {
            let q = (w * GRID as f64).round() as u64;
            if q > 0 {
                nums.push((x, q));
            }
        }
        if nums.is_empty() {
            return Err(Error::Domain("degenerate mixture".into()));
        }
        let total: u64 = nums.iter().map(|(_, q)| q).sum();
        let entries = nums.iter().map(|(x, q)| {
            let v = Value::Tuple(self.tuples[*x].iter().map(|&c| BigInt::from(c)).collect());
            (v, Rat::new(BigInt::from(*q), BigInt::from(total)))
        });
        DealerMixedStrategy::new(ExactDist::from_entries(entries)?, BigInt::from(horizon))
    }
}

/// One Hedge run. `scaled_payoff` evaluates a best response computed from the
/// current float mixture and adds each pure tuple's payoff, scaled to an
/// integer by `denom_unit`, into the cumulative array. `exact_upper`
/// evaluates a rationalized mixture exactly.
fn hedge_loop(
    inst: &Instance,
    horizon: u64,
    tolerance: f64,
    max_iters: u64,
    game: u8,
    denom_unit: i64,
    mut best_respond: impl FnMut(&[f64]) -> Vec<i64>,
    mut exact_upper: impl FnMut(&DealerMixedStrategy) -> Result<Rat>,
) -> Result<ValueReport> {
    let k = inst.tuples.len();
    let ln_k = (k as f64).ln().max(1e-9);
    let mut cum = vec![0i64; k];
    let mut avg_w = vec![0f64; k];
    let mut weights = vec![1.0 / k as f64; k];

    let mut best_lower: Option<Rat> = None;
    let mut best_upper: Option<(Rat, DealerMixedStrategy)> = None;
    let mut iters = 0u64;
    let check_every = 200u64;

    let mut gap = f64::INFINITY;
    while iters < max_iters {
        // best response to the current mixture; payoffs accumulate exactly
        let payoffs = best_respond(&weights);
        for (c, p) in cum.iter_mut().zip(payoffs.iter()) {
            *c += p;
        }
        for (a, w) in avg_w.iter_mut().zip(weights.iter()) {
            *a += w;
        }
        iters += 1;

        // Hedge update: dealer minimizes, so weight decays with payoff
        let eta = (8.0 * ln_k / iters as f64).sqrt();
        let unit = denom_unit as f64;
        let m = cum
            .iter()
            .map(|&c| -eta * c as f64 / unit)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (w, &c) in weights.iter_mut().zip(cum.iter()) {
            *w = (-eta * c as f64 / unit - m).exp();
            z += *w;
        }
        for w in weights.iter_mut() {
            *w /= z;
        }

        if iters % check_every == 0 || iters == max_iters {
            // exact lower bound: best pure tuple against the BR average
            let denom = BigInt::from(denom_unit) * BigInt::from(iters);
            let min_cum = *cum.iter().min().expect("nonempty");
            let lower = Rat::new(BigInt::from(min_cum), denom);
            if best_lower.as_ref().map_or(true, |b| &lower > b) {
                best_lower = Some(lower);
            }
            // exact upper bound: rationalized average mixture, exact BR value
            let mut avg: Vec<f64> = avg_w.iter().map(|a| a / iters as f64).collect();
            for a in avg.iter_mut() {
                if *a < 1e-9 {
                    *a = 0.0;
                }
            }
            let dealer = inst.rationalize(&avg, horizon)?;
            let upper = exact_upper(&dealer)?;
            if best_upper.as_ref().map_or(true, |(b, _)| &upper < b) {
                best_upper = Some((upper, dealer));
            }
            let lo = best_lower.as_ref().unwrap();
            let (up, _) = best_upper.as_ref().unwrap();
            gap = (up - lo).to_f64().unwrap_or(f64::INFINITY);
            if gap <= tolerance {
                break;
            }
        }
    }

    let lower = best_lower.expect("at least one checkpoint");
    let (upper, dealer) = best_upper.expect("at least one checkpoint");
    // the value lies in [lower, upper]; clamp the lower edge at the trivial 0
    let lo_val = lower.to_f64().unwrap_or(0.0);
    let up_val = upper.to_f64().unwrap_or(1.0);
    Ok(ValueReport {
        game,
        n: inst.n,
        horizon,
        value: (lo_val + up_val) / 2.0,
        lower,
        upper,
        duality_gap: gap,
        iterations: iters,
        converged: gap <= tolerance,
        dealer,
    })
}

/// Solve Game 2: min over dealer mixtures of the max pairwise projection
/// distance.
pub fn solve_game2(
    n: usize,
    horizon: u64,
    tolerance: f64,
    max_iters: u64,
) -> Result<ValueReport> {
    let inst = Instance::new(n, horizon)?;
    let k = inst.tuples.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();

    let best_respond = |weights: &[f64]| -> Vec<i64> {
        // pick the pair with the largest float tvd, with its MAP rule
        let mut best: Option<(f64, usize, Vec<bool>)> = None;
        let mut pi = vec![0f64; inst.obs_count];
        let mut pj = vec![0f64; inst.obs_count];
        for (pair_idx, &(i, j)) in pairs.iter().enumerate() {
            for v in pi.iter_mut() {
                *v = 0.0;
            }
            for v in pj.iter_mut() {
                *v = 0.0;
            }
            for x in 0..k {
                pi[inst.proj[x][i]] += weights[x];
                pj[inst.proj[x][j]] += weights[x];
            }
            let tv: f64 = pi
                .iter()
                .zip(pj.iter())
                .map(|(a, b)| (a - b).max(0.0))
                .sum();
            if best.as_ref().map_or(true, |(b, _, _)| tv > *b) {
                let guess2: Vec<bool> =
                    pi.iter().zip(pj.iter()).map(|(a, b)| a < b).collect();
                best = Some((tv, pair_idx, guess2));
            }
        }
        let (_, pair_idx, guess2) = best.expect("at least one pair");
        let (i, j) = pairs[pair_idx];
        // doubled payoff of each pure tuple against this response
        (0..k)
            .map(|x| {
                let si = if guess2[inst.proj[x][i]] { -1i64 } else { 1 };
                let sj = if guess2[inst.proj[x][j]] { 1i64 } else { -1 };
                si + sj
            })
            .collect()
    };

    let exact_upper =
        |dealer: &DealerMixedStrategy| -> Result<Rat> { Ok(game2_value_of_dealer(dealer)?.value) };

    hedge_loop(
        &inst, horizon, tolerance, max_iters, 2, 2, best_respond, exact_upper,
    )
}

/// Exact Game-1 best-response value against an exact dealer mixture:
/// sum over observations of (max_k - min_k) of the joint mass of
/// (observation, hidden coordinate k).
fn game1_exact_value(dealer: &DealerMixedStrategy) -> Result<Rat> {
    let n = dealer.n;
    let n_rat = Rat::from_integer(BigInt::from(n as u64));
    let mut table: BTreeMap<Vec<BigInt>, Vec<Rat>> = BTreeMap::new();
    for (v, p) in dealer.dist.iter() {
        let t = v.as_tuple().expect("tuple");
        let share = p / &n_rat;
        for kpos in 0..n {
            let mut o = t.to_vec();
            o.remove(kpos);
            table.entry(o).or_insert_with(|| vec![Rat::zero(); n])[kpos] += &share;
        }
    }
    let mut total = Rat::zero();
    for (_, row) in table {
        let mx = row.iter().max().expect("n >= 2").clone();
        let mn = row.iter().min().expect("n >= 2").clone();
        total += mx - mn;
    }
    Ok(total)
}

/// Solve Game 1: the hidden coordinate is uniform; the gambler names win and
/// lose positions from the observed (n-1)-tuple.
pub fn solve_game1(
    n: usize,
    horizon: u64,
    tolerance: f64,
    max_iters: u64,
) -> Result<ValueReport> {
    let inst = Instance::new(n, horizon)?;
    let k = inst.tuples.len();

    let best_respond = |weights: &[f64]| -> Vec<i64> {
        let mut mass = vec![vec![0f64; n]; inst.obs_count];
        for x in 0..k {
            for kpos in 0..n {
                mass[inst.proj[x][kpos]][kpos] += weights[x];
            }
        }
        // MAP win/lose per observation (ties to the lowest index)
        let rule: Vec<(usize, usize)> = mass
            .iter()
            .map(|row| {
                let mut win = 0;
                let mut lose = 0;
                for kpos in 1..n {
                    if row[kpos] > row[win] {
                        win = kpos;
                    }
                    if row[kpos] < row[lose] {
                        lose = kpos;
                    }
                }
                (win, lose)
            })
            .collect();
        // n-scaled payoff of each pure tuple against this rule
        (0..k)
            .map(|x| {
                let mut p = 0i64;
                for kpos in 0..n {
                    let (win, lose) = rule[inst.proj[x][kpos]];
                    if win == kpos {
                        p += 1;
                    }
                    if lose == kpos {
                        p -= 1;
                    }
                }
                p
            })
            .collect()
    };

    let exact_upper = |dealer: &DealerMixedStrategy| -> Result<Rat> { game1_exact_value(dealer) };

    hedge_loop(
        &inst,
        horizon,
        tolerance,
        max_iters,
        1,
        n as i64,
        best_respond,
        exact_upper,
    )
}
