//! Seeded random-binning simulations and the block schemes built on them.
//!
//! Trial `i` draws from a ChaCha8 stream selected by `(seed, i)`, so results
//! do not depend on how rayon schedules the trials.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matching::{
    all_translations, build_delta_gamma, classify, maximal_factorization, scheme_4x3,
    DeltaGammaScheme, MatchingError, MatchingInstance, StructureClass, DEFAULT_CYCLE_CAP,
};

/// Largest `n1^L` for which every tuple is hashed explicitly.
pub const EXACT_TUPLE_LIMIT: f64 = 1e6;

const POISSON_MEAN_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("degenerate binning configuration: {0}")]
    DegenerateConfig(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinningConfig {
    pub n1: u64,
    pub n2: u64,
    pub l: usize,
    /// Defaults to `1/sqrt(L)`.
    pub delta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl BinningConfig {
    pub fn new(n1: u64, n2: u64, l: usize, trials: usize, seed: u64) -> Self {
        BinningConfig {
            n1,
            n2,
            l,
            delta: None,
            trials,
            seed,
        }
    }
}

/// Derived constants of one binning configuration, all sizes in log2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinningPlan {
    pub n1: u64,
    pub n2: u64,
    #[serde(rename = "L")]
    pub l: usize,
    pub delta: f64,
    pub log2_bins: f64,
    /// Bin count when it fits in a `u64`.
    pub bins: Option<u64>,
    pub log2_mu1: f64,
    pub log2_mu2: f64,
    /// `log2((1 + delta) mu1)`, the cost of naming a tuple inside a bin.
    pub index_bits: f64,
    pub chebyshev_bound: f64,
    pub exact: bool,
}

impl BinningPlan {
    pub fn new(cfg: &BinningConfig) -> Result<Self, SimError> {
        let (n1, n2, l) = (cfg.n1, cfg.n2, cfg.l);
        if n2 == 0 || n2 >= n1 {
            return Err(SimError::InvalidConfig(format!(
                "need 0 < n2 < n1, got n1={n1}, n2={n2}"
            )));
        }
        if l == 0 {
            return Err(SimError::InvalidConfig("L must be at least 1".into()));
        }
        let lf = l as f64;
        let delta = cfg.delta.unwrap_or(1.0 / lf.sqrt());
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "delta must be positive, got {delta}"
            )));
        }
        let (lg1, lg2) = ((n1 as f64).log2(), (n2 as f64).log2());
        let e = lf * (1.0 - delta);
        let e_round = e.round();
        let integral = (e - e_round).abs() < 1e-9 && e_round >= 0.0;
        let raw = e * lg2;
        let (log2_bins, bins) = if integral {
            let k = e_round as u32;
            (e_round * lg2, n2.checked_pow(k))
        } else if raw < 62.0 {
            let b = raw.exp2().round() as u64;
            if b < 1 {
                return Err(SimError::DegenerateConfig(format!(
                    "{n2}^{e} rounds to zero bins"
                )));
            }
            ((b as f64).log2(), Some(b))
        } else {
            (raw, None)
        };
        let log2_mu1 = lf * lg1 - log2_bins;
        let log2_mu2 = lf * lg2 - log2_bins;
        let one_minus_p = 1.0 - (-log2_bins).exp2();
        let d2 = 2.0 * delta.log2();
        let chebyshev_bound = one_minus_p * ((-d2 - log2_mu1).exp2() + (-d2 - log2_mu2).exp2());
        Ok(BinningPlan {
            n1,
            n2,
            l,
            delta,
            log2_bins,
            bins,
            log2_mu1,
            log2_mu2,
            index_bits: (1.0 + delta).log2() + log2_mu1,
            chebyshev_bound,
            exact: lf * lg1 <= EXACT_TUPLE_LIMIT.log2() + 1e-9,
        })
    }

    pub fn bits_per_symbol(&self) -> f64 {
        self.index_bits / self.l as f64
    }
}

/// `log2(n1/n2) + log2(n2)/sqrt(L) + log2(1 + 1/sqrt(L))/L`, the index cost per symbol when `L(1 - delta)` is an integer.
pub fn analytic_bits_per_symbol(n1: u64, n2: u64, l: usize) -> f64 {
    let lf = l as f64;
    let s = lf.sqrt();
    ((n1 as f64) / (n2 as f64)).log2() + (n2 as f64).log2() / s + (1.0 + 1.0 / s).log2() / lf
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Outcome of conveying one acceptable tuple.
#[derive(Debug, Clone, PartialEq)]
struct BinOutcome {
    failed: bool,
    /// Per-coordinate choice the receivers learn, when binning succeeded.
    chosen: Option<Vec<usize>>,
    decode_ok: bool,
}

/// Relative deviation `(T - mu) / mu` of a `Binomial(n, p)` count and whether `T = 0`.
fn sample_count(log2_n: f64, log2_p: f64, rng: &mut ChaCha8Rng) -> (bool, f64) {
    let p = log2_p.exp2();
    let mu = (log2_n + log2_p).exp2();
    if log2_n < 63.0 {
        let n = log2_n.exp2().round() as u64;
        let mu = n as f64 * p;
        let t = Binomial::new(n, p).expect("valid binomial").sample(rng);
        return (t == 0, t as f64 / mu - 1.0);
    }
    if mu < POISSON_MEAN_LIMIT {
        let t: f64 = Poisson::new(mu).expect("valid poisson").sample(rng);
        return (t == 0.0, t / mu - 1.0);
    }
    let z: f64 = StandardNormal.sample(rng);
    let dev = z * ((1.0 - p) / mu).sqrt();
    (mu * (1.0 + dev) < 0.5, dev)
}

fn bin_sampled(
    plan: &BinningPlan,
    acceptable: Option<&[Vec<usize>]>,
    rng: &mut ChaCha8Rng,
) -> BinOutcome {
    let lf = plan.l as f64;
    let (lg1, lg2) = ((plan.n1 as f64).log2(), (plan.n2 as f64).log2());
    let log2_p = -plan.log2_bins;
    let (zero2, d2) = sample_count(lf * lg2, log2_p, rng);
    // the remaining n1^L - n2^L tuples
    let w = (lf * (lg2 - lg1)).exp2();
    let log2_rest = lf * lg1 + (1.0 - w).log2();
    let (_, dr) = sample_count(log2_rest, log2_p, rng);
    let rel1 = w * d2 + (1.0 - w) * dr;
    let failed = zero2 || rel1 >= plan.delta;
    let chosen = (!failed).then(|| {
        acceptable
            .map(|acc| {
                acc.iter()
                    .map(|a| a[rng.random_range(0..a.len())])
                    .collect()
            })
            .unwrap_or_default()
    });
    BinOutcome {
        failed,
        chosen,
        decode_ok: true,
    }
}

fn bin_exact(plan: &BinningPlan, acceptable: &[Vec<usize>], rng: &mut ChaCha8Rng) -> BinOutcome {
    let n1 = plan.n1 as usize;
    let b = plan.bins.expect("exact mode has an integral bin count");
    let total = n1.pow(plan.l as u32);
    let key: u64 = rng.random();
    let bin_of = |i: usize| splitmix64(key ^ (i as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93)) % b;
    let mut member = vec![vec![false; n1]; plan.l];
    for (l, acc) in acceptable.iter().enumerate() {
        for &x in acc {
            member[l][x] = true;
        }
    }
    let digits = |mut i: usize| {
        let mut d = vec![0; plan.l];
        for x in d.iter_mut() {
            *x = i % n1;
            i /= n1;
        }
        d
    };
    let bin0: Vec<usize> = (0..total).filter(|&i| bin_of(i) == 0).collect();
    let rank = bin0
        .iter()
        .position(|&i| digits(i).iter().enumerate().all(|(l, &x)| member[l][x]));
    let mu1 = plan.log2_mu1.exp2();
    let failed = rank.is_none() || bin0.len() as f64 >= (1.0 + plan.delta) * mu1;
    if failed {
        return BinOutcome {
            failed,
            chosen: None,
            decode_ok: true,
        };
    }
    let rank = rank.unwrap();
    let sent = digits(bin0[rank]);
    // the receiver lists bin 0 from the shared key and takes the indexed entry
    let received = digits((0..total).filter(|&i| bin_of(i) == 0).nth(rank).unwrap());
    let decode_ok = received == sent && (rank as f64) < (1.0 + plan.delta) * mu1;
    BinOutcome {
        failed,
        chosen: Some(received),
        decode_ok,
    }
}

fn random_acceptable(plan: &BinningPlan, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    (0..plan.l)
        .map(|_| {
            let mut v = sample_indices(rng, plan.n1 as usize, plan.n2 as usize).into_vec();
            v.sort_unstable();
            v
        })
        .collect()
}

fn run_bin(plan: &BinningPlan, acceptable: &[Vec<usize>], rng: &mut ChaCha8Rng) -> BinOutcome {
    if plan.exact {
        bin_exact(plan, acceptable, rng)
    } else {
        bin_sampled(plan, Some(acceptable), rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scheme4x3Report {
    pub bits_per_symbol: f64,
    pub exhaustive_decode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub bits_per_symbol_mean: f64,
    pub bits_per_symbol_std: f64,
    pub decode_errors: usize,
    pub binning_failure_rate: f64,
    pub chebyshev_bound: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    pub analytic_bits_per_symbol: f64,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<StructureClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme_4x3: Option<Scheme4x3Report>,
}

struct TrialStats {
    bits: f64,
    failed: bool,
    decode_errors: usize,
}

fn aggregate(stats: &[TrialStats], l: usize) -> (f64, f64, usize, f64) {
    let n = stats.len().max(1) as f64;
    let per: Vec<f64> = stats.iter().map(|s| s.bits / l as f64).collect();
    let mean = per.iter().sum::<f64>() / n;
    let var = per.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let errors = stats.iter().map(|s| s.decode_errors).sum();
    let fail = stats.iter().filter(|s| s.failed).count() as f64 / n;
    (mean, var.sqrt(), errors, fail)
}

/// Bin `n1^L` tuples and report how often naming an acceptable one fails.
pub fn simulate_binning(cfg: &BinningConfig) -> Result<SimulationResult, SimError> {
    let plan = BinningPlan::new(cfg)?;
    let stats: Vec<TrialStats> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let out = if plan.exact {
                let acc = random_acceptable(&plan, &mut rng);
                bin_exact(&plan, &acc, &mut rng)
            } else {
                bin_sampled(&plan, None, &mut rng)
            };
            TrialStats {
                bits: plan.index_bits,
                failed: out.failed,
                decode_errors: usize::from(!out.decode_ok),
            }
        })
        .collect();
    let (mean, std, decode_errors, fail) = aggregate(&stats, plan.l);
    Ok(SimulationResult {
        bits_per_symbol_mean: mean,
        bits_per_symbol_std: std,
        decode_errors,
        binning_failure_rate: fail,
        chebyshev_bound: plan.chebyshev_bound,
        l: plan.l,
        trials: cfg.trials,
        seed: cfg.seed,
        analytic_bits_per_symbol: plan.bits_per_symbol(),
        mode: if plan.exact { "exact" } else { "sampled" },
        class: None,
        scheme_4x3: None,
    })
}

/// Options shared by the block schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeOptions {
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    /// Treat every binning attempt as failed.
    pub force_fallback: bool,
}

impl SchemeOptions {
    pub fn new(l: usize, trials: usize, seed: u64) -> Self {
        SchemeOptions {
            l,
            trials,
            seed,
            force_fallback: false,
        }
    }
}

/// The per-coordinate schemes of a matching instance, one per bullet-set translation.
pub fn translation_schemes(inst: &MatchingInstance) -> Vec<DeltaGammaScheme> {
    all_translations(inst.m1(), inst.m2())
        .iter()
        .map(|bs| build_delta_gamma(inst, bs))
        .collect()
}

fn run_block_scheme(
    inst: &MatchingInstance,
    opts: &SchemeOptions,
    fallback_bits: f64,
) -> Result<SimulationResult, SimError> {
    let (m1, m2, m) = (inst.m1(), inst.m2(), inst.m());
    let cfg = BinningConfig::new(
        (m1 * m2) as u64,
        (m1 + m2 - 1) as u64,
        opts.l,
        opts.trials,
        opts.seed,
    );
    let plan = BinningPlan::new(&cfg)?;
    let schemes = translation_schemes(inst);
    let covering: Vec<Vec<usize>> = inst
        .cells()
        .map(|c| {
            (0..schemes.len())
                .filter(|&k| schemes[k].bullet.contains(c))
                .collect()
        })
        .collect();
    let lm = (m as f64).log2();
    let l = opts.l;
    let stats: Vec<TrialStats> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(opts.seed, t);
            let draws: Vec<(usize, usize, usize)> = (0..l)
                .map(|_| {
                    (
                        rng.random_range(0..m1),
                        rng.random_range(0..m2),
                        rng.random_range(0..m),
                    )
                })
                .collect();
            let acceptable: Vec<Vec<usize>> = draws
                .iter()
                .map(|&(a, b, _)| covering[a * m2 + b].clone())
                .collect();
            let out = run_bin(&plan, &acceptable, &mut rng);
            let mut errors = usize::from(!out.decode_ok);
            match out.chosen.filter(|_| !opts.force_fallback) {
                Some(chosen) => {
                    for (&(a, b, w1), &k) in draws.iter().zip(&chosen) {
                        let sch = &schemes[k];
                        let s = sch.encode_bullet(a, w1);
                        let ok = sch.bullet.contains((a, b))
                            && sch.decode_user1(s, a) == w1
                            && sch.decode_user2(s, b) == inst.pi(a, b).apply(w1);
                        errors += usize::from(!ok);
                    }
                    TrialStats {
                        bits: 1.0 + plan.index_bits + l as f64 * lm,
                        failed: out.failed,
                        decode_errors: errors,
                    }
                }
                None => {
                    // uncoded: both messages sent verbatim
                    let sent: Vec<(usize, usize)> = draws
                        .iter()
                        .map(|&(a, b, w1)| (w1, inst.pi(a, b).apply(w1)))
                        .collect();
                    let wrong = draws
                        .iter()
                        .zip(&sent)
                        .filter(|(&(a, b, w1), &(x, y))| x != w1 || y != inst.pi(a, b).apply(w1));
                    errors += wrong.count();
                    TrialStats {
                        bits: fallback_bits,
                        failed: true,
                        decode_errors: errors,
                    }
                }
            }
        })
        .collect();
    let (mean, std, decode_errors, fail) = aggregate(&stats, l);
    Ok(SimulationResult {
        bits_per_symbol_mean: mean,
        bits_per_symbol_std: std,
        decode_errors,
        binning_failure_rate: fail,
        chebyshev_bound: plan.chebyshev_bound,
        l,
        trials: opts.trials,
        seed: opts.seed,
        analytic_bits_per_symbol: (1.0 + plan.index_bits) / l as f64 + lm,
        mode: if plan.exact { "exact" } else { "sampled" },
        class: None,
        scheme_4x3: None,
    })
}

/// Block scheme on the quaternary instance with exchanged shift row; falls back to `8L + 1` bits.
pub fn run_cb2_scheme(opts: &SchemeOptions) -> Result<SimulationResult, SimError> {
    let inst = MatchingInstance::cb2();
    let mut res = run_block_scheme(&inst, opts, 8.0 * opts.l as f64 + 1.0)?;
    res.class = Some(StructureClass::Minimal);
    Ok(res)
}

/// Block scheme for any matching instance; maximal instances use the single-letter factorization.
pub fn run_matching_scheme(
    inst: &MatchingInstance,
    opts: &SchemeOptions,
) -> Result<SimulationResult, SimError> {
    if opts.l == 0 {
        return Err(SimError::InvalidConfig("L must be at least 1".into()));
    }
    let class = classify(inst, DEFAULT_CYCLE_CAP);
    let lm = (inst.m() as f64).log2();
    let scheme_4x3 = match scheme_4x3(inst) {
        Ok(s) => Some(Scheme4x3Report {
            bits_per_symbol: s.cost_bits(),
            exhaustive_decode: s.verify_exhaustive(inst),
        }),
        Err(_) => None,
    };
    if let Some(f) = maximal_factorization(inst) {
        let (m1, m2, m, l) = (inst.m1(), inst.m2(), inst.m(), opts.l);
        let errors: usize = (0..opts.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(opts.seed, t);
                (0..l)
                    .filter(|_| {
                        let (a, b, w1) = (
                            rng.random_range(0..m1),
                            rng.random_range(0..m2),
                            rng.random_range(0..m),
                        );
                        let s = f.deltas[a].apply(w1);
                        f.deltas[a].inverse().apply(s) != w1
                            || f.gammas[b].apply(s) != inst.pi(a, b).apply(w1)
                    })
                    .count()
            })
            .sum();
        return Ok(SimulationResult {
            bits_per_symbol_mean: lm,
            bits_per_symbol_std: 0.0,
            decode_errors: errors,
            binning_failure_rate: 0.0,
            chebyshev_bound: 0.0,
            l,
            trials: opts.trials,
            seed: opts.seed,
            analytic_bits_per_symbol: lm,
            mode: "single-letter",
            class: Some(class),
            scheme_4x3,
        });
    }
    let fallback = 2.0 * opts.l as f64 * lm + 1.0;
    let mut res = run_block_scheme(inst, opts, fallback)?;
    res.class = Some(class);
    res.scheme_4x3 = scheme_4x3;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_constants() {
        let plan = BinningPlan::new(&BinningConfig::new(4, 3, 100, 1, 0)).unwrap();
        assert_eq!(plan.bins, None);
        assert!((plan.log2_bins - 90.0 * 3f64.log2()).abs() < 1e-9);
        assert!((plan.bits_per_symbol() - analytic_bits_per_symbol(4, 3, 100)).abs() < 1e-12);
        assert!(!plan.exact);
        let small = BinningPlan::new(&BinningConfig::new(4, 3, 4, 1, 0)).unwrap();
        assert!(small.exact);
        assert_eq!(small.bins, Some(9));
    }

    #[test]
    fn invalid_configs() {
        assert!(BinningPlan::new(&BinningConfig::new(3, 3, 10, 1, 0)).is_err());
        assert!(BinningPlan::new(&BinningConfig::new(4, 3, 0, 1, 0)).is_err());
        let mut cfg = BinningConfig::new(4, 3, 10, 1, 0);
        cfg.delta = Some(3.0);
        assert!(matches!(
            BinningPlan::new(&cfg),
            Err(SimError::DegenerateConfig(_))
        ));
    }

    #[test]
    fn binary_versus_unary_tends_to_one_bit() {
        let r = simulate_binning(&BinningConfig::new(2, 1, 10_000, 10, 1)).unwrap();
        assert!((r.bits_per_symbol_mean - 1.0).abs() < 1e-3);
    }

    #[test]
    fn exact_mode_round_trips() {
        let r = simulate_binning(&BinningConfig::new(4, 3, 6, 200, 3)).unwrap();
        assert_eq!(r.mode, "exact");
        assert_eq!(r.decode_errors, 0);
        assert!(r.binning_failure_rate < 1.0);
    }

    #[test]
    fn short_block_cb2_decodes() {
        let r = run_cb2_scheme(&SchemeOptions::new(4, 50, 9)).unwrap();
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.mode, "exact");
    }

    #[test]
    fn forced_fallback_costs_uncoded_bits() {
        let opts = SchemeOptions {
            force_fallback: true,
            ..SchemeOptions::new(40, 5, 2)
        };
        let r = run_cb2_scheme(&opts).unwrap();
        assert_eq!(r.decode_errors, 0);
        assert!((r.bits_per_symbol_mean - (8.0 * 40.0 + 1.0) / 40.0).abs() < 1e-12);
        assert_eq!(r.binning_failure_rate, 1.0);
    }

    #[test]
    fn maximal_short_circuit() {
        let r =
            run_matching_scheme(&MatchingInstance::cb1(), &SchemeOptions::new(100, 10, 4)).unwrap();
        assert_eq!(r.bits_per_symbol_mean, 2.0);
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.class, Some(StructureClass::Maximal));
    }
}
