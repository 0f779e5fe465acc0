//! Event-level simulation of the two-slot incremental relaying protocol.
//!
//! One draw per link per cycle (quasi-static fading). Trial `i` of a run
//! with seed `s` reads its variates from a fixed position of the ChaCha8
//! stream keyed by `s`, so estimates are bit-identical however the trials
//! are split across worker threads. Tallies are integer counts, which makes
//! the parallel reduction exact and order-insensitive.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{LinkStats, SystemParams};

/// Default trial count for interactive runs.
pub const DEFAULT_TRIALS: u64 = 1_000_000;

/// Trials per parallel work unit.
const CHUNK: u64 = 1 << 16;

/// 32-bit stream words consumed by one trial (five `u64` draws).
const WORDS_PER_TRIAL: u128 = 10;

/// Protocol variants compared in the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Direct attempt first, relay plus MRC on failure.
    Incremental,
    /// Two-hop relaying that ignores the direct link.
    NoDirectTwoHop,
    /// Single-slot transmission with no relay.
    DirectOnly,
    /// Incremental relaying with the relay power cap removed.
    NoRpConstraint,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Incremental,
        Variant::NoDirectTwoHop,
        Variant::DirectOnly,
        Variant::NoRpConstraint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Incremental => "incremental",
            Variant::NoDirectTwoHop => "no_direct_two_hop",
            Variant::DirectOnly => "direct_only",
            Variant::NoRpConstraint => "no_rp_constraint",
        }
    }

    fn uncapped_relay(self) -> bool {
        self == Variant::NoRpConstraint
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant '{s}'"))
    }
}

/// Squared channel magnitudes for one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub g_sp2: f64,
    pub g_rp2: f64,
    pub h_sr2: f64,
    pub h_rd2: f64,
    pub h_sd2: f64,
}

/// Exponential variate with rate `lambda` from exactly one `u64` draw.
fn exponential<R: RngCore + ?Sized>(rng: &mut R, lambda: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -(-u).ln_1p() / lambda
}

impl ChannelGains {
    /// Draws all five gains, consuming exactly five `u64` values.
    pub fn sample<R: RngCore + ?Sized>(links: &LinkStats, rng: &mut R) -> Self {
        Self {
            g_sp2: exponential(rng, links.lambda_sp),
            g_rp2: exponential(rng, links.lambda_rp),
            h_sr2: exponential(rng, links.lambda_sr),
            h_rd2: exponential(rng, links.lambda_rd),
            h_sd2: exponential(rng, links.lambda_sd),
        }
    }
}

/// Powers, SNRs and the rate achieved in one protocol cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub gains: ChannelGains,
    pub p_s: f64,
    pub hp_r: f64,
    pub p_r: f64,
    pub gamma_r: f64,
    pub gamma_d1: f64,
    pub gamma_d2: f64,
    pub gamma_d: f64,
    pub achieved_rate: f64,
}

impl TrialOutcome {
    /// Deterministic protocol evaluation for given gains.
    pub fn evaluate(sys: &SystemParams, gains: ChannelGains, variant: Variant) -> Self {
        let i = sys.i_over_no;
        let gamma_th = sys.gamma_th();
        let p_s = i / gains.g_sp2;
        let hp_r = sys.beta() * p_s * gains.h_sr2;
        let p_r = if variant.uncapped_relay() {
            hp_r
        } else {
            hp_r.min(i / gains.g_rp2)
        };
        let gamma_r = (1.0 - sys.rho) * p_s * gains.h_sr2;
        let gamma_d1 = p_s * gains.h_sd2;
        let gamma_d2 = p_r * gains.h_rd2;
        let gamma_d = gamma_d1 + gamma_d2;
        let decoded = gamma_r >= gamma_th;
        let achieved_rate = match variant {
            Variant::Incremental | Variant::NoRpConstraint => {
                if gamma_d1 >= gamma_th {
                    sys.rs
                } else if decoded && gamma_d >= gamma_th {
                    0.5 * sys.rs
                } else {
                    0.0
                }
            }
            Variant::DirectOnly => {
                if gamma_d1 >= gamma_th {
                    sys.rs
                } else {
                    0.0
                }
            }
            Variant::NoDirectTwoHop => {
                if decoded && gamma_d2 >= gamma_th {
                    0.5 * sys.rs
                } else {
                    0.0
                }
            }
        };
        Self { gains, p_s, hp_r, p_r, gamma_r, gamma_d1, gamma_d2, gamma_d, achieved_rate }
    }
}

/// Draws gains from `rng` and evaluates one cycle.
pub fn run_trial<R: RngCore + ?Sized>(sys: &SystemParams, rng: &mut R, variant: Variant) -> TrialOutcome {
    TrialOutcome::evaluate(sys, ChannelGains::sample(&sys.links, rng), variant)
}

/// Integer tallies over a batch of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub trials: u64,
    /// Trials scoring the full rate.
    pub full_rate: u64,
    /// Trials scoring half the rate.
    pub half_rate: u64,
    pub direct_success: u64,
    pub relay_decode: u64,
    pub mrc_success: u64,
    pub p1_event: u64,
    pub p2_event: u64,
    pub p3_event: u64,
    pub q1_event: u64,
}

impl EventCounts {
    fn record(&mut self, outcome: &TrialOutcome, sys: &SystemParams) {
        let g = sys.gamma_th();
        let direct = outcome.gamma_d1 >= g;
        let decoded = outcome.gamma_r >= g;
        let combined = outcome.gamma_d >= g;
        self.trials += 1;
        if outcome.achieved_rate == sys.rs {
            self.full_rate += 1;
        } else if outcome.achieved_rate > 0.0 {
            self.half_rate += 1;
        }
        self.direct_success += direct as u64;
        self.relay_decode += decoded as u64;
        self.mrc_success += combined as u64;
        if !decoded {
            self.p1_event += 1;
        } else if direct {
            self.p2_event += 1;
        } else if combined {
            self.q1_event += 1;
        } else {
            self.p3_event += 1;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.full_rate += other.full_rate;
        self.half_rate += other.half_rate;
        self.direct_success += other.direct_success;
        self.relay_decode += other.relay_decode;
        self.mrc_success += other.mrc_success;
        self.p1_event += other.p1_event;
        self.p2_event += other.p2_event;
        self.p3_event += other.p3_event;
        self.q1_event += other.q1_event;
        self
    }
}

/// Relative frequencies of the protocol events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventFrequencies {
    pub direct_success: f64,
    pub relay_decode: f64,
    pub mrc_success: f64,
    pub p1_event: f64,
    pub p2_event: f64,
    pub p3_event: f64,
    pub q1_event: f64,
}

/// Throughput estimate with its standard error and event frequencies.
///
/// Events are always classified with the incremental-protocol definitions
/// applied to the simulated SNRs; only the rate accounting (and, for
/// [`Variant::NoRpConstraint`], the relay power rule) follows the variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub variant: Variant,
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub freq: EventFrequencies,
    pub counts: EventCounts,
}

impl McEstimate {
    fn from_counts(sys: &SystemParams, variant: Variant, c: EventCounts) -> Self {
        let n = c.trials as f64;
        let f = |k: u64| k as f64 / n;
        let mean = sys.rs * (c.full_rate as f64 + 0.5 * c.half_rate as f64) / n;
        let second = sys.rs * sys.rs * (c.full_rate as f64 + 0.25 * c.half_rate as f64) / n;
        let std_error = if c.trials > 1 {
            ((second - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self {
            variant,
            mean,
            std_error,
            trials: c.trials,
            freq: EventFrequencies {
                direct_success: f(c.direct_success),
                relay_decode: f(c.relay_decode),
                mrc_success: f(c.mrc_success),
                p1_event: f(c.p1_event),
                p2_event: f(c.p2_event),
                p3_event: f(c.p3_event),
                q1_event: f(c.q1_event),
            },
            counts: c,
        }
    }

    /// Binomial standard error of a frequency estimated from these trials.
    pub fn binomial_std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Stream positioned at the first variate of trial `index`.
pub fn trial_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * WORDS_PER_TRIAL);
    rng
}

/// Evaluates several variants on common random numbers in a single pass.
pub fn estimate_variants(sys: &SystemParams, trials: u64, seed: u64, variants: &[Variant]) -> Vec<McEstimate> {
    assert!(trials >= 1, "at least one trial is required");
    let chunks = trials.div_ceil(CHUNK);
    let zero = vec![EventCounts::default(); variants.len()];
    let totals = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(trials);
            let mut rng = trial_stream(seed, start);
            let mut counts = zero.clone();
            for _ in start..end {
                let gains = ChannelGains::sample(&sys.links, &mut rng);
                for (v, c) in variants.iter().zip(counts.iter_mut()) {
                    c.record(&TrialOutcome::evaluate(sys, gains, *v), sys);
                }
            }
            counts
        })
        .reduce(
            || zero.clone(),
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );
    variants
        .iter()
        .zip(totals)
        .map(|(v, c)| McEstimate::from_counts(sys, *v, c))
        .collect()
}

pub fn estimate_variant(sys: &SystemParams, trials: u64, seed: u64, variant: Variant) -> McEstimate {
    estimate_variants(sys, trials, seed, &[variant]).remove(0)
}

/// Incremental-relaying throughput estimate.
pub fn estimate(sys: &SystemParams, trials: u64, seed: u64) -> McEstimate {
    estimate_variant(sys, trials, seed, Variant::Incremental)
}

/// Draws `n` gain sets sequentially from a seeded stream; used by diagnostics.
pub fn sample_gains(links: &LinkStats, n: usize, seed: u64) -> Vec<ChannelGains> {
    let mut rng = trial_stream(seed, 0);
    (0..n).map(|_| ChannelGains::sample(links, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, lambdas_from_geometry, NetworkGeometry};

    fn reference(rho: f64) -> SystemParams {
        let links = lambdas_from_geometry(&NetworkGeometry::default());
        SystemParams::new(links, 0.7, rho, db_to_linear(6.0), 3.0).unwrap()
    }

    fn gains() -> ChannelGains {
        ChannelGains { g_sp2: 1.0, g_rp2: 1.0, h_sr2: 1.0, h_rd2: 1.0, h_sd2: 1.0 }
    }

    #[test]
    fn forced_direct_failure() {
        let mut sys = reference(0.5);
        sys.i_over_no = 4.0;
        let o = TrialOutcome::evaluate(&sys, gains(), Variant::Incremental);
        assert_eq!(o.gamma_d1, 4.0);
        assert!(o.gamma_d1 < sys.gamma_th());
        assert_eq!(TrialOutcome::evaluate(&sys, gains(), Variant::DirectOnly).achieved_rate, 0.0);
    }

    #[test]
    fn outcome_invariants() {
        let sys = reference(0.6);
        let mut rng = trial_stream(7, 0);
        for _ in 0..10_000 {
            let o = run_trial(&sys, &mut rng, Variant::Incremental);
            assert_eq!(o.p_s, sys.i_over_no / o.gains.g_sp2);
            assert_eq!(o.hp_r, sys.beta() * o.p_s * o.gains.h_sr2);
            assert_eq!(o.p_r, o.hp_r.min(sys.i_over_no / o.gains.g_rp2));
            assert_eq!(o.gamma_d, o.gamma_d1 + o.gamma_d2);
            let g = sys.gamma_th();
            let expected = if o.gamma_d1 >= g {
                sys.rs
            } else if o.gamma_r >= g && o.gamma_d >= g {
                sys.rs / 2.0
            } else {
                0.0
            };
            assert_eq!(o.achieved_rate, expected);
        }
    }

    #[test]
    fn zero_rho_means_silent_relay() {
        let sys = reference(0.0);
        let mut rng = trial_stream(3, 0);
        for _ in 0..1000 {
            let o = run_trial(&sys, &mut rng, Variant::Incremental);
            assert_eq!(o.p_r, 0.0);
            assert_eq!(o.gamma_d2, 0.0);
        }
    }

    #[test]
    fn inactive_cap_passes_harvested_power() {
        let sys = reference(0.5);
        let g = ChannelGains { g_rp2: 1e-9, ..gains() };
        let o = TrialOutcome::evaluate(&sys, g, Variant::Incremental);
        assert_eq!(o.p_r, o.hp_r);
    }

    #[test]
    fn uncapped_variant_ignores_primary_link() {
        let sys = reference(0.5);
        let g = ChannelGains { g_rp2: 1e9, ..gains() };
        let capped = TrialOutcome::evaluate(&sys, g, Variant::Incremental);
        let free = TrialOutcome::evaluate(&sys, g, Variant::NoRpConstraint);
        assert!(capped.p_r < free.p_r);
        assert_eq!(free.p_r, free.hp_r);
    }

    #[test]
    fn partition_is_exact() {
        let e = estimate(&reference(0.5), 50_000, 11);
        let c = e.counts;
        assert_eq!(c.p1_event + c.p2_event + c.p3_event + c.q1_event, c.trials);
    }

    #[test]
    fn chunking_does_not_change_results() {
        let sys = reference(0.5);
        let whole = estimate(&sys, 3 * CHUNK + 17, 5);
        // replay sequentially from a single stream
        let mut rng = trial_stream(5, 0);
        let mut counts = EventCounts::default();
        for _ in 0..3 * CHUNK + 17 {
            counts.record(&run_trial(&sys, &mut rng, Variant::Incremental), &sys);
        }
        assert_eq!(whole.counts, counts);
    }

    #[test]
    fn single_trial_has_zero_error() {
        let e = estimate(&reference(0.5), 1, 0);
        assert_eq!(e.trials, 1);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
    }
}
