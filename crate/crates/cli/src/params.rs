//! Parameter sets of the subcommands.
//!
//! Each set is declared once; the macro derives the clap flags (all optional)
//! and the resolved, serde-visible parameter struct with its defaults. The
//! effective configuration is defaults < config file < flags.

use clap::Args;
use serde::{Deserialize, Serialize};

macro_rules! params {
    ($args:ident => $params:ident { $( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr ),* $(,)? }) => {
        #[derive(Args, Debug, Default, Serialize)]
        pub struct $args {
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $params {
            $( $(#[doc = $doc])* pub $field: $ty, )*
        }

        impl Default for $params {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }
    };
}

params!(PrimesArgs => PrimesParams {
    /// Sieve limit.
    limit: u64 = 1_000_000,
    /// σ at which ψ(σ) and the prime sum are reported.
    sigma: f64 = 0.75,
    /// Prime list output (CSV).
    out: String = "primes.csv".into(),
});

params!(ZetaSampleArgs => ZetaSampleParams {
    sigma: f64 = 0.75,
    /// Window start T; heights are spread over [T, 2T].
    t: f64 = 1e4,
    n: usize = 1000,
    /// Seed of the grid phase offset (required).
    seed: u64 = 0,
    precision: f64 = 1e-8,
    out: String = "zeta_samples.csv".into(),
});

params!(McSampleArgs => McSampleParams {
    sigma: f64 = 0.75,
    /// Largest prime sampled individually.
    cutoff: f64 = 1e5,
    /// Replace the omitted primes by a Gaussian of equal variance.
    gaussian_tail: bool = true,
    n: usize = 10_000,
    /// Base seed (required).
    seed: u64 = 0,
    /// Prime table size.
    limit: u64 = 1_000_000,
    out: String = "mc_samples.csv".into(),
});

params!(CharfnTableArgs => CharfnTableParams {
    sigma: f64 = 0.75,
    /// Grid covers [-u_max, u_max]².
    u_max: f64 = 1.0,
    points: usize = 41,
    /// Primes above this enter analytically.
    p_cut: u64 = 1_000_000,
    limit: u64 = 1_000_000,
    /// When in (0, 1), also write the a_{k,l}, b_{k,l} table at this w.
    coeffs_w: f64 = 0.0,
    coeffs_k: usize = 6,
    out: String = "phi_hat.csv".into(),
});

params!(DensityArgs => DensityParams {
    sigma: f64 = 0.75,
    points: usize = 161,
    /// Output half-width; 0 picks 5√ψ + 1.
    half_width: f64 = 0.0,
    p_cut: u64 = 1_000_000,
    limit: u64 = 1_000_000,
    out: String = "density.csv".into(),
});

params!(ExpansionArgs => ExpansionParams {
    sigma: f64 = 0.6,
    /// Largest m + n.
    order: usize = 5,
    limit: u64 = 1_000_000,
    out: String = "expansion.json".into(),
});

params!(CountArgs => CountParams {
    /// Target value, e.g. 2, 1+1i, 0.5i.
    a: String = "2".into(),
    /// sigma_min,sigma_max,t_min,t_max
    rect: String = "0.5,2,0,50".into(),
    base_step: f64 = 0.05,
    clearance: f64 = 1e-6,
    max_halvings: usize = 6,
    refine: bool = true,
    /// Move an edge inward when it passes too close to a solution or the pole.
    perturb: bool = true,
    /// θ for the band prediction; 0 skips it.
    theta: f64 = 0.0,
    allow_theta: bool = false,
    out: String = "roots.csv".into(),
});

params!(LittlewoodArgs => LittlewoodParams {
    a: String = "2".into(),
    sigma: f64 = 0.75,
    t1: f64 = 100.0,
    t2: f64 = 200.0,
    /// When set, check Littlewood's lemma on this rectangle instead.
    rect: String = String::new(),
    limit: u64 = 1_000_000,
    out: String = "littlewood.csv".into(),
});

params!(DiscrepancyArgs => DiscrepancyParams {
    sigma: f64 = 0.75,
    t: f64 = 1e4,
    n: usize = 10_000,
    /// Seed of the grid phase offset (required).
    seed: u64 = 0,
    /// Quantile cuts per axis.
    cuts: usize = 200,
    precision: f64 = 1e-8,
    points: usize = 161,
    p_cut: u64 = 1_000_000,
    limit: u64 = 1_000_000,
    out: String = "discrepancy.csv".into(),
});

params!(CharfnCompareArgs => CharfnCompareParams {
    sigma: f64 = 0.75,
    t: f64 = 1e4,
    n: usize = 10_000,
    seed: u64 = 0,
    /// Points "u,v;u,v;...".
    uv: String = "0,0;0.3,0;0,0.3;0.2,0.2".into(),
    theta: f64 = 0.1,
    /// Frequencies must satisfy |u|, |v| ≤ (log T)^theta_l.
    theta_l: f64 = 0.2,
    precision: f64 = 1e-8,
    p_cut: u64 = 1_000_000,
    limit: u64 = 1_000_000,
    out: String = "charfn_compare.csv".into(),
});

params!(CltBoxArgs => CltBoxParams {
    theta: f64 = 0.1,
    t: f64 = 1e6,
    /// Boxes "a,b,c,d;..." in κ coordinates; inf allowed.
    boxes: String = "0,inf,-inf,inf".into(),
    order: usize = 5,
    /// Monte Carlo samples of the random model; 0 skips the simulation.
    mc_samples: usize = 0,
    seed: u64 = 0,
    cutoff: f64 = 1000.0,
    limit: u64 = 1_000_000,
    out: String = "clt_box.csv".into(),
});

params!(MomentCheckArgs => MomentCheckParams {
    sigma: f64 = 0.75,
    /// Y in R_Y.
    y: f64 = 100.0,
    /// Moment orders "1,2,3,4".
    ks: String = "1,2,3,4".into(),
    n: usize = 100_000,
    seed: u64 = 0,
    /// Tail levels A "0.5,1,1.5"; empty skips the tail check.
    tail_levels: String = "0.5,1,1.5,2".into(),
    limit: u64 = 1_000_000,
    out: String = "moments.csv".into(),
});
