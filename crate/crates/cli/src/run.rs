//! One function per subcommand: compute, then describe the result as a [`Bundle`].

use pinlab::bessel::{decompose_k, discretize_k_delta, estimate_c0, hitting_density, BesselSpec, HittingLaw};
use pinlab::coupling::{coupling_bound_check, CouplingConfig, DressOptions};
use pinlab::pinning::{
    correlation_length, homogeneous_free_energy, replica_log_partitions, sample_disorder, two_point, Estimate,
    PinningParams, ReplicaSet,
};
use pinlab::renewal::{fit_decay_rate, renewal_mass, RenewalLaw};
use pinlab::seeds::derive;
use serde_json::json;

use crate::artifacts::{num, Bundle};
use crate::config::{Command, RunConfig};
use crate::error::CliResult;

// seed streams below the run seed
const STREAM_REPLICAS: u64 = 0;
const STREAM_BOOTSTRAP: u64 = 1;
const STREAM_FIELD: u64 = 2;
const STREAM_C0: u64 = 3;
const STREAM_PAIRS: u64 = 4;

/// Threshold on `F̂` used to locate the critical point.
pub const CRITICAL_THRESHOLD: f64 = 1e-4;
const MAX_EXPANSIONS: usize = 32;
const BISECTIONS: usize = 30;

pub fn execute(cmd: Command, cfg: &RunConfig) -> CliResult<Bundle> {
    match cmd {
        Command::Renewal => renewal(cfg),
        Command::Pinning => pinning(cfg),
        Command::Bessel => bessel(cfg),
        Command::Decompose => decompose(cfg),
        Command::Couple => couple(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn params(cfg: &RunConfig, h: f64) -> CliResult<PinningParams> {
    Ok(PinningParams::new(cfg.beta, h)?)
}

fn renewal(cfg: &RunConfig) -> CliResult<Bundle> {
    let law = cfg.renewal_law()?;
    let seq = renewal_mass(&law, cfg.renewal_terms)?;
    let window = cfg.decay_window.unwrap_or((cfg.renewal_terms / 10, cfg.renewal_terms / 2));
    let fit = fit_decay_rate(&seq, window);

    let mut b = Bundle::new("renewal");
    b.csv("renewal_mass.csv", |w| seq.write_csv(w))?;
    let residual = law.normalization_residual();
    b.check("normalized", residual <= 1e-10, format!("|Σ K − 1| = {residual:.3e}"));
    let in_range = seq.u.iter().all(|&u| (0.0..=1.0 + 1e-12).contains(&u));
    b.check("mass_in_unit_interval", in_range, "0 ≤ u(n) ≤ 1");
    b.value("u_inf", seq.u_inf)?;
    b.value("normalization_residual", residual)?;
    match fit {
        Ok(f) => {
            b.check("decay_fit", true, format!("rate {:.6} on {:?}", f.rate, f.window));
            b.value("decay_fit", f)?;
        }
        Err(e) => b.check("decay_fit", false, e.to_string()),
    }
    Ok(b)
}

fn replicas(cfg: &RunConfig, law: &RenewalLaw, h: f64) -> CliResult<(ReplicaSet, Estimate, Estimate)> {
    let set = replica_log_partitions(law, cfg.disorder, params(cfg, h)?, cfg.n, cfg.replicas, derive(cfg.seed, STREAM_REPLICAS))?;
    let f = set.free_energy();
    let mu = set.mu(derive(cfg.seed, STREAM_BOOTSTRAP));
    Ok((set, f, mu))
}

/// `μ ≤ F` up to rounding: at `β = 0` the two coincide.
fn ordered(mu: &Estimate, f: &Estimate) -> bool {
    mu.ci.0 <= f.ci.1 + 1e-12 * f.value.abs().max(1.0)
}

fn default_lags(cfg: &RunConfig) -> Vec<usize> {
    if cfg.lags.is_empty() {
        (1..=32).collect()
    } else {
        cfg.lags.clone()
    }
}

/// Two-point function and its decay length on one disorder sample.
fn correlations(cfg: &RunConfig, law: &RenewalLaw, h: f64, lags: &[usize]) -> CliResult<(Vec<f64>, Option<f64>)> {
    let hi = *lags.iter().max().expect("nonempty lags") as i64;
    let om = sample_disorder(cfg.disorder, (0, 0), derive(cfg.seed, STREAM_FIELD))?;
    let series = two_point(law, &om, params(cfg, h)?, (-2 * hi, 2 * hi), lags)?;
    let xi = correlation_length(&series).ok().filter(|f| !f.exact_flag).map(|f| f.length());
    Ok((series.c, xi))
}

fn pinning(cfg: &RunConfig) -> CliResult<Bundle> {
    let law = cfg.renewal_law()?;
    let (set, f, mu) = replicas(cfg, &law, cfg.h)?;
    let lags = default_lags(cfg);
    let (c, xi) = correlations(cfg, &law, cfg.h, &lags)?;

    let mut b = Bundle::new("pinning");
    let n = set.n as f64;
    b.table(
        "replicas.csv",
        &["replica", "seed", "log_z", "f_n"],
        set.log_z.iter().zip(&set.seeds).enumerate().map(|(i, (z, s))| vec![i.to_string(), s.to_string(), num(*z), num(z / n)]),
    )?;
    b.table("two_point.csv", &["k", "c_k"], lags.iter().zip(&c).map(|(k, c)| vec![k.to_string(), num(*c)]))?;
    b.seed("replicas", &set.seeds)?;
    b.seed("bootstrap", derive(cfg.seed, STREAM_BOOTSTRAP))?;
    b.seed("field", derive(cfg.seed, STREAM_FIELD))?;

    b.check("mu_le_f", ordered(&mu, &f), format!("μ̂ = {:.6} ({:.6}, {:.6}), F̂ = {:.6} ({:.6}, {:.6})", mu.value, mu.ci.0, mu.ci.1, f.value, f.ci.0, f.ci.1));
    if cfg.beta == 0.0 {
        let exact = homogeneous_free_energy(&law, cfg.h)?;
        let bound = 2.0 * (1.0 + n.ln()) / n;
        let dev = (f.value - exact).abs();
        b.check("homogeneous_limit", dev <= bound, format!("|F̂ − F| = {dev:.3e}, bound {bound:.3e}"));
        b.value("homogeneous_free_energy", exact)?;
    }
    b.value("free_energy", &f)?;
    b.value("mu", &mu)?;
    b.value("xi", xi)?;
    b.value("xi_times_f", xi.map(|x| x * f.value))?;
    b.value("xi_times_mu", xi.map(|x| x * mu.value))?;
    Ok(b)
}

fn hitting(cfg: &RunConfig) -> CliResult<(RenewalLaw, HittingLaw)> {
    let law = cfg.renewal_law()?;
    let spec = BesselSpec::for_gap_law(law.family(), law.alpha(), cfg.epsilon)?;
    let h = discretize_k_delta(&spec, cfg.law.n_max)?;
    Ok((law, h))
}

fn bessel(cfg: &RunConfig) -> CliResult<Bundle> {
    let (_, h) = hitting(cfg)?;
    let spec = h.spec;
    let density = cfg
        .density_times
        .iter()
        .map(|&t| Ok((t, hitting_density(&spec, t)? / spec.hitting_normalization())))
        .collect::<CliResult<Vec<_>>>()?;

    let mut b = Bundle::new("bessel");
    let plateau = h.plateau();
    b.table(
        "hitting_law.csv",
        &["n", "k_delta", "plateau"],
        h.k_delta.iter().zip(&plateau).enumerate().map(|(i, (k, p))| vec![(i + 1).to_string(), num(*k), num(*p)]),
    )?;
    b.table("hitting_density.csv", &["t", "density_given_hit"], density.iter().map(|(t, d)| vec![num(*t), num(*d)]))?;
    b.check("normalized", h.normalization_residual <= 1e-8, format!("|Σ K_δ + tail − 1| = {:.3e}", h.normalization_residual));
    let pv = h.plateau_variation();
    b.check("plateau", pv < 0.05, format!("relative variation {pv:.3e} on [N_max/2, N_max]"));
    b.value("delta", spec.delta)?;
    b.value("hit_probability", spec.hit_probability())?;
    b.value("tail_mass", h.tail_mass)?;
    b.value("tail_scale", h.tail_scale)?;

    if !cfg.c0_grid.is_empty() {
        let seed = derive(cfg.seed, STREAM_C0);
        let r = estimate_c0(&spec, &cfg.c0_grid, cfg.c0_trials, cfg.c0_mesh, seed)?;
        b.table(
            "c0.csv",
            &["u", "v", "trials", "accepted", "hits", "estimate", "stderr", "unconditional"],
            r.points.iter().map(|p| {
                vec![num(p.u), num(p.v), p.trials.to_string(), p.accepted.to_string(), p.hits.to_string(), num(p.estimate), num(p.stderr), num(p.unconditional)]
            }),
        )?;
        let (lo, _) = r.minimum_ci();
        b.check("c0_positive", lo > 0.0, format!("grid minimum {:.4} ± {:.4}", r.minimum, r.minimum_stderr));
        b.seed("c0", seed)?;
        b.value("c0_minimum", r.minimum)?;
        b.value("c0_warnings", &r.warnings)?;
    }
    Ok(b)
}

fn decompose(cfg: &RunConfig) -> CliResult<Bundle> {
    let (law, h) = hitting(cfg)?;
    let d = decompose_k(&law, &h)?;
    let mut b = Bundle::new("decompose");
    b.table(
        "decomposition.csv",
        &["n", "K", "K_delta", "K_hat", "flag_probability"],
        (1..=h.n_max()).map(|n| vec![n.to_string(), num(law.pmf(n)), num(h.pmf(n)), num(d.k_hat.pmf(n)), num(d.flag_probability(n))]),
    )?;
    b.check("p_positive", d.p > 0.0, format!("p = {:.6} at n = {}", d.p, d.argmin));
    let nonneg = d.k_hat.mass().iter().all(|&v| v >= 0.0);
    b.check("k_hat_nonnegative", nonneg, "K̂(n) ≥ 0 on the table");
    b.check("reconstruction", d.reconstruction_error < 1e-12, format!("max |K − pK_δ − (1−p)K̂| = {:.3e}", d.reconstruction_error));
    b.value("p", d.p)?;
    b.value("argmin", d.argmin)?;
    b.value("k_hat_normalization_residual", d.normalization_residual)?;
    Ok(b)
}

fn couple(cfg: &RunConfig) -> CliResult<Bundle> {
    let (law, h) = hitting(cfg)?;
    let d = decompose_k(&law, &h)?;
    let field_seeds: Vec<u64> = (0..cfg.omega_ensemble as u64).map(|i| derive(derive(cfg.seed, STREAM_FIELD), i)).collect();
    let omegas = field_seeds
        .iter()
        .map(|&s| sample_disorder(cfg.disorder, (0, 0), s))
        .collect::<pinlab::Result<Vec<_>>>()?;
    let config = CouplingConfig {
        ks: cfg.ks.clone(),
        pairs: cfg.pairs,
        margin: cfg.margin,
        options: DressOptions { cap: cfg.cap, mesh: cfg.mesh, steps_per_unit: cfg.steps_per_unit, ..DressOptions::default() },
        block_c: cfg.block_c,
        max_block: cfg.max_block,
        eta: cfg.eta,
        estimate_n: cfg.n,
        estimate_replicas: cfg.replicas,
    };
    let seed = derive(cfg.seed, STREAM_PAIRS);
    let r = coupling_bound_check(&law, &omegas, params(cfg, cfg.h)?, &d, &config, seed)?;

    let mut b = Bundle::new("couple");
    b.csv("coupling.csv", |w| r.write_csv(w).map_err(std::io::Error::other))?;
    for row in &r.rows {
        b.check(
            &format!("bound_k{}", row.k),
            row.holds,
            format!("|c| = {:.3e}, P̂(T > k) = {:.4} ± {:.4}", row.c_k, row.p_t_gt_k, row.stderr),
        );
    }
    b.seed("fields", &field_seeds)?;
    b.seed("pairs", seed)?;
    b.value("p", d.p)?;
    b.value("monotone", r.monotone)?;
    b.value("free_energy", &r.free_energy)?;
    b.value("mu", &r.mu)?;
    b.value("block_length_raw", r.block_length_raw)?;
    b.value("block_length", r.block_length)?;
    b.value(
        "meetings",
        json!({
            "integer_point": r.met_integer_point,
            "excursion_crossing": r.met_excursion_crossing,
            "linear_gap_merge": r.met_linear_gap_merge,
        }),
    )?;
    b.value("psi_mismatch", r.psi_mismatch_total)?;
    b.value("mesh_fallback", r.mesh_fallback_total)?;
    b.value("sparse_fraction", r.sparse_fraction)?;
    b.value("decay_fit", r.decay_fit)?;
    Ok(b)
}

struct SweepRow {
    h: f64,
    f: Estimate,
    mu: Estimate,
    xi: Option<f64>,
}

/// `h_c` as the root of `F̂(h) = threshold`, with the replica seeds held fixed so that
/// `F̂` is non-increasing in `h`.
fn critical_point(cfg: &RunConfig, law: &RenewalLaw, rows: &[SweepRow]) -> CliResult<Option<f64>> {
    let f_at = |h: f64| -> CliResult<f64> {
        let set = replica_log_partitions(law, cfg.disorder, params(cfg, h)?, cfg.n, cfg.replicas, derive(cfg.seed, STREAM_REPLICAS))?;
        Ok(set.free_energy().value)
    };
    let Some(lo_row) = rows.iter().filter(|r| r.f.value > CRITICAL_THRESHOLD).max_by(|a, b| a.h.total_cmp(&b.h)) else {
        return Ok(None);
    };
    let mut lo = lo_row.h;
    let mut hi = match rows.iter().filter(|r| r.h > lo && r.f.value <= CRITICAL_THRESHOLD).min_by(|a, b| a.h.total_cmp(&b.h)) {
        Some(r) => r.h,
        None => {
            let step = (rows.iter().map(|r| r.h).fold(f64::MIN, f64::max) - rows.iter().map(|r| r.h).fold(f64::MAX, f64::min)).max(0.1);
            let mut h = lo + step;
            let mut found = None;
            for _ in 0..MAX_EXPANSIONS {
                if f_at(h)? <= CRITICAL_THRESHOLD {
                    found = Some(h);
                    break;
                }
                lo = h;
                h += step;
            }
            match found {
                Some(h) => h,
                None => return Ok(None),
            }
        }
    };
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if f_at(mid)? > CRITICAL_THRESHOLD {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn sweep(cfg: &RunConfig) -> CliResult<Bundle> {
    let law = cfg.renewal_law()?;
    let lags = default_lags(cfg);
    let mut hs = cfg.h_grid.clone();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let rows = hs
        .iter()
        .map(|&h| {
            let (_, f, mu) = replicas(cfg, &law, h)?;
            let (_, xi) = correlations(cfg, &law, h, &lags)?;
            Ok(SweepRow { h, f, mu, xi })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let h_c = critical_point(cfg, &law, &rows)?;

    let mut b = Bundle::new("sweep");
    let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "nan".into());
    b.table(
        "sweep.csv",
        &["h", "F", "F_stderr", "mu", "mu_stderr", "xi", "xi_F", "xi_mu", "boundary"],
        rows.iter().map(|r| {
            let boundary = r.f.ci.0 <= 0.0;
            vec![
                num(r.h),
                num(r.f.value),
                num(r.f.stderr),
                num(r.mu.value),
                num(r.mu.stderr),
                opt(r.xi),
                opt(r.xi.map(|x| x * r.f.value)),
                opt(r.xi.map(|x| x * r.mu.value)),
                boundary.to_string(),
            ]
        }),
    )?;
    let monotone = rows.windows(2).all(|w| w[1].f.value <= w[0].f.value + 1e-12);
    b.check("f_nonincreasing_in_h", monotone, "F̂ with common replica seeds");
    let ok = rows.iter().all(|r| ordered(&r.mu, &r.f));
    b.check("mu_le_f", ok, "μ̂ interval starts below the F̂ interval at every h");
    b.seed("replicas", derive(cfg.seed, STREAM_REPLICAS))?;
    b.seed("field", derive(cfg.seed, STREAM_FIELD))?;
    b.value("h_c", h_c)?;
    b.value("critical_threshold", CRITICAL_THRESHOLD)?;
    let detail = match h_c {
        Some(h) => format!("F̂ = {CRITICAL_THRESHOLD:e} at h = {h:.6}"),
        None => "no grid point has F̂ above the threshold; lower the h grid".into(),
    };
    b.check("h_c_found", h_c.is_some(), detail);
    Ok(b)
}
