//! One function per subcommand: run the module operation, write the data
//! files, and return a JSON summary for the manifest.

use crate::params::*;
use crate::CliError;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use zetalab::avalues::{
    count_avalues, count_avalues_perturbed, littlewood_balance, littlewood_integral, littlewood_mean_prediction,
    ComplexRect, CountOptions,
};
use zetalab::charfn::{write_phi_grid_csv, CoefficientTable, PhiHatModel};
use zetalab::density::{
    build_expansion, clt_box_probability, clt_monte_carlo, invert_density, BoxRegion, GridSpec,
};
use zetalab::discrepancy::{
    compare_char_functions, discrepancy_against_density, frequency_limit, write_char_gaps_csv,
    EmpiricalDistribution2D,
};
use zetalab::primes::PrimeTable;
use zetalab::random_model::{check_moment_bounds, check_tail_bound, LogZetaSampler, SamplerConfig};
use zetalab::zeta::{sample_log_zeta_batch, write_samples_csv};

/// Summary and the data files written.
pub struct Outcome {
    pub results: Value,
    pub files: Vec<PathBuf>,
}

/// Environment variable naming the prime-table cache directory.
pub const CACHE_ENV: &str = "ZETALAB_CACHE";

fn table(limit: u64) -> Result<PrimeTable, CliError> {
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    Ok(PrimeTable::load_or_build(limit, dir.as_deref())?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(zetalab::Error::from)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(zetalab::Error::from)?))
}

/// `base` with its extension replaced, e.g. d.csv → d.matrix.dat.
pub fn sibling(base: &Path, ext: &str) -> PathBuf {
    base.with_extension(ext)
}

fn finish(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(zetalab::Error::from)?;
    Ok(())
}

/// Parses 2, -1.5, 0.5i, 1+1i, 1e-3-2i.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("cannot parse complex number '{text}'"));
    let num = |x: &str| -> Result<f64, CliError> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, num(&body[k..])?)),
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry '{x}'"))))
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(';')
        .filter(|x| !x.trim().is_empty())
        .map(|pair| match parse_list::<f64>(pair, "uv")?[..] {
            [u, v] => Ok((u, v)),
            _ => Err(CliError::Usage(format!("uv entry '{pair}' needs two numbers"))),
        })
        .collect()
}

pub fn primes(p: &PrimesParams) -> Result<Outcome, CliError> {
    let table = table(p.limit)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    writeln!(w, "p").map_err(zetalab::Error::from)?;
    for q in table.primes() {
        writeln!(w, "{q}").map_err(zetalab::Error::from)?;
    }
    finish(w)?;
    let psi = table.psi(p.sigma, table.limit())?;
    Ok(Outcome {
        results: json!({
            "prime_count": table.primes().len(),
            "prime_power_count": table.prime_powers().len(),
            "psi": psi.value,
            "psi_finite_part": psi.finite_part,
            "psi_tail": psi.tail,
            "psi_tail_error": psi.tail_error,
            "prime_sum": table.prime_sum(p.sigma, p.limit as f64)?,
        }),
        files: vec![out],
    })
}

pub fn zeta_sample(p: &ZetaSampleParams) -> Result<Outcome, CliError> {
    let ts = zetalab::discrepancy::t_grid(p.t, p.n, p.seed);
    let samples = sample_log_zeta_batch(p.sigma, &ts, p.precision)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    write_samples_csv(&mut w, &samples)?;
    finish(w)?;
    let excluded = samples.iter().filter(|s| !s.branch_ok).count();
    Ok(Outcome {
        results: json!({
            "n": samples.len(),
            "n_excluded": excluded,
            "grid_offset": zetalab::discrepancy::grid_offset(p.seed),
        }),
        files: vec![out],
    })
}

pub fn mc_sample(p: &McSampleParams) -> Result<Outcome, CliError> {
    let table = table(p.limit)?;
    let sampler = LogZetaSampler::new(
        SamplerConfig { sigma: p.sigma, cutoff: p.cutoff, gaussian_tail: p.gaussian_tail },
        &table,
    )?;
    let set = sampler.sample_set(p.seed, p.n);
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    set.write_csv(&mut w)?;
    finish(w)?;
    let tail = sampler.tail();
    Ok(Outcome {
        results: json!({
            "n": set.values.len(),
            "primes_sampled": sampler.n_primes(),
            "tail_rms": tail.rms,
            "tail_high_probability": tail.high_probability,
        }),
        files: vec![out],
    })
}

pub fn charfn_table(p: &CharfnTableParams) -> Result<Outcome, CliError> {
    if p.points < 2 {
        return Err(CliError::Usage("points must be at least 2".into()));
    }
    let table = table(p.limit)?;
    let model = PhiHatModel::new(p.sigma, &table, p.p_cut, p.u_max * std::f64::consts::SQRT_2)?;
    let nodes: Vec<f64> =
        (0..p.points).map(|k| -p.u_max + 2.0 * p.u_max * k as f64 / (p.points - 1) as f64).collect();
    let values = model.eval_grid(&nodes, &nodes);
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    write_phi_grid_csv(&mut w, &nodes, &nodes, &values)?;
    finish(w)?;
    let mut files = vec![out.clone()];
    if p.coeffs_w > 0.0 {
        let ct = CoefficientTable::new(p.coeffs_w, p.coeffs_k, 0)?;
        let path = sibling(&out, "coeffs.csv");
        let mut w = create(&path)?;
        ct.write_csv(&mut w)?;
        finish(w)?;
        files.push(path);
    }
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(Outcome { results: json!({ "primes_direct": model.n_direct, "max_abs": max_abs }), files })
}

pub fn density(p: &DensityParams) -> Result<Outcome, CliError> {
    let table = table(p.limit)?;
    let spec = GridSpec {
        half_width: (p.half_width > 0.0).then_some(p.half_width),
        points: p.points,
        p_cut: p.p_cut,
    };
    let grid = invert_density(p.sigma, &spec, &table)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    grid.write_csv(&mut w)?;
    finish(w)?;
    let matrix = sibling(&out, "matrix.dat");
    let mut w = create(&matrix)?;
    grid.write_matrix(&mut w)?;
    finish(w)?;
    let (spectral, spatial) = grid.plancherel();
    Ok(Outcome {
        results: json!({
            "psi": grid.psi,
            "mass_defect": grid.mass_defect,
            "min_value": grid.min_value(),
            "symmetry_defect": grid.symmetry_defect(),
            "domain_radius": grid.domain_radius,
            "mesh_step": grid.mesh_step,
            "period": grid.period(),
            "plancherel_spectral": spectral,
            "plancherel_spatial": spatial,
        }),
        files: vec![out, matrix],
    })
}

pub fn expansion(p: &ExpansionParams) -> Result<Outcome, CliError> {
    let table = table(p.limit)?;
    let poly = build_expansion(p.sigma, &table, p.order)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    poly.write_json(&mut w)?;
    finish(w)?;
    Ok(Outcome {
        results: json!({ "psi": poly.psi, "imaginary_residue": poly.imaginary_residue() }),
        files: vec![out],
    })
}

pub fn count(p: &CountParams) -> Result<Outcome, CliError> {
    let a = parse_complex(&p.a)?;
    let rect = ComplexRect::parse(&p.rect)?;
    let opts = CountOptions {
        base_step: p.base_step,
        max_halvings: p.max_halvings,
        clearance: p.clearance,
        refine_roots: p.refine,
    };
    let mut report = if p.perturb { count_avalues_perturbed(a, &rect, &opts)? } else { count_avalues(a, &rect, &opts)? };
    if p.theta > 0.0 {
        report.attach_prediction(p.theta, p.allow_theta)?;
    }
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    report.write_roots_csv(&mut w)?;
    finish(w)?;
    let summary = sibling(&out, "report.json");
    let mut w = create(&summary)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Usage(e.to_string()))?;
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "count": report.count,
            "roots_located": report.roots.len(),
            "rect_used": report.rect,
            "perturbation": report.perturbation,
            "winding_residual": report.winding_residual,
            "clearance": report.clearance,
            "prediction_main": report.prediction_main,
            "prediction_error_scale": report.prediction_error_scale,
        }),
        files: vec![out, summary],
    })
}

pub fn littlewood(p: &LittlewoodParams) -> Result<Outcome, CliError> {
    let a = parse_complex(&p.a)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    let results = if p.rect.trim().is_empty() {
        let li = littlewood_integral(a, p.sigma, p.t1, p.t2)?;
        let table = table(p.limit)?;
        let psi = table.psi(p.sigma, table.limit())?.value;
        let (exact, series) = littlewood_mean_prediction(a, psi);
        writeln!(w, "sigma,t1,t2,integral,mean,error,singularities,psi,predicted_mean,predicted_series")
            .map_err(zetalab::Error::from)?;
        writeln!(
            w,
            "{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?},{:?}",
            p.sigma, p.t1, p.t2, li.integral, li.mean, li.error, li.singularities, psi, exact, series
        )
        .map_err(zetalab::Error::from)?;
        json!({ "integral": li, "psi": psi, "predicted_mean": exact, "predicted_series": series,
                "deviation": li.mean - series })
    } else {
        let rect = ComplexRect::parse(&p.rect)?;
        let b = littlewood_balance(a, &rect, &CountOptions::default())?;
        writeln!(w, "lhs,rhs,error,left_log,right_log,top_arg,bottom_arg,roots").map_err(zetalab::Error::from)?;
        writeln!(
            w,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            b.lhs, b.rhs, b.error, b.left_log.integral, b.right_log.integral, b.top_arg, b.bottom_arg,
            b.roots.len()
        )
        .map_err(zetalab::Error::from)?;
        json!({ "lhs": b.lhs, "rhs": b.rhs, "gap": (b.lhs - b.rhs).abs(), "error": b.error, "roots": b.roots.len() })
    };
    finish(w)?;
    Ok(Outcome { results, files: vec![out] })
}

pub fn discrepancy(p: &DiscrepancyParams) -> Result<Outcome, CliError> {
    let table = table(p.limit)?;
    let emp = EmpiricalDistribution2D::from_zeta(p.sigma, p.t, p.n, p.seed, p.precision)?;
    let grid = invert_density(p.sigma, &GridSpec { half_width: None, points: p.points, p_cut: p.p_cut }, &table)?;
    let report = discrepancy_against_density(&emp, &grid, p.cuts)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    report.write_csv(&mut w)?;
    finish(w)?;
    let samples = sibling(&out, "samples.csv");
    let mut w = create(&samples)?;
    emp.write_csv(&mut w)?;
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "d_hat": report.d_hat,
            "sampling_error": report.sampling_error,
            "null_scale": report.null_scale,
            "certificate": report.certificate,
            "n_total": emp.n_total,
            "n_excluded": emp.n_excluded,
        }),
        files: vec![out, samples],
    })
}

pub fn charfn_compare(p: &CharfnCompareParams) -> Result<Outcome, CliError> {
    let uv = parse_pairs(&p.uv)?;
    let limit = frequency_limit(p.t, p.theta, p.theta_l)?;
    let table = table(p.limit)?;
    let emp = EmpiricalDistribution2D::from_zeta(p.sigma, p.t, p.n, p.seed, p.precision)?;
    let z_max = uv.iter().map(|&(u, v)| u.hypot(v)).fold(1e-3, f64::max);
    let model = PhiHatModel::new(p.sigma, &table, p.p_cut, z_max)?;
    let gaps = compare_char_functions(&emp, &model, &uv, limit)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    write_char_gaps_csv(&mut w, &gaps)?;
    finish(w)?;
    let worst = gaps.iter().map(|g| g.gap / (3.0 * g.se).max(0.02)).fold(0.0, f64::max);
    Ok(Outcome {
        results: json!({ "frequency_limit": limit, "points": gaps.len(), "worst_gap_ratio": worst,
                         "n_excluded": emp.n_excluded }),
        files: vec![out],
    })
}

pub fn clt_box(p: &CltBoxParams) -> Result<Outcome, CliError> {
    let boxes: Vec<BoxRegion> = p
        .boxes
        .split(';')
        .filter(|b| !b.trim().is_empty())
        .map(BoxRegion::parse)
        .collect::<Result<_, _>>()?;
    let table = table(p.limit)?;
    let preds = boxes
        .iter()
        .map(|b| clt_box_probability(p.theta, p.t, b, &table, p.order))
        .collect::<Result<Vec<_>, _>>()?;
    let mc = if p.mc_samples > 0 {
        Some(clt_monte_carlo(p.theta, p.t, &boxes, p.mc_samples, p.seed, p.cutoff, &table)?)
    } else {
        None
    };
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    let tol = p.t.ln().ln().powi(-3);
    writeln!(w, "a,b,c,d,predicted,{}mc,mc_se,tolerance", (0..=p.order).map(|k| format!("term{k},")).collect::<String>())
        .map_err(zetalab::Error::from)?;
    for (i, (b, pr)) in boxes.iter().zip(&preds).enumerate() {
        let terms: String = pr.terms.iter().map(|x| format!("{x:?},")).collect();
        let (m, se) = mc.as_ref().map_or((f64::NAN, f64::NAN), |m| (m[i].frequency, m[i].std_error));
        writeln!(w, "{:?},{:?},{:?},{:?},{:?},{terms}{:?},{:?},{:?}", b.a, b.b, b.c, b.d, pr.total, m, se, (3.0 * se).max(tol))
            .map_err(zetalab::Error::from)?;
    }
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "sigma_t": preds.first().map(|x| x.sigma_t),
            "psi_t": preds.first().map(|x| x.psi_t),
            "predicted": preds.iter().map(|x| x.total).collect::<Vec<_>>(),
            "monte_carlo": mc.as_ref().map(|m| m.iter().map(|f| json!({
                // JSON has no infinity; keep the box in its command-line form
                "box": format!("{:?},{:?},{:?},{:?}", f.region.a, f.region.b, f.region.c, f.region.d),
                "frequency": f.frequency,
                "std_error": f.std_error,
            })).collect::<Vec<_>>()),
        }),
        files: vec![out],
    })
}

pub fn moment_check(p: &MomentCheckParams) -> Result<Outcome, CliError> {
    let ks: Vec<usize> = parse_list(&p.ks, "ks")?;
    let levels: Vec<f64> = parse_list(&p.tail_levels, "tail_levels")?;
    let table = table(p.limit)?;
    let reports = check_moment_bounds(p.sigma, p.y, &ks, p.n, p.seed, &table)?;
    let out = PathBuf::from(&p.out);
    let mut w = create(&out)?;
    writeln!(w, "k,prime_moment,prime_moment_se,prime_moment_exact,factorial_bound,r_y_moment,r_y_moment_se,implied_c1,pass")
        .map_err(zetalab::Error::from)?;
    for r in &reports {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            r.k,
            r.prime_moment.mean,
            r.prime_moment.std_error,
            r.prime_moment_exact,
            r.factorial_bound,
            r.r_y_moment.mean,
            r.r_y_moment.std_error,
            r.implied_c1,
            r.pass
        )
        .map_err(zetalab::Error::from)?;
    }
    finish(w)?;
    let mut files = vec![out.clone()];
    let mut tail_slope = None;
    if !levels.is_empty() {
        let tail = check_tail_bound(p.sigma, p.y, &levels, p.n, p.seed, &table)?;
        let path = sibling(&out, "tail.csv");
        let mut w = create(&path)?;
        writeln!(w, "a,frequency,wilson_lo,wilson_hi").map_err(zetalab::Error::from)?;
        for pt in &tail.points {
            writeln!(w, "{:?},{:?},{:?},{:?}", pt.a, pt.frequency, pt.wilson.0, pt.wilson.1)
                .map_err(zetalab::Error::from)?;
        }
        finish(w)?;
        files.push(path);
        tail_slope = tail.log_slope;
    }
    Ok(Outcome {
        results: json!({
            "all_pass": reports.iter().all(|r| r.pass),
            "prime_sum": reports.first().map(|r| r.prime_sum),
            "tail_log_slope": tail_slope,
        }),
        files,
    })
}
