use std::sync::Arc;

use anyhow::{anyhow, Context};
use newton_atlas_core::functions::{EntireFunction, Family, NewtonMap, Params};
use newton_atlas_core::quotient::{
    check_semiconjugacy, find_alpha_for_rotation, rotation_number, RotationEstimate,
    SineFamilyParams,
};
use newton_atlas_core::render::{OutcomeTag, Palette, Renderer, Viewport};
use newton_atlas_core::singularities::{
    build_chart, classify_baker_type, decay_slope, find_eta0, probe_asymptotic, Eta0Search,
    LogChart, Probe, Ray,
};
use newton_atlas_core::{classify_orbit, iterate_orbit, reconstruct_ratio, IterationConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::output::{num, write_json, Csv};
use super::{
    resolve_workers, ChartArgs, ClassifyTypeArgs, Failure, IterArgs, MapArgs, OrInvalid, OrbitArgs,
    ProbeArgs, ReconstructArgs, RenderArgs, Report, RotationArgs, SemiconjArgs,
};
use crate::config::{FileConfig, MapSection};
use crate::image;

const DEFAULT_PX: u32 = 256;
const DEFAULT_WIDTH: f64 = 4.0;

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{msg}"))
}

fn map_of(args: &MapArgs, file: &FileConfig) -> MapSection {
    file.map
        .merged(args.family, &args.params, args.formula.as_deref())
}

fn iteration(args: &IterArgs, base: IterationConfig) -> Result<IterationConfig, Failure> {
    let cfg = args.apply(base);
    cfg.validate().or_invalid()?;
    Ok(cfg)
}

fn newton_and_f(
    map: &MapSection,
) -> Result<
    (
        NewtonMap,
        Arc<dyn EntireFunction>,
        crate::config::ResolvedMap,
    ),
    Failure,
> {
    map.newton().or_invalid()
}

fn parse_ray(src: &str) -> Result<Ray, Failure> {
    Ray::parse(src).map_err(|e| invalid(format!("ray `{src}`: {e}")))
}

pub fn render(a: &RenderArgs, file: &FileConfig) -> Result<Report, Failure> {
    let (newton, _, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let cfg = iteration(&a.iter, file.iteration.unwrap_or_default())?;
    let center = match (a.center, &file.view.center) {
        (Some(c), _) => c,
        (None, Some(v)) => v.resolve().map_err(invalid)?,
        (None, None) => C64::new(0.0, 0.0),
    };
    let width = a.width.or(file.view.width).unwrap_or(DEFAULT_WIDTH);
    let (px_w, px_h) = a.px.unwrap_or((
        file.view.px_w.or(file.view.px).unwrap_or(DEFAULT_PX),
        file.view.px_h.or(file.view.px).unwrap_or(DEFAULT_PX),
    ));
    let palette = Palette {
        seed: a.palette_seed.or(file.palette.seed).unwrap_or(0),
    };
    let workers = resolve_workers(a.workers, file.run.workers)?;
    let view = Viewport {
        center,
        width,
        px_w,
        px_h,
    };
    let renderer = Renderer::new(newton, view, cfg, palette).or_invalid()?;
    let img = image::render_with_workers(&renderer, workers).context("thread pool")?;
    image::write_ppm(&img, &a.out).with_context(|| format!("writing {}", a.out.display()))?;

    let mut tags = serde_json::Map::new();
    for tag in OutcomeTag::ALL {
        let n = img.pixels.iter().filter(|p| p.tag == tag).count();
        tags.insert(tag.as_str().into(), n.into());
    }
    Ok(Report {
        config: json!({
            "map": resolved,
            "view": { "center": center, "width": width, "px_w": px_w, "px_h": px_h },
            "iteration": cfg,
            "palette_seed": palette.seed,
            "workers": workers,
        }),
        outputs: vec![a.out.clone()],
        summary: json!({
            "roots": renderer.roots.roots,
            "root_pixels": img.root_class_counts(renderer.roots.roots.len()),
            "outcomes": tags,
        }),
    })
}

pub fn orbit(a: &OrbitArgs, file: &FileConfig) -> Result<Report, Failure> {
    let (newton, f, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let cfg = iteration(&a.iter, file.iteration.unwrap_or_default())?;
    let rec = iterate_orbit(&newton, a.z0, &cfg);
    let outcome = classify_orbit(&rec, f.as_ref(), &cfg).map_err(anyhow::Error::from)?;

    let mut csv = Csv::create(&a.out, &["n", "re", "im", "log_abs_f", "step"])?;
    for (n, z) in rec.points.iter().enumerate() {
        csv.row(&[
            n.to_string(),
            num(z.re),
            num(z.im),
            num(rec.log_abs_f[n]),
            rec.step_sizes.get(n).map_or(String::new(), |s| num(*s)),
        ])?;
    }
    csv.finish()?;
    Ok(Report {
        config: json!({ "map": resolved, "iteration": cfg, "z0": a.z0 }),
        outputs: vec![a.out.clone()],
        summary: json!({
            "steps": rec.len() - 1,
            "terminated_by": rec.terminated_by,
            "outcome": outcome,
            "last": rec.points.last(),
            "last_log_abs_f": rec.log_abs_f.last(),
        }),
    })
}

pub fn classify_type(a: &ClassifyTypeArgs, file: &FileConfig) -> Result<Report, Failure> {
    if a.z0.len() < 2 {
        return Err(invalid("classify-type needs at least two --z0 seeds"));
    }
    let (newton, f, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let base = IterationConfig {
        max_iter: a.steps,
        tract_log_floor: None,
        ..file.iteration.unwrap_or_default()
    };
    let cfg = iteration(&a.iter, base)?;
    let chart: Option<LogChart> = match &a.ray {
        Some(src) => Some(
            build_chart(f.clone(), &parse_ray(src)?, a.r_target)
                .map_err(anyhow::Error::from)?
                .with_newton(newton.clone()),
        ),
        None => None,
    };
    let orbits: Vec<_> =
        a.z0.iter()
            .map(|&z0| iterate_orbit(&newton, z0, &cfg))
            .collect();
    let report = classify_baker_type(&orbits, chart.as_ref()).map_err(anyhow::Error::from)?;
    let orbit_info: Vec<_> =
        a.z0.iter()
            .zip(&orbits)
            .map(|(z0, o)| {
                json!({
                    "z0": z0,
                    "steps": o.len() - 1,
                    "terminated_by": o.terminated_by,
                    "last": o.points.last(),
                })
            })
            .collect();
    write_json(
        &a.out,
        &json!({ "map": resolved.label, "report": report, "orbits": orbit_info }),
    )?;
    Ok(Report {
        config: json!({
            "map": resolved,
            "iteration": cfg,
            "z0": a.z0,
            "ray": a.ray,
            "r_target": a.r_target,
        }),
        outputs: vec![a.out.clone()],
        summary: json!({ "label": report.label, "confidence": report.confidence, "h_estimate": report.h_estimate }),
    })
}

fn alpha_values(a: &RotationArgs) -> Vec<f64> {
    let mut out = a.alpha.clone();
    if let Some((lo, hi, k)) = a.alpha_grid {
        out.extend((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64));
    }
    out
}

pub fn rotation(a: &RotationArgs, file: &FileConfig) -> Result<Report, Failure> {
    let alphas = alpha_values(a);
    if alphas.is_empty() && a.target.is_none() {
        return Err(invalid("rotation needs --alpha, --alpha-grid or --target"));
    }
    let params: Vec<SineFamilyParams> = alphas
        .iter()
        .map(|&alpha| SineFamilyParams::new(alpha, a.epsilon))
        .collect::<Result<_, _>>()
        .or_invalid()?;
    if let Some(t) = a.target {
        if !(a.tol > 0.0) {
            return Err(invalid("--tol must be positive"));
        }
        if !(t > 0.0) {
            return Err(invalid("--target must be positive"));
        }
    }
    let workers = resolve_workers(a.workers, file.run.workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("thread pool")?;
    let mut rows: Vec<(SineFamilyParams, RotationEstimate)> = pool
        .install(|| {
            params
                .par_iter()
                .map(|p| rotation_number(p, a.x0, a.n).map(|r| (*p, r)))
                .collect::<Result<_, _>>()
        })
        .map_err(anyhow::Error::from)?;

    let solved = match a.target {
        Some(target) => {
            let alpha =
                find_alpha_for_rotation(a.epsilon, target, a.tol).map_err(anyhow::Error::from)?;
            let p = SineFamilyParams::new(alpha, a.epsilon).map_err(anyhow::Error::from)?;
            let r = rotation_number(&p, a.x0, a.n).map_err(anyhow::Error::from)?;
            rows.push((p, r));
            Some(json!({ "target": target, "alpha": alpha, "rho": r.rho }))
        }
        None => None,
    };

    let mut csv = Csv::create(&a.out, &["alpha", "epsilon", "n", "rho", "bound"])?;
    for (p, r) in &rows {
        csv.row(&[
            num(p.alpha),
            num(p.epsilon),
            r.n_iter.to_string(),
            num(r.rho),
            num(r.error_bound),
        ])?;
    }
    csv.finish()?;
    Ok(Report {
        config: json!({
            "epsilon": a.epsilon,
            "alpha": alphas,
            "target": a.target,
            "tol": a.tol,
            "n": a.n,
            "x0": a.x0,
            "workers": workers,
        }),
        outputs: vec![a.out.clone()],
        summary: json!({
            "m_eps": newton_atlas_core::quotient::sine_m_eps(a.epsilon),
            "rows": rows.len(),
            "solved": solved,
        }),
    })
}

pub fn semiconj(a: &SemiconjArgs) -> Result<Report, Failure> {
    if !matches!(a.family, Family::NAlpha | Family::ExpExp) {
        return Err(invalid(format!(
            "semiconj takes n_alpha or expexp, not {}",
            a.family
        )));
    }
    if a.samples == 0 {
        return Err(invalid("--samples must be positive"));
    }
    if !(a.im_min < a.im_max) {
        return Err(invalid("--im-min must be below --im-max"));
    }
    let maps: Vec<NewtonMap> = a
        .alpha
        .iter()
        .map(|&alpha| {
            newton_atlas_core::make_catalog(a.family, &Params::new().real("alpha", alpha))
                .map(|item| item.newton_map().expect("family has a Newton map"))
        })
        .collect::<Result<_, _>>()
        .or_invalid()?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let samples: Vec<C64> = (0..a.samples)
        .map(|_| {
            let x: f64 = rng.random();
            C64::new(x, rng.random_range(a.im_min..a.im_max))
        })
        .collect();
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for (alpha, n) in a.alpha.iter().zip(&maps) {
        let r = check_semiconjugacy(n, &samples).map_err(anyhow::Error::from)?;
        worst = worst.max(r.max_residual);
        reports.push(json!({ "alpha": alpha, "report": r }));
    }
    write_json(
        &a.out,
        &json!({ "family": a.family, "samples": a.samples, "seed": a.seed, "results": reports }),
    )?;
    Ok(Report {
        config: json!({
            "family": a.family,
            "alpha": a.alpha,
            "samples": a.samples,
            "seed": a.seed,
            "im_min": a.im_min,
            "im_max": a.im_max,
        }),
        outputs: vec![a.out.clone()],
        summary: json!({ "max_residual": worst }),
    })
}

pub fn chart(a: &ChartArgs, file: &FileConfig) -> Result<Report, Failure> {
    let (newton, f, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let ray = parse_ray(&a.ray)?;
    if !(a.r_target > 0.0 && a.r_target < 1.0) {
        return Err(invalid("--r-target must lie in (0, 1)"));
    }
    let search = Eta0Search {
        eta_max: a.eta_max,
        eta_step: a.eta_step,
        grid_n: a.grid_n,
        re_span: a.re_span,
        im_half: a.im_half,
    };
    if !(search.eta_step > 0.0 && search.re_span > 0.0 && search.im_half > 0.0) {
        return Err(invalid("search spacing and spans must be positive"));
    }
    let chart = build_chart(f, &ray, a.r_target)
        .map_err(anyhow::Error::from)?
        .with_newton(newton);
    let eta0 = find_eta0(&chart, &search).map_err(anyhow::Error::from)?;
    write_json(
        &a.out,
        &json!({
            "map": resolved.label,
            "ray": a.ray,
            "chart": {
                "eta": chart.eta,
                "r_target": chart.r_target,
                "seed_t": chart.seed_t,
                "seed_z": chart.seed_z,
                "seed_w": chart.seed_w,
            },
            "eta0": eta0,
        }),
    )?;
    Ok(Report {
        config: json!({ "map": resolved, "ray": a.ray, "r_target": a.r_target, "search": search }),
        outputs: vec![a.out.clone()],
        summary: json!({ "eta0": eta0.eta0, "max_defect": eta0.max_defect, "min_drift": eta0.min_drift }),
    })
}

pub fn reconstruct(a: &ReconstructArgs, file: &FileConfig) -> Result<Report, Failure> {
    if a.segments == 0 {
        return Err(invalid("--segments must be positive"));
    }
    let (newton, f, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let r = reconstruct_ratio(&newton, a.z0, a.z1, a.segments).map_err(anyhow::Error::from)?;
    let direct = f.jet(a.z1).value / f.jet(a.z0).value;
    let rel_error = (r.ratio - direct).norm() / direct.norm();
    write_json(
        &a.out,
        &json!({
            "map": resolved.label,
            "z0": a.z0,
            "z1": a.z1,
            "result": r,
            "direct_ratio": direct,
            "relative_error": rel_error,
        }),
    )?;
    Ok(Report {
        config: json!({ "map": resolved, "z0": a.z0, "z1": a.z1, "segments": a.segments }),
        outputs: vec![a.out.clone()],
        summary: json!({ "ratio": r.ratio, "est_error": r.est_error, "relative_error": rel_error }),
    })
}

pub fn probe(a: &ProbeArgs, file: &FileConfig) -> Result<Report, Failure> {
    let (newton, f, resolved) = newton_and_f(&map_of(&a.map, file))?;
    let (probe, path) = match (&a.ray, a.z0) {
        (Some(src), _) => {
            if !(a.t_max > 0.0) || a.samples == 0 {
                return Err(invalid("--t-max and --samples must be positive"));
            }
            let ray = parse_ray(src)?;
            (
                Probe::Ray {
                    ray,
                    t_max: a.t_max,
                    samples: a.samples,
                },
                json!({ "ray": src, "t_max": a.t_max, "samples": a.samples }),
            )
        }
        (None, Some(z0)) => {
            if a.n_max == 0 {
                return Err(invalid("--n-max must be positive"));
            }
            (
                Probe::Orbit {
                    newton: newton.clone(),
                    z0,
                    n_max: a.n_max,
                },
                json!({ "z0": z0, "n_max": a.n_max }),
            )
        }
        (None, None) => return Err(invalid("probe needs --ray or --z0")),
    };
    let result = probe_asymptotic(f.as_ref(), &probe);
    let slope = match a.z0 {
        Some(z0) if a.ray.is_none() => {
            let cfg = IterationConfig {
                max_iter: a.n_max,
                tract_log_floor: None,
                ..IterationConfig::default()
            };
            let rec = iterate_orbit(&newton, z0, &cfg);
            Some(match decay_slope(&rec, f.as_ref()) {
                Ok(s) => json!(s),
                Err(e) => json!(e.to_string()),
            })
        }
        _ => None,
    };
    let mut csv = Csv::create(&a.out, &["s", "re", "im", "log_abs_f"])?;
    for s in &result.samples {
        csv.row(&[num(s.s), num(s.z.re), num(s.z.im), num(s.log_abs_f)])?;
    }
    csv.finish()?;
    Ok(Report {
        config: json!({ "map": resolved, "path": path }),
        outputs: vec![a.out.clone()],
        summary: json!({
            "path_kind": result.path_kind,
            "verdict": result.verdict,
            "final_log_abs_f": result.final_log_abs_f,
            "decay_slope": slope,
        }),
    })
}
