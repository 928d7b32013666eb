//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach the terminal
//! uncaptured. The process fails when a criterion fails, except for those in
//! `KNOWN_FAILURES`, which must keep failing.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use newton_atlas::image::{encode_ppm, render_with_workers};
use newton_atlas_core::functions::{
    classify_fixed_point, classify_infinity, expression, make_catalog, reconstruct_ratio,
    EntireFunction, Family, InfinityClass, NewtonMap, Params,
};
use newton_atlas_core::quotient::{
    check_semiconjugacy, find_alpha_for_rotation, g_alpha_critical_points, g_alpha_derivative,
    g_alpha_expansion_residual, g_alpha_expansion_residual_exact, h_alpha_asymptotic_limits,
    h_alpha_eval, rotation_number, sine_m_eps, SineFamilyParams,
};
use newton_atlas_core::render::{OutcomeTag, Palette, Renderer, Viewport};
use newton_atlas_core::singularities::{
    build_chart, chart_pushforward, classify_baker_type, decay_slope, find_eta0, probe_asymptotic,
    BakerLabel, Confidence, Eta0Search, LogChart, Probe, Ray, Verdict,
};
use newton_atlas_core::{iterate_orbit, IterationConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The printed expansion `z + 1 + 2πiα/z` is not the asymptotics of
/// `z·e^{2πiα/(1+z)}`; its residual tends to `|2πiα − 1|`.
const KNOWN_FAILURES: &[u32] = &[9];

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, lo: C64, hi: C64) -> C64 {
    c(r.random_range(lo.re..hi.re), r.random_range(lo.im..hi.im))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn f_alpha(alpha: f64) -> (Arc<dyn EntireFunction>, NewtonMap) {
    let item = make_catalog(Family::FAlpha, &Params::new().real("alpha", alpha)).unwrap();
    (item.function().unwrap(), item.newton_map().unwrap())
}

fn multiplier_law() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=6u32 {
        let n = NewtonMap::of(expression(&format!("z^{m}")).unwrap());
        let r = classify_fixed_point(&n, c(0.3, 0.2), 1e-9).map_err(|e| format!("m = {m}: {e}"))?;
        let expected = (m - 1) as f64 / m as f64;
        if r.m != m {
            return Err(format!("m = {m}: multiplicity read as {}", r.m));
        }
        worst = worst.max((r.multiplier - expected).abs());
    }
    check(
        worst <= 1e-10,
        format!("max |N'(ξ) − (m−1)/m| = {worst:e} over m = 1..6"),
    )
}

fn infinity_classification() -> Outcome {
    let two = classify_infinity(2, 0).map_err(|e| e.to_string())?;
    let three_halves = classify_infinity(3, 0).map_err(|e| e.to_string())?;
    let ok_rep = two == InfinityClass::Repelling { multiplier: 2.0 }
        && three_halves == InfinityClass::Repelling { multiplier: 1.5 };
    let mut ok_par = true;
    for m in 0..8 {
        ok_par &= classify_infinity(m, 2).map_err(|e| e.to_string())?
            == InfinityClass::Parabolic {
                multiplier: 1.0,
                multiplicity: 3,
            };
    }
    check(
        ok_rep && ok_par,
        format!("(2,0) → {two:?}, (3,0) → {three_halves:?}, (m,2) parabolic of multiplicity 3: {ok_par}"),
    )
}

fn reconstruction() -> Outcome {
    // every root lies outside the sampling box, hence off every segment
    let formulas = [
        "exp(sin(z))",
        "(z^2 + 25)*exp(z/3)",
        "(z - 4*i)^3*exp(-z)",
        "z^2 + 2*z + 10",
        "cos(z/4) + 3",
    ];
    let mut r = rng(3);
    let (lo, hi) = (c(-2.0, -2.0), c(2.0, 2.0));
    let mut worst = 0.0f64;
    for src in formulas {
        let f = expression(src).unwrap();
        let n = NewtonMap::of(f.clone());
        for _ in 0..20 {
            let (z0, z1) = (uniform(&mut r, lo, hi), uniform(&mut r, lo, hi));
            let got = reconstruct_ratio(&n, z0, z1, 1).map_err(|e| format!("{src}: {e}"))?;
            let direct = f.jet(z1).value / f.jet(z0).value;
            worst = worst.max((got.ratio - direct).norm() / direct.norm());
        }
    }
    let mut worst_closed = 0.0f64;
    let exp = NewtonMap::of(expression("exp(-z)").unwrap());
    let sq = NewtonMap::of(expression("z^2").unwrap());
    for _ in 0..20 {
        let (z0, z1) = (uniform(&mut r, lo, hi), uniform(&mut r, lo, hi));
        let want = (-(z1 - z0)).exp();
        let got = reconstruct_ratio(&exp, z0, z1, 1).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max((got.ratio - want).norm() / want.norm());

        // the right half-plane keeps 0 off the segment
        let (z0, z1) = (
            uniform(&mut r, c(0.5, -2.0), hi),
            uniform(&mut r, c(0.5, -2.0), hi),
        );
        let want = (z1 / z0).powi(2);
        let got = reconstruct_ratio(&sq, z0, z1, 1).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max((got.ratio - want).norm() / want.norm());
    }
    check(
        worst <= 1e-8 && worst_closed <= 1e-10,
        format!("5 formulas × 20 paths: max rel {worst:e}; closed forms: max rel {worst_closed:e}"),
    )
}

struct Charts {
    exp: LogChart,
    gauss: LogChart,
    f_alpha: LogChart,
    f_alpha_box: (C64, C64),
}

fn charts() -> Result<Charts, String> {
    let axis = Ray::line(c(0.0, 0.0), c(1.0, 0.0));
    let exp =
        build_chart(expression("exp(-z)").unwrap(), &axis, 1e-2).map_err(|e| e.to_string())?;
    let gauss =
        build_chart(expression("exp(-z^2)").unwrap(), &axis, 0.9).map_err(|e| e.to_string())?;
    let (f, n) = f_alpha(1.0);
    let f_alpha = build_chart(f, &Ray::parse("0.25-1i*t").unwrap(), 1e-2)
        .map_err(|e| e.to_string())?
        .with_newton(n);
    let s = Eta0Search::default();
    let eta0 = find_eta0(&f_alpha, &s).map_err(|e| e.to_string())?;
    Ok(Charts {
        exp,
        gauss,
        f_alpha,
        f_alpha_box: (c(eta0.re_min, eta0.im_min), c(eta0.re_max, eta0.im_max)),
    })
}

/// `w` with `|w|` log-uniform on `[1, 100]` inside `Re w > η + 0.1`.
fn gauss_sample(r: &mut ChaCha8Rng, eta: f64) -> C64 {
    loop {
        let w = C64::from_polar(
            10f64.powf(r.random_range(0.0..2.0)),
            r.random_range(-1.3..1.3),
        );
        if w.re > eta + 0.1 {
            return w;
        }
    }
}

fn chart_machinery() -> Outcome {
    let axis = Ray::line(c(0.0, 0.0), c(1.0, 0.0));
    let exp =
        build_chart(expression("exp(-z)").unwrap(), &axis, 1e-2).map_err(|e| e.to_string())?;
    let mut r = rng(4);
    let mut exp_worst = 0.0f64;
    for _ in 0..1000 {
        let w = uniform(&mut r, c(exp.eta, -20.0), c(exp.eta + 20.0, 20.0));
        exp_worst = exp_worst.max(
            chart_pushforward(&exp, w)
                .map_err(|e| e.to_string())?
                .defect,
        );
    }

    let gauss =
        build_chart(expression("exp(-z^2)").unwrap(), &axis, 0.9).map_err(|e| e.to_string())?;
    let mut gauss_worst = 0.0f64;
    for _ in 0..1000 {
        let w = gauss_sample(&mut r, gauss.eta);
        let d = chart_pushforward(&gauss, w).map_err(|e| format!("{w}: {e}"))?;
        gauss_worst = gauss_worst.max((d.defect - 0.25 / w.norm()).abs());
    }

    let started = Instant::now();
    let (f, n) = f_alpha(1.0);
    let chart = build_chart(f, &Ray::parse("0.25-1i*t").unwrap(), 1e-2)
        .map_err(|e| e.to_string())?
        .with_newton(n);
    let eta0 = find_eta0(&chart, &Eta0Search::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(
        exp_worst <= 1e-12
            && gauss_worst <= 1e-6
            && eta0.max_defect < 0.5
            && eta0.min_drift >= 0.5
            && elapsed < Duration::from_secs(60),
        format!(
            "e^-z defect ≤ {exp_worst:e}; e^-z² |defect − 1/(4|w|)| ≤ {gauss_worst:e}; \
             f_α η₀ = {:.4}, max defect {:.4}, drift ≥ {:.4} in {:.2?}",
            eta0.eta0, eta0.max_defect, eta0.min_drift, elapsed
        ),
    )
}

/// `|ψ'(w) + f/f'(ψ(w))|` with `ψ'` from a central difference of `ψ`.
fn flow_defect(chart: &LogChart, w: C64) -> Result<f64, String> {
    let h = 1e-4;
    let d = (chart.psi(w + h).map_err(|e| e.to_string())?
        - chart.psi(w - h).map_err(|e| e.to_string())?)
        / (2.0 * h);
    let z = chart.psi(w).map_err(|e| e.to_string())?;
    let j = chart.function().jet(z);
    let newton_step = if j.is_finite() && j.deriv.norm() > 0.0 && (j.value / j.deriv).is_finite() {
        j.value / j.deriv
    } else {
        c(1.0, 0.0) / chart.function().log_jet(z).log_deriv
    };
    Ok((d + newton_step).norm())
}

fn flow_identity() -> Outcome {
    let ch = charts()?;
    let mut r = rng(5);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let w = uniform(&mut r, c(ch.exp.eta, -20.0), c(ch.exp.eta + 20.0, 20.0));
        worst[0] = worst[0].max(flow_defect(&ch.exp, w)?);
        let w = gauss_sample(&mut r, ch.gauss.eta);
        worst[1] = worst[1].max(flow_defect(&ch.gauss, w)?);
        let w = uniform(&mut r, ch.f_alpha_box.0, ch.f_alpha_box.1);
        worst[2] = worst[2].max(flow_defect(&ch.f_alpha, w)?);
    }
    check(
        worst.iter().all(|&d| d <= 1e-6),
        format!(
            "max |ψ' + f/f'| over 10³ samples: e^-z {:e}, e^-z² {:e}, f_α {:e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn asymptotic_paths() -> Outcome {
    let (f, _) = f_alpha(1.0);
    let mut lines = Vec::new();
    let mut ok = true;
    let mut rays: Vec<(String, Ray)> = (0..3)
        .map(|k| {
            (
                format!("kind 1, k = {k}"),
                Ray::line(c(k as f64 + 0.25, 0.0), c(0.0, -1.0)),
            )
        })
        .collect();
    rays.push(("kind 2".into(), Ray::line(c(0.0, 0.0), c(1.0, 0.0))));
    for (name, ray) in rays {
        let p = probe_asymptotic(
            f.as_ref(),
            &Probe::Ray {
                ray,
                t_max: 20.0,
                samples: 400,
            },
        );
        let good = p.verdict == Verdict::TendsToZero && p.final_log_abs_f < 1e-8f64.ln();
        ok &= good;
        lines.push(format!("{name}: log|f(20)| = {:.3e}", p.final_log_abs_f));
    }
    check(ok, lines.join("; "))
}

fn type_one_decay() -> Outcome {
    let f = expression("exp(-z)").unwrap();
    let rec = iterate_orbit(
        &NewtonMap::of(f.clone()),
        c(0.0, 0.0),
        &IterationConfig::default(),
    );
    let s_exp = decay_slope(&rec, f.as_ref()).map_err(|e| e.to_string())?;

    let (fa, n) = f_alpha(1.0);
    let cfg = IterationConfig {
        max_iter: 200,
        tract_log_floor: None,
        ..Default::default()
    };
    let mut slopes = Vec::new();
    for k in 0..3 {
        let rec = iterate_orbit(&n, c(0.25 + k as f64, -10.0), &cfg);
        slopes.push(decay_slope(&rec, fa.as_ref()).map_err(|e| e.to_string())?);
    }
    let inside = |s: f64| (-1.1..=-0.9).contains(&s);
    check(
        inside(s_exp) && slopes.iter().all(|&s| inside(s)),
        format!("e^-z: {s_exp:.6}; f_α from k + ¼ − 10i: {slopes:.4?}"),
    )
}

fn semiconjugacies() -> Outcome {
    let mut r = rng(8);
    let samples: Vec<C64> = (0..1000)
        .map(|_| uniform(&mut r, c(0.0, -0.2), c(1.0, 0.8)))
        .collect();
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.3, golden(), 1.5] {
        for n in [NewtonMap::n_alpha(alpha), NewtonMap::expexp(alpha)] {
            let rep = check_semiconjugacy(&n, &samples).map_err(|e| e.to_string())?;
            worst = worst.max(rep.max_residual);
        }
    }
    check(
        worst <= 1e-9,
        format!(
            "max residual {worst:e} over 10³ samples, α ∈ {{0.1, 0.3, golden, 1.5}}, both families"
        ),
    )
}

fn g_alpha_structure() -> Outcome {
    let mut crit = 0.0f64;
    let mut product = 0.0f64;
    for alpha in [0.1, 0.3, golden(), 1.5] {
        let (z1, z2) = g_alpha_critical_points(alpha);
        product = product.max((z1 * z2 - 1.0).norm());
        for z in [z1, z2] {
            crit = crit.max(
                g_alpha_derivative(alpha, z)
                    .map_err(|e| e.to_string())?
                    .norm(),
            );
        }
    }
    let alpha = 0.3;
    let mut printed = f64::INFINITY;
    let mut corrected = f64::INFINITY;
    for k in 0..8 {
        let u = C64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0 + 0.1);
        let ratio = |res: fn(f64, C64) -> Result<f64, _>| -> Result<f64, String> {
            let a = res(alpha, u * 1e2).map_err(|e| format!("{e}"))?;
            let b = res(alpha, u * 1e3).map_err(|e| format!("{e}"))?;
            Ok(a / b)
        };
        printed = printed.min(ratio(g_alpha_expansion_residual)?);
        corrected = corrected.min(ratio(g_alpha_expansion_residual_exact)?);
    }
    // quadratic decay over one decade divides the residual by about 100
    let quadratic = |q: f64| (30.0..=300.0).contains(&q);
    check(
        crit <= 1e-9 && product <= 1e-12 && quadratic(printed),
        format!(
            "|g'(crit)| ≤ {crit:e}, |z1·z2 − 1| ≤ {product:e}; residual ratio 10²→10³: \
             z+1+2πiα/z {printed:.3}, z+a+(a²/2−a)/z {corrected:.1}"
        ),
    )
}

fn h_alpha_values() -> Outcome {
    let mut lines = Vec::new();
    for alpha in [0.1, 0.3, golden()] {
        let l = h_alpha_asymptotic_limits(alpha, 50.0).map_err(|e| e.to_string())?;
        let h0 = h_alpha_eval(alpha, c(0.0, 0.0)).map_err(|e| e.to_string())?;
        let h1 = h_alpha_eval(alpha, c(1.0, 0.0)).map_err(|e| e.to_string())?;
        if h0 != c(0.0, 0.0) || h1 != c(1.0, 0.0) {
            return Err(format!("α = {alpha}: h(0) = {h0}, h(1) = {h1}"));
        }
        lines.push(format!(
            "α = {alpha:.3}: +it → {}, −it → {}",
            l.up_target, l.down_target
        ));
    }
    Ok(format!("{}; h(0) = 0, h(1) = 1 exactly", lines.join("; ")))
}

fn rotation_numbers() -> Outcome {
    let m = sine_m_eps(0.1);
    let p = SineFamilyParams::new(1.0, 0.1).map_err(|e| e.to_string())?;
    let rot = rotation_number(&p, 0.0, 10_000)
        .map_err(|e| e.to_string())?
        .rho;
    let mut rhos = Vec::new();
    for k in 0..11 {
        let alpha = 0.05 + 0.095 * k as f64;
        let p = SineFamilyParams::new(alpha, 0.1).map_err(|e| e.to_string())?;
        rhos.push(
            rotation_number(&p, 0.0, 10_000)
                .map_err(|e| e.to_string())?
                .rho,
        );
    }
    let monotone = rhos.windows(2).all(|w| w[1] >= w[0]);
    let alpha_g = find_alpha_for_rotation(0.1, golden(), 1e-3).map_err(|e| e.to_string())?;
    let p = SineFamilyParams::new(alpha_g, 0.1).map_err(|e| e.to_string())?;
    let rho_g = rotation_number(&p, 0.0, 100_000)
        .map_err(|e| e.to_string())?
        .rho;
    check(
        m == 1 && (rot - 1.0).abs() <= 1e-3 && monotone && (rho_g - golden()).abs() <= 1e-3,
        format!(
            "m_0.1 = {m}; Rot(1, 0.1) = {rot:.6}; monotone on 11 points: {monotone}; \
             α = {alpha_g:.6} gives Rot = {rho_g:.6} (target {:.6})",
            golden()
        ),
    )
}

fn renderer() -> Outcome {
    let n = NewtonMap::of(expression("z^3 - 1").unwrap());
    let view = Viewport {
        center: c(0.0, 0.0),
        width: 4.0,
        px_w: 256,
        px_h: 256,
    };
    let started = Instant::now();
    let r = Renderer::new(n, view, IterationConfig::default(), Palette::default())
        .map_err(|e| e.to_string())?;
    let first = render_with_workers(&r, 1).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let bytes = encode_ppm(first.width, first.height, &first.rgb);
    let mut identical = true;
    for workers in [4, 8] {
        let img = render_with_workers(&r, workers).map_err(|e| e.to_string())?;
        identical &= encode_ppm(img.width, img.height, &img.rgb) == bytes;
    }
    let counts = first.root_class_counts(r.roots.roots.len());
    let covered = counts.iter().sum::<usize>() as f64 / (256.0 * 256.0);
    let roots_only = first
        .pixels
        .iter()
        .all(|p| p.tag == OutcomeTag::ConvergedToRoot || p.root_index.is_none());
    check(
        counts.len() == 3
            && counts.iter().all(|&k| k > 0)
            && covered >= 0.999
            && identical
            && roots_only
            && elapsed < Duration::from_secs(10),
        format!(
            "classes {counts:?} cover {:.4}%; identical for 1/4/8 workers: {identical}; {elapsed:.2?} on one worker",
            100.0 * covered
        ),
    )
}

fn baker_typing() -> Outcome {
    let cfg = |n| IterationConfig {
        max_iter: n,
        tract_log_floor: None,
        ..Default::default()
    };
    let axis = Ray::line(c(0.0, 0.0), c(1.0, 0.0));
    let f = expression("exp(-z)").unwrap();
    let n = NewtonMap::of(f.clone());
    let orbits = [c(0.0, 0.0), c(0.0, 5.0)].map(|z| iterate_orbit(&n, z, &cfg(300)));
    let chart = build_chart(f, &axis, 1e-2).map_err(|e| e.to_string())?;
    let exp = classify_baker_type(&orbits, Some(&chart)).map_err(|e| e.to_string())?;

    let (fa, na) = f_alpha(1.0);
    let orbits = [c(0.25, -10.0), c(0.3, -12.0)].map(|z| iterate_orbit(&na, z, &cfg(300)));
    let chart = build_chart(fa, &Ray::line(c(0.25, 0.0), c(0.0, -1.0)), 1e-2)
        .map_err(|e| e.to_string())?
        .with_newton(na);
    let fal = classify_baker_type(&orbits, Some(&chart)).map_err(|e| e.to_string())?;

    let alpha = find_alpha_for_rotation(0.1, golden(), 1e-4).map_err(|e| e.to_string())?;
    let ns = NewtonMap::sine(alpha, 0.1);
    let orbits = [c(0.1, 0.05), c(0.4, 0.05)].map(|z| iterate_orbit(&ns, z, &cfg(400)));
    let sine = classify_baker_type(&orbits, None).map_err(|e| e.to_string())?;

    let chart_ok = |r: &newton_atlas_core::BakerTypeReport| {
        r.label == BakerLabel::ParabolicI && r.confidence == Confidence::GroundTruthChart
    };
    check(
        chart_ok(&exp)
            && chart_ok(&fal)
            && sine.label == BakerLabel::Hyperbolic
            && sine.confidence == Confidence::Heuristic,
        format!(
            "e^-z {:?} ({:?}); f_α kind 1 {:?} ({:?}); sine at golden rotation {:?} ({:?}, h ≈ {:.3e})",
            exp.label,
            exp.confidence,
            fal.label,
            fal.confidence,
            sine.label,
            sine.confidence,
            sine.h_estimate.unwrap_or(f64::NAN)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "multiplier law", multiplier_law),
        (2, "infinity classification", infinity_classification),
        (3, "reconstruction", reconstruction),
        (4, "chart machinery", chart_machinery),
        (5, "flow identity", flow_identity),
        (6, "asymptotic paths", asymptotic_paths),
        (7, "type I decay", type_one_decay),
        (8, "semiconjugacies", semiconjugacies),
        (9, "g_α structure", g_alpha_structure),
        (10, "h_α singular values", h_alpha_values),
        (11, "rotation numbers", rotation_numbers),
        (12, "renderer", renderer),
        (13, "Baker typing", baker_typing),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let known = KNOWN_FAILURES.contains(&id);
        let note = match (outcome.is_ok(), known) {
            (true, false) => {
                passed += 1;
                ""
            }
            (false, true) => " [known]",
            (true, true) => {
                unexpected.push(id);
                " [expected to fail]"
            }
            (false, false) => {
                unexpected.push(id);
                ""
            }
        };
        println!("{status} {id:>2} {name}{note} ({elapsed:.2?}): {detail}");
    }
    println!(
        "acceptance: {passed} passed, {} known failures, {} unexpected",
        KNOWN_FAILURES.len(),
        unexpected.len()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcomes for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
