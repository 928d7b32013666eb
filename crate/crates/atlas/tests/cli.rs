use std::path::Path;
use std::process::{Command, Output};

use newton_atlas::image::{render_with_workers, write_ppm};
use newton_atlas_core::functions::{expression, NewtonMap};
use newton_atlas_core::render::{OutcomeTag, Palette, Renderer, Viewport};
use newton_atlas_core::{IterationConfig, C64};
use sha2::{Digest, Sha256};

const CUBIC_PPM_SHA256: &str = "40da119c0014beb8b58e82ec3bd627aa30015e8d226512da0a5b9208a93f3758";

fn atlas(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newton-atlas"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn cubic_renderer(px: u32) -> Renderer {
    let n = NewtonMap::of(expression("z^3 - 1").unwrap());
    let view = Viewport {
        center: C64::new(0.0, 0.0),
        width: 4.0,
        px_w: px,
        px_h: px,
    };
    Renderer::new(n, view, IterationConfig::default(), Palette::default()).unwrap()
}

#[test]
fn render_example_writes_image_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = atlas(
        dir.path(),
        &[
            "render",
            "--family",
            "poly",
            "--param",
            "p=z^3-1",
            "--center",
            "0",
            "--width",
            "4",
            "--px",
            "256",
            "--out",
            "basins.ppm",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let ppm = std::fs::read(dir.path().join("basins.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n256 256\n255\n"));
    assert_eq!(ppm.len(), 15 + 256 * 256 * 3);
    assert_eq!(sha256_hex(&ppm), CUBIC_PPM_SHA256);

    let m = json(&dir.path().join("basins.ppm.manifest.json"));
    assert_eq!(m["subcommand"], "render");
    assert_eq!(m["config"]["view"]["px_w"], 256);
    assert_eq!(m["config"]["iteration"]["max_iter"], 1000);
    assert_eq!(m["outputs"][0], "basins.ppm");
    assert_eq!(m["summary"]["roots"].as_array().unwrap().len(), 3);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn golden_image_for_every_worker_count() {
    let r = cubic_renderer(256);
    let dir = tempfile::tempdir().unwrap();
    for workers in [1, 4, 8] {
        let path = dir.path().join(format!("w{workers}.ppm"));
        write_ppm(&render_with_workers(&r, workers).unwrap(), &path).unwrap();
        assert_eq!(
            sha256_hex(&std::fs::read(&path).unwrap()),
            CUBIC_PPM_SHA256,
            "{workers} workers"
        );
    }
}

#[test]
fn cubic_basins_rotate_with_the_roots() {
    let r = cubic_renderer(64);
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let root_of = |z: C64| {
        let p = r.classify(z);
        assert_eq!(p.tag, OutcomeTag::ConvergedToRoot, "{z}");
        r.roots.roots[p.root_index.unwrap() as usize].xi
    };
    for i in 0..40 {
        for j in 0..40 {
            let z = C64::new(-1.9 + 0.0975 * i as f64, -1.9 + 0.0975 * j as f64);
            if z.norm() < 1e-3 {
                continue;
            }
            let (a, b) = (root_of(z), root_of(omega * z));
            assert!((omega * a - b).norm() < 1e-9, "{z}: {a} vs {b}");
        }
    }
}

#[test]
fn sub_rectangles_reproduce_the_full_image() {
    let r = cubic_renderer(96);
    let full = r.region(0, 0, 96, 96);
    for (x0, y0, w, h) in [
        (0, 0, 1, 1),
        (13, 40, 30, 7),
        (95, 95, 1, 1),
        (64, 0, 32, 96),
    ] {
        let part = r.region(x0, y0, w, h);
        for dy in 0..h {
            for dx in 0..w {
                assert_eq!(
                    part[(dy * w + dx) as usize],
                    full[((y0 + dy) * 96 + x0 + dx) as usize]
                );
            }
        }
    }
}

#[test]
fn n_alpha_strip_has_a_decay_column_below_a_quarter() {
    let view = Viewport {
        center: C64::new(0.5, 0.0),
        width: 1.0,
        px_w: 16,
        px_h: 96,
    };
    let r = Renderer::new(
        NewtonMap::n_alpha(0.3),
        view,
        IterationConfig::default(),
        Palette::default(),
    )
    .unwrap();
    let img = render_with_workers(&r, 2).unwrap();
    let at = |i: u32, j: u32| img.pixels[(j * 16 + i) as usize].tag;
    // column i = 4 has Re z = 0.28125; rows from 60 down have Im z < -0.75
    for j in 60..96 {
        let z = view.pixel_point(4, j);
        assert!(z.im < -0.7 && (z.re - 0.25).abs() < 0.05);
        assert_eq!(at(4, j), OutcomeTag::EscapedFToZero, "row {j}");
    }
    assert!((60..96).any(|j| at(12, j) != OutcomeTag::EscapedFToZero));
}

#[test]
fn rotation_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = atlas(
        dir.path(),
        &[
            "rotation",
            "--epsilon",
            "0.1",
            "--alpha",
            "1.0",
            "--n",
            "100000",
            "--out",
            "rot.csv",
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("rot.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,epsilon,n,rho,bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "100000");
    let rho: f64 = row[3].parse().unwrap();
    assert!((rho - 1.0).abs() < 1e-3, "{rho}");
}

#[test]
fn chart_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = atlas(
        dir.path(),
        &[
            "chart",
            "--family",
            "f_alpha",
            "--param",
            "alpha=1",
            "--ray",
            "0.25-1i*t",
            "--out",
            "chart.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let c = json(&dir.path().join("chart.json"));
    assert!(c["eta0"]["eta0"].as_f64().unwrap().is_finite());
    assert!(c["eta0"]["max_defect"].as_f64().unwrap() < 0.5);
    assert!(c["eta0"]["min_drift"].as_f64().unwrap() >= 0.5);
}

#[test]
fn remaining_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &[
            "orbit",
            "--formula",
            "z^2-2",
            "--z0",
            "1",
            "--out",
            "orbit.csv",
        ],
        &[
            "classify-type",
            "--formula",
            "exp(-z)",
            "--z0",
            "1",
            "--z0",
            "1+0.5i",
            "--steps",
            "300",
            "--ray",
            "t",
            "--out",
            "type.json",
        ],
        &[
            "semiconj",
            "--alpha",
            "0.3",
            "--alpha",
            "0.7",
            "--samples",
            "200",
            "--seed",
            "7",
            "--out",
            "sc.json",
        ],
        &[
            "reconstruct",
            "--formula",
            "exp(-z)",
            "--z0",
            "0",
            "--z1",
            "1+1i",
            "--out",
            "rec.json",
        ],
        &[
            "probe",
            "--family",
            "f_alpha",
            "--param",
            "alpha=1",
            "--ray",
            "1.25-1i*t",
            "--out",
            "probe.csv",
        ],
    ];
    for args in runs {
        let out = atlas(dir.path(), args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let primary = dir.path().join(args.last().unwrap());
        assert!(primary.exists());
        let m = json(
            &dir.path()
                .join(format!("{}.manifest.json", args.last().unwrap())),
        );
        assert_eq!(m["subcommand"], args[0]);
    }

    let orbit = std::fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let last: Vec<&str> = orbit.lines().last().unwrap().split(',').collect();
    let x: f64 = last[1].parse().unwrap();
    assert!((x - 2f64.sqrt()).abs() < 1e-12);

    let t = json(&dir.path().join("type.json"));
    assert_eq!(t["report"]["label"], "ParabolicI");
    assert_eq!(t["report"]["confidence"], "ground-truth-chart");

    let sc = json(&dir.path().join("sc.json.manifest.json"));
    assert!(sc["summary"]["max_residual"].as_f64().unwrap() <= 1e-9);

    let rec = json(&dir.path().join("rec.json"));
    assert!(rec["relative_error"].as_f64().unwrap() < 1e-10);

    let p = json(&dir.path().join("probe.csv.manifest.json"));
    assert_eq!(p["summary"]["verdict"]["kind"], "tends_to_zero");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| atlas(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["paint", "--out", "x"]), 2);
    assert_eq!(code(&["render", "--zoom", "2", "--out", "x.ppm"]), 2);
    assert_eq!(
        code(&["render", "--family", "f_alpha", "--param", "alpha=-1", "--out", "x.ppm"]),
        2
    );
    assert_eq!(code(&["render", "--formula", "z^", "--out", "x.ppm"]), 2);
    assert_eq!(
        code(&[
            "render",
            "--formula",
            "z^2-1",
            "--px",
            "0",
            "--out",
            "x.ppm"
        ]),
        2
    );
    assert_eq!(code(&["semiconj", "--alpha", "0.3", "--out", "s.json"]), 2);
    assert_eq!(
        code(&[
            "rotation",
            "--epsilon",
            "0.5",
            "--alpha",
            "1",
            "--out",
            "r.csv"
        ]),
        2
    );

    std::fs::write(dir.path().join("bad.toml"), "[view]\nzoom = 2\n").unwrap();
    assert_eq!(
        code(&[
            "--config",
            "bad.toml",
            "render",
            "--formula",
            "z",
            "--out",
            "x.ppm"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "--config",
            "missing.toml",
            "render",
            "--formula",
            "z",
            "--out",
            "x.ppm"
        ]),
        2
    );

    // the segment from -2 to 2 runs through the root at 1
    assert_eq!(
        code(&[
            "reconstruct",
            "--formula",
            "z^2-1",
            "--z0",
            "-2",
            "--z1",
            "2",
            "--out",
            "r.json"
        ]),
        1
    );
    assert_eq!(
        code(&[
            "render",
            "--formula",
            "z^3-1",
            "--px",
            "4",
            "--out",
            "no/such/dir/x.ppm"
        ]),
        1
    );
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("scene.toml"),
        "[map]\nfamily = \"poly\"\n[map.params]\np = \"z^3 - 1\"\n\n[view]\ncenter = \"0\"\nwidth = 4.0\npx = 32\n\n[iteration]\nmax_iter = 200\n",
    )
    .unwrap();
    let out = atlas(
        dir.path(),
        &[
            "--config",
            "scene.toml",
            "render",
            "--px",
            "16x8",
            "--workers",
            "2",
            "--out",
            "a.ppm",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = json(&dir.path().join("a.ppm.manifest.json"));
    assert_eq!(m["config"]["view"]["px_w"], 16);
    assert_eq!(m["config"]["view"]["px_h"], 8);
    assert_eq!(m["config"]["iteration"]["max_iter"], 200);
    assert_eq!(m["config"]["workers"], 2);
    assert_eq!(m["config"]["map"]["params"]["p"], "z^3 - 1");
}

#[test]
fn same_arguments_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let args = [
            "semiconj",
            "--family",
            "expexp",
            "--alpha",
            "0.4",
            "--samples",
            "50",
            "--seed",
            "11",
            "--out",
        ];
        let file = format!("{name}.json");
        let mut argv: Vec<&str> = args.to_vec();
        argv.push(&file);
        assert!(atlas(dir.path(), &argv).status.success());
        outputs.push(std::fs::read(dir.path().join(&file)).unwrap());
        let mut m = json(&dir.path().join(format!("{file}.manifest.json")));
        m["wall_time_s"] = serde_json::Value::Null;
        m["outputs"] = serde_json::Value::Null;
        outputs.push(serde_json::to_vec(&m).unwrap());
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[1], outputs[3]);
}
