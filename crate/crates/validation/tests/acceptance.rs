//! Acceptance suite: one line per criterion, exit status nonzero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmopick::eval::{evaluate, EvalArgs};
use rmopick::inputs::gather_paths;
use rmopick::sweep::sweep;
use rmopick_core::cluster::{cluster_curves, curve_distance};
use rmopick_core::extract::extract_all;
use rmopick_core::metrics::{aggregate, semblance, slope_mse, track_rate};
use rmopick_core::refine::fit_local;
use rmopick_core::segment::segment_oracle;
use rmopick_core::synth::{derive_seed, generate_dataset, sample_curve_params};
use rmopick_core::{
    synthesize, write_curves, ClusterConfig, Curve, CurvePoint, Gather, PipelineConfig, Preset,
    Raster, RefineConfig, SegmenterKind, SynthSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn cli(args: &[&str]) {
    let mut v = vec!["rmopick"];
    v.extend_from_slice(args);
    rmopick::run_from(v).unwrap_or_else(|e| panic!("{args:?}: {e:#}"));
}

// 50 gathers, 60 curvatures, blurred oracle, F-A preset, 4 workers.
fn oracle_end_to_end() -> Outcome {
    let dir = tempdir();
    let (data, picks) = (dir.path().join("data"), dir.path().join("picks"));
    let start = Instant::now();
    cli(&[
        "--jobs",
        "4",
        "--seed",
        "20240901",
        "synth",
        "--out",
        &s(&data),
        "--count",
        "60=50",
    ]);
    cli(&[
        "--jobs",
        "4",
        "--preset",
        "fa",
        "pick",
        &s(&data),
        "--out",
        &s(&picks),
        "--segmenter",
        "oracle",
        "--blur-sigma",
        "1",
    ]);
    let args = EvalArgs {
        auto: picks.clone(),
        manual: data.clone(),
        gathers: vec![data.clone()],
        auto_suffix: ".picks.csv".into(),
        manual_suffix: ".truth.csv".into(),
        out: None,
    };
    let cfg = PipelineConfig::preset(Preset::FA);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let scores = pool.install(|| evaluate(&args, &cfg)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let a = aggregate(&scores);
    let pass = a.gathers == 50 && a.track_rate >= 0.85 && a.mse <= 0.01 && secs <= 60.0;
    outcome(
        pass,
        format!(
            "gathers={} TR={:.4} (>= 0.85) MSE={:.5} (<= 0.01) time={secs:.1}s (<= 60)",
            a.gathers, a.track_rate, a.mse
        ),
    )
}

/// Integer label pixels `(row, offset)` of one curve.
fn label_pixels(c: &Curve, n_depth: usize) -> Vec<(usize, usize)> {
    c.points()
        .iter()
        .filter_map(|p| {
            let r = p.depth.round();
            (r >= 0.0 && r < n_depth as f64).then_some((r as usize, p.offset))
        })
        .collect()
}

/// Each curve's pixels form one 8-connected run and no two curves touch.
fn labels_separated(curves: &[Curve], n_depth: usize) -> bool {
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, c) in curves.iter().enumerate() {
        let px = label_pixels(c, n_depth);
        if px.is_empty() {
            continue;
        }
        for w in px.windows(2) {
            if w[1].1 != w[0].1 + 1 || w[1].0.abs_diff(w[0].0) > 1 {
                return false;
            }
        }
        for &p in &px {
            if owner.insert(p, i).is_some() {
                return false;
            }
        }
    }
    owner.iter().all(|(&(r, o), &i)| {
        (r.saturating_sub(1)..=r + 1).all(|rr| {
            (o.saturating_sub(1)..=o + 1).all(|oo| owner.get(&(rr, oo)).is_none_or(|&j| j == i))
        })
    })
}

fn round_trip() -> Outcome {
    let want = 20;
    let mut found = 0;
    let mut tried = 0u64;
    let mut mismatched = 0;
    while found < want && tried < 2000 {
        let spec = SynthSpec {
            k_c: 12,
            r_c: 0.05,
            o_0: 20.0,
            seed: derive_seed(77, tried),
            ..SynthSpec::default()
        };
        tried += 1;
        let g = synthesize(&spec).unwrap();
        if !labels_separated(&g.curves, spec.n_depth) {
            continue;
        }
        found += 1;
        let seg = segment_oracle(&g.label, 0.0);
        let extracted = extract_all(&seg, 0.5).unwrap();
        let as_set = |px: Vec<(usize, usize)>| px.into_iter().collect::<BTreeSet<_>>();
        let got: BTreeSet<BTreeSet<(usize, usize)>> = extracted
            .iter()
            .map(|c| {
                as_set(
                    c.points()
                        .iter()
                        .map(|p| (p.depth as usize, p.offset))
                        .collect(),
                )
            })
            .collect();
        let exact = extracted
            .iter()
            .all(|c| c.points().iter().all(|p| p.depth.fract() == 0.0));
        let truth: BTreeSet<BTreeSet<(usize, usize)>> = g
            .curves
            .iter()
            .map(|c| as_set(label_pixels(c, spec.n_depth)))
            .filter(|p| !p.is_empty())
            .collect();
        if !(exact && got == truth && extracted.len() == truth.len()) {
            mismatched += 1;
        }
    }
    outcome(
        found == want && mismatched == 0,
        format!("{found} separated-label gathers ({tried} seeds tried), {mismatched} mismatched"),
    )
}

/// Direct minimization of the weighted residuals plus prior by SVD on the
/// stacked, uncentered design.
fn direct_fit(points: &[CurvePoint], o_star: f64, m: f64, h: f64, lambda: f64) -> (f64, f64) {
    let n = points.len() + usize::from(lambda > 0.0);
    let mut a = DMatrix::<f64>::zeros(n, 2);
    let mut b = DVector::<f64>::zeros(n);
    for (i, p) in points.iter().enumerate() {
        let o = p.offset as f64;
        let w = (-(o - o_star).powi(2) / (2.0 * h * h)).exp().sqrt();
        a[(i, 0)] = w;
        a[(i, 1)] = w * o;
        b[i] = w * p.depth;
    }
    if lambda > 0.0 {
        let r = points.len();
        a[(r, 1)] = lambda.sqrt();
        b[r] = lambda.sqrt() * m;
    }
    let x = a.svd(true, true).solve(&b, 1e-14).unwrap();
    (x[0] + x[1] * o_star, x[1])
}

fn regression_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut non_monotone, mut singular) = (0.0f64, 0, 0);
    for _ in 0..100 {
        let o_star = rng.random_range(12..88usize);
        let offsets: BTreeSet<usize> = (0..rng.random_range(3..25))
            .map(|_| rng.random_range(o_star - 12..=o_star + 12))
            .collect();
        let (d0, s0) = (rng.random_range(0.0..1000.0), rng.random_range(-3.0..3.0));
        let points: Vec<CurvePoint> = offsets
            .iter()
            .map(|&o| {
                CurvePoint::new(
                    o,
                    d0 + s0 * (o as f64 - o_star as f64) + rng.random_range(-4.0..4.0),
                )
            })
            .collect();
        let m = rng.random_range(-3.0..3.0);
        let h = rng.random_range(2.0..10.0);
        let o = o_star as f64;
        let Some(fit) = fit_local(&points, o, m, h, 0.0) else {
            singular += 1;
            continue;
        };
        let (depth, slope) = direct_fit(&points, o, m, h, 0.0);
        worst = worst
            .max((fit.depth - depth).abs())
            .max((fit.slope - slope).abs());

        let h_para = rng.random_range(0.5..5.0);
        let slopes: Vec<f64> = [0.0, 1.0, 10.0, 1e3]
            .iter()
            .map(|&lambda| {
                let cfg = RefineConfig {
                    lambda,
                    h_para,
                    h_data: h,
                    ..RefineConfig::default()
                };
                fit_local(&points, o, m, h, cfg.prior_weight())
                    .unwrap()
                    .slope
            })
            .collect();
        let toward = slopes.windows(2).all(|w| {
            (w[1] - m).abs() <= (w[0] - m).abs() + 1e-12 && (w[1] - m) * (w[0] - m) >= 0.0
        });
        if !toward {
            non_monotone += 1;
        }
    }
    outcome(
        worst <= 1e-9 && non_monotone == 0 && singular == 0,
        format!(
            "max |diff|={worst:.2e} (<= 1e-9), non-monotone={non_monotone}, singular={singular}"
        ),
    )
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

fn clustering_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(0..=10);
        let curves: Vec<Curve> = (0..n)
            .map(|_| {
                let start = rng.random_range(0..40usize);
                let len = rng.random_range(1..20usize);
                let (d, slope) = (rng.random_range(40.0..100.0), rng.random_range(-1.5..1.5));
                Curve::from_pairs((0..len).map(|i| {
                    (
                        start + i,
                        d + slope * i as f64 + rng.random_range(-0.5..0.5),
                    )
                }))
                .unwrap()
            })
            .collect();
        let cfg = ClusterConfig {
            alpha: rng.random_range(0.0..1.0),
            d_eps: rng.random_range(1.0..16.0),
            ..ClusterConfig::default()
        };
        let mut parent: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if curve_distance(&curves[i], &curves[j], &cfg).unwrap() <= cfg.d_eps {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let want: BTreeSet<Vec<usize>> = groups.into_values().collect();
        let got: BTreeSet<Vec<usize>> =
            cluster_curves(&curves, &cfg).unwrap().into_iter().collect();
        if got != want {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of 200 trials differ from union-find"),
    )
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut flat_err = 0.0f64;
    for _ in 0..20 {
        let trace: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cols = rng.random_range(2..40);
        let g = Gather::new(Raster::from_columns(&vec![trace; cols]).unwrap()).unwrap();
        let d = rng.random_range(0..200) as f64;
        let flat = Curve::from_pairs((0..cols).map(|o| (o, d))).unwrap();
        flat_err = flat_err.max((semblance(&g, &flat, 5).unwrap() - 1.0).abs());
    }
    let (mut tr_min, mut mse_max, mut scale_err) = (1.0f64, 0.0f64, 0.0f64);
    let cfg = PipelineConfig::default();
    for i in 0..5 {
        let g = synthesize(&SynthSpec {
            seed: derive_seed(31, i),
            ..SynthSpec::default()
        })
        .unwrap();
        tr_min = tr_min.min(track_rate(&g.curves, &g.curves, cfg.metrics.d_t));
        mse_max = mse_max.max(
            slope_mse(
                &g.curves,
                &g.curves,
                g.gather.dims(),
                &cfg.refine,
                &cfg.cluster,
            )
            .unwrap(),
        );
        let scaled = g.gather.scaled(37.5).unwrap();
        for c in g.curves.iter().filter(|c| !c.is_empty()) {
            let a = semblance(&g.gather, c, cfg.metrics.h_s).unwrap();
            let b = semblance(&scaled, c, cfg.metrics.h_s).unwrap();
            scale_err = scale_err.max((a - b).abs());
        }
    }
    outcome(
        flat_err <= 1e-9 && tr_min == 1.0 && mse_max == 0.0 && scale_err <= 1e-9,
        format!("flat |S-1|={flat_err:.1e}, TR(X,X)={tr_min}, MSE(X,X)={mse_max}, scale |dS|={scale_err:.1e}"),
    )
}

/// Depth-part boxes as `(beta range, gamma range)`; a part holds indices up to
/// the floor of the fractional boundary.
fn table_box(k: usize, k_c: usize) -> ((f64, f64), (f64, f64)) {
    let outer = ((0.275, 1.125), (2.75e-4, 6.25e-4));
    if 3 * (k + 1) <= k_c {
        outer
    } else if 2 * (k + 1) <= k_c {
        ((0.125, 0.50), (2.00e-4, 3.75e-4))
    } else if 3 * (k + 1) <= 2 * k_c {
        ((-0.50, 0.125), (-2.50e-4, -1.25e-4))
    } else {
        outer
    }
}

fn files_equal(a: &Path, b: &Path) -> bool {
    let names = |d: &Path| {
        let mut v: Vec<PathBuf> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        v.sort();
        v
    };
    let (x, y) = (names(a), names(b));
    x.len() == y.len()
        && x.iter().zip(&y).all(|(p, q)| {
            p.file_name() == q.file_name() && fs::read(p).unwrap() == fs::read(q).unwrap()
        })
}

fn generator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut outside = 0;
    for _ in 0..10_000 {
        let k_c = rng.random_range(1..=120);
        let k = rng.random_range(1..=k_c);
        let (beta, gamma) = sample_curve_params(k, k_c, &mut rng).unwrap();
        let (bb, gb) = table_box(k, k_c);
        if !(bb.0 <= beta && beta <= bb.1 && gb.0 <= gamma && gamma <= gb.1) {
            outside += 1;
        }
    }
    let mut identical = true;
    for seed in [1u64, 2, 3] {
        let spec = SynthSpec {
            seed,
            ..SynthSpec::default()
        };
        let (a, b) = (synthesize(&spec).unwrap(), synthesize(&spec).unwrap());
        let dir = tempdir();
        write_curves(&a.curves, dir.path().join("a.csv")).unwrap();
        write_curves(&b.curves, dir.path().join("b.csv")).unwrap();
        identical &= a.gather.raster().to_bytes().unwrap() == b.gather.raster().to_bytes().unwrap()
            && a.label.to_raster().to_bytes().unwrap() == b.label.to_raster().to_bytes().unwrap()
            && fs::read(dir.path().join("a.csv")).unwrap()
                == fs::read(dir.path().join("b.csv")).unwrap();
    }
    let (d1, d2) = (tempdir(), tempdir());
    let counts: BTreeMap<usize, usize> = [(50, 2), (60, 2)].into();
    let spec = SynthSpec {
        seed: 4,
        ..SynthSpec::default()
    };
    generate_dataset(&spec, &counts, d1.path()).unwrap();
    generate_dataset(&spec, &counts, d2.path()).unwrap();
    identical &= files_equal(d1.path(), d2.path());
    outcome(
        outside == 0 && identical,
        format!("{outside} of 10000 draws outside their box, byte-identical reruns: {identical}"),
    )
}

fn sweep_smoke() -> Outcome {
    let dir = tempdir();
    cli(&[
        "--seed",
        "3",
        "synth",
        "--out",
        &s(dir.path()),
        "--count",
        "60=4",
    ]);
    let paths = gather_paths(&[dir.path().to_owned()]).unwrap();
    let values = [2.0, 4.0, 8.0, 16.0];
    let rows = sweep(
        &paths,
        "d_eps",
        &values,
        &SegmenterKind::Oracle { blur_sigma: 1.0 },
        &PipelineConfig::preset(Preset::FA),
        ".truth.csv",
    )
    .unwrap();
    let counts: Vec<usize> = rows.iter().map(|r| r.n_merged).collect();
    let pass = rows.len() == values.len() && counts.windows(2).all(|w| w[1] <= w[0]);
    outcome(pass, format!("merged counts at d_eps 2,4,8,16: {counts:?}"))
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 7] = [
        ("oracle end-to-end", oracle_end_to_end),
        ("exact round-trip", round_trip),
        ("regression oracle", regression_oracle),
        ("clustering oracle", clustering_oracle),
        ("metric identities", metric_identities),
        ("synthetic generator", generator),
        ("sweep smoke test", sweep_smoke),
    ];
    // The panic message is reported on the criterion's line.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let o = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
