//! Acceptance suite: every headline claim of the method, run end to end at
//! desk scale and checked against its stated tolerance. One test per
//! criterion; each prints a single PASS line with the measured numbers.
//!
//! Desk scale means: full-length trajectories, the 13-point noise grid,
//! 1000-step sample clouds, and minibatch 128 (the spec-default 1024 only
//! changes training noise, not converged behavior; 128 keeps the suite
//! within a laptop-hour). Every tolerance below is pinned in code.

use invar::baselines;
use invar::dynamics::{self, System};
use invar::erd::{self, ErdConfig, ExplainedRatioDiagram};
use invar::export;
use invar::linalg;
use invar::points::Points;
use invar::preprocess::{self, WhitenModel, DEFAULT_EPS_P};
use invar::pullnet::{train_pull, PullNetwork, TrainConfig};
use invar::rng;
use invar::sampler::{self, SampleMode};
use invar::scan::{self, ScanAxis, ScanSettings};
use invar::toys;
use std::sync::OnceLock;

/// Root seed of the whole suite.
const SEED: u64 = 2024;
/// Desk-scale minibatch (see module docs).
const BATCH: usize = 128;
/// Walk-pull steps per sample cloud.
const CLOUD: usize = 1000;

fn desk_train(seed: u64) -> TrainConfig {
    TrainConfig { batch: BATCH, seed, ..TrainConfig::default() }
}

fn desk_erd(seed: u64) -> ErdConfig {
    ErdConfig {
        train: desk_train(seed),
        samples: CLOUD,
        mode: SampleMode::Jump,
        start_index: None,
    }
}

const FIVE: [System; 5] = [
    System::Harmonic,
    System::Kepler { eps: 0.0 },
    System::Pendulum,
    System::Mirror,
    System::ThreeBody { mass: dynamics::THREE_BODY_MASS },
];

/// Everything the per-system criteria share: one full-length trajectory,
/// its whitening, and one trained network per grid scale.
struct SystemArtifacts {
    system: System,
    whiten: WhitenModel,
    white: Points,
    networks: Vec<PullNetwork>,
    diagram: ExplainedRatioDiagram,
}

fn build_system(index: usize, system: System) -> SystemArtifacts {
    let trajectory = dynamics::default_trajectory(&system, 1).expect("simulation");
    assert!(
        trajectory.energy_drift() < 1e-6,
        "{}: energy drift {}",
        system.name(),
        trajectory.energy_drift()
    );
    let whiten =
        preprocess::fit_whiten(&trajectory.points, DEFAULT_EPS_P, true).expect("whiten");
    let white = whiten.apply_points(&trajectory.points).expect("transform");

    let grid = erd::default_noise_grid();
    let cfg = desk_erd(SEED);
    let networks: Vec<PullNetwork> = grid
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let train = TrainConfig {
                noise_scale: l,
                seed: rng::derive_seed(SEED, &[index as u64, li as u64]),
                ..desk_train(SEED)
            };
            train_pull(&white, &train).expect("training")
        })
        .collect();
    let columns = networks
        .iter()
        .enumerate()
        .map(|(li, net)| {
            erd::column_from_network(
                net,
                &white,
                &cfg,
                rng::derive_seed(SEED, &[index as u64, li as u64, rng::tag::CHAIN]),
            )
            .expect("column")
        })
        .collect();
    let diagram = ExplainedRatioDiagram::from_columns(white.dim(), columns);
    SystemArtifacts { system, whiten, white, networks, diagram }
}

static ARTIFACTS: OnceLock<Vec<SystemArtifacts>> = OnceLock::new();

fn artifacts() -> &'static [SystemArtifacts] {
    ARTIFACTS.get_or_init(|| {
        FIVE.iter().enumerate().map(|(i, s)| build_system(i, *s)).collect()
    })
}

#[test]
fn criterion_01_five_system_discovery() {
    let mut summary = Vec::new();
    for art in artifacts() {
        let truth = art.system.ground_truth_laws();
        let detection =
            erd::detect(&art.diagram, art.whiten.linear_law_count()).expect("detection");
        assert_eq!(
            detection.total_by_rounding,
            truth,
            "{}: rounded n_eff gave {} (max n_eff {:.3} at L = {:.3}, {} linear)",
            art.system.name(),
            detection.total_by_rounding,
            detection.n_eff_max,
            detection.n_eff_argmax_scale,
            detection.n_linear
        );
        assert_eq!(
            detection.total_by_threshold,
            truth,
            "{}: threshold rule gave {}",
            art.system.name(),
            detection.total_by_threshold
        );
        summary.push(format!("{} {}/{}", art.system.name(), detection.total_by_rounding, truth));
    }
    println!("criterion 01 five-system discovery: PASS ({})", summary.join(", "));
}

#[test]
fn criterion_02_toy_phase_structure() {
    // Left transition tracks the injected noise scale within a factor of 3.
    let mut la_summary = Vec::new();
    for (i, &noise) in [1e-3, 1e-2].iter().enumerate() {
        let clean = toys::circle_points(2000, 1.0);
        let data = toys::with_noise(&clean, noise, 300 + i as u64);
        let grid = erd::log_grid(-3.5, 0.0, 15);
        let cfg = ErdConfig {
            train: TrainConfig {
                batch: 64,
                steps: 4000,
                seed: rng::derive_seed(SEED, &[rng::tag::TOY, i as u64]),
                ..TrainConfig::default()
            },
            samples: CLOUD,
            mode: SampleMode::Jump,
            start_index: Some(0),
        };
        let diagram = erd::build_erd_from_points(&data, &grid, &cfg);
        let t = erd::transitions(&diagram);
        let l_a = t.l_a.expect("a rising transition exists");
        let factor = l_a / noise;
        assert!(
            (1.0 / 3.0..=3.0).contains(&factor),
            "noise {noise:.0e}: L_a = {l_a:.4} is off by factor {factor:.2}"
        );
        la_summary.push(format!("dL={noise:.0e}: L_a/dL={factor:.2}"));
    }

    // Flattening the ellipse softens the fall of n_eff past its peak.
    let mut slopes = Vec::new();
    for (i, &b) in [1.0, 0.5, 0.1].iter().enumerate() {
        let clean = toys::ellipse_points(2000, 1.0, b);
        let data = toys::with_noise(&clean, 1e-3, 400 + i as u64);
        let grid = erd::log_grid(-2.0, 0.5, 11);
        let cfg = ErdConfig {
            train: TrainConfig {
                batch: 64,
                steps: 4000,
                seed: rng::derive_seed(SEED, &[rng::tag::TOY, 10 + i as u64]),
                ..TrainConfig::default()
            },
            samples: CLOUD,
            mode: SampleMode::Jump,
            start_index: Some(0),
        };
        let diagram = erd::build_erd_from_points(&data, &grid, &cfg);
        let slope = erd::transitions(&diagram).max_fall_slope.unwrap_or(0.0);
        slopes.push((b, slope));
    }
    assert!(
        slopes[0].1 > slopes[1].1 && slopes[1].1 > slopes[2].1,
        "fall sharpness not monotone in the axis ratio: {slopes:?}"
    );
    println!(
        "criterion 02 toy phase structure: PASS ({}; fall slopes b=1:{:.2} b=0.5:{:.2} b=0.1:{:.2})",
        la_summary.join(", "),
        slopes[0].1,
        slopes[1].1,
        slopes[2].1
    );
}

#[test]
fn criterion_03_n_eff_formula_oracle() {
    // Independent scalar evaluation of sum c(pi N w_i).
    fn oracle(ratios: &[f64], dim: usize) -> f64 {
        let mut acc = 0.0f64;
        for &w in ratios.iter() {
            let x = std::f64::consts::PI * dim as f64 * w;
            let term = match x.partial_cmp(&std::f64::consts::FRAC_PI_2) {
                Some(std::cmp::Ordering::Less) => x.cos(),
                _ => 0.0,
            };
            acc += term;
        }
        acc
    }

    let mut r = rng::stream(SEED, &[rng::tag::TOY, 99]);
    use rand::Rng;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let dim = r.gen_range(2..=12usize);
        let mut ratios: Vec<f64> = (0..dim).map(|_| r.gen::<f64>()).collect();
        // Sprinkle exact zeros and normalize.
        if r.gen_bool(0.3) {
            let k = r.gen_range(0..dim);
            ratios[k] = 0.0;
        }
        let sum: f64 = ratios.iter().sum();
        for w in &mut ratios {
            *w /= sum;
        }
        ratios.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let got = erd::n_eff_of_ratios(&ratios, dim);
        let want = oracle(&ratios, dim);
        worst = worst.max((got - want).abs());
    }
    assert!(worst <= 1e-12, "worst deviation {worst:.3e}");
    println!("criterion 03 n_eff formula oracle: PASS (worst |diff| {worst:.1e} over 10^4 draws)");
}

#[test]
fn criterion_04_starting_point_stability() {
    let mut summary = Vec::new();
    for (i, art) in artifacts().iter().enumerate() {
        let result = sampler::stability_sweep(
            &art.networks,
            &art.white,
            100,
            CLOUD,
            SampleMode::Jump,
            rng::derive_seed(SEED, &[rng::tag::STABILITY, i as u64]),
        )
        .expect("stability sweep");
        let truth = art.system.ground_truth_laws();
        let n_linear = art.whiten.linear_law_count() as i64;
        let correct = result
            .n_eff
            .iter()
            .filter(|&&v| n_linear + v.round() as i64 == truth as i64)
            .count();
        assert!(
            correct >= 95,
            "{}: only {correct}/100 starting points round to {truth} \
             (n_eff mean {:.2} +- {:.2}, histogram {:?})",
            art.system.name(),
            result.mean(),
            result.std(),
            result.counts
        );
        summary.push(format!("{} {}/100", art.system.name(), correct));
    }
    println!("criterion 04 starting-point stability: PASS ({})", summary.join(", "));
}

#[test]
fn criterion_05_no_overfit() {
    let mut ratios = Vec::new();
    let mut l1_losses = Vec::new();
    for art in artifacts() {
        for col in &art.diagram.columns {
            let probe = [0.01, 0.1, 1.0]
                .iter()
                .any(|&l| (col.noise_scale - l).abs() < 1e-9);
            if !probe {
                continue;
            }
            ratios.push(col.test_loss / col.train_loss);
            if (col.noise_scale - 1.0).abs() < 1e-9 {
                l1_losses.push((art.system.name(), col.train_loss, col.test_loss));
            }
        }
    }
    assert_eq!(ratios.len(), 15, "expected 5 systems x 3 probe scales");
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(mean_ratio <= 1.3, "mean test/train ratio {mean_ratio:.3}");
    for (name, train, test) in &l1_losses {
        for (kind, loss) in [("train", train), ("test", test)] {
            assert!(
                (0.3..=0.6).contains(loss),
                "{name}: {kind} loss at L=1 is {loss:.3}, outside [0.3, 0.6]"
            );
        }
    }
    println!(
        "criterion 05 no-overfit: PASS (mean test/train {:.3}; L=1 losses {})",
        mean_ratio,
        l1_losses
            .iter()
            .map(|(n, a, b)| format!("{n} {a:.2}/{b:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

#[test]
fn criterion_06_kepler_breakdown_slope() {
    let axis = ScanAxis::KeplerBreakdown {
        eps: erd::log_grid(-3.0, -1.0, 4),
        orbits: erd::log_grid(1.0, 3.4771212547196624, 4), // 10 .. 3000
    };
    let settings = ScanSettings {
        erd: desk_erd(rng::derive_seed(SEED, &[rng::tag::SCAN, 6])),
        ..ScanSettings::default()
    };
    let result = scan::run_scan(&axis, &settings).expect("scan");
    for e in &result.entries {
        assert!(e.error.is_none(), "cell {:?} failed: {:?}", e.coords, e.error);
    }
    let contour = scan::breakdown_contour(&result, 2.5);
    assert!(
        contour.len() >= 3,
        "contour crossed in only {} of 4 rows: {contour:?}",
        contour.len()
    );
    let slope = scan::contour_slope(&contour).expect("slope");
    assert!(
        (slope + 1.0).abs() <= 0.3,
        "breakdown contour slope {slope:.3}, expected -1 +- 0.3 (contour {contour:?})"
    );
    println!(
        "criterion 06 breakdown scaling: PASS (slope {:.2} from {} contour points)",
        slope,
        contour.len()
    );
}

#[test]
fn criterion_07_pendulum_and_mirror_scans() {
    let settings = ScanSettings {
        erd: desk_erd(rng::derive_seed(SEED, &[rng::tag::SCAN, 7])),
        ..ScanSettings::default()
    };

    let pendulum = scan::run_scan(
        &ScanAxis::PendulumTheta0 { degrees: vec![5.0, 10.0, 60.0, 65.0, 70.0] },
        &settings,
    )
    .expect("pendulum scan");
    let mut spike = f64::MIN;
    for e in &pendulum.entries {
        assert!(e.error.is_none(), "theta0 {:?} failed: {:?}", e.coords, e.error);
        if e.coords[0] <= 10.0 {
            assert_eq!(
                e.rounded_total, 2,
                "theta0 = {} deg: count {} (n_eff {:.2})",
                e.coords[0], e.rounded_total, e.n_eff_mean
            );
        } else {
            spike = spike.max(e.n_eff_mean);
        }
    }
    assert!(spike > 2.5, "no periodic-orbit spike near 65 deg: max n_eff {spike:.2}");

    let mirror = scan::run_scan(
        &ScanAxis::MirrorV0 { values: vec![0.3, 0.5, 0.9, 1.0, 1.1], rho0: 0.0, z0: 0.0 },
        &settings,
    )
    .expect("mirror scan");
    let mut mirror_spike = f64::MIN;
    for e in &mirror.entries {
        assert!(e.error.is_none(), "v0 {:?} failed: {:?}", e.coords, e.error);
        if e.coords[0] <= 0.5 {
            assert_eq!(
                e.rounded_total, 2,
                "v0 = {}: count {} (n_eff {:.2})",
                e.coords[0], e.rounded_total, e.n_eff_mean
            );
        } else {
            mirror_spike = mirror_spike.max(e.n_eff_mean);
        }
    }
    assert!(
        mirror_spike > 2.5,
        "no periodic-orbit spike near v0 = 1: max n_eff {mirror_spike:.2}"
    );
    println!(
        "criterion 07 pendulum/mirror scans: PASS (spikes {:.2} and {:.2})",
        spike, mirror_spike
    );
}

#[test]
fn criterion_08_three_body_time_windows() {
    let system = System::three_body();
    let trajectory = dynamics::default_trajectory(&system, 1).expect("simulation");
    let settings = ScanSettings {
        erd: desk_erd(rng::derive_seed(SEED, &[rng::tag::SCAN, 8])),
        ..ScanSettings::default()
    };
    let windows = [(0.0, 12.0), (0.0, 40.0), (0.0, 100.0), (0.0, 200.0)];
    let result = scan::time_window_scan(&trajectory, &windows, &settings).expect("windows");
    for e in &result.entries {
        assert!(e.error.is_none(), "window {:?} failed: {:?}", e.coords, e.error);
    }
    let earliest = result.entries.first().unwrap();
    let latest = result.entries.last().unwrap();
    assert_eq!(
        earliest.rounded_total - latest.rounded_total,
        2,
        "window counts {:?}",
        result
            .entries
            .iter()
            .map(|e| (e.coords[1], e.rounded_total))
            .collect::<Vec<_>>()
    );
    println!(
        "criterion 08 three-body windows: PASS (counts {})",
        result
            .entries
            .iter()
            .map(|e| format!("[0,{}]:{}", e.coords[1], e.rounded_total))
            .collect::<Vec<_>>()
            .join(" ")
    );
}

#[test]
fn criterion_09_baselines() {
    // Global PCA sees only linear laws.
    let mut pca_summary = Vec::new();
    for art in artifacts() {
        let raw_traj = dynamics::default_trajectory(&art.system, 10).expect("simulation");
        let dim = baselines::global_pca_dim(&raw_traj.points, DEFAULT_EPS_P).expect("pca");
        let expected_laws = if art.system.name() == "threebody" { 4 } else { 0 };
        assert_eq!(
            art.system.dim() - dim,
            expected_laws,
            "{}: global PCA found {} laws",
            art.system.name(),
            art.system.dim() - dim
        );
        pca_summary.push(format!("{} {}", art.system.name(), art.system.dim() - dim));
    }

    // Pair-count slope within 0.3 of the manifold dimension on >= 3 of 5.
    let mut fractal_hits = 0;
    let mut fractal_summary = Vec::new();
    for (i, art) in artifacts().iter().enumerate() {
        let truth = (art.white.dim() + art.whiten.linear_law_count()
            - art.system.ground_truth_laws()) as f64;
        let curve = baselines::fractal_dim(
            &art.white,
            None,
            1000,
            rng::derive_seed(SEED, &[rng::tag::SUBSAMPLE, i as u64]),
        )
        .expect("fractal");
        if (curve.slope - truth).abs() <= 0.3 {
            fractal_hits += 1;
        }
        fractal_summary.push(format!(
            "{} {:.2}/{}",
            art.system.name(),
            curve.slope,
            truth
        ));
    }
    assert!(fractal_hits >= 3, "fractal correct on {fractal_hits}/5: {fractal_summary:?}");

    // Autoencoder at the 1e-3 threshold on the two closed-orbit systems.
    let mut ae_summary = Vec::new();
    for (i, art) in artifacts().iter().enumerate() {
        if !matches!(art.system, System::Harmonic | System::Kepler { .. }) {
            continue;
        }
        let cfg = TrainConfig {
            seed: rng::derive_seed(SEED, &[rng::tag::TOY, 50 + i as u64]),
            ..desk_train(SEED)
        };
        let verdict =
            baselines::autoencoder_dim(&art.white, &[1, 2], 1e-3, &cfg, 2).expect("ae");
        assert!(
            verdict.met_threshold && verdict.dim == 1,
            "{}: autoencoder dim {} (threshold met: {}), curve {:?}",
            art.system.name(),
            verdict.dim,
            verdict.met_threshold,
            verdict.curve
        );
        ae_summary.push(format!("{} s={}", art.system.name(), verdict.dim));
    }
    println!(
        "criterion 09 baselines: PASS (pca laws {}; fractal {}; ae {})",
        pca_summary.join(", "),
        fractal_summary.join(", "),
        ae_summary.join(", ")
    );
}

#[test]
fn criterion_10_numerical_hygiene() {
    // Backprop against central finite differences on a width-8 network.
    use invar::nn::{Activation, BatchBuffers, Gradients, Mlp};
    let mut r = rng::stream(SEED, &[rng::tag::NET_INIT, 10]);
    let mut net = Mlp::init(&[3, 8, 8, 3], Activation::Tanh, &mut r);
    let rows = 4;
    let x: Vec<f64> = (0..rows * 3).map(|i| ((i * 29 % 13) as f64 / 6.5) - 1.0).collect();
    let y: Vec<f64> = (0..rows * 3).map(|i| ((i * 31 % 11) as f64 / 5.5) - 1.0).collect();
    let mut bufs = BatchBuffers::new();
    net.forward_batch(&x, rows, &mut bufs);
    let mut dout = vec![0.0; rows * 3];
    invar::nn::squared_error_loss(net.output(&bufs, rows), &y, rows, Some(&mut dout));
    let mut grads = Gradients::zeros_like(&net);
    net.backward_batch(rows, &dout, &mut bufs, &mut grads);
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    for l in 0..net.layer_count() {
        for k in 0..net.weights[l].len() {
            let orig = net.weights[l][k];
            net.weights[l][k] = orig + h;
            net.forward_batch(&x, rows, &mut bufs);
            let lp = invar::nn::squared_error_loss(net.output(&bufs, rows), &y, rows, None);
            net.weights[l][k] = orig - h;
            net.forward_batch(&x, rows, &mut bufs);
            let lm = invar::nn::squared_error_loss(net.output(&bufs, rows), &y, rows, None);
            net.weights[l][k] = orig;
            let fd = (lp - lm) / (2.0 * h);
            let an = grads.weights[l][k];
            let denom = fd.abs().max(an.abs()).max(1e-8);
            worst = worst.max((fd - an).abs() / denom);
        }
    }
    assert!(worst < 1e-4, "gradient check relative error {worst:.2e}");

    // Integrator convergence order on the harmonic oscillator.
    let mut errors = Vec::new();
    for &dt in &[0.2, 0.1, 0.05, 0.025] {
        let steps = (2.0 / dt) as usize;
        let traj = dynamics::simulate(&System::Harmonic, &[1.0, 0.0], dt, steps).unwrap();
        let last = traj.points.row(traj.points.len() - 1);
        let t = traj.duration();
        let err =
            ((last[0] - t.cos()).powi(2) + (last[1] + t.sin()).powi(2)).sqrt();
        errors.push(err);
    }
    let mut orders = Vec::new();
    for w in errors.windows(2) {
        orders.push((w[0] / w[1]).log2());
    }
    let order = orders.iter().sum::<f64>() / orders.len() as f64;
    assert!((order - 4.0).abs() <= 0.2, "observed order {order:.3} ({errors:?})");

    // Whitening invariants on a trained-system trajectory.
    let art = &artifacts()[1]; // kepler
    let mean = art.white.mean();
    for m in &mean {
        assert!(m.abs() < 1e-10, "whitened mean component {m:.2e}");
    }
    let cov = art.white.covariance();
    let d = art.white.dim();
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!(
                (cov[i * d + j] - expect).abs() < 1e-8,
                "covariance[{i}][{j}] = {}",
                cov[i * d + j]
            );
        }
    }
    println!(
        "criterion 10 numerical hygiene: PASS (grad err {worst:.1e}, RK4 order {order:.2})"
    );
}

#[test]
fn criterion_11_conserved_formula_quality() {
    const TOL: f64 = 1e-4;
    let mut checked = 0;
    let mut summary_worst: f64 = 0.0;

    let mut check = |formula: &str, traj: &dynamics::Trajectory, label: &str| {
        let stats = export::evaluate_candidate(formula, traj).expect("evaluation");
        let spread = stats.relative_spread();
        assert!(
            spread < TOL,
            "{label}: std/|mean| = {spread:.2e} (mean {:.3e})",
            stats.mean
        );
        checked += 1;
        summary_worst = summary_worst.max(spread);
    };

    // Closed-form invariants on their own unperturbed trajectories. Where
    // a formula's mean vanishes on the default trajectory (center-of-mass
    // rows, the axis angle), a variant trajectory moves it off zero.
    for system in FIVE {
        let default = dynamics::default_trajectory(&system, 10).expect("simulation");
        for (name, formula) in export::ground_truth_formulas(&system) {
            match (system, name) {
                (System::Kepler { .. }, "major_axis_angle") => {
                    let rotated = dynamics::simulate(
                        &system,
                        &[0.0, 1.0, -1.2, 0.0],
                        system.default_dt(),
                        system.default_steps(),
                    )
                    .expect("rotated orbit");
                    check(&formula, &rotated, "kepler major_axis_angle");
                }
                (System::Pendulum, "small_angle_energy") => {
                    // Its own regime: a small-angle trajectory.
                    let small = dynamics::simulate(
                        &system,
                        &[0.005, 0.005, 0.0, 0.0],
                        1e-3,
                        100_000,
                    )
                    .expect("small-angle run");
                    check(&formula, &small, "pendulum small_angle_energy");
                }
                (System::ThreeBody { .. }, "com_x" | "com_y") => {
                    // Shift the center of mass off the origin.
                    let mut x0 = system.default_initial_state();
                    for b in 0..3 {
                        x0[2 * b] += 3.0;
                        x0[2 * b + 1] += 2.0;
                    }
                    let shifted = dynamics::simulate_strided(
                        &system,
                        &x0,
                        system.default_dt(),
                        system.default_steps(),
                        10,
                    )
                    .expect("shifted run");
                    check(&formula, &shifted, &format!("threebody {name}"));
                }
                (System::ThreeBody { .. }, "com_xdot" | "com_ydot") => {
                    // Boost so the center-of-mass velocity is nonzero.
                    let mut x0 = system.default_initial_state();
                    for b in 0..3 {
                        x0[6 + 2 * b] += 0.05;
                        x0[6 + 2 * b + 1] -= 0.03;
                    }
                    let boosted = dynamics::simulate_strided(
                        &system,
                        &x0,
                        system.default_dt(),
                        system.default_steps(),
                        10,
                    )
                    .expect("boosted run");
                    check(&formula, &boosted, &format!("threebody {name}"));
                }
                _ => check(&formula, &default, &format!("{} {name}", system.name())),
            }
        }
    }
    println!(
        "criterion 11 formula conservation: PASS ({checked} formulas, worst std/|mean| {summary_worst:.1e})"
    );
}
