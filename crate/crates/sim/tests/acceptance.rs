//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use qdcnot::commands::{provenance, run, Command};
use qdcnot::config::{Mode, OverlapConfig, RunConfig};
use qdcnot::engine::{mc_truth_table, run_gate, run_hbt, shard_statistic, McSettings};
use qdcnot::output::write_all;
use qdcnot_core::analysis::{
    analytic_fidelity, analytic_truth_table, fidelity_threshold, g2_from_histogram,
    overlap_vs_m,
};
use qdcnot_core::experiment::{
    deconvolve_peaks, normalize, overlap_correction, tail_fraction, CorrelationHistogram,
    HbtExperiment, HistogramLayout, PeakShape, TimeBinSpec,
};
use qdcnot_core::fock::{post_selected_map, DualRailEncoding};
use qdcnot_core::gate::{build_cnot, coincidence_table, AnalysisSetting, InputState};
use qdcnot_core::source::{brightness_in_bin, SourceParams};

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn mc_config(m: f64, g2: f64, periods: u64, p_max: u32, setting: &str) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.source.overlap_model = OverlapConfig::Constant(m);
    cfg.source.g2_zero = g2;
    cfg.experiment.mode = Mode::Mc;
    cfg.experiment.n_periods = periods;
    cfg.experiment.max_period_offset = p_max;
    cfg.experiment.input = setting.into();
    cfg.experiment.analysis = setting.into();
    cfg.validate().unwrap();
    cfg
}

fn mc(cfg: &RunConfig) -> McSettings {
    McSettings {
        n_periods: cfg.experiment.n_periods,
        shards: cfg.experiment.shards,
        seed: cfg.experiment.seed,
    }
}

#[test]
fn criterion_01_coincidence_table_closed_forms() {
    let start = Instant::now();
    let circuit = build_cnot();
    let mut worst: f64 = 0.0;
    for m in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = coincidence_table(&circuit, m).unwrap();
        let d = 2.0 / 9.0 * (1.0 - m);
        // rows are inputs HH, HV, VH, VV; columns the analysed outputs
        let want = [
            [1.0 / 9.0, 0.0, 0.0, 0.0],
            [0.0, 1.0 / 9.0, 0.0, 0.0],
            [0.0, 0.0, d, 1.0 / 9.0],
            [0.0, 0.0, 1.0 / 9.0, d],
        ];
        for i in 0..4 {
            for o in 0..4 {
                worst = worst.max((t[(i, o)] - want[i][o]).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst <= 1e-12 && secs < 1.0,
        format!("max deviation {worst:.2e}, {secs:.3} s"),
    );
}

/// Real 2x2 blocks of the bare gate, each acting on a pair of modes.
/// Block rows are outputs, columns inputs.
fn gate_blocks() -> Vec<([usize; 2], [[f64; 2]; 2])> {
    let r = (1.0f64 / 3.0).sqrt();
    let t = (2.0f64 / 3.0).sqrt();
    let hadamard = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
    // 1/3 beamsplitter with the reflected port continuing each rail
    let coupler = [[r, -t], [t, r]];
    vec![
        ([2, 3], hadamard),
        ([1, 3], coupler),
        ([0, 4], coupler),
        ([2, 5], coupler),
        ([2, 3], hadamard),
    ]
}

/// Every single-photon path through the gate from `start`: (final mode,
/// product of the step amplitudes).
fn single_paths(start: usize) -> Vec<(usize, f64)> {
    let mut paths = vec![(start, 1.0)];
    for (modes, block) in gate_blocks() {
        let mut next = Vec::new();
        for (mode, amp) in paths {
            match modes.iter().position(|&m| m == mode) {
                Some(col) => {
                    for row in 0..2 {
                        if block[row][col] != 0.0 {
                            next.push((modes[row], amp * block[row][col]));
                        }
                    }
                }
                None => next.push((mode, amp)),
            }
        }
        paths = next;
    }
    paths
}

#[test]
fn criterion_02_ideal_gate_matches_path_enumeration() {
    let start = Instant::now();
    let map = post_selected_map(build_cnot().unitary(), &DualRailEncoding::POLARIZATION).unwrap();
    let secs = start.elapsed().as_secs_f64();
    // logical index -> (control mode, target mode)
    let rails = [(0, 2), (0, 3), (1, 2), (1, 3)];
    let cnot = [0, 1, 3, 2];
    let mut worst_map: f64 = 0.0;
    let mut worst_cnot: f64 = 0.0;
    let mut worst_prob: f64 = 0.0;
    for (i, &(a, b)) in rails.iter().enumerate() {
        let (pa, pb) = (single_paths(a), single_paths(b));
        let mut success = 0.0;
        for (o, &(c, d)) in rails.iter().enumerate() {
            // both photon-to-detector assignments of every pair of paths
            let mut amp = 0.0;
            for &(ea, xa) in &pa {
                for &(eb, xb) in &pb {
                    if (ea, eb) == (c, d) || (ea, eb) == (d, c) {
                        amp += xa * xb;
                    }
                }
            }
            success += amp * amp;
            worst_map = worst_map.max((map[(o, i)].re - amp).abs() + map[(o, i)].im.abs());
            let ideal = if o == cnot[i] { 1.0 / 3.0 } else { 0.0 };
            worst_cnot = worst_cnot.max((amp - ideal).abs());
        }
        worst_prob = worst_prob.max((success - 1.0 / 9.0).abs());
    }
    let pass = worst_map <= 1e-12 && worst_cnot <= 1e-12 && worst_prob <= 1e-12 && secs < 1.0;
    report(
        2,
        pass,
        format!(
            "map vs paths {worst_map:.2e}, vs CNOT/3 {worst_cnot:.2e}, success-1/9 {worst_prob:.2e}, {secs:.3} s"
        ),
    );
}

#[test]
fn criterion_03_bell_fidelity_curve() {
    let start = Instant::now();
    let circuit = build_cnot();
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let m = i as f64 / 100.0;
        let f = analytic_fidelity(&circuit, m).unwrap();
        worst = worst.max((f - (1.0 + m) / (2.0 * (2.0 - m))).abs());
    }
    let f0 = analytic_fidelity(&circuit, 0.0).unwrap();
    let f5 = analytic_fidelity(&circuit, 0.5).unwrap();
    let f76 = analytic_fidelity(&circuit, 0.76).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-10
        && (f0 - 0.25).abs() <= 1e-10
        && (f5 - 0.5).abs() <= 1e-10
        && (f76 - 0.7097).abs() < 5e-5
        && (f76 - 0.710).abs() < 0.036
        && secs < 5.0;
    report(
        3,
        pass,
        format!("grid deviation {worst:.2e}, F(0)={f0:.6} F(0.5)={f5:.6} F(0.76)={f76:.6}, {secs:.3} s"),
    );
}

#[test]
fn criterion_04_entangling_threshold() {
    let circuit = build_cnot();
    let root = fidelity_threshold(0.5, |m| Ok(analytic_fidelity(&circuit, m)?)).unwrap();
    let target = 1.0 / 3.0;
    report(
        4,
        (root - target).abs() <= 1e-9,
        format!("fidelity crosses 0.5 at M = {root:.12}, criterion asks for {target:.12}"),
    );
}

#[test]
fn criterion_05_truth_table_overlap() {
    let circuit = build_cnot();
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let m = i as f64 / 20.0;
        let ov = analytic_truth_table(&circuit, m).unwrap().overlap().unwrap();
        let closed = 0.5 * (1.0 + 1.0 / (3.0 - 2.0 * m));
        worst = worst.max((ov - closed).abs()).max((overlap_vs_m(m) - closed).abs());
    }
    let half = analytic_truth_table(&circuit, 0.5).unwrap().overlap().unwrap();

    let cfg = mc_config(0.5, 0.0, 1_000_000, 20, "HH");
    let truth = mc_truth_table(
        |i: InputState, a: AnalysisSetting| cfg.gate_experiment(i, a, 2300.0),
        &mc(&cfg),
        0,
    )
    .unwrap();
    let ov = truth.overlap().unwrap();
    let err = truth.overlap_error().unwrap();
    let pull = (ov - half).abs() / err;
    let pass = worst <= 1e-12 && (half - 0.75).abs() <= 1e-12 && pull <= 3.0;
    report(
        5,
        pass,
        format!("analytic deviation {worst:.2e}, M=0.5 -> {half:.6}; MC {ov:.4} +- {err:.4} ({pull:.2} sigma)"),
    );
}

fn histogram_index(h: &CorrelationHistogram, t: f64) -> usize {
    ((t - h.layout().lower_edge()) / h.layout().resolution_ps) as usize
}

/// Maxima of a moving average over one period centred on `centre` that
/// dominate a neighbourhood of `reach_ps` on each side and exceed a fifth of
/// the largest.
fn peaks_in_period(h: &CorrelationHistogram, centre: f64, smooth: usize, reach_ps: f64) -> Vec<f64> {
    let half_t = 0.5 * h.layout().rep_period_ps;
    let lo = histogram_index(h, centre - half_t);
    let hi = histogram_index(h, centre + half_t);
    let c = h.counts();
    let avg: Vec<f64> = (lo..hi)
        .map(|i| {
            let a = i.saturating_sub(smooth);
            let b = (i + smooth + 1).min(c.len());
            c[a..b].iter().sum::<u64>() as f64 / (b - a) as f64
        })
        .collect();
    let top = avg.iter().cloned().fold(0.0, f64::max);
    let w = (reach_ps / h.layout().resolution_ps) as usize;
    (w..avg.len() - w)
        .filter(|&j| {
            let left = avg[j - w..j].iter().all(|&x| x < avg[j]);
            let right = avg[j + 1..=j + w].iter().all(|&x| x <= avg[j]);
            left && right && avg[j] > 0.2 * top
        })
        .map(|j| h.bin_center(lo + j))
        .collect()
}

#[test]
fn criterion_06_histogram_structure() {
    let cfg = mc_config(0.5, 0.01, 1_000_000, 100, "VH");
    let exp = cfg
        .gate_experiment(cfg.input().unwrap(), cfg.analysis().unwrap(), 2300.0)
        .unwrap();
    let start = Instant::now();
    let h = run_gate(&exp, &mc(&cfg), 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let layout = *h.merged.layout();

    let found = peaks_in_period(&h.merged, 0.0, 4, 1000.0);
    let centres: Vec<f64> = (-2..=2).map(|k| layout.peak_center(0, k)).collect();
    let five = found.len() == 5
        && found.iter().zip(&centres).all(|(f, c)| (f - c).abs() <= 250.0);

    // stack all uncorrelated sets on their own period centre
    let mut stacked = CorrelationHistogram::new(HistogramLayout {
        max_period_offset: 1,
        ..layout
    })
    .unwrap();
    let mut counts = vec![0u64; stacked.counts().len()];
    for p in (-100..=100).filter(|&p: &i32| p != 0) {
        for (j, slot) in counts.iter_mut().enumerate() {
            let t = stacked.bin_center(j) + layout.peak_center(p, 0);
            *slot += h.merged.counts().get(histogram_index(&h.merged, t)).copied().unwrap_or(0);
        }
    }
    stacked = CorrelationHistogram::from_counts(*stacked.layout(), counts, 1).unwrap();
    let quint = peaks_in_period(&stacked, 0.0, 4, 1000.0);
    // the weak outer members may only show as shoulders; their areas are
    // checked below
    let quintuplet = quint.len() >= 3
        && quint
            .iter()
            .all(|f| centres.iter().any(|c| (f - c).abs() <= 250.0));

    let shape = exp.peak_shape();
    let expected = exp.expected().unwrap();
    let sets = overlap_correction(&h.merged.peak_areas(&exp.bin), &shape)
        .uncorrelated_offsets()
        .count();
    let mut areas_ok = sets >= 200;
    let mut detail = String::new();
    for k in -2..=2 {
        let (mean, se) = shard_statistic(&h, |s| {
            overlap_correction(&s.peak_areas(&exp.bin), &shape).uncorrelated_rate(k).0
        });
        let want = expected.windowed_uncorrelated(k, exp.bin.width_ps, &shape);
        let pull = (mean - want).abs() / se;
        let ratio = mean / want;
        areas_ok &= pull <= 3.0 && (ratio - 1.0).abs() <= 0.05;
        detail.push_str(&format!(" k={k}: ratio {ratio:.4} ({pull:.2} sigma);"));
    }
    report(
        6,
        five && quintuplet && areas_ok && secs < 60.0,
        format!(
            "correlated peaks at {found:.0?}, uncorrelated stack at {quint:.0?}, {sets} sets,{detail} {secs:.1} s"
        ),
    );
}

#[test]
fn criterion_07_hom_peak() {
    let m1 = mc_config(1.0, 0.0, 1_000_000, 20, "VH");
    let exp = m1
        .gate_experiment(m1.input().unwrap(), m1.analysis().unwrap(), 2300.0)
        .unwrap();
    let h = run_gate(&exp, &mc(&m1), 0).unwrap();
    let shape = exp.peak_shape();
    let corrected = overlap_correction(&h.merged.peak_areas(&exp.bin), &shape);
    let n = normalize(&corrected, &exp.expected().unwrap(), &shape).unwrap();
    let (z, z_err) = (n.correlated[2], n.correlated_err[2]);
    let vanishes = z.abs() <= 3.0 * z_err;

    let m0 = mc_config(0.0, 0.0, 1_000_000, 20, "VH");
    let exp = m0
        .gate_experiment(m0.input().unwrap(), m0.analysis().unwrap(), 2300.0)
        .unwrap();
    let h = run_gate(&exp, &mc(&m0), 1).unwrap();
    let a = overlap_correction(&h.merged.peak_areas(&exp.bin), &exp.peak_shape());
    // zero delay and each 2.3 ns peak both collect one quarter of the pairs
    let side = 0.5 * (a.get(0, -1) + a.get(0, 1));
    let side_var = 0.25 * (a.variance(0, -1) + a.variance(0, 1));
    let diff = a.get(0, 0) - side;
    let diff_err = (a.variance(0, 0) + side_var).sqrt();
    let classical = diff.abs() <= 3.0 * diff_err;
    report(
        7,
        vanishes && classical,
        format!(
            "M=1 normalized zero-delay {z:.5} +- {z_err:.5}; M=0 zero-delay {:.1} vs side mean {side:.1} ({:.2} sigma)",
            a.get(0, 0),
            diff.abs() / diff_err
        ),
    );
}

#[test]
fn criterion_08_g2_calibration() {
    let cfg = RunConfig::default();
    let exp = HbtExperiment {
        source: SourceParams {
            g2_zero: 0.01,
            ..SourceParams::default()
        },
        detection: cfg.detection_params(),
        resolution_ps: 50.0,
        max_period_offset: 10,
    };
    let mc = McSettings {
        n_periods: 10_000_000,
        shards: 8,
        seed: 1,
    };
    let h = run_hbt(&exp, &mc, 0).unwrap();
    let g = g2_from_histogram(&h.merged, 6000.0).unwrap();
    report(
        8,
        (g.value - 0.01).abs() <= 0.005,
        format!("g2(0) = {:.4} +- {:.4} from {} side peaks", g.value, g.err, g.side_peaks),
    );
}

#[test]
fn criterion_09_brightness_law() {
    let p = SourceParams {
        brightness_max: 0.75,
        decay_time_ps: 750.0,
        ..SourceParams::default()
    };
    let mut worst: f64 = 0.0;
    for t in [0.0, 100.0, 400.0, 750.0, 2000.0, 2300.0] {
        let want = 0.75 * (1.0 - (-t / 750.0f64).exp());
        worst = worst.max((brightness_in_bin(&p, t) - want).abs());
    }
    let b = brightness_in_bin(&p, 750.0);
    report(
        9,
        worst <= 1e-12 && (b - 0.4741).abs() < 5e-5,
        format!("law deviation {worst:.2e}, value at 750 ps {b:.6}"),
    );
}

#[test]
fn criterion_10_overlap_correction() {
    let f = tail_fraction(2300.0, 750.0);
    let tail_ok =
        (f - (-2.3f64 / 0.75).exp()).abs() <= 1e-12 && (f - 0.047).abs() < 5e-4 && (0.045..=0.10).contains(&f);

    // two overlapping peaks rendered bin by bin from the exact line shape
    let shape = PeakShape::new(750.0, 350.0);
    let layout = HistogramLayout {
        resolution_ps: 10.0,
        rep_period_ps: 12200.0,
        delay_ps: 2300.0,
        max_period_offset: 1,
    };
    let truth = [(0, 0, 200_000.0), (0, 1, 80_000.0)];
    let empty = CorrelationHistogram::new(layout).unwrap();
    let counts = (0..empty.counts().len())
        .map(|i| {
            let lo = empty.bin_center(i) - 5.0;
            truth
                .iter()
                .map(|&(p, k, a)| {
                    let c = layout.peak_center(p, k);
                    a * shape.mass_between(lo - c, lo + 10.0 - c)
                })
                .sum::<f64>()
                .round() as u64
        })
        .collect();
    let h = CorrelationHistogram::from_counts(layout, counts, 1).unwrap();
    let back = deconvolve_peaks(&h.peak_areas(&TimeBinSpec::new(2300.0, 2300.0).unwrap()), &shape);
    let mut worst: f64 = 0.0;
    for &(p, k, a) in &truth {
        worst = worst.max((back.get(p, k) / a - 1.0).abs());
    }
    report(
        10,
        tail_ok && worst <= 0.01,
        format!("tail fraction {f:.5}, worst recovered-area error {:.3}%", 100.0 * worst),
    );
}

#[test]
fn criterion_11_determinism() {
    let mut cfg = mc_config(0.5, 0.01, 50_000, 10, "VH");
    cfg.experiment.time_bins_ps = vec![2300.0, 1000.0];
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = Vec::new();
        for command in [Command::TruthTable, Command::Histogram] {
            let sub = dir.path().join(command.as_str());
            let artifacts = run(&cfg, command).unwrap();
            for path in write_all(&sub, &provenance(&cfg, command), &artifacts).unwrap() {
                bytes.push((path.file_name().unwrap().to_owned(), std::fs::read(&path).unwrap()));
            }
        }
        outputs.push(bytes);
    }
    let files = outputs[0].len();
    report(
        11,
        files > 0 && outputs[0] == outputs[1],
        format!("{files} files compared byte for byte"),
    );
}
