//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when any check fails, except the checks listed in
//! `DOCUMENTED_RED`, which are reported as FAIL but do not stop the run.

use num_complex::Complex64;
use phaselock::analysis::{self, Direction};
use phaselock::commands::{table1_values, table2_values};
use phaselock::gridfile::GridFile;
use phaselock::morse::{EigenTable, MorseParams};
use phaselock::phase_space::{
    auto_momentum_grid, fft_momentum_distribution, fourier_momentum_density, marginals,
    rms_momentum, wigner_overlap, wigner_transform, wigner_transform_with, LobeCounter,
    WignerMethod, AUTO_P_SPAN,
};
use phaselock::wavepacket::{Parity, PhaseLockedPacket, StateGrid};
use phaselock::UniformGrid;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

/// Checks known not to hold for this model; see README, "Known deviations".
const DOCUMENTED_RED: &[&str] = &["lobes(pi/4,T/16)=8", "T/16 theta=0 is global minimum"];

const NX: usize = 2048;
const NP: usize = 512;

struct Check {
    label: String,
    pass: bool,
    detail: String,
}

fn check(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    name: &'static str,
    checks: Vec<Check>,
}

fn packet() -> PhaseLockedPacket {
    let grid = UniformGrid::new(-0.25, 0.45, NX).unwrap();
    PhaseLockedPacket::build(MorseParams::iodine(), grid, 1.0, 24).unwrap()
}

fn revival() -> f64 {
    MorseParams::iodine().characteristic_times().revival
}

fn max_abs_diff(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn eigenstructure() -> Criterion {
    let params = MorseParams::iodine();
    let grid = UniformGrid::new(-0.25, 0.45, NX).unwrap();
    let table = EigenTable::new(params, grid, 24).unwrap();
    let mut ortho = 0.0_f64;
    for a in table.functions() {
        for b in table.functions() {
            let prod: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
            let want = if a.state.m == b.state.m { 1.0 } else { 0.0 };
            ortho = ortho.max((grid.trapezoid(&prod) - want).abs());
        }
    }
    let mut rayleigh = 0.0_f64;
    for m in [0, 5, 12, 23] {
        let f = table.function(m);
        let state = StateGrid {
            grid,
            psi: f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            theta: None,
            t: 0.0,
            lambda: params.lambda(),
        };
        let (p, prob) = fft_momentum_distribution(&state);
        let kinetic: f64 =
            p.iter().zip(&prob).map(|(p, w)| p * p * w).sum::<f64>() / (2.0 * params.mass());
        let pot: Vec<f64> = grid
            .points()
            .iter()
            .zip(&f.values)
            .map(|(&x, v)| params.potential(x) * v * v)
            .collect();
        let e = kinetic + grid.trapezoid(&pot);
        let exact = params.energy(m).unwrap();
        rayleigh = rayleigh.max(((e - exact) / exact).abs());
    }
    let lambda = params.lambda();
    let times = params.characteristic_times();
    let t_cl_fs = times.classical * phaselock::morse::AU_TIME_SECONDS * 1e15;
    let t_rev_ps = times.revival * phaselock::morse::AU_TIME_SECONDS * 1e12;
    Criterion {
        name: "eigenstructure",
        checks: vec![
            check(
                "orthonormality",
                ortho < 1e-6,
                format!("max error {ortho:.2e}"),
            ),
            check(
                "rayleigh",
                rayleigh < 1e-3,
                format!("max relative error {rayleigh:.2e}"),
            ),
            check(
                "lambda",
                (lambda - 116.56).abs() <= 0.01,
                format!("{lambda:.4}"),
            ),
            check(
                "T_cl",
                (t_cl_fs - 156.0).abs() <= 1.0,
                format!("{t_cl_fs:.2} fs"),
            ),
            check(
                "T_rev",
                (t_rev_ps - 36.2).abs() <= 0.2,
                format!("{t_rev_ps:.3} ps"),
            ),
        ],
    }
}

fn superposition_identities() -> Criterion {
    let pk = packet();
    let rev = revival();
    let mut ident = 0.0_f64;
    for t in [0.0, rev / 16.0, rev / 8.0] {
        let odd = pk.subsidiary_state(Parity::Odd, t);
        let even = pk.subsidiary_state(Parity::Even, t);
        let a = pk.phase_locked_state(0.0, t);
        let b = pk.phase_locked_state(PI, t);
        for (x, y) in a
            .psi
            .iter()
            .zip(&odd.psi)
            .chain(b.psi.iter().zip(&even.psi))
        {
            ident = ident.max((x - y).norm());
        }
    }
    let mut norm = 0.0_f64;
    let mut pair = 0.0_f64;
    for i in 0..5 {
        let theta = i as f64 * 2.0 * PI / 5.0;
        for j in 0..5 {
            let t = j as f64 * rev / 8.0;
            norm = norm.max((pk.phase_locked_state(theta, t).norm() - 1.0).abs());
            let sum: Vec<f64> = pk
                .density(theta, t)
                .iter()
                .zip(pk.density(theta + PI, t))
                .map(|(a, b)| a + b)
                .collect();
            let odd = pk.subsidiary_state(Parity::Odd, t).density();
            let even = pk.subsidiary_state(Parity::Even, t).density();
            pair = pair.max(max_abs_diff(sum, odd.iter().zip(&even).map(|(a, b)| a + b)));
        }
    }
    Criterion {
        name: "superposition_identities",
        checks: vec![
            check(
                "theta=0 is odd set, theta=pi is even set",
                ident < 1e-12,
                format!("{ident:.2e}"),
            ),
            check("norm on 5x5 lattice", norm < 1e-6, format!("{norm:.2e}")),
            check(
                "rho(theta)+rho(theta+pi)",
                pair < 1e-10,
                format!("{pair:.2e}"),
            ),
        ],
    }
}

/// Momentum grid wide enough for both states.
fn shared_p_grid(a: &StateGrid, b: &StateGrid) -> UniformGrid {
    let wider = if rms_momentum(a) >= rms_momentum(b) {
        a
    } else {
        b
    };
    auto_momentum_grid(wider, NP, AUTO_P_SPAN).unwrap()
}

fn wigner_correctness() -> Criterion {
    let pk = packet();
    let rev = revival();
    let mut checks = Vec::new();
    for (label, t) in [("t=0", 0.0), ("t=T/16", rev / 16.0), ("t=T/8", rev / 8.0)] {
        let s = pk.phase_locked_state(PI / 2.0, t);
        let p = auto_momentum_grid(&s, NP, AUTO_P_SPAN).unwrap();
        let w = wigner_transform(&s, &p).unwrap();
        let (pos, mom) = marginals(&w);
        let pos_err = max_abs_diff(pos, s.density());
        let mom_err = max_abs_diff(mom, fourier_momentum_density(&s, &p));
        checks.push(check(
            format!("marginals {label}"),
            pos_err < 1e-4 && mom_err < 1e-4,
            format!("x {pos_err:.2e}, p {mom_err:.2e}"),
        ));
        checks.push(check(
            format!("norm {label}"),
            (w.norm_captured - 1.0).abs() < 1e-3,
            format!("{:.6}", w.norm_captured),
        ));
        let purity = w.purity();
        checks.push(check(
            format!("purity {label}"),
            (purity - 1.0).abs() < 5e-3,
            format!("{purity:.6}"),
        ));
    }
    let pairs = [
        (
            pk.subsidiary_state(Parity::Even, rev / 8.0),
            pk.subsidiary_state(Parity::Odd, rev / 8.0),
        ),
        (
            pk.phase_locked_state(PI / 2.0, rev / 8.0),
            pk.phase_locked_state(0.0, rev / 8.0),
        ),
        (
            pk.phase_locked_state(PI / 4.0, rev / 16.0),
            pk.phase_locked_state(PI / 3.0, rev / 16.0),
        ),
    ];
    let mut route = 0.0_f64;
    for (a, b) in &pairs {
        let p = shared_p_grid(a, b);
        let wa = wigner_transform(a, &p).unwrap();
        let wb = wigner_transform(b, &p).unwrap();
        let direct = a.inner(b).unwrap().norm_sqr();
        route = route.max((wigner_overlap(&wa, &wb).unwrap() - direct).abs());
    }
    checks.push(check(
        "overlap routes agree (3 pairs)",
        route < 5e-3,
        format!("{route:.2e}"),
    ));

    let smoke_grid = UniformGrid::new(-0.15, 0.25, 128).unwrap();
    // the eight lowest levels fit this window and stay inside its momentum band
    let small = PhaseLockedPacket::build(MorseParams::iodine(), smoke_grid, 1.0, 8).unwrap();
    assert!(small.warnings().is_empty(), "{:?}", small.warnings());
    let s = small.phase_locked_state(PI / 4.0, 0.0);
    let p = auto_momentum_grid(&s, 128, AUTO_P_SPAN).unwrap();
    let fast = wigner_transform_with(&s, &p, WignerMethod::Fourier).unwrap();
    let slow = wigner_transform_with(&s, &p, WignerMethod::Direct).unwrap();
    let smoke = max_abs_diff(fast.w.iter().copied(), slow.w.iter().copied());
    checks.push(check(
        "DFT path vs direct, 128 points",
        smoke < 1e-8,
        format!("{smoke:.2e}"),
    ));
    Criterion {
        name: "wigner_correctness",
        checks,
    }
}

fn structure_classification() -> Criterion {
    let pk = packet();
    let rev = revival();
    let cases = [
        ("pi/4", PI / 4.0, "0", 0.0, 2),
        ("pi/2", PI / 2.0, "T/8", rev / 8.0, 4),
        ("0", 0.0, "T/16", rev / 16.0, 4),
        ("pi", PI, "T/16", rev / 16.0, 4),
        ("pi/4", PI / 4.0, "T/16", rev / 16.0, 8),
        ("pi/2", PI / 2.0, "T/16", rev / 16.0, 8),
    ];
    let mut checks = Vec::new();
    for (th_label, theta, t_label, t, want) in cases {
        let s = pk.phase_locked_state(theta, t);
        let p = auto_momentum_grid(&s, NP, AUTO_P_SPAN).unwrap();
        let w = wigner_transform(&s, &p).unwrap();
        let counts: Vec<usize> = [0.2, 0.3, 0.4]
            .iter()
            .map(|&thr| {
                LobeCounter::for_model(pk.params(), thr)
                    .unwrap()
                    .count(&w)
                    .unwrap()
            })
            .collect();
        checks.push(check(
            format!("lobes({th_label},{t_label})={want}"),
            counts.iter().all(|&c| c == want),
            format!("counts at thresholds 0.2/0.3/0.4: {counts:?}"),
        ));
    }
    Criterion {
        name: "structure_classification",
        checks,
    }
}

fn table2_quantitative() -> Criterion {
    let pk = packet();
    let rows = table2_values(&pk);
    let r0 = pk.params().r0();
    let cases = [
        ("pi/2 T/8", rows[0][4], 0.083),
        ("0 T/16", rows[1][0], 0.0766),
        ("pi T/16", rows[1][8], 0.0837),
    ];
    let checks: Vec<Check> = cases
        .iter()
        .map(|&(label, got, want)| {
            let rel = (got - want).abs() / want;
            check(
                format!("tile_area({label})"),
                rel <= 0.15,
                format!("{got:.4} vs {want} ({:+.1}%)", 100.0 * (got - want) / want),
            )
        })
        .collect();
    if checks.iter().any(|c| !c.pass) {
        println!("  convention discrepancy report (p conjugate to x = r/r0 - 1 vs p carrying an extra r0):");
        for &(label, got, want) in &cases {
            println!(
                "    {label}: conjugate {got:.5}, times r0 {:.5}, over r0 {:.5}, reference {want}",
                got * r0,
                got / r0
            );
        }
    }
    Criterion {
        name: "table2_quantitative",
        checks,
    }
}

fn table2_properties() -> Criterion {
    let pk = packet();
    let rows = table2_values(&pk);
    let ordered = rows[0].iter().zip(&rows[1]).all(|(a, b)| b < a);
    let min = rows.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let (at, _) =
        rows[1].iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc },
        );
    Criterion {
        name: "table2_properties",
        checks: vec![
            check(
                "T/16 row below T/8 row",
                ordered,
                format!("T/8 {:?} / T/16 {:?}", round4(&rows[0]), round4(&rows[1])),
            ),
            check(
                "T/16 theta=0 is global minimum",
                rows[1][0] == min,
                format!(
                    "theta=0: {:.6}, minimum {min:.6} at theta={at}pi/8",
                    rows[1][0]
                ),
            ),
        ],
    }
}

fn round4(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

fn table1_properties() -> Criterion {
    let pk = packet();
    let values = table1_values(&pk).unwrap();
    let t = revival() / 8.0;
    let mirrored: Vec<f64> = (0..9)
        .map(|j| {
            let s = pk.phase_locked_state(2.0 * PI - j as f64 * PI / 8.0, t);
            analysis::fringe_amplitude(&s.density(), &s.grid, pk.params().r0()).unwrap()
        })
        .collect();
    let end = values[8];
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let sym = values
        .iter()
        .zip(&mirrored)
        .map(|(a, b)| {
            if a.max(*b) == 0.0 {
                0.0
            } else {
                (a - b).abs() / a.max(*b)
            }
        })
        .fold(0.0, f64::max);
    Criterion {
        name: "table1_properties",
        checks: vec![
            check(
                "zero at theta=0",
                values[0] < 1e-3 * end,
                format!("{:.3e}", values[0]),
            ),
            check(
                "nondecreasing on [0, pi]",
                monotone,
                format!("{:?}", round4(&values)),
            ),
            check(
                "symmetric about pi",
                sym <= 0.02,
                format!("max relative asymmetry {sym:.2e}"),
            ),
            check(
                "theta=pi endpoint",
                (end - 7.63).abs() <= 0.25 * 7.63,
                format!("{end:.3} vs 7.63"),
            ),
        ],
    }
}

fn sensitivity() -> Criterion {
    let pk = packet();
    let s = pk.phase_locked_state(PI / 2.0, revival() / 8.0);
    let (dx, _) = analysis::uncertainties(&s);
    let scan = analysis::sensitivity_scan(&s, Direction::Position, dx, 257).unwrap();
    let zero = scan.overlaps[0];
    let fz = scan.first_zero;
    Criterion {
        name: "sensitivity",
        checks: vec![
            check(
                "overlap(0)=1",
                (zero - 1.0).abs() < 1e-6,
                format!("{zero:.12}"),
            ),
            check(
                "compass first zero < dx/3",
                fz.is_some_and(|z| z < dx / 3.0),
                format!("first zero {fz:?}, dx/3 = {:.5}", dx / 3.0),
            ),
        ],
    }
}

fn run_cli(bin: &Path, dir: &Path, workers: &str, cmd: &str) -> bool {
    Command::new(bin)
        .arg(cmd)
        .arg("--set")
        .arg(format!("output_dir={}", dir.display()))
        .args([
            "--set",
            "theta=0,pi/2",
            "--set",
            "t_frac=1/8,1/16",
            "--set",
            "format=grid",
        ])
        .env("PHASELOCK_WORKERS", workers)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism_and_io() -> Criterion {
    let bin = Path::new(env!("CARGO_BIN_EXE_phaselock"));
    let tmp = tempfile::tempdir().unwrap();
    let commands = [
        "eigen",
        "state",
        "wigner",
        "carpet",
        "metrics",
        "sensitivity",
        "table1",
        "table2",
    ];
    let mut ran = true;
    for workers in ["1", "4"] {
        let dir = tmp.path().join(workers);
        for cmd in commands {
            ran &= run_cli(bin, &dir, workers, cmd);
        }
    }
    let one = dir_bytes(&tmp.path().join("1"));
    let four = dir_bytes(&tmp.path().join("4"));
    let identical = ran && !one.is_empty() && one == four;

    let mut runner = TestRunner::new(Config {
        cases: 10,
        failure_persistence: None,
        ..Config::default()
    });
    let bits = |n: usize| prop::collection::vec(any::<u64>().prop_map(f64::from_bits), n);
    let strategy = (1usize..64, 1usize..64).prop_flat_map(move |(nx, ny)| {
        (
            bits(nx),
            bits(ny),
            bits(nx * ny),
            prop::collection::btree_map("\\PC{0,6}", "\\PC{0,10}", 0..4),
        )
    });
    // raw bit patterns, so NaNs and subnormals appear too
    let round_trip = runner.run(&strategy, |(ax, ay, payload, meta)| {
        let g = GridFile::new(vec![ax, ay], payload, meta).unwrap();
        let back = GridFile::from_bytes(&g.to_bytes()).unwrap();
        prop_assert_eq!(back.to_bytes(), g.to_bytes());
        prop_assert_eq!(
            back.payload.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            g.payload.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        Ok(())
    });
    Criterion {
        name: "determinism_and_io",
        checks: vec![
            check(
                "byte-identical outputs, workers 1 vs 4",
                identical,
                format!(
                    "{} files compared, all commands succeeded: {ran}",
                    one.len()
                ),
            ),
            check(
                "GridFile round trip, 10 random grids",
                round_trip.is_ok(),
                format!("{round_trip:?}"),
            ),
        ],
    }
}

fn main() {
    type Run = fn() -> Criterion;
    let suite: [(&str, Run); 9] = [
        ("1", eigenstructure),
        ("2", superposition_identities),
        ("3", wigner_correctness),
        ("4", structure_classification),
        ("5", table2_quantitative),
        ("6", table2_properties),
        ("7", table1_properties),
        ("8", sensitivity),
        ("9", determinism_and_io),
    ];
    let mut unexpected = 0;
    let mut failed = 0;
    for (id, run) in suite {
        let c = run();
        let pass = c.checks.iter().all(|k| k.pass);
        println!("{} [{id}] {}", if pass { "PASS" } else { "FAIL" }, c.name);
        for k in &c.checks {
            let documented = DOCUMENTED_RED.contains(&k.label.as_str());
            let mark = match (k.pass, documented) {
                (true, _) => "ok  ",
                (false, true) => "red ",
                (false, false) => "FAIL",
            };
            println!("    {mark} {}: {}", k.label, k.detail);
            if !k.pass && !documented {
                unexpected += 1;
            }
        }
        if !pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of 9 criteria pass; {unexpected} undocumented failing checks",
        9 - failed
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
