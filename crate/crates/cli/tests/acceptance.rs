//! Acceptance suite. Runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line each; exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use cvspin::chsh::{
    chsh_arithmetic_game, chsh_cval, chsh_from_report, chsh_quantum, quantum_bit_pair, ChshAngles,
    FixedBits, CLASSICAL_BOUND, TSIRELSON_BOUND,
};
use cvspin::cvalspin::{SpinModel, XiDistribution};
use cvspin::game::{evaluate_conservation, run_game, GameConfig};
use cvspin::hilbert::{
    direction_operator, expectation, make_singlet, partial_trace, Direction, Ket2, Operator4,
    Particle, ReferenceBasis, TwoQubitState,
};
use cvspin::strategies::{
    lhv_chsh_max, lhv_exhaustive_conservation, quantum_pair, DeterministicTable, PlayerContext,
    SearchLimits, SharedPairSource, TableStrategy,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn in_time(elapsed: Duration, budget_secs: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < budget_secs,
        format!("took {:.2?}, budget {budget_secs} s", elapsed),
    )
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn singlet_model(xi: XiDistribution) -> SpinModel {
    SpinModel::new(make_singlet(), ReferenceBasis::yx(), xi).expect("singlet model")
}

fn grid() -> impl Iterator<Item = f64> {
    (0..19).map(|k| f64::from(k) * PI / 9.0 - PI)
}

fn quantum_correlation(
    state: &TwoQubitState,
    n1: &Direction,
    n2: &Direction,
) -> Result<f64, String> {
    let op = Operator4::tensor(&direction_operator(n1), &direction_operator(n2));
    expectation(state, &op).map_err(err)
}

fn conservation_exactness() -> Check {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for xi in [XiDistribution::two_point(), XiDistribution::three_point()] {
        let mut done = 0;
        while done < 100 {
            let state = TwoQubitState::random(&mut r);
            let model =
                SpinModel::new(state, ReferenceBasis::random(&mut r), xi.clone()).map_err(err)?;
            if model.first_unsupported().is_some() {
                continue;
            }
            let (n1, n2) = (Direction::random(&mut r), Direction::random(&mut r));
            let c = model.correlation_exact(&n1, &n2).map_err(err)?;
            worst = worst.max((c - quantum_correlation(&state, &n1, &n2)?).abs());
            done += 1;
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    in_time(start.elapsed(), 1.0)?;
    Ok(format!(
        "200 trials, max deviation {worst:.1e}, {:.0?}",
        start.elapsed()
    ))
}

/// s̃₁ for the singlet in the yx basis, rows (y+,x+), (y+,x−), (y−,x+), (y−,x−).
fn singlet_row(eta: usize, xi: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    match eta {
        0 => -s - xi * c,
        1 => s + xi * c,
        2 => -s + xi * c,
        _ => s - xi * c,
    }
}

fn singlet_closed_forms() -> Check {
    let mut worst_table: f64 = 0.0;
    for xi_law in [XiDistribution::two_point(), XiDistribution::three_point()] {
        let model = singlet_model(xi_law.clone());
        for theta in grid().chain([0.123, 1.0, PI / 3.0]) {
            let n = Direction::from_polar_xz(theta);
            for eta in 0..4 {
                for &xi in xi_law.support() {
                    let want = singlet_row(eta, xi, theta);
                    let s1 = model.cval_spin(eta, xi, &n, Particle::One).map_err(err)?;
                    let s2 = model.cval_spin(eta, xi, &n, Particle::Two).map_err(err)?;
                    worst_table = worst_table.max((s1 - want).abs()).max((s2 + want).abs());
                }
            }
        }
    }
    let model = singlet_model(XiDistribution::two_point());
    let mut worst_corr: f64 = 0.0;
    for t1 in grid() {
        for t2 in grid() {
            let c = model
                .correlation_exact(&Direction::from_polar_xz(t1), &Direction::from_polar_xz(t2))
                .map_err(err)?;
            worst_corr = worst_corr.max((c + (t2 - t1).cos()).abs());
        }
    }
    ensure(
        worst_table <= 1e-12,
        format!("table deviation {worst_table:e}"),
    )?;
    ensure(
        worst_corr <= 1e-12,
        format!("correlation deviation {worst_corr:e}"),
    )?;
    Ok(format!(
        "table max dev {worst_table:.1e}, 19x19 correlation max dev {worst_corr:.1e}"
    ))
}

fn anticorrelation_and_local_averages() -> Check {
    for xi_law in [XiDistribution::two_point(), XiDistribution::three_point()] {
        let model = singlet_model(xi_law.clone());
        for theta in grid() {
            let n = Direction::from_polar_xz(theta);
            for eta in 0..4 {
                for &xi in xi_law.support() {
                    let s1 = model.cval_spin(eta, xi, &n, Particle::One).map_err(err)?;
                    let s2 = model.cval_spin(eta, xi, &n, Particle::Two).map_err(err)?;
                    ensure(
                        s1 == -s2,
                        format!("θ={theta}, η={eta}, ξ={xi}: {s1} vs {s2}"),
                    )?;
                }
            }
        }
    }
    let mut r = rng(303);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 50 {
        let model = SpinModel::new(
            TwoQubitState::random(&mut r),
            ReferenceBasis::random(&mut r),
            XiDistribution::two_point(),
        )
        .map_err(err)?;
        if model.first_unsupported().is_some() {
            continue;
        }
        let n = Direction::random(&mut r);
        for particle in [Particle::One, Particle::Two] {
            let avg = model.local_average_exact(&n, particle).map_err(err)?;
            let rho = partial_trace(model.state(), particle);
            let want = (direction_operator(&n) * rho).trace().re;
            worst = worst.max((avg - want).abs());
        }
        done += 1;
    }
    ensure(worst <= 1e-12, format!("local average deviation {worst:e}"))?;
    Ok(format!(
        "sign flip exact on grid, 50 local averages max dev {worst:.1e}"
    ))
}

fn classical_ceiling() -> Check {
    let start = Instant::now();
    let mut r = rng(404);
    let singlet = singlet_model(XiDistribution::two_point());
    for _ in 0..20 {
        let a: [f64; 4] = std::array::from_fn(|_| r.gen_range(-PI..PI));
        let angles = ChshAngles::new(a[0], a[1], a[2], a[3]).map_err(err)?;
        let targets = chsh_cval(&singlet, &angles).map_err(err)?.correlations;
        let best = lhv_chsh_max(targets).best_chsh;
        ensure(best == 2.0, format!("lhv_chsh_max returned {best}"))?;
    }
    let bound = (TSIRELSON_BOUND - CLASSICAL_BOUND) / 4.0;
    let search =
        lhv_exhaustive_conservation(&GameConfig::singlet_chsh(1, 0), SearchLimits::default())
            .map_err(err)?;
    let singlet_dev = search.min_worst_pair_deviation;
    ensure(
        singlet_dev >= bound - 1e-12,
        format!("singlet deviation {singlet_dev} below {bound}"),
    )?;
    if let Some(det) = &search.deterministic {
        ensure(
            det.min_worst_deviation >= bound - 1e-12,
            format!("deterministic deviation {}", det.min_worst_deviation),
        )?;
    }
    let mut worst_product: f64 = 0.0;
    for _ in 0..20 {
        let state = TwoQubitState::product(&Ket2::random(&mut r), &Ket2::random(&mut r));
        let model = SpinModel::new(state, ReferenceBasis::yx(), XiDistribution::two_point())
            .map_err(err)?;
        let ma = vec![Direction::random(&mut r), Direction::random(&mut r)];
        let mb = vec![Direction::random(&mut r), Direction::random(&mut r)];
        let config = GameConfig::new(model, ma, mb, 1, 0).map_err(err)?;
        let limits = SearchLimits {
            max_states: 50_000,
            ..SearchLimits::default()
        };
        let res = lhv_exhaustive_conservation(&config, limits).map_err(err)?;
        worst_product = worst_product.max(res.min_worst_pair_deviation);
    }
    ensure(
        worst_product <= 1e-10,
        format!("product-state deviation {worst_product:e}"),
    )?;
    in_time(start.elapsed(), 10.0)?;
    Ok(format!(
        "max 2 on 20 menus, singlet deviation {singlet_dev:.14}, product max {worst_product:.1e}, {:.0?}",
        start.elapsed()
    ))
}

fn quantum_chsh_value() -> Check {
    let angles = ChshAngles::optimal();
    let q = chsh_quantum(&make_singlet(), &angles).map_err(err)?;
    let c = chsh_cval(&singlet_model(XiDistribution::two_point()), &angles).map_err(err)?;
    ensure(
        (q.abs() - TSIRELSON_BOUND).abs() <= 1e-10,
        format!("quantum |C| = {}", q.abs()),
    )?;
    ensure(
        (c.abs() - TSIRELSON_BOUND).abs() <= 1e-10,
        format!("c-valued |C| = {}", c.abs()),
    )?;
    let diff = q.max_entry_diff(&c);
    ensure(diff <= 1e-10, format!("entrywise difference {diff:e}"))?;
    Ok(format!("C = {:.12}, entrywise diff {diff:.1e}", q.value))
}

fn quantum_game() -> Check {
    let start = Instant::now();
    let config = GameConfig::singlet_chsh(100_000, 606);
    let (mut a, mut b) =
        quantum_pair(&config.model, &config.menu_a, &config.menu_b).map_err(err)?;
    let transcript = run_game(&config, &mut a, &mut b).map_err(err)?;
    let report = evaluate_conservation(&transcript, &config).map_err(err)?;
    for p in &report.pairs {
        let (n1, n2) = config.pair_directions(p.pair_index).map_err(err)?;
        let want = -n1.dot(&n2);
        ensure(
            (p.estimate - want).abs() <= 3.0 * p.stderr,
            format!(
                "pair {}: {} vs {want} (stderr {})",
                p.pair_index, p.estimate, p.stderr
            ),
        )?;
    }
    ensure(report.pass, "conservation report failed")?;
    let (chsh, stderr) = chsh_from_report(&report).map_err(err)?;
    ensure(
        chsh.abs() > CLASSICAL_BOUND + 5.0 * stderr,
        format!("|C| = {} with stderr {stderr}", chsh.abs()),
    )?;
    in_time(start.elapsed(), 30.0)?;
    Ok(format!(
        "C = {:.4} ± {stderr:.4}, {:.1} stderr above 2, {:.0?}",
        chsh.value,
        (chsh.abs() - 2.0) / stderr,
        start.elapsed()
    ))
}

fn classical_game() -> Check {
    let config = GameConfig::singlet_chsh(100_000, 707);
    let bound = (TSIRELSON_BOUND - CLASSICAL_BOUND) / 4.0;
    let ctx = |p| {
        let menu = match p {
            Particle::One => config.menu_a.clone(),
            Particle::Two => config.menu_b.clone(),
        };
        PlayerContext::new(config.model.clone(), menu, p)
    };
    let xi_len = config.model.xi().len();
    let mut tables = vec![(
        "sign".to_string(),
        DeterministicTable::sign_of_s_tilde(&config.model, &config.menu_a, Particle::One)
            .map_err(err)?,
        DeterministicTable::sign_of_s_tilde(&config.model, &config.menu_b, Particle::Two)
            .map_err(err)?,
    )];
    let mut r = rng(708);
    for k in 0..10 {
        tables.push((
            format!("random-{k}"),
            DeterministicTable::random(2, xi_len, &mut r),
            DeterministicTable::random(2, xi_len, &mut r),
        ));
    }
    let mut smallest_margin = f64::INFINITY;
    for (name, ta, tb) in tables {
        let mut a = TableStrategy::new(name.clone(), ctx(Particle::One), ta).map_err(err)?;
        let mut b = TableStrategy::new(name.clone(), ctx(Particle::Two), tb).map_err(err)?;
        let report =
            evaluate_conservation(&run_game(&config, &mut a, &mut b).map_err(err)?, &config)
                .map_err(err)?;
        let witnessed = report
            .pairs
            .iter()
            .map(|p| p.deviation - (bound - 3.0 * p.stderr))
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(
            witnessed > 0.0,
            format!("{name}: no pair deviates beyond the bound"),
        )?;
        ensure(!report.pass, format!("{name}: report passed"))?;
        smallest_margin = smallest_margin.min(witnessed);
    }
    Ok(format!(
        "11 tables all fail, smallest margin {smallest_margin:.4}"
    ))
}

fn arithmetic_game() -> Check {
    let n = 100_000;
    let classical = chsh_arithmetic_game(&mut FixedBits([0, 0]), &mut FixedBits([0, 0]), n, 808)
        .map_err(err)?;
    let (mut qa, mut qb) = quantum_bit_pair(&make_singlet(), &ChshAngles::optimal());
    let quantum = chsh_arithmetic_game(&mut qa, &mut qb, n, 809).map_err(err)?;
    let sigma = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
    let q_exact = (2.0 + 2f64.sqrt()) / 4.0;
    ensure(
        (classical.frequency - 0.75).abs() <= 4.0 * sigma(0.75),
        format!("classical {}", classical.frequency),
    )?;
    ensure(
        (quantum.frequency - q_exact).abs() <= 4.0 * sigma(q_exact),
        format!("quantum {}", quantum.frequency),
    )?;
    Ok(format!(
        "classical {:.4} (3/4), quantum {:.4} ({q_exact:.4})",
        classical.frequency, quantum.frequency
    ))
}

fn measurement_soundness() -> Check {
    let n = 100_000usize;
    let mut r = rng(909);
    let mut worst_z: f64 = 0.0;
    for trial in 0..10u64 {
        let mut src = SharedPairSource::new(TwoQubitState::random(&mut r)).without_log();
        let (n1, n2) = (Direction::random(&mut r), Direction::random(&mut r));
        let exact = src.joint_probabilities(&n1, &n2);
        for b_first in [false, true] {
            let mut mr = rng(10_000 + 2 * trial + u64::from(b_first));
            let mut counts = [0usize; 4];
            for round in 0..n as u64 {
                src.begin_round(round);
                let (a, b) = if b_first {
                    let b = src.measure(Particle::Two, &n2, &mut mr).map_err(err)?;
                    (src.measure(Particle::One, &n1, &mut mr).map_err(err)?, b)
                } else {
                    let a = src.measure(Particle::One, &n1, &mut mr).map_err(err)?;
                    (a, src.measure(Particle::Two, &n2, &mut mr).map_err(err)?)
                };
                counts[usize::from(a < 0) * 2 + usize::from(b < 0)] += 1;
            }
            for k in 0..4 {
                let p = exact[k];
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                let dev = (counts[k] as f64 / n as f64 - p).abs();
                if sigma > 0.0 {
                    worst_z = worst_z.max(dev / sigma);
                } else {
                    ensure(dev == 0.0, format!("impossible outcome {k} observed"))?;
                }
            }
        }
    }
    ensure(
        worst_z <= 4.0,
        format!("largest deviation {worst_z:.2} sigma"),
    )?;
    Ok(format!(
        "10 configs x 2 orders, largest deviation {worst_z:.2} sigma"
    ))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(Value, Option<Vec<u8>>), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cvspin"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(err)?;
    ensure(
        status.status.success(),
        format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)),
    )?;
    let text = std::fs::read_to_string(out.join("report.json")).map_err(err)?;
    let mut report: Value = serde_json::from_str(&text).map_err(err)?;
    report
        .as_object_mut()
        .ok_or("report is not an object")?
        .remove("metadata")
        .ok_or("report has no metadata")?;
    let transcript = std::fs::read(out.join("transcript.csv")).ok();
    Ok((report, transcript))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let runs: [&[&str]; 5] = [
        &["--mode", "run-game", "--rounds", "20000", "--seed", "42"],
        &[
            "--mode",
            "run-game",
            "--rounds",
            "5000",
            "--seed",
            "42",
            "--strategy-a",
            "coin",
            "--strategy-b",
            "random-table:7",
        ],
        &[
            "--mode",
            "verify-theorem1",
            "--trials",
            "200",
            "--seed",
            "42",
            "--workers",
            "4",
        ],
        &["--mode", "chsh-game", "--rounds", "20000", "--seed", "42"],
        &["--mode", "cval-table", "--angles", "pi/3,-pi/4"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let first = run_cli(args, &out)?;
        if out.join("transcript.csv").exists() {
            std::fs::remove_file(out.join("transcript.csv")).map_err(err)?;
        }
        let second = run_cli(args, &out)?;
        let (a, b) = (
            serde_json::to_string(&first.0).map_err(err)?,
            serde_json::to_string(&second.0).map_err(err)?,
        );
        ensure(a == b, format!("{args:?}: reports differ"))?;
        ensure(first.1 == second.1, format!("{args:?}: transcripts differ"))?;
    }
    Ok(format!(
        "{} CLI runs repeated with identical reports and transcripts",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 exact correlation conservation", conservation_exactness),
        ("2 singlet closed forms", singlet_closed_forms),
        (
            "3 anti-correlation and local averages",
            anticorrelation_and_local_averages,
        ),
        ("4 classical CHSH ceiling", classical_ceiling),
        ("5 quantum CHSH value", quantum_chsh_value),
        ("6 quantum strategy wins the game", quantum_game),
        ("7 classical strategies lose the game", classical_game),
        ("8 arithmetic CHSH game", arithmetic_game),
        ("9 measurement simulation soundness", measurement_soundness),
        ("10 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
