//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p entropic-nc-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use entropic_nc::entropy::JointTable;
use entropic_nc::explore::{write_scan, OptimizeOptions};
use entropic_nc::inequality::pair_distribution;
use entropic_nc::oracle::{
    marginalize_pair_exclusive, run_classical_oracle, sample_exclusive, JointDistribution5,
    OracleConfig,
};
use entropic_nc::{
    check_joint_extension, classical_m, default_observables, estimate_m_sampled, evaluate_m,
    optimize, scan, ExportFormat, FamilyKind, ScanGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(
        took < limit,
        format!("{what} took {took:?}, limit {limit:?}"),
    )
}

fn c1_cyclic_orthogonality() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_entropic-nc"))
        .args(["verify", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("verify exited with {:?}", out.status.code()),
    )?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let overlaps: Vec<f64> = v["adjacent_overlaps"]
        .as_array()
        .ok_or("no adjacent_overlaps")?
        .iter()
        .map(|x| x.as_f64().unwrap_or(f64::INFINITY))
        .collect();
    let worst = overlaps.iter().copied().fold(0.0, f64::max);
    ensure(
        overlaps.len() == 5 && worst <= 1e-12,
        format!("max adjacent overlap {worst:e}"),
    )?;
    Ok(format!("max |<v_i|v_i+1>| = {worst:.1e}"))
}

fn optimum(kind: FamilyKind, alpha: f64, beta: f64, expected: f64, floor: f64) -> Outcome {
    let set = default_observables();
    let start = Instant::now();
    let m = evaluate_m(&set, &kind.state(alpha, beta).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .m_value;
    within(Duration::from_secs(1), start, "evaluation")?;
    ensure(
        (m - expected).abs() <= 2e-3,
        format!("M = {m} at the quoted point, expected {expected} +- 2e-3"),
    )?;

    let start = Instant::now();
    let best = optimize(kind, &set, &OptimizeOptions::default()).map_err(|e| e.to_string())?;
    within(Duration::from_secs(10), start, "optimize")?;
    ensure(
        best.m_bits >= floor,
        format!("optimized M* = {} < {floor}", best.m_bits),
    )?;
    Ok(format!(
        "M = {m:.5} at quoted point; M* = {:.5} at ({:.4}, {:.4})",
        best.m_bits, best.alpha, best.beta
    ))
}

fn c2_entangled_optimum() -> Outcome {
    optimum(FamilyKind::Entangled, 3.4899, 2.9012, 0.0772, 0.0762)
}

fn c3_product_optimum() -> Outcome {
    optimum(FamilyKind::Product, 2.9306, -5.7112, 0.0502, 0.0492)
}

fn c4_classical_bound() -> Outcome {
    let start = Instant::now();
    let point_max = (0..32usize)
        .map(|a| {
            let outcomes: [i8; 5] = std::array::from_fn(|k| if a >> k & 1 == 1 { 1 } else { -1 });
            classical_m(&JointDistribution5::point_mass(outcomes))
        })
        .map(f64::abs)
        .fold(0.0, f64::max);
    ensure(
        point_max == 0.0,
        format!("a point mass gave |M| = {point_max:e}"),
    )?;
    let summary = run_classical_oracle(&OracleConfig {
        samples: 100_000,
        seed: 2024,
        ..OracleConfig::default()
    })
    .map_err(|e| e.to_string())?;
    within(Duration::from_secs(60), start, "oracle")?;
    ensure(
        summary.violations_found == 0 && summary.max_m_observed <= 1e-12,
        format!(
            "{} violations, max M {}",
            summary.violations_found, summary.max_m_observed
        ),
    )?;
    Ok(format!(
        "{} samples + {} point masses, max M = {:.3e}",
        summary.samples, summary.point_masses, summary.max_m_observed
    ))
}

fn c5_no_joint_extension() -> Outcome {
    let start = Instant::now();
    let set = default_observables();
    let psi = FamilyKind::Entangled
        .state(3.4899, 2.9012)
        .map_err(|e| e.to_string())?;
    let targets: [_; 5] = std::array::from_fn(|k| pair_distribution(&set, k + 1, &psi).unwrap());
    let quantum = check_joint_extension(&targets).map_err(|e| e.to_string())?;
    ensure(
        !quantum.feasible,
        "quantum statistics admitted a joint extension",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let jd = sample_exclusive(&mut rng, [0.2, 1.0, 5.0][n % 3]).map_err(|e| e.to_string())?;
        let targets: [_; 5] =
            std::array::from_fn(|k| marginalize_pair_exclusive(&jd, k + 1).unwrap());
        let verdict = check_joint_extension(&targets).map_err(|e| e.to_string())?;
        let witness = verdict.witness.ok_or(format!(
            "sample {n} judged infeasible ({})",
            verdict.residual
        ))?;
        for (k, t) in targets.iter().enumerate() {
            let back = marginalize_pair_exclusive(&witness, k + 1).map_err(|e| e.to_string())?;
            worst = worst
                .max((back.p_mm() - t.p_mm()).abs())
                .max((back.p_mp() - t.p_mp()).abs())
                .max((back.p_pm() - t.p_pm()).abs());
        }
    }
    ensure(worst <= 1e-7, format!("witness marginal error {worst:e}"))?;
    within(Duration::from_secs(30), start, "extension checks")?;
    Ok(format!(
        "quantum residual {:.3e} (infeasible); 100 explicit joints feasible, max witness error {worst:.1e}",
        quantum.residual
    ))
}

fn c6_entropy_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_chain: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let rows = rng.random_range(1..=5);
        let cols = rng.random_range(1..=5);
        let mut cells: Vec<f64> = (0..rows * cols)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random()
                }
            })
            .collect();
        if cells.iter().all(|&c| c == 0.0) {
            cells[0] = 1.0;
        }
        let total: f64 = cells.iter().sum();
        cells.iter_mut().for_each(|c| *c /= total);
        let t = JointTable::new(rows, cols, cells).map_err(|e| e.to_string())?;
        let (hxy, hx, hy) = (t.joint_entropy(), t.entropy_x(), t.entropy_y());
        let hx_y = t.conditional_entropy_x_given_y();
        worst_chain = worst_chain.max((hxy - hy - hx_y).abs());
        // each inequality as `lhs - rhs`, which must not exceed the tolerance
        for excess in [hxy - hx - hy, hx_y - hx, hx - hxy, hy - hxy] {
            worst_excess = worst_excess.max(excess);
        }
    }
    within(Duration::from_secs(10), start, "entropy suite")?;
    ensure(
        worst_chain <= 1e-10,
        format!("chain rule error {worst_chain:e}"),
    )?;
    ensure(
        worst_excess <= 1e-10,
        format!("inequality excess {worst_excess:e}"),
    )?;
    Ok(format!("10000 tables, chain-rule error {worst_chain:.1e}, worst inequality excess {worst_excess:.1e}"))
}

fn figure_region(kind: FamilyKind, alpha: f64, beta: f64, expected: f64) -> Result<String, String> {
    let set = default_observables();
    let grid = ScanGrid::default_for(kind, 200).map_err(|e| e.to_string())?;
    let result = scan(&grid, &set, 1).map_err(|e| e.to_string())?;
    let cell = (grid.alpha.nearest(alpha), grid.beta.nearest(beta));
    let region = result.positive_component(cell);
    ensure(
        !region.is_empty(),
        format!("cell nearest ({alpha}, {beta}) is not in a positive region"),
    )?;
    let near_best = region
        .iter()
        .filter(|(i, j)| i.abs_diff(cell.0) <= 2 && j.abs_diff(cell.1) <= 2)
        .filter_map(|&(i, j)| result.get(i, j))
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(
        (near_best - expected).abs() <= 2e-3,
        format!("best cell near the optimum has M = {near_best}"),
    )?;

    let mut csv_bytes = Vec::new();
    write_scan(&result, ExportFormat::Csv, None, &mut csv_bytes).map_err(|e| e.to_string())?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_bytes.as_slice());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    ensure(
        header == vec!["alpha", "beta", "m_bits"],
        format!("csv header {header:?}"),
    )?;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        ensure(record.len() == 3, "csv row width")?;
        record[0].parse::<f64>().map_err(|e| e.to_string())?;
        record[1].parse::<f64>().map_err(|e| e.to_string())?;
        if !record[2].is_empty() {
            record[2].parse::<f64>().map_err(|e| e.to_string())?;
        }
        rows += 1;
    }
    ensure(rows == 200 * 200, format!("{rows} csv rows"))?;
    Ok(format!(
        "{kind}: region of {} cells, best nearby M = {near_best:.5}, violating fraction {:.3}",
        region.len(),
        result.violation_fraction
    ))
}

fn c7_figure_regions() -> Outcome {
    let start = Instant::now();
    let a = figure_region(FamilyKind::Entangled, 3.4899, 2.9012, 0.0772)?;
    let b = figure_region(FamilyKind::Product, 2.9306, -5.7112, 0.0502)?;
    within(Duration::from_secs(120), start, "scans")?;
    Ok(format!("{a}; {b}"))
}

fn c8_sampling_convergence() -> Outcome {
    let start = Instant::now();
    let set = default_observables();
    let psi = FamilyKind::Entangled
        .state(3.4899, 2.9012)
        .map_err(|e| e.to_string())?;
    let exact = evaluate_m(&set, &psi).map_err(|e| e.to_string())?.m_value;
    let a = estimate_m_sampled(&set, &psi, 1_000_000, 8).map_err(|e| e.to_string())?;
    let b = estimate_m_sampled(&set, &psi, 1_000_000, 8).map_err(|e| e.to_string())?;
    within(Duration::from_secs(30), start, "sampling")?;
    ensure(a == b, "same seed gave different reports")?;
    let err = (a.m_value - exact).abs();
    ensure(
        err <= 5e-3,
        format!("estimate {} vs exact {exact}", a.m_value),
    )?;
    Ok(format!(
        "estimate {:.5} vs exact {exact:.5}, |diff| = {err:.1e}",
        a.m_value
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 cyclic orthogonality", c1_cyclic_orthogonality),
        ("2 entangled optimum", c2_entangled_optimum),
        ("3 product optimum", c3_product_optimum),
        ("4 classical bound", c4_classical_bound),
        ("5 no joint extension", c5_no_joint_extension),
        ("6 entropy axioms", c6_entropy_axioms),
        ("7 figure regions", c7_figure_regions),
        ("8 sampling convergence", c8_sampling_convergence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.2}s): {detail}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
