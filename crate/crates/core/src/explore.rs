//! Scans and optimization of `M` over the `(alpha, beta)` plane.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::evaluate_m;
use crate::model::{CyclicObservableSet, FamilyKind};

/// Lattice `start + k (stop - start) / steps` for `k in 0..steps`; `stop` is
/// excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, steps: usize) -> Self {
        Self { start, stop, steps }
    }

    pub fn window(kind: FamilyKind, steps: usize) -> Self {
        let (start, stop) = kind.default_window();
        Self { start, stop, steps }
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start) / self.steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.spacing()
    }

    /// Index of the lattice point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.start) / self.spacing()).round();
        k.clamp(0.0, (self.steps - 1) as f64) as usize
    }

    fn validate(&self, axis: &str) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidGrid(format!("{axis} needs at least 2 steps")));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::InvalidGrid(format!(
                "{axis} range [{}, {}) is empty or not finite",
                self.start, self.stop
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub family: FamilyKind,
    pub alpha: AxisRange,
    pub beta: AxisRange,
    /// Label of the observable set the scan ran against.
    pub observables: String,
}

impl ScanGrid {
    pub fn new(family: FamilyKind, alpha: AxisRange, beta: AxisRange) -> Result<Self> {
        alpha.validate("alpha")?;
        beta.validate("beta")?;
        Ok(Self {
            family,
            alpha,
            beta,
            observables: String::new(),
        })
    }

    /// Square grid over the family's default window.
    pub fn default_for(family: FamilyKind, steps: usize) -> Result<Self> {
        Self::new(
            family,
            AxisRange::window(family, steps),
            AxisRange::window(family, steps),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPoint {
    pub alpha: f64,
    pub beta: f64,
    pub m_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: ScanGrid,
    /// `m_values[i][j]` is `M` at `(alpha_i, beta_j)`; `None` marks a
    /// degenerate state.
    pub m_values: Vec<Vec<Option<f64>>>,
    pub max_point: Option<MaxPoint>,
    /// Share of non-degenerate lattice points with `M > 0`.
    pub violation_fraction: f64,
}

impl ScanResult {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.m_values[i][j]
    }

    /// Cells connected to `start` through 4-neighbours with `M > 0`. Empty
    /// when `start` itself is not positive.
    pub fn positive_component(&self, start: (usize, usize)) -> Vec<(usize, usize)> {
        let rows = self.m_values.len();
        let cols = self.m_values.first().map_or(0, Vec::len);
        let positive = |(i, j): (usize, usize)| self.m_values[i][j].is_some_and(|m| m > 0.0);
        if start.0 >= rows || start.1 >= cols || !positive(start) {
            return Vec::new();
        }
        let mut seen = vec![vec![false; cols]; rows];
        let mut queue = VecDeque::from([start]);
        seen[start.0][start.1] = true;
        let mut component = Vec::new();
        while let Some((i, j)) = queue.pop_front() {
            component.push((i, j));
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (a, b) in neighbours {
                if a < rows && b < cols && !seen[a][b] && positive((a, b)) {
                    seen[a][b] = true;
                    queue.push_back((a, b));
                }
            }
        }
        component
    }
}

fn evaluate_point(
    kind: FamilyKind,
    set: &CyclicObservableSet,
    alpha: f64,
    beta: f64,
) -> Result<Option<f64>> {
    match kind.state(alpha, beta) {
        Ok(state) => Ok(Some(evaluate_m(set, &state)?.m_value)),
        Err(Error::DegenerateState { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Orders candidates by larger `M`, then smaller `(alpha, beta)`.
fn better(a: &MaxPoint, b: &MaxPoint) -> Ordering {
    a.m_bits
        .total_cmp(&b.m_bits)
        .then_with(|| b.alpha.total_cmp(&a.alpha))
        .then_with(|| b.beta.total_cmp(&a.beta))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidGrid(format!("thread pool: {e}")))
}

/// Evaluates `M` at every lattice point of `grid`.
pub fn scan(grid: &ScanGrid, set: &CyclicObservableSet, workers: usize) -> Result<ScanResult> {
    grid.alpha.validate("alpha")?;
    grid.beta.validate("beta")?;
    let rows = thread_pool(workers)?.install(|| {
        (0..grid.alpha.steps)
            .into_par_iter()
            .map(|i| {
                let alpha = grid.alpha.point(i);
                (0..grid.beta.steps)
                    .map(|j| evaluate_point(grid.family, set, alpha, grid.beta.point(j)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut max_point: Option<MaxPoint> = None;
    let (mut evaluated, mut positive) = (0usize, 0usize);
    for (i, row) in rows.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            let Some(m) = *m else { continue };
            evaluated += 1;
            positive += usize::from(m > 0.0);
            let candidate = MaxPoint {
                alpha: grid.alpha.point(i),
                beta: grid.beta.point(j),
                m_bits: m,
            };
            if max_point
                .as_ref()
                .is_none_or(|best| better(&candidate, best) == Ordering::Greater)
            {
                max_point = Some(candidate);
            }
        }
    }
    let mut grid = grid.clone();
    grid.observables = set.label().to_owned();
    Ok(ScanResult {
        grid,
        m_values: rows,
        max_point,
        violation_fraction: if evaluated == 0 {
            0.0
        } else {
            positive as f64 / evaluated as f64
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Lattice points per axis of the coarse pass.
    pub coarse_steps: usize,
    /// Number of coarse cells refined locally.
    pub restarts: usize,
    /// Orients each initial simplex.
    pub seed: u64,
    /// `(start, stop)` for both axes; defaults to the family window.
    pub window: Option<(f64, f64)>,
    pub workers: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            coarse_steps: 60,
            restarts: 8,
            seed: 0,
            window: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub alpha: f64,
    pub beta: f64,
    pub m_bits: f64,
    /// Best coarse-grid value before refinement.
    pub coarse_m_bits: f64,
}

/// Refinement stops once every simplex vertex is within this distance of
/// the best one.
pub const SIMPLEX_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 20_000;

/// Coarse lattice pass followed by Nelder-Mead refinement from the best
/// `restarts` local maxima of the lattice.
pub fn optimize(
    kind: FamilyKind,
    set: &CyclicObservableSet,
    options: &OptimizeOptions,
) -> Result<OptimizeResult> {
    if options.coarse_steps < 10 {
        return Err(Error::InvalidGrid(
            "coarse_steps must be at least 10".into(),
        ));
    }
    let (start, stop) = options.window.unwrap_or_else(|| kind.default_window());
    let axis = AxisRange::new(start, stop, options.coarse_steps);
    let grid = ScanGrid::new(kind, axis, axis)?;
    let coarse = scan(&grid, set, options.workers)?;
    let Some(coarse_best) = coarse.max_point else {
        return Err(Error::InvalidGrid(
            "every coarse lattice point is degenerate".into(),
        ));
    };

    let starts = restart_cells(&coarse, options.restarts.max(1));
    let step = axis.spacing();
    let objective = |x: [f64; 2]| -> f64 {
        match evaluate_point(kind, set, x[0], x[1]) {
            Ok(Some(m)) => m,
            _ => f64::NEG_INFINITY,
        }
    };
    let refined: Vec<MaxPoint> = thread_pool(options.workers)?.install(|| {
        starts
            .par_iter()
            .enumerate()
            .map(|(r, &(i, j))| {
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                rng.set_stream(r as u64);
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let x0 = [axis.point(i), axis.point(j)];
                let (x, m) = nelder_mead_max(&objective, x0, step, angle);
                MaxPoint {
                    alpha: x[0],
                    beta: x[1],
                    m_bits: m,
                }
            })
            .collect()
    });

    let best = refined
        .into_iter()
        .chain(std::iter::once(coarse_best))
        .max_by(better)
        .expect("at least one candidate");
    let m_bits = objective([best.alpha, best.beta]);
    Ok(OptimizeResult {
        alpha: best.alpha,
        beta: best.beta,
        m_bits,
        coarse_m_bits: coarse_best.m_bits,
    })
}

/// Lattice cells that are local maxima over their 8 periodic neighbours,
/// best first, topped up with the remaining best cells.
fn restart_cells(coarse: &ScanResult, count: usize) -> Vec<(usize, usize)> {
    let rows = coarse.m_values.len();
    let cols = coarse.m_values[0].len();
    let value = |i: usize, j: usize| coarse.m_values[i][j].unwrap_or(f64::NEG_INFINITY);
    let mut cells: Vec<(f64, bool, usize, usize)> = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let m = value(i, j);
            if m == f64::NEG_INFINITY {
                continue;
            }
            let mut peak = true;
            for di in [rows - 1, 0, 1] {
                for dj in [cols - 1, 0, 1] {
                    if (di, dj) != (0, 0) && value((i + di) % rows, (j + dj) % cols) > m {
                        peak = false;
                    }
                }
            }
            cells.push((m, peak, i, j));
        }
    }
    cells.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(b.0.total_cmp(&a.0))
            .then((a.2, a.3).cmp(&(b.2, b.3)))
    });
    cells
        .into_iter()
        .take(count)
        .map(|(_, _, i, j)| (i, j))
        .collect()
}

/// Maximizes `f` over the plane. Returns the best vertex and its value;
/// the best value never decreases between iterations.
fn nelder_mead_max(
    f: &impl Fn([f64; 2]) -> f64,
    x0: [f64; 2],
    step: f64,
    angle: f64,
) -> ([f64; 2], f64) {
    let (s, c) = angle.sin_cos();
    let e1 = [step * c, step * s];
    let e2 = [-step * s, step * c];
    let mut simplex = [
        x0,
        [x0[0] + e1[0], x0[1] + e1[1]],
        [x0[0] + e2[0], x0[1] + e2[1]],
    ];
    // minimize the negated objective
    let cost = |x: [f64; 2]| -f(x);
    let mut values = simplex.map(cost);
    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..MAX_ITERATIONS {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);

        let size = simplex[1..]
            .iter()
            .map(|v| (v[0] - simplex[0][0]).hypot(v[1] - simplex[0][1]))
            .fold(0.0, f64::max);
        if size < SIMPLEX_TOL {
            break;
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(simplex[2], centroid, 2.0);
        let fr = cost(reflected);
        if fr < values[0] {
            let expanded = lerp(simplex[2], centroid, 3.0);
            let fe = cost(expanded);
            (simplex[2], values[2]) = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < values[2] {
                let x = lerp(centroid, reflected, 0.5);
                (x, cost(x))
            } else {
                let x = lerp(centroid, simplex[2], 0.5);
                (x, cost(x))
            };
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = cost(simplex[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("three vertices");
    (simplex[best], -values[best])
}

/// Output format for scan data. Chosen explicitly, never from a file
/// extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Writes `# key=value` comment lines, the `alpha,beta,m_bits` header and
/// one row per lattice point. Degenerate points have an empty `m_bits`.
pub fn write_csv<W: Write + ?Sized>(
    result: &ScanResult,
    comments: &[(String, String)],
    out: &mut W,
) -> std::io::Result<()> {
    let grid = &result.grid;
    let metadata = [
        ("family".to_owned(), grid.family.to_string()),
        ("observables".to_owned(), grid.observables.clone()),
        (
            "alpha_range".to_owned(),
            format!(
                "{},{},{}",
                grid.alpha.start, grid.alpha.stop, grid.alpha.steps
            ),
        ),
        (
            "beta_range".to_owned(),
            format!("{},{},{}", grid.beta.start, grid.beta.stop, grid.beta.steps),
        ),
    ];
    for (key, value) in metadata.iter().chain(comments) {
        writeln!(out, "# {key}={value}")?;
    }
    writeln!(out, "alpha,beta,m_bits")?;
    for (i, row) in result.m_values.iter().enumerate() {
        let alpha = grid.alpha.point(i);
        for (j, m) in row.iter().enumerate() {
            let beta = grid.beta.point(j);
            match m {
                Some(m) => writeln!(out, "{alpha},{beta},{m}")?,
                None => writeln!(out, "{alpha},{beta},")?,
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonExport<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a serde_json::Value>,
    #[serde(flatten)]
    result: &'a ScanResult,
}

/// Writes the result as a JSON object, optionally with a leading `config`
/// member.
pub fn write_json<W: Write + ?Sized>(
    result: &ScanResult,
    config: Option<&serde_json::Value>,
    out: &mut W,
) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, &JsonExport { config, result })?;
    writeln!(out)
}

pub fn write_scan<W: Write + ?Sized>(
    result: &ScanResult,
    format: ExportFormat,
    config: Option<&serde_json::Value>,
    out: &mut W,
) -> std::io::Result<()> {
    match format {
        ExportFormat::Csv => {
            let comments: Vec<(String, String)> = match config.and_then(|c| c.as_object()) {
                Some(obj) => obj
                    .iter()
                    .map(|(k, v)| {
                        let v = match v {
                            serde_json::Value::String(s) => s.clone(),
                            v => v.to_string(),
                        };
                        (format!("config.{k}"), v)
                    })
                    .collect(),
                None => Vec::new(),
            };
            write_csv(result, &comments, out)
        }
        ExportFormat::Json => write_json(result, config, out),
    }
}

pub fn export_scan(result: &ScanResult, format: ExportFormat, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_scan(result, format, None, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn read_scan_json(path: &Path) -> Result<ScanResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}
