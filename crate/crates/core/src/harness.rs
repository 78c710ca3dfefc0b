//! Parameter sweeps, utility surfaces and optimizer comparisons, with CSV
//! persistence. The harness only arranges calls into the model modules; every
//! number it reports is produced there.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::offload::Allocation;
use crate::optimizers::{
    replicate_runs, run_algorithm, trial_seeds, Algorithm, OptimizeError, RunResult, SwarmConfig,
    TrialStats,
};
use crate::pricing::{dynamic_user_utility, max_user_utility, user_utility, Pricing};
use crate::scenario::{ghz_to_hz, kb_to_bits, validate, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    FServer,
    B,
    Q,
    FLocal,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [SweepParam::FServer, SweepParam::B, SweepParam::Q, SweepParam::FLocal];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::FServer => "f_server",
            SweepParam::B => "b",
            SweepParam::Q => "q",
            SweepParam::FLocal => "f_local",
        }
    }

    /// Place `value` (canonical units) into the scenario or the allocation.
    fn apply(&self, s: &mut Scenario, a: &mut Allocation, value: f64) {
        match self {
            SweepParam::FServer => a.f_server = value,
            SweepParam::B => a.b = value,
            SweepParam::Q => s.q = value,
            SweepParam::FLocal => s.f_local = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown sweep parameter '{s}' (expected f_server, b, q or f_local)")))
    }
}

/// A one-dimensional sweep: the swept quantity, its grid in canonical units
/// (Hz, bit/s, bits, Hz) and the fixed values of everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub scenario: Scenario,
    pub allocation: Allocation,
}

impl SweepSpec {
    pub fn new(param: SweepParam, grid: Vec<f64>, scenario: Scenario, allocation: Allocation) -> Self {
        SweepSpec {
            param,
            grid,
            scenario,
            allocation,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.grid.is_empty() {
            return Err(HarnessError::Invalid("sweep grid is empty".into()));
        }
        if let Some(v) = self.grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(HarnessError::Invalid(format!("grid value {v} is not finite and positive")));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Invalid("sweep grid must be strictly increasing".into()));
        }
        if !self.allocation.is_positive() {
            return Err(HarnessError::Invalid(format!(
                "fixed allocation ({}, {}) is not positive",
                self.allocation.f_server, self.allocation.b
            )));
        }
        let report = validate(&self.scenario);
        if !report.is_empty() {
            return Err(HarnessError::Invalid(report.to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub price: f64,
    pub u_user: f64,
    pub u_server: f64,
    pub t_offload: f64,
    pub t_save: f64,
    pub e_save: f64,
}

/// Evaluate one sweep point under dynamic pricing.
pub fn sweep_point(param: SweepParam, value: f64, s: &Scenario, a: Allocation) -> SweepRow {
    let (mut s, mut a) = (*s, a);
    param.apply(&mut s, &mut a, value);
    let u = user_utility(&s, a, Pricing::Dynamic);
    SweepRow {
        param,
        value,
        price: u.price,
        u_user: u.u_user,
        u_server: u.u_server,
        t_offload: u.time.t_offload,
        t_save: u.time.t_save,
        e_save: u.energy.e_save,
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    spec.validate()?;
    Ok(spec
        .grid
        .par_iter()
        .map(|&v| sweep_point(spec.param, v, &spec.scenario, spec.allocation))
        .collect())
}

/// Differences between successive rows of one column.
pub fn successive_deltas(rows: &[SweepRow], column: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
    rows.windows(2).map(|w| column(&w[1]) - column(&w[0])).collect()
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub u_user: f64,
    pub price: f64,
    pub u_server: f64,
}

/// Dynamic-pricing quantities over the search box.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub f_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// `cells[i][j]` is evaluated at `(f_values[i], b_values[j])`.
    pub cells: Vec<Vec<SurfaceCell>>,
}

impl SurfaceGrid {
    /// Index `(i, j)` of the largest `u_user`; the first one wins ties.
    pub fn argmax_u_user(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, col) in self.cells.iter().enumerate() {
            for (j, c) in col.iter().enumerate() {
                if c.u_user > self.cells[best.0][best.1].u_user {
                    best = (i, j);
                }
            }
        }
        best
    }

    pub fn allocation(&self, i: usize, j: usize) -> Allocation {
        Allocation::new(self.f_values[i], self.b_values[j])
    }

    pub fn column(&self, pick: impl Fn(&SurfaceCell) -> f64) -> Vec<Vec<f64>> {
        self.cells.iter().map(|col| col.iter().map(&pick).collect()).collect()
    }
}

pub fn surface_grid(s: &Scenario, f_steps: usize, b_steps: usize) -> Result<SurfaceGrid, HarnessError> {
    if f_steps < 2 || b_steps < 2 {
        return Err(HarnessError::Invalid(format!(
            "surface needs at least 2 steps per axis (got {f_steps}x{b_steps})"
        )));
    }
    let f_values = linspace(s.f_range.0, s.f_range.1, f_steps);
    let b_values = linspace(s.b_range.0, s.b_range.1, b_steps);
    let cells = f_values
        .par_iter()
        .map(|&f| {
            b_values
                .iter()
                .map(|&b| {
                    let u = user_utility(s, Allocation::new(f, b), Pricing::Dynamic);
                    SurfaceCell {
                        u_user: u.u_user,
                        price: u.price,
                        u_server: u.u_server,
                    }
                })
                .collect()
        })
        .collect();
    Ok(SurfaceGrid {
        f_values,
        b_values,
        cells,
    })
}

/// One optimizer trial in a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRecord {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
    pub iterations: usize,
    pub position: Allocation,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Gap reference. For randomized comparisons, the mean over trials.
    pub u_max: f64,
    /// One entry per algorithm, in [`Algorithm::ALL`] order.
    pub stats: Vec<TrialStats>,
    /// Algorithm-major, then trial order.
    pub records: Vec<ComparisonRecord>,
}

impl ComparisonReport {
    pub fn stats_for(&self, algorithm: Algorithm) -> Option<&TrialStats> {
        self.stats.iter().find(|t| t.algorithm == algorithm)
    }

    fn from_runs(u_max: f64, runs: Vec<(Algorithm, Vec<RunResult>)>) -> Self {
        let stats = runs.iter().map(|(alg, r)| TrialStats::from_runs(*alg, r)).collect();
        let records = runs
            .iter()
            .flat_map(|(alg, r)| {
                r.iter().enumerate().map(move |(trial, run)| ComparisonRecord {
                    algorithm: *alg,
                    trial,
                    seed: run.seed,
                    value: run.best_value,
                    iterations: run.iterations_used,
                    position: run.best_position,
                    converged: run.converged,
                })
            })
            .collect();
        ComparisonReport { u_max, stats, records }
    }
}

fn check_scenario(s: &Scenario) -> Result<(), HarnessError> {
    let report = validate(s);
    if report.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Invalid(report.to_string()))
    }
}

/// Run all four algorithms on one fixed scenario with paired trial seeds,
/// maximizing the dynamic-pricing user utility.
pub fn compare_optimizers(s: &Scenario, cfg: &SwarmConfig, n_trials: usize) -> Result<ComparisonReport, HarnessError> {
    check_scenario(s)?;
    let (_, u_max) = max_user_utility(s);
    let objective = |a: Allocation| dynamic_user_utility(s, a);
    let runs = Algorithm::ALL
        .into_iter()
        .map(|alg| replicate_runs(alg, s, &objective, u_max, cfg, n_trials).map(|r| (alg, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComparisonReport::from_runs(u_max, runs))
}

/// Local frequencies a randomized trial draws from, in GHz.
pub const RANDOM_F_LOCAL_GHZ: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// The scenario of one randomized trial: `q ~ U[100, 500]` KB and `F_local`
/// uniform over [`RANDOM_F_LOCAL_GHZ`], both drawn from the trial seed.
pub fn randomized_scenario(base: &Scenario, trial_seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let q_kb = rng.random_range(100.0..=500.0);
    let f_local = RANDOM_F_LOCAL_GHZ[rng.random_range(0..RANDOM_F_LOCAL_GHZ.len())];
    Scenario {
        q: kb_to_bits(q_kb),
        f_local: ghz_to_hz(f_local),
        ..*base
    }
}

/// Like [`compare_optimizers`], but every trial draws its own task size and
/// local frequency. All algorithms see the same scenario in the same trial.
pub fn compare_optimizers_randomized(
    base: &Scenario,
    cfg: &SwarmConfig,
    n_trials: usize,
) -> Result<ComparisonReport, HarnessError> {
    check_scenario(base)?;
    if n_trials < 1 {
        return Err(OptimizeError::InvalidConfig("n_trials must be >= 1".into()).into());
    }
    cfg.validate()?;
    let trials: Vec<(u64, Scenario, f64)> = trial_seeds(cfg.seed, n_trials)
        .into_iter()
        .map(|seed| {
            let s = randomized_scenario(base, seed);
            (seed, s, max_user_utility(&s).1)
        })
        .collect();
    let runs = Algorithm::ALL
        .into_iter()
        .map(|alg| {
            trials
                .par_iter()
                .enumerate()
                .map(|(index, (seed, s, u_max))| {
                    let objective = |a: Allocation| dynamic_user_utility(s, a);
                    let trial_cfg = SwarmConfig { seed: *seed, ..*cfg };
                    run_algorithm(alg, s, &objective, *u_max, &trial_cfg).map_err(|e| OptimizeError::Trial {
                        index,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|r| (alg, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let u_max = trials.iter().map(|t| t.2).sum::<f64>() / n_trials as f64;
    Ok(ComparisonReport::from_runs(u_max, runs))
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

pub const SWEEP_HEADER: [&str; 8] = ["param", "value", "price", "u_user", "u_server", "t_offload", "t_save", "e_save"];
pub const COMPARISON_HEADER: [&str; 7] = [
    "algorithm",
    "trial",
    "seed",
    "u_user_final",
    "iterations",
    "f_server_hz",
    "b_bps",
];
pub const SURFACE_HEADER: [&str; 5] = ["f_server_hz", "b_bps", "u_user", "price", "u_server"];

/// Nine significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.8e}")
}

/// Rows that serialize to one CSV record each.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRecord for SweepRow {
    fn header() -> &'static [&'static str] {
        &SWEEP_HEADER
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.param.name().to_string()];
        out.extend(
            [self.value, self.price, self.u_user, self.u_server, self.t_offload, self.t_save, self.e_save]
                .map(format_number),
        );
        out
    }
}

impl CsvRecord for ComparisonRecord {
    fn header() -> &'static [&'static str] {
        &COMPARISON_HEADER
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.algorithm.name().to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            format_number(self.value),
            self.iterations.to_string(),
            format_number(self.position.f_server),
            format_number(self.position.b),
        ]
    }
}

/// Flat view of one surface cell, for CSV output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub f_server: f64,
    pub b: f64,
    pub cell: SurfaceCell,
}

impl SurfaceGrid {
    pub fn rows(&self) -> Vec<SurfaceRow> {
        self.f_values
            .iter()
            .zip(&self.cells)
            .flat_map(|(&f_server, col)| {
                self.b_values
                    .iter()
                    .zip(col)
                    .map(move |(&b, &cell)| SurfaceRow { f_server, b, cell })
            })
            .collect()
    }
}

impl CsvRecord for SurfaceRow {
    fn header() -> &'static [&'static str] {
        &SURFACE_HEADER
    }

    fn fields(&self) -> Vec<String> {
        [self.f_server, self.b, self.cell.u_user, self.cell.price, self.cell.u_server]
            .map(format_number)
            .to_vec()
    }
}

pub fn write_csv<R: CsvRecord, W: std::io::Write>(rows: &[R], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRecord>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing CSV to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub fn emit_csv<R: CsvRecord>(rows: &[R], path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, csv_string(rows)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_field<T: FromStr>(record: &csv::StringRecord, i: usize, line: u64) -> Result<T, HarnessError> {
    let raw = record.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| HarnessError::Invalid(format!("line {line}: cannot parse field {} ('{raw}')", i + 1)))
}

fn read_records(text: &str, path: &Path, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, HarnessError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let found = reader.headers().map_err(csv_err(path))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(HarnessError::Invalid(format!(
            "{}: unexpected header '{}'",
            path.display(),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| r.map(|r| (i as u64 + 2, r)).map_err(csv_err(path)))
        .collect()
}

fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse sweep CSV text as written by [`emit_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, HarnessError> {
    read_records(text, Path::new("<input>"), &SWEEP_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(SweepRow {
                param: r.get(0).unwrap_or("").parse()?,
                value: parse_field(&r, 1, line)?,
                price: parse_field(&r, 2, line)?,
                u_user: parse_field(&r, 3, line)?,
                u_server: parse_field(&r, 4, line)?,
                t_offload: parse_field(&r, 5, line)?,
                t_save: parse_field(&r, 6, line)?,
                e_save: parse_field(&r, 7, line)?,
            })
        })
        .collect()
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    parse_sweep_csv(&read_text(path)?)
}

/// Parse comparison CSV text. The `converged` flag is not persisted and
/// reads back as `true`.
pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRecord>, HarnessError> {
    read_records(text, Path::new("<input>"), &COMPARISON_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let algorithm = r
                .get(0)
                .unwrap_or("")
                .parse::<Algorithm>()
                .map_err(|e| HarnessError::Invalid(format!("line {line}: {e}")))?;
            Ok(ComparisonRecord {
                algorithm,
                trial: parse_field(&r, 1, line)?,
                seed: parse_field(&r, 2, line)?,
                value: parse_field(&r, 3, line)?,
                iterations: parse_field(&r, 4, line)?,
                position: Allocation::new(parse_field(&r, 5, line)?, parse_field(&r, 6, line)?),
                converged: true,
            })
        })
        .collect()
}

pub fn read_comparison_csv(path: &Path) -> Result<Vec<ComparisonRecord>, HarnessError> {
    parse_comparison_csv(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::mbps_to_bps;

    fn f_sweep() -> SweepSpec {
        SweepSpec::new(
            SweepParam::FServer,
            (1..=6).map(|g| ghz_to_hz(g as f64)).collect(),
            Scenario::default(),
            Allocation::new(ghz_to_hz(6.0), mbps_to_bps(0.1)),
        )
    }

    #[test]
    fn sweep_rows_match_direct_evaluation() {
        let spec = f_sweep();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            let u = user_utility(&spec.scenario, Allocation::new(r.value, spec.allocation.b), Pricing::Dynamic);
            assert_eq!(r.u_user, u.u_user);
            assert_eq!(r.u_server, u.u_server);
            assert_eq!(r.price, u.price);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        for grid in [vec![], vec![2.0, 1.0], vec![1.0, 1.0], vec![-1.0], vec![f64::NAN]] {
            let spec = SweepSpec { grid, ..f_sweep() };
            assert!(matches!(run_sweep(&spec), Err(HarnessError::Invalid(_))));
        }
        let mut spec = f_sweep();
        spec.scenario.w2 = 1.5;
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn q_and_f_local_sweeps_touch_scenario() {
        let s = Scenario::default();
        let a = Allocation::box_max(&s);
        let r = sweep_point(SweepParam::Q, kb_to_bits(100.0), &s, a);
        assert_eq!(r.u_user, dynamic_user_utility(&s.with_q_kb(100.0), a));
        let r = sweep_point(SweepParam::FLocal, ghz_to_hz(0.5), &s, a);
        assert_eq!(r.u_user, dynamic_user_utility(&s.with_f_local_ghz(0.5), a));
    }

    #[test]
    fn param_names_round_trip() {
        for p in SweepParam::ALL {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        assert!("cpu".parse::<SweepParam>().is_err());
    }

    #[test]
    fn linspace_endpoints_exact() {
        let v = linspace(1e9, 6e9, 100);
        assert_eq!(v.len(), 100);
        assert_eq!((v[0], v[99]), (1e9, 6e9));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn surface_two_by_two() {
        let s = Scenario::default();
        let g = surface_grid(&s, 2, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let u = user_utility(&s, g.allocation(i, j), Pricing::Dynamic);
                assert_eq!(g.cells[i][j].u_user, u.u_user);
            }
        }
        assert_eq!(g.argmax_u_user(), (1, 1));
        assert!(surface_grid(&s, 1, 5).is_err());
    }

    #[test]
    fn number_format_has_nine_significant_digits() {
        assert_eq!(format_number(50.962526584), "5.09625266e1");
        assert_eq!(format_number(-0.150474105594), "-1.50474106e-1");
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(csv_string::<SweepRow>(&[]), format!("{}\n", SWEEP_HEADER.join(",")));
    }

    #[test]
    fn randomized_scenarios_stay_in_distribution() {
        let base = Scenario::default();
        for seed in trial_seeds(3, 200) {
            let s = randomized_scenario(&base, seed);
            let kb = crate::scenario::bits_to_kb(s.q);
            assert!((100.0..=500.0).contains(&kb));
            assert!(RANDOM_F_LOCAL_GHZ.contains(&crate::scenario::hz_to_ghz(s.f_local)));
            assert_eq!(randomized_scenario(&base, seed), s);
        }
    }

    #[test]
    fn comparison_single_trial_has_four_rows() {
        let r = compare_optimizers(&Scenario::default(), &SwarmConfig::default(), 1).unwrap();
        assert_eq!(r.records.len(), 4);
        assert_eq!(r.stats.len(), 4);
        let seeds: Vec<u64> = r.records.iter().map(|x| x.seed).collect();
        assert!(seeds.iter().all(|&s| s == seeds[0]));
    }

    #[test]
    fn randomized_comparison_runs() {
        let cfg = SwarmConfig { seed: 11, ..SwarmConfig::default() };
        let r = compare_optimizers_randomized(&Scenario::default(), &cfg, 3).unwrap();
        assert_eq!(r.records.len(), 12);
        assert_eq!(r, compare_optimizers_randomized(&Scenario::default(), &cfg, 3).unwrap());
    }
}
