//! Settings-matrix benchmark: per-run records, subset tables with shifted
//! geometric means, root-bound comparison buckets and separation-time shares.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cutloop::{branch_and_bound, RltMode, Settings};
use crate::error::{BenchError, MetricError};
use crate::instance_io::{read_instance_file, ColumnType, Report, Value, INSTANCE_EXTENSION};

pub const SHIFT_TIME: f64 = 1.0;
pub const SHIFT_NODES: f64 = 100.0;
pub const DEGENERATE_DENOMINATOR: f64 = 1e-9;
pub const BOUND_DIFF_CLAMP: f64 = 1e9;
pub const DEFAULT_BRACKETS: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
pub const ROOT_BUCKETS: [(f64, f64, &str); 4] = [
    (0.01, 0.2, "0.01-0.2"),
    (0.2, 0.5, "0.2-0.5"),
    (0.5, 1.0, "0.5-1.0"),
    (1.0, f64::INFINITY, ">1.0"),
];
pub const SEPARATION_INTERVALS: [(f64, f64, &str); 4] = [
    (0.0, 5.0, "lt5"),
    (5.0, 20.0, "5-20"),
    (20.0, 50.0, "20-50"),
    (50.0, f64::INFINITY, "50-100"),
];

/// `exp(mean(ln(v + shift))) - shift`.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty);
    }
    if shift.is_nan() || shift <= 0.0 {
        return Err(MetricError::BadShift(shift));
    }
    if let Some(&v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(MetricError::Negative(v));
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Ok(mean.exp() - shift)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BoundDiff {
    pub value: f64,
    pub degenerate: bool,
}

/// `(g2 - g1) / g1`, with the denominator floored at 1e-9 in magnitude.
pub fn relative_bound_diff(g1: f64, g2: f64) -> BoundDiff {
    let degenerate = g1.is_nan() || g1.abs() <= DEGENERATE_DENOMINATOR;
    let value = if g1 == g2 {
        0.0
    } else if degenerate {
        // the floored denominator is exactly 1e-9 here
        (g2 - g1) * 1e9
    } else {
        (g2 - g1) / g1
    };
    BoundDiff {
        value: value.clamp(-BOUND_DIFF_CLAMP, BOUND_DIFF_CLAMP),
        degenerate,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub name: String,
    pub settings: Settings,
}

impl Variant {
    /// Parses `off`, `erlt` or `ierlt`, optionally suffixed with `-nomark`
    /// and/or `-noproj`. `marking` and `projection` are the unsuffixed defaults.
    pub fn parse(token: &str, marking: bool, projection: bool) -> Result<Variant, BenchError> {
        let lower = token.trim().to_ascii_lowercase();
        let mut parts = lower.split('-');
        let mode = parts
            .next()
            .and_then(RltMode::parse)
            .ok_or_else(|| BenchError::Config(format!("unknown variant `{token}`")))?;
        let mut settings = Settings::for_mode(mode);
        settings.use_marking = marking;
        settings.use_projection = projection;
        for p in parts {
            match p {
                "nomark" => settings.use_marking = false,
                "mark" => settings.use_marking = true,
                "noproj" => settings.use_projection = false,
                "proj" => settings.use_projection = true,
                _ => {
                    return Err(BenchError::Config(format!(
                        "unknown variant option `{p}` in `{token}`"
                    )))
                }
            }
        }
        Ok(Variant {
            name: lower,
            settings,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub instances: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    pub time_limit_s: f64,
    pub node_limit: usize,
    pub shift_time: f64,
    pub shift_nodes: f64,
    /// Recorded in report metadata; the solver itself is deterministic.
    pub seed: u64,
    pub serial: bool,
    pub brackets: Vec<f64>,
}

impl BenchConfig {
    pub fn new(instances: Vec<PathBuf>, variants: Vec<Variant>) -> Self {
        BenchConfig {
            instances,
            variants,
            time_limit_s: f64::INFINITY,
            node_limit: Settings::default().node_limit,
            shift_time: SHIFT_TIME,
            shift_nodes: SHIFT_NODES,
            seed: 0,
            serial: false,
            brackets: DEFAULT_BRACKETS.to_vec(),
        }
    }

    pub fn check(&self) -> Result<(), BenchError> {
        if self.instances.is_empty() {
            return Err(BenchError::Config("no instances".into()));
        }
        if self.variants.is_empty() {
            return Err(BenchError::Config("no variants".into()));
        }
        let mut names: Vec<&str> = self.variants.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Config("duplicate variant names".into()));
        }
        let mut stems: Vec<String> = self.instances.iter().map(|p| instance_name(p)).collect();
        stems.sort_unstable();
        if stems.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Config("duplicate instance names".into()));
        }
        if !(self.shift_time > 0.0 && self.shift_nodes > 0.0) {
            return Err(BenchError::Config("shifts must be positive".into()));
        }
        if self.time_limit_s.is_nan() || self.time_limit_s < 0.0 {
            return Err(BenchError::Config(format!(
                "bad time limit {}",
                self.time_limit_s
            )));
        }
        if self.brackets.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(BenchError::Config(
                "brackets must be finite and nonnegative".into(),
            ));
        }
        for v in &self.variants {
            v.settings
                .check()
                .map_err(|e| BenchError::Config(format!("variant `{}`: {e}", v.name)))?;
        }
        Ok(())
    }
}

/// File name with the instance extension (or any extension) removed.
pub fn instance_name(path: &Path) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    match file.strip_suffix(INSTANCE_EXTENSION) {
        Some(s) => s.to_string(),
        None => path
            .file_stem()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or(file),
    }
}

/// Instance files directly inside `dir`, sorted by path.
pub fn discover_instances(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.to_string_lossy().ends_with(INSTANCE_EXTENSION) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub variant: String,
    /// A solve status name, or `fail`.
    pub status: String,
    pub message: Option<String>,
    pub primal: f64,
    pub dual: f64,
    pub root_initial: f64,
    pub root_final: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub cuts: usize,
    pub relations_detected: usize,
    pub candidates: usize,
    pub cuts_built: usize,
    pub wall_time: f64,
    pub separation_time: f64,
}

impl RunRecord {
    fn failed(instance: &str, variant: &str, message: String) -> Self {
        RunRecord {
            instance: instance.to_string(),
            variant: variant.to_string(),
            status: "fail".into(),
            message: Some(message),
            primal: f64::NAN,
            dual: f64::NAN,
            root_initial: f64::NAN,
            root_final: f64::NAN,
            nodes: 0,
            lp_iterations: 0,
            cuts: 0,
            relations_detected: 0,
            candidates: 0,
            cuts_built: 0,
            wall_time: 0.0,
            separation_time: 0.0,
        }
    }

    pub fn is_fail(&self) -> bool {
        self.status == "fail"
    }

    pub fn is_solved(&self) -> bool {
        self.status == "optimal" || self.status == "infeasible"
    }

    pub fn separation_percent(&self) -> f64 {
        if self.wall_time > 0.0 {
            100.0 * self.separation_time / self.wall_time
        } else {
            0.0
        }
    }
}

fn run_one(path: &Path, variant: &Variant, config: &BenchConfig) -> RunRecord {
    let name = instance_name(path);
    let problem = match read_instance_file(path) {
        Ok(p) => p,
        Err(e) => return RunRecord::failed(&name, &variant.name, e.to_string()),
    };
    let mut settings = variant.settings.clone();
    settings.time_limit_s = config.time_limit_s;
    settings.node_limit = config.node_limit;
    let solved = catch_unwind(AssertUnwindSafe(|| branch_and_bound(&problem, &settings)));
    match solved {
        Ok(Ok(r)) => RunRecord {
            instance: name,
            variant: variant.name.clone(),
            status: r.status.name().to_string(),
            message: None,
            primal: r.primal_bound,
            dual: r.dual_bound,
            root_initial: r.root.initial_bound(),
            root_final: r.root.final_bound,
            nodes: r.nodes,
            lp_iterations: r.lp_iterations,
            cuts: r.cuts_added,
            relations_detected: r.root.relations_detected,
            candidates: r.root.counters.candidates,
            cuts_built: r.root.counters.cuts_built,
            wall_time: r.wall_time.as_secs_f64(),
            separation_time: r.separation_time.as_secs_f64(),
        },
        Ok(Err(e)) => RunRecord::failed(&name, &variant.name, e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            RunRecord::failed(&name, &variant.name, format!("panic: {msg}"))
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub variants: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub time_limit_s: f64,
    pub shift_time: f64,
    pub shift_nodes: f64,
    pub brackets: Vec<f64>,
    pub seed: u64,
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.check()?;
    let jobs: Vec<(&PathBuf, &Variant)> = config
        .instances
        .iter()
        .flat_map(|p| config.variants.iter().map(move |v| (p, v)))
        .collect();
    let mut runs: Vec<RunRecord> = if config.serial {
        jobs.iter().map(|(p, v)| run_one(p, v, config)).collect()
    } else {
        jobs.par_iter()
            .map(|(p, v)| run_one(p, v, config))
            .collect()
    };
    let order = |name: &str| config.variants.iter().position(|v| v.name == name);
    runs.sort_by(|a, b| {
        a.instance
            .cmp(&b.instance)
            .then(order(&a.variant).cmp(&order(&b.variant)))
    });
    Ok(BenchReport {
        variants: config.variants.iter().map(|v| v.name.clone()).collect(),
        runs,
        time_limit_s: config.time_limit_s,
        shift_time: config.shift_time,
        shift_nodes: config.shift_nodes,
        brackets: config.brackets.clone(),
        seed: config.seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetRow {
    pub subset: String,
    pub variant: String,
    pub instances: usize,
    pub solved: usize,
    pub sgm_time: f64,
    pub sgm_nodes: f64,
    /// sgm over sgm of the first variant; NaN for an empty subset.
    pub time_ratio: f64,
    pub node_ratio: f64,
}

impl BenchReport {
    pub fn instances(&self) -> Vec<String> {
        let mut v: Vec<String> = self.runs.iter().map(|r| r.instance.clone()).collect();
        v.dedup();
        v
    }

    pub fn record(&self, instance: &str, variant: &str) -> Option<&RunRecord> {
        self.runs
            .iter()
            .find(|r| r.instance == instance && r.variant == variant)
    }

    fn per_instance(&self, instance: &str) -> Vec<&RunRecord> {
        self.runs
            .iter()
            .filter(|r| r.instance == instance)
            .collect()
    }

    pub fn has_failures(&self) -> bool {
        self.runs.iter().any(RunRecord::is_fail)
    }

    /// Instances whose LP iteration counts (or fail status) differ between variants.
    pub fn affected(&self) -> Vec<String> {
        self.instances()
            .into_iter()
            .filter(|i| {
                let recs = self.per_instance(i);
                recs.windows(2).any(|w| {
                    w[0].lp_iterations != w[1].lp_iterations || w[0].is_fail() != w[1].is_fail()
                })
            })
            .collect()
    }

    /// Instances solved under some variant and taking at least `x` seconds under some variant.
    pub fn bracket(&self, x: f64) -> Vec<String> {
        self.instances()
            .into_iter()
            .filter(|i| {
                let recs = self.per_instance(i);
                recs.iter().any(|r| r.is_solved())
                    && recs.iter().any(|r| !r.is_fail() && r.wall_time >= x)
            })
            .collect()
    }

    pub fn all_optimal(&self) -> Vec<String> {
        self.instances()
            .into_iter()
            .filter(|i| self.per_instance(i).iter().all(|r| r.is_solved()))
            .collect()
    }

    pub fn subsets(&self) -> Vec<(String, Vec<String>)> {
        let mut out = vec![
            ("all".to_string(), self.instances()),
            ("affected".to_string(), self.affected()),
        ];
        for &x in &self.brackets {
            out.push((format!("[{x},tl]"), self.bracket(x)));
        }
        out.push(("all-optimal".to_string(), self.all_optimal()));
        out
    }

    /// Time charged to a run in the means: wall time, or the time limit for unsolved runs.
    fn charged_time(&self, r: &RunRecord) -> f64 {
        if !r.is_solved() && self.time_limit_s.is_finite() {
            self.time_limit_s
        } else {
            r.wall_time
        }
    }

    pub fn subset_rows(&self) -> Vec<SubsetRow> {
        let mut out = Vec::new();
        for (subset, members) in self.subsets() {
            let mut means = Vec::new();
            for v in &self.variants {
                let recs: Vec<&RunRecord> =
                    members.iter().filter_map(|i| self.record(i, v)).collect();
                let times: Vec<f64> = recs.iter().map(|r| self.charged_time(r)).collect();
                let nodes: Vec<f64> = recs.iter().map(|r| r.nodes as f64).collect();
                let t = shifted_geomean(&times, self.shift_time).unwrap_or(f64::NAN);
                let n = shifted_geomean(&nodes, self.shift_nodes).unwrap_or(f64::NAN);
                means.push((
                    v.clone(),
                    recs.len(),
                    recs.iter().filter(|r| r.is_solved()).count(),
                    t,
                    n,
                ));
            }
            let (t0, n0) = (means[0].3, means[0].4);
            for (variant, instances, solved, t, n) in means {
                out.push(SubsetRow {
                    subset: subset.clone(),
                    variant,
                    instances,
                    solved,
                    sgm_time: t,
                    sgm_nodes: n,
                    time_ratio: ratio(t, t0),
                    node_ratio: ratio(n, n0),
                });
            }
        }
        out
    }

    fn metadata(&self, report: &mut Report) {
        report
            .metadata
            .insert("variants".into(), self.variants.join(","));
        report.metadata.insert("seed".into(), self.seed.to_string());
        report.metadata.insert(
            "time_limit_s".into(),
            crate::instance_io::format_real(self.time_limit_s),
        );
    }

    /// One row per (instance, variant). Wall-clock columns only with `with_times`.
    pub fn runs_report(&self, with_times: bool) -> Report {
        let mut cols = vec![
            ("instance", ColumnType::Str),
            ("variant_index", ColumnType::Int),
            ("variant", ColumnType::Str),
            ("status", ColumnType::Str),
            ("primal", ColumnType::Real),
            ("dual", ColumnType::Real),
            ("root_initial", ColumnType::Real),
            ("root_final", ColumnType::Real),
            ("nodes", ColumnType::Int),
            ("lp_iterations", ColumnType::Int),
            ("cuts", ColumnType::Int),
            ("relations_detected", ColumnType::Int),
            ("candidates", ColumnType::Int),
            ("cuts_built", ColumnType::Int),
            ("message", ColumnType::Str),
        ];
        if with_times {
            cols.push(("wall_time", ColumnType::Real));
            cols.push(("separation_time", ColumnType::Real));
        }
        let mut rep = Report::new("runs", &cols, 2);
        self.metadata(&mut rep);
        for r in &self.runs {
            let idx = self
                .variants
                .iter()
                .position(|v| *v == r.variant)
                .unwrap_or(usize::MAX);
            let mut row: Vec<Value> = vec![
                r.instance.clone().into(),
                idx.into(),
                r.variant.clone().into(),
                r.status.clone().into(),
                r.primal.into(),
                r.dual.into(),
                r.root_initial.into(),
                r.root_final.into(),
                r.nodes.into(),
                r.lp_iterations.into(),
                r.cuts.into(),
                r.relations_detected.into(),
                r.candidates.into(),
                r.cuts_built.into(),
                r.message.clone().unwrap_or_default().into(),
            ];
            if with_times {
                row.push(r.wall_time.into());
                row.push(r.separation_time.into());
            }
            rep.push(row).expect("runs row matches its columns");
        }
        rep
    }

    pub fn subset_report(&self) -> Report {
        let mut rep = Report::new(
            "subsets",
            &[
                ("subset_index", ColumnType::Int),
                ("variant_index", ColumnType::Int),
                ("subset", ColumnType::Str),
                ("variant", ColumnType::Str),
                ("instances", ColumnType::Int),
                ("solved", ColumnType::Int),
                ("sgm_time", ColumnType::Real),
                ("sgm_nodes", ColumnType::Real),
                ("time_ratio", ColumnType::Real),
                ("node_ratio", ColumnType::Real),
            ],
            2,
        );
        self.metadata(&mut rep);
        let subsets: Vec<String> = self.subsets().into_iter().map(|s| s.0).collect();
        for row in self.subset_rows() {
            let si = subsets.iter().position(|s| *s == row.subset).unwrap();
            let vi = self
                .variants
                .iter()
                .position(|v| *v == row.variant)
                .unwrap();
            rep.push(vec![
                si.into(),
                vi.into(),
                row.subset.into(),
                row.variant.into(),
                row.instances.into(),
                row.solved.into(),
                row.sgm_time.into(),
                row.sgm_nodes.into(),
                row.time_ratio.into(),
                row.node_ratio.into(),
            ])
            .expect("subset row matches its columns");
        }
        rep
    }

    /// Counts of instances whose final root bound moved against the first
    /// variant, by direction and relative magnitude.
    pub fn root_bound_report(&self) -> Report {
        let mut cols = vec![
            ("variant_index", ColumnType::Int),
            ("direction", ColumnType::Str),
            ("variant", ColumnType::Str),
        ];
        for b in ROOT_BUCKETS {
            cols.push((b.2, ColumnType::Int));
        }
        cols.push(("degenerate", ColumnType::Int));
        cols.push(("compared", ColumnType::Int));
        let mut rep = Report::new("root_bounds", &cols, 2);
        self.metadata(&mut rep);
        let reference = &self.variants[0];
        for (vi, v) in self.variants.iter().enumerate().skip(1) {
            for direction in ["better", "worse"] {
                let mut counts = [0usize; 4];
                let (mut degenerate, mut compared) = (0usize, 0usize);
                for inst in self.instances() {
                    let (Some(r1), Some(r2)) =
                        (self.record(&inst, reference), self.record(&inst, v))
                    else {
                        continue;
                    };
                    let (g1, g2) = (r1.root_final, r2.root_final);
                    if !(g1.is_finite() && g2.is_finite()) {
                        continue;
                    }
                    compared += 1;
                    let improved = g2 > g1;
                    if (direction == "better") != improved || g1 == g2 {
                        continue;
                    }
                    let d = relative_bound_diff(g1, g2);
                    if d.degenerate {
                        degenerate += 1;
                    }
                    let mag = d.value.abs();
                    if let Some(k) = ROOT_BUCKETS
                        .iter()
                        .position(|&(lo, hi, _)| mag >= lo && mag < hi)
                    {
                        counts[k] += 1;
                    }
                }
                let mut row: Vec<Value> = vec![vi.into(), direction.into(), v.clone().into()];
                row.extend(counts.iter().map(|&c| Value::from(c)));
                row.push(degenerate.into());
                row.push(compared.into());
                rep.push(row).expect("root bound row matches its columns");
            }
        }
        rep
    }

    /// Share of wall time spent in separation, per variant.
    pub fn separation_report(&self) -> Report {
        let mut cols = vec![
            ("variant_index", ColumnType::Int),
            ("variant", ColumnType::Str),
            ("mean_percent", ColumnType::Real),
            ("max_percent", ColumnType::Real),
        ];
        for b in SEPARATION_INTERVALS {
            cols.push((b.2, ColumnType::Int));
        }
        cols.push(("fail", ColumnType::Int));
        let mut rep = Report::new("separation_time", &cols, 1);
        self.metadata(&mut rep);
        for (vi, v) in self.variants.iter().enumerate() {
            let recs: Vec<&RunRecord> = self.runs.iter().filter(|r| r.variant == *v).collect();
            let pcts: Vec<f64> = recs
                .iter()
                .filter(|r| !r.is_fail())
                .map(|r| r.separation_percent())
                .collect();
            let mean = if pcts.is_empty() {
                f64::NAN
            } else {
                pcts.iter().sum::<f64>() / pcts.len() as f64
            };
            let max = pcts.iter().copied().fold(f64::NAN, f64::max);
            let mut row: Vec<Value> = vec![vi.into(), v.clone().into(), mean.into(), max.into()];
            for (lo, hi, _) in SEPARATION_INTERVALS {
                row.push(pcts.iter().filter(|&&p| p >= lo && p < hi).count().into());
            }
            row.push(recs.iter().filter(|r| r.is_fail()).count().into());
            rep.push(row).expect("separation row matches its columns");
        }
        rep
    }
}

fn ratio(v: f64, reference: f64) -> f64 {
    if v == reference {
        1.0
    } else {
        v / reference
    }
}

/// Sibling path: `out.csv` with `suffix` gives `out.<suffix>.csv`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Writes the runs CSV to `out` and the summary tables next to it.
pub fn write_outputs(
    report: &BenchReport,
    out: &Path,
    with_times: bool,
) -> Result<Vec<PathBuf>, BenchError> {
    let files = [
        (out.to_path_buf(), report.runs_report(with_times)),
        (sibling_path(out, "subsets"), report.subset_report()),
        (sibling_path(out, "rootbound"), report.root_bound_report()),
        (sibling_path(out, "septime"), report.separation_report()),
    ];
    let mut written = Vec::new();
    for (path, rep) in files {
        std::fs::write(&path, rep.to_csv())?;
        written.push(path);
    }
    Ok(written)
}
