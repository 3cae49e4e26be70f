//! Single runs and time-step sweeps with their output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lagrange_galerkin::diagnostics::{fmt_f64, RunRecord};
use lagrange_galerkin::run::Simulation;
use lagrange_galerkin::transport::Field;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SUMMARY_HEADER: &str = "dt,l2_error,max_l2norm,min,max,unstable_flag";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides the `output` key.
    pub out: Option<PathBuf>,
    pub dump_mesh: bool,
    /// Dump the field every this many steps (and at step 0).
    pub dump_field_every: Option<usize>,
}

impl RunOptions {
    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out.clone().unwrap_or_else(|| cfg.output.clone())
    }
}

pub fn csv_name(dt: f64) -> String {
    format!("run_dt{dt}.csv")
}

pub fn field_dump_name(dt: f64, step: usize) -> String {
    format!("field_dt{dt}_n{step:06}.txt")
}

/// `# space=<kind> ndof=<n> t=<t>` followed by one coefficient per line.
pub fn write_field<W: Write>(mut w: W, c: &Field) -> std::io::Result<()> {
    writeln!(w, "# space={} ndof={} t={}", c.space().kind().name(), c.coeffs.len(), fmt_f64(c.time))?;
    for v in &c.coeffs {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Runs one time step of the configuration, writing its CSV (and dumps)
/// into the output directory.
pub fn run_single(cfg: &ExperimentConfig, dt: f64, opts: &RunOptions) -> Result<RunRecord, CliError> {
    let setup = cfg.setup(dt)?;
    let out = opts.out_dir(cfg);
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let sim = Simulation::new(setup)?;
    if opts.dump_mesh {
        let path = out.join("mesh.txt");
        let mut w = create(&path)?;
        sim.space().mesh().write_dump(&mut w).map_err(|e| CliError::io(&path, e))?;
        finish(w, &path)?;
    }
    let mut dump_error = None;
    let every = opts.dump_field_every.filter(|&k| k > 0);
    let record = sim.run_with(|n, c| {
        if let (Some(k), None) = (every, &dump_error) {
            if n % k == 0 {
                let path = out.join(field_dump_name(dt, n));
                let res = create(&path).and_then(|mut w| {
                    write_field(&mut w, c).map_err(|e| CliError::io(&path, e))?;
                    finish(w, &path)
                });
                dump_error = res.err();
            }
        }
        Ok(())
    })?;
    if let Some(e) = dump_error {
        return Err(e);
    }
    let path = out.join(csv_name(dt));
    let mut w = create(&path)?;
    record.write_csv(&mut w, cfg.timing).map_err(|e| CliError::io(&path, e))?;
    finish(w, &path)?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dt: f64,
    pub outcome: Result<RunRecord, String>,
}

impl SweepRow {
    pub fn unstable(&self) -> bool {
        match &self.outcome {
            Ok(r) => r.flags.unstable || r.flags.diverged_at.is_some(),
            Err(_) => true,
        }
    }

    fn line(&self) -> String {
        let flag = u8::from(self.unstable());
        match &self.outcome {
            Ok(r) => {
                let (min, max) = r.final_extrema();
                format!(
                    "{},{},{},{},{},{flag}",
                    fmt_f64(self.dt),
                    fmt_f64(r.l2_error),
                    fmt_f64(r.max_l2norm()),
                    fmt_f64(min),
                    fmt_f64(max)
                )
            }
            Err(_) => format!("{},NaN,NaN,NaN,NaN,{flag}", fmt_f64(self.dt)),
        }
    }
}

/// Runs every time step of the list and writes `summary.csv`. Numerical
/// failures of single runs are recorded and the sweep continues.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SweepRow>, CliError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.dt.len());
    for &dt in &cfg.dt {
        let outcome = match run_single(cfg, dt, opts) {
            Ok(r) => Ok(r),
            Err(CliError::Numerical(m)) => Err(m),
            Err(e) => return Err(e),
        };
        rows.push(SweepRow { dt, outcome });
    }
    let path = opts.out_dir(cfg).join("summary.csv");
    let mut w = create(&path)?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "{SUMMARY_HEADER}").map_err(io)?;
    for r in &rows {
        writeln!(w, "{}", r.line()).map_err(io)?;
    }
    for r in &rows {
        if let Err(m) = &r.outcome {
            writeln!(w, "# dt={} error={m}", fmt_f64(r.dt)).map_err(io)?;
        }
    }
    finish(w, &path)?;
    Ok(rows)
}

/// Runs `f` on a pool of `threads` workers (0 = default size).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
