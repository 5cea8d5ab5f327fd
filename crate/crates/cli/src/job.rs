//! Executes a validated job, writing report records and image files.

use std::io::{self, Write};
use std::path::Path;

use rug::Float;
use serde::Serialize;
use thiserror::Error;

use satmodel::combinatorics::address_of;
use satmodel::criterion::{
    check_arg_inequality, check_class_membership, check_disk_preimage, check_levin, check_sector_bound, estimate_x0,
    relative_tolerance, verify_monotonicity, verify_theorem_recursion, Candidate, SectorReport,
};
use satmodel::numerics::to_log_polar;
use satmodel::raster::{count_components, render_depth_grid, write_image, Palette};
use satmodel::{Depth, Model, Rect};

use crate::config::{AddressSpec, CandidateSpec, Exact, JobConfig, LevinSpec, RenderSpec, Task, VerifySpec};
use crate::report::ReportWriter;

/// A job that started and could not finish.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

fn numerical(e: impl ToString) -> RunError {
    RunError::Numerical(e.to_string())
}

/// Runs the job. Images go to `artifacts`; the header record is written
/// first, and a failure after it appends an `error` record.
pub fn run<W: Write>(config: &JobConfig, artifacts: &Path, report: &mut ReportWriter<W>) -> Result<(), RunError> {
    report.header(config)?;
    let outcome = dispatch(config, artifacts, report);
    if let Err(RunError::Numerical(message)) = &outcome {
        #[derive(Serialize)]
        struct Failure<'a> {
            message: &'a str,
        }
        report.emit("error", &Failure { message })?;
    }
    outcome
}

fn dispatch<W: Write>(config: &JobConfig, artifacts: &Path, report: &mut ReportWriter<W>) -> Result<(), RunError> {
    let prec = config.resolved_precision;
    let horizon = config.horizon;
    if let Task::Levin(spec) = &config.task {
        return levin(config, spec, report);
    }
    let model = Model::new(&config.model, prec, horizon).map_err(numerical)?;
    match &config.task {
        Task::Render(spec) => render(&model, horizon, spec, artifacts, report),
        Task::Criterion(spec) => {
            let r = check_class_membership(&model, &candidate(spec, prec), horizon).map_err(numerical)?;
            Ok(report.emit("criterion", &r)?)
        }
        Task::Verify(spec) => verify(&model, horizon, spec, report),
        Task::Address(spec) => address(&model, horizon, spec, report),
        Task::Centers => {
            let r = estimate_x0(&model, horizon).map_err(numerical)?;
            Ok(report.emit("centers", &r)?)
        }
        Task::Levin(_) => unreachable!("handled above"),
    }
}

fn candidate(spec: &CandidateSpec, prec: u32) -> Candidate {
    match spec {
        CandidateSpec::Center { delta } => Candidate::CenterBased { delta: delta.to_float(prec) },
        CandidateSpec::Theorem { alpha, beta } => Candidate::Theorem { alpha: alpha.to_float(prec), beta: beta.to_float(prec) },
        CandidateSpec::Fixed { x } => Candidate::Fixed(x.to_float(prec)),
    }
}

#[derive(Serialize)]
struct RenderRecord<'a> {
    image: &'a str,
    width: usize,
    height: usize,
    max_depth: usize,
    /// Connected components of the mask of `K_n`, for `n = 0..=max_depth`.
    components: Vec<usize>,
    /// Pixels that survive every level.
    survived: usize,
}

fn render<W: Write>(
    model: &Model,
    horizon: usize,
    spec: &RenderSpec,
    artifacts: &Path,
    report: &mut ReportWriter<W>,
) -> Result<(), RunError> {
    let grid = render_depth_grid(model, &spec.window, horizon).map_err(numerical)?;
    let bytes = write_image(&grid, &Palette::default_for(horizon)).map_err(numerical)?;
    std::fs::write(artifacts.join(&spec.image), bytes)?;
    let survived = grid.depths.iter().filter(|&&d| d == grid.survived()).count();
    let record = RenderRecord {
        image: &spec.image,
        width: spec.window.width,
        height: spec.window.height,
        max_depth: horizon,
        components: (0..=horizon).map(|n| count_components(&grid, n)).collect(),
        survived,
    };
    Ok(report.emit("render", &record)?)
}

fn levin<W: Write>(config: &JobConfig, spec: &LevinSpec, report: &mut ReportWriter<W>) -> Result<(), RunError> {
    let r = check_levin(&config.model, spec.start, spec.end, spec.delta, config.resolved_precision).map_err(numerical)?;
    Ok(report.emit("levin", &r)?)
}

#[derive(Serialize)]
struct Suite<'a, T: Serialize> {
    suite: &'a str,
    pass: bool,
    report: T,
}

#[derive(Serialize)]
struct SectorSuite {
    /// Levels skipped because some `q_k` below them exceeds 64 bits.
    skipped_from: Option<usize>,
    levels: Vec<SectorReport>,
}

fn verify<W: Write>(model: &Model, horizon: usize, spec: &VerifySpec, report: &mut ReportWriter<W>) -> Result<(), RunError> {
    let prec = model.prec();

    let disk = check_disk_preimage(spec.disk_t_samples, spec.disk_points, spec.seed, prec, spec.disk_tolerance);
    report.emit("suite", &Suite { suite: "disk-preimage", pass: disk.violations == 0, report: disk })?;

    let constant = model.params().constant();
    let arg = check_arg_inequality(constant, spec.arg_q, spec.samples, spec.seed, prec).map_err(numerical)?;
    report.emit("suite", &Suite { suite: "arg-inequality", pass: arg.violations.is_empty(), report: arg })?;

    let tolerance = relative_tolerance(prec);
    let reachable = (0..=horizon).take_while(|&n| n == 0 || model.level(n - 1).q().to_u64().is_some()).count();
    let mut levels = Vec::with_capacity(reachable);
    for n in 0..reachable {
        levels.push(check_sector_bound(model, n, spec.samples, spec.seed + n as u64, &tolerance).map_err(numerical)?);
    }
    let pass = levels.iter().all(|r| r.violations.is_empty() && r.verified > 0);
    let skipped_from = (reachable <= horizon).then_some(reachable);
    report.emit("suite", &Suite { suite: "sector-bound", pass, report: SectorSuite { skipped_from, levels } })?;

    let est = estimate_x0(model, horizon).map_err(numerical)?;
    let x0 = Float::with_val(prec, &est.x0_lower + Float::with_val(prec, &est.gap / 2u32));
    let mono = verify_monotonicity(model, &spec.c_prime, &x0, horizon).map_err(numerical)?;
    report.emit("suite", &Suite { suite: "monotonicity", pass: mono.all_ordered && mono.transfers, report: mono })?;

    let rec = verify_theorem_recursion(model, &spec.alpha.to_float(prec), &spec.beta.to_float(prec), horizon)
        .map_err(numerical)?;
    report.emit("suite", &Suite { suite: "recursion", pass: rec.passes(), report: rec })?;
    Ok(())
}

#[derive(Serialize)]
struct AddressRecord<'a> {
    re: &'a Exact,
    im: &'a Exact,
    depth: Depth,
    /// Labels `(k_0, …, k_{N-1})` when the point lies in `K_N`.
    address: Option<Vec<u64>>,
    /// Why no address was assigned.
    reason: Option<String>,
}

fn address<W: Write>(model: &Model, horizon: usize, spec: &AddressSpec, report: &mut ReportWriter<W>) -> Result<(), RunError> {
    let prec = model.prec();
    for (re, im) in &spec.points {
        let z = Rect::new(re.to_float(prec), im.to_float(prec));
        let depth = model.escape_depth(&z, horizon).map_err(numerical)?;
        let (address, reason) = match address_of(model, &to_log_polar(&z), horizon) {
            Ok(a) => (Some(a.digits().to_vec()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        report.emit("address", &AddressRecord { re, im, depth, address, reason })?;
    }
    Ok(())
}
