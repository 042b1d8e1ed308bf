use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use awtc_polar::experiments::{read_rows, write_rows, AggregateRow};
use awtc_polar::{
    bec_profile, build_partition, rate_report, run_sweep, CellOutcome, CodeConfig, ConstructError, SweepGrid, SweepSpec,
    TrialKind,
};
use serde::Serialize;

use crate::args::{Cli, Command, Mode, PlotArgs, RunSpec};
use crate::plot::charts_from_aggregate;
use crate::CliError;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    outputs: Vec<String>,
    run: &'a RunSpec,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_manifest(spec: &RunSpec, outputs: &[PathBuf]) -> Result<(), CliError> {
    let manifest = Manifest {
        tool: "awtc",
        version: env!("CARGO_PKG_VERSION"),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        run: spec,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Validation(e.to_string()))?;
    write_text(&spec.out_dir.join("manifest.toml"), &text)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct(a) => construct(&RunSpec::resolve(Mode::Construct, a)?),
        Command::Bounds(a) => sweep(&RunSpec::resolve(Mode::Bounds, a)?, TrialKind::Bounds),
        Command::Simulate(a) => sweep(&RunSpec::resolve(Mode::Simulate, a)?, TrialKind::Simulate),
        Command::Plot(a) => plot(&a),
    }
}

fn construct(spec: &RunSpec) -> Result<(), CliError> {
    let config = CodeConfig::new(spec.stages[0], spec.betas[0], spec.rho_w, spec.rho_r, spec.blocks)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let partition = match build_partition(&config) {
        Ok(p) => p,
        Err(e @ ConstructError::Infeasible { .. }) => return Err(CliError::Infeasible(e.to_string())),
        Err(e) => return Err(CliError::Validation(e.to_string())),
    };
    let report = rate_report(&partition, &config);
    prepare_dir(&spec.out_dir)?;

    let dir = &spec.out_dir;
    let outputs = vec![
        dir.join("partition.csv"),
        dir.join("rate.csv"),
        dir.join("profile_write.csv"),
        dir.join("profile_read.csv"),
    ];
    partition.write_csv(create(&outputs[0])?)?;
    report.write_csv(create(&outputs[1])?)?;
    let write_profile = bec_profile(spec.rho_w, config.stages).map_err(|e| CliError::Validation(e.to_string()))?;
    write_profile.write_csv(create(&outputs[2])?)?;
    let read_profile = bec_profile(1.0 - spec.rho_r, config.stages).map_err(|e| CliError::Validation(e.to_string()))?;
    read_profile.write_csv(create(&outputs[3])?)?;
    write_manifest(spec, &outputs)?;
    println!("{report}");
    Ok(())
}

fn sweep(spec: &RunSpec, kind: TrialKind) -> Result<(), CliError> {
    let sweep_spec = SweepSpec {
        grid: SweepGrid {
            stages: spec.stages.clone(),
            betas: spec.betas.clone(),
            rho_w: spec.rho_w,
            rho_r: spec.rho_r,
            blocks: spec.blocks,
            strategy: spec.strategy.into(),
        },
        kind,
        trials: spec.trials,
        base_seed: spec.seed,
        parallelism: spec.parallelism,
    };
    let result = run_sweep(&sweep_spec)?;
    for cell in &result.cells {
        if let CellOutcome::Infeasible { info, sink } = cell.outcome {
            eprintln!(
                "warning: n = {}, beta = {} is infeasible (|I| = {info} < |B| = {sink})",
                cell.config.stages, cell.config.beta
            );
        }
    }
    if result.infeasible_cells() == result.cells.len() {
        return Err(CliError::Infeasible("every grid cell is infeasible".into()));
    }

    prepare_dir(&spec.out_dir)?;
    let trials_path = spec.out_dir.join(format!("{kind}_trials.csv"));
    let aggregate_path = spec.out_dir.join(format!("{kind}_aggregate.csv"));
    write_rows(&result.trial_rows(), create(&trials_path)?)?;
    let aggregate = result.aggregate_rows();
    write_rows(&aggregate, create(&aggregate_path)?)?;
    let mut outputs = vec![trials_path, aggregate_path];
    if spec.plot {
        outputs.extend(write_charts(&aggregate, &spec.out_dir)?);
    }
    write_manifest(spec, &outputs)?;

    for row in &aggregate {
        if row.metric == "infeasible" {
            continue;
        }
        println!(
            "N = 2^{:<2} beta = {:<5} {:<16} {:.6} ± {:.6}",
            row.n, row.beta, row.metric, row.mean, row.stderr
        );
    }
    Ok(())
}

fn write_charts(rows: &[AggregateRow], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (name, svg) in charts_from_aggregate(rows) {
        let path = dir.join(name);
        write_text(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}

fn plot(args: &PlotArgs) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let rows: Vec<AggregateRow> = read_rows(file)?;
    if rows.is_empty() {
        return Err(CliError::Validation(format!("{}: no rows", args.input.display())));
    }
    let dir = match &args.out_dir {
        Some(d) => d.clone(),
        None => args.input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    prepare_dir(&dir)?;
    for path in write_charts(&rows, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
