use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scmaba::config::load_config;
use scmaba::harness::{
    aggregate, audit_ir, check_probe, emit_identification, parse_algorithms, parse_values, probe_truthfulness,
    run_replication, run_replications, run_sweep, write_identification_csv, write_ir_csv, write_probe_csv, write_sweep,
    Algorithm, ProbeSettings, SweepParam, SweepSpec,
};
use scmaba::metrics::write_summary_csv;
use scmaba::rng::replication_seed;
use scmaba::{Error, Result, SimConfig};

#[derive(Parser)]
#[command(name = "scmaba", version, about = "Bandit reverse-auction recruitment simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config file; unspecified keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replications (or probe/audit seeds).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated, e.g. `SCMABA,0.3-Greedy,0.7-Greedy,Random`.
    #[arg(long)]
    algorithms: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run all algorithms over replications of one config.
    Run(Common),
    /// Sweep one parameter and write `<param>_sweep.csv` plus a plot script.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        /// `a,b,c` or `lo:hi:step`.
        #[arg(long)]
        values: String,
    },
    /// Vary one exploitation winner's claimed cost and record its utility.
    ProbeTruthfulness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        winners_per_seed: usize,
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Compare payment and true cost of every recruited worker.
    AuditIr(Common),
    /// Learned vs. true sensing rate per worker after one run.
    Identify(Common),
}

impl Common {
    fn config(&self) -> Result<SimConfig> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.reps {
            c.replications = r;
        }
        c.validate()?;
        Ok(c)
    }

    fn algorithms(&self) -> Result<Vec<Algorithm>> {
        match &self.algorithms {
            Some(list) => parse_algorithms(list),
            None => Ok(Algorithm::standard()),
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).map_err(|e| Error::Io {
            path: self.out.clone(),
            source: e,
        })?;
        Ok(&self.out)
    }

    /// Seeds for the probe and audit: one per replication.
    fn seeds(&self, config: &SimConfig) -> Vec<u64> {
        (0..config.replications as u64).map(|r| replication_seed(config.seed, r)).collect()
    }
}

fn create(path: PathBuf) -> Result<fs::File> {
    fs::File::create(&path).map_err(|e| Error::Io { path, source: e })
}

fn run(common: &Common) -> Result<()> {
    let config = common.config()?;
    let algorithms = common.algorithms()?;
    let out = common.out_dir()?;
    let summaries = run_replications(&config, &algorithms)?;
    write_summary_csv(&summaries, create(out.join("summary.csv"))?)?;

    // Per-round detail for the first replication.
    let first = run_replication(&config, 0, &algorithms)?;
    let mut baseline_rows = Vec::new();
    for trace in &first.traces {
        if trace.algorithm == Algorithm::Scmaba.name() {
            trace.write_trace_csv(create(out.join("trace.csv"))?, false)?;
            trace.write_verdicts_csv(create(out.join("verdicts.csv"))?)?;
            trace.write_profiles_csv(create(out.join("profiles.csv"))?)?;
        } else {
            baseline_rows.push(trace);
        }
    }
    if !baseline_rows.is_empty() {
        let mut buf = Vec::new();
        for (i, trace) in baseline_rows.iter().enumerate() {
            let mut one = Vec::new();
            trace.write_trace_csv(&mut one, true)?;
            let skip = if i == 0 { 0 } else { one.iter().position(|&b| b == b'\n').map_or(0, |p| p + 1) };
            buf.extend_from_slice(&one[skip..]);
        }
        fs::write(out.join("baseline_trace.csv"), buf).map_err(|e| Error::io(out.join("baseline_trace.csv"), e))?;
    }

    for p in aggregate(SweepParam::Budget, &summaries) {
        println!(
            "{:<12} revenue {:>9.1} ± {:>6.1}   regret {:>9.1} ± {:>6.1}   rounds {:>6.1}",
            p.algorithm, p.revenue.mean, p.revenue.stderr, p.regret.mean, p.regret.stderr, p.rounds.mean
        );
    }
    Ok(())
}

fn sweep(common: &Common, param: &str, values: &str) -> Result<()> {
    let spec = SweepSpec {
        param: param.parse()?,
        values: parse_values(values)?,
        base: common.config()?,
        algorithms: common.algorithms()?,
    };
    let summaries = run_sweep(&spec)?;
    let (csv, script) = write_sweep(spec.param, &summaries, common.out_dir()?)?;
    for p in aggregate(spec.param, &summaries) {
        println!(
            "{}={:<8} {:<12} revenue {:>9.1} ± {:>6.1}   regret {:>9.1} ± {:>6.1}",
            spec.param.label(),
            p.value,
            p.algorithm,
            p.revenue.mean,
            p.revenue.stderr,
            p.regret.mean,
            p.regret.stderr
        );
    }
    println!("wrote {} and {}", csv.display(), script.display());
    Ok(())
}

fn probe(common: &Common, winners_per_seed: usize, grid: usize) -> Result<()> {
    let config = common.config()?;
    let settings = ProbeSettings {
        winners_per_seed,
        grid_points: grid,
        ..ProbeSettings::default()
    };
    let mut rows = Vec::new();
    for seed in common.seeds(&config) {
        rows.extend(probe_truthfulness(&config, seed, &settings)?);
    }
    write_probe_csv(&rows, create(common.out_dir()?.join("truthfulness.csv"))?)?;
    let mut curves = 0;
    let mut bad = 0;
    for curve in rows.chunk_by(|a, b| (a.seed, a.round) == (b.seed, b.round)) {
        curves += 1;
        let v = check_probe(curve);
        if !(v.truthful_dominant && v.plateau_then_zero) {
            bad += 1;
        }
    }
    println!("probed {curves} winners, {bad} curves where misreporting helped or the shape broke");
    Ok(())
}

fn audit(common: &Common) -> Result<()> {
    let config = common.config()?;
    let audit = audit_ir(&config, &common.seeds(&config))?;
    write_ir_csv(&audit, create(common.out_dir()?.join("ir_audit.csv"))?)?;
    let fmt = |g: Option<f64>| g.map_or("n/a".to_string(), |g| format!("{g:.4}"));
    println!(
        "{} payments, {} below cost; mean overpayment exploration {} exploitation {}",
        audit.rows.len(),
        audit.violations,
        fmt(audit.exploration_gap),
        fmt(audit.exploitation_gap)
    );
    Ok(())
}

fn identify(common: &Common) -> Result<()> {
    let config = common.config()?;
    let (rows, ident) = emit_identification(&config, config.seed)?;
    write_identification_csv(&rows, create(common.out_dir()?.join("identification.csv"))?)?;
    for (i, (b, m)) in config.sr_buckets.iter().zip(&ident.per_bucket).enumerate() {
        let m = m.map_or("n/a".to_string(), |m| format!("{m:.4}"));
        println!(
            "bucket {} [{:.1}, {:.1}]: {} pulled, MAE {}",
            i + 1,
            b.lo,
            b.hi,
            ident.pulled_per_bucket[i],
            m
        );
    }
    println!("{} never pulled", ident.unpulled.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Sweep { common, param, values } => sweep(common, param, values),
        Command::ProbeTruthfulness {
            common,
            winners_per_seed,
            grid,
        } => probe(common, *winners_per_seed, *grid),
        Command::AuditIr(c) => audit(c),
        Command::Identify(c) => identify(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
