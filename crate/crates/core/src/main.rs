use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ising_neigh::harness::{presets, run_experiment, ExperimentConfig, OutputFormat, Scenario};
use ising_neigh::model::{load_model, ModelFile};
use ising_neigh::neighborhood::{
    cut, efficient_select, eta_ms, reduce_sites, ConstantChoice, CutSpec, EtaParams, ReductionResult,
};
use ising_neigh::sampler::{sample_with, preferred_sampler, ScanOrder};
use ising_neigh::selection::{
    select_model, slope_select, write_ledger, CandidateCollection, ComplexityMeasure, ConstantGrid, PenaltyForm,
};
use ising_neigh::{Error, IsingModel, Result, SampleSet, SamplerConfig, SamplerKind, Site, SiteSet};

const THREADS_VAR: &str = "ISING_NEIGH_THREADS";

#[derive(Parser)]
#[command(name = "ising-neigh", version, about = "Interaction neighborhood estimation for Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a model.
    Simulate(SimulateArgs),
    /// Penalized selection over all candidate sets up to a cardinality bound.
    Select(SelectArgs),
    /// Cut step on a given candidate set.
    Cut(CutArgs),
    /// Correlation screening of the candidate sites.
    Reduce(ReduceArgs),
    /// Full neighborhood estimate: selection then cut, optionally after screening.
    Estimate(EstimateArgs),
    /// Run a simulation scenario and write its result table.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (TOML).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Built-in model: `figure1` (3×3 lattice) or `sparse200`.
    #[arg(long, conflicts_with = "model")]
    preset: Option<String>,
}

impl ModelArgs {
    fn load(&self) -> Result<Option<(IsingModel, Site)>> {
        match (&self.model, self.preset.as_deref()) {
            (Some(path), _) => Ok(Some((load_model(path)?, Site(0)))),
            (None, Some("figure1")) => Ok(Some((presets::figure1_model()?, presets::lattice_center()))),
            (None, Some("sparse200")) => {
                let s = presets::sparse_200()?;
                Ok(Some((s.model, s.target)))
            }
            (None, Some(other)) => Err(Error::input(format!("unknown preset `{other}`"))),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// exact, tree or gibbs; picked automatically when omitted.
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 100)]
    thinning: usize,
    /// random or systematic Gibbs scan.
    #[arg(long, default_value = "random")]
    scan: String,
    /// Write the packed binary format instead of text.
    #[arg(long)]
    binary: bool,
    /// Also write the model as TOML to this path.
    #[arg(long)]
    write_model: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectionArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    site: u32,
    #[arg(long, default_value_t = 10.0)]
    delta: f64,
    /// Fixed penalty constant; the slope heuristic is used when omitted.
    #[arg(long)]
    c: Option<f64>,
    /// Constant grid, `lo:hi:points` or a comma separated list.
    #[arg(long, default_value = "0.01:10:50")]
    c_grid: String,
    #[arg(long, default_value = "variance")]
    measure: String,
}

impl SelectionArgs {
    fn grid(&self) -> Result<ConstantGrid> {
        ConstantGrid::parse(&self.c_grid)
    }

    fn measure(&self) -> Result<ComplexityMeasure> {
        self.measure.parse()
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    sel: SelectionArgs,
    /// Cardinality bound of the candidate collection.
    #[arg(long, default_value_t = 8)]
    max_card: usize,
    /// Penalty numerator: `collection` (ln δnN) or `gamma` (Γ_M(δ)).
    #[arg(long, default_value = "collection")]
    penalty: String,
    /// Write the per-candidate ledger CSV here.
    #[arg(long)]
    ledger: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CutArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    site: u32,
    /// Candidate set, comma separated site ids.
    #[arg(long)]
    set: String,
    #[arg(long, default_value = "inverse:0.3")]
    cut: String,
    #[arg(long, default_value_t = 10.0)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    site: u32,
    /// Fixed threshold; the data-driven threshold is used when omitted.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10)]
    max_kept: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    sel: SelectionArgs,
    #[arg(long, default_value = "inverse:0.3")]
    cut: String,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10)]
    max_kept: usize,
    /// Select over every set up to this size instead of screening first.
    #[arg(long)]
    max_card: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    scenario: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Target site; defaults to the preset's target.
    #[arg(long)]
    site: Option<u32>,
    /// Sample sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    c_grid: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    cut: Option<String>,
    #[arg(long)]
    max_card: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

/// Long-format `field,site,value` output.
struct LongCsv(String);

impl LongCsv {
    fn new() -> Self {
        LongCsv("field,site,value\n".to_string())
    }

    fn scalar(&mut self, field: &str, value: f64) {
        self.0.push_str(&format!("{field},,{value}\n"));
    }

    fn sites(&mut self, field: &str, set: &SiteSet) {
        for s in set.iter() {
            self.0.push_str(&format!("{field},{s},1\n"));
        }
    }

    fn reduction(&mut self, r: &ReductionResult) {
        self.scalar("eta", r.eta);
        if let Some(v) = r.eta_ms {
            self.scalar("eta_ms", v);
        }
        if let Some(v) = r.floor {
            self.scalar("floor", v);
        }
        for (j, c) in &r.correlations {
            self.0.push_str(&format!("correlation,{j},{c}\n"));
        }
        self.sites("kept", &r.kept);
    }

    fn write(&self, out: Option<&Path>) -> Result<()> {
        match out {
            Some(path) => std::fs::write(path, &self.0).map_err(|e| Error::io(path, e)),
            None => std::io::stdout()
                .write_all(self.0.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (model, _) = args
        .model
        .load()?
        .ok_or_else(|| Error::input("simulate needs --model or --preset"))?;
    let config = SamplerConfig {
        seed: args.seed,
        burn_in: args.burn_in,
        thinning: args.thinning,
        scan: args.scan.parse::<ScanOrder>()?,
        ..SamplerConfig::default()
    };
    let kind = match &args.sampler {
        Some(s) => s.parse::<SamplerKind>()?,
        None => preferred_sampler(&model, &config)?,
    };
    let samples = sample_with(kind, &model, args.n, &config)?;
    samples.save(&args.out, args.binary)?;
    if let Some(path) = &args.write_model {
        std::fs::write(path, ModelFile::from_model(&model)?.to_toml()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn select(args: &SelectArgs) -> Result<()> {
    let samples = SampleSet::load(&args.sel.samples)?;
    let i = Site(args.sel.site);
    samples.column_index(i)?;
    let collection = CandidateCollection::for_target(&samples, i, args.max_card);
    let form = match args.penalty.as_str() {
        "collection" => PenaltyForm::CollectionSize {
            n_bound: collection.len() as f64,
        },
        "gamma" => PenaltyForm::Gamma {
            observed_sites: samples.m(),
        },
        other => return Err(Error::input(format!("unknown penalty form `{other}`"))),
    };
    let want_ledger = args.ledger.is_some();
    let delta = args.sel.delta;
    let (result, constant) = match args.sel.c {
        Some(c) => (select_model(&samples, i, &collection, c, delta, form, want_ledger)?, c),
        None => {
            let s = slope_select(&samples, i, &collection, &args.sel.grid()?, args.sel.measure()?, delta, form, want_ledger)?;
            let c = s.calibration.final_constant();
            (s.result, c)
        }
    };
    if let (Some(path), Some(ledger)) = (&args.ledger, &result.ledger) {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_ledger(ledger, file)?;
    }
    let mut out = LongCsv::new();
    out.scalar("constant", constant);
    out.scalar("score", result.score);
    out.sites("selected", &result.chosen);
    out.write(args.out.as_deref())
}

fn cut_cmd(args: &CutArgs) -> Result<()> {
    let samples = SampleSet::load(&args.samples)?;
    let spec = CutSpec::parse(&args.cut, args.delta)?;
    let set = SiteSet::parse_list(&args.set)?;
    let kept = cut(&samples, Site(args.site), &set, &spec)?;
    let mut out = LongCsv::new();
    out.sites("estimate", &kept);
    out.write(args.out.as_deref())
}

fn reduce(args: &ReduceArgs) -> Result<()> {
    let samples = SampleSet::load(&args.samples)?;
    let i = Site(args.site);
    let universe: SiteSet = samples.site_labels().iter().copied().filter(|&s| s != i).collect();
    let r = match args.eta {
        Some(eta) => reduce_sites(&samples, i, &universe, eta)?,
        None => eta_ms(
            &samples,
            i,
            &universe,
            &EtaParams {
                delta: args.delta,
                kappa: args.kappa,
                max_kept: args.max_kept,
            },
        )?,
    };
    let mut out = LongCsv::new();
    out.reduction(&r);
    out.write(args.out.as_deref())
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let samples = SampleSet::load(&args.sel.samples)?;
    let i = Site(args.sel.site);
    samples.column_index(i)?;
    let delta = args.sel.delta;
    let spec = CutSpec::parse(&args.cut, delta)?;
    let mut out = LongCsv::new();
    let (selected, constant) = match args.max_card {
        Some(m) => {
            let collection = CandidateCollection::for_target(&samples, i, m);
            let form = PenaltyForm::CollectionSize {
                n_bound: collection.len() as f64,
            };
            match args.sel.c {
                Some(c) => (select_model(&samples, i, &collection, c, delta, form, false)?.chosen, c),
                None => {
                    let s = slope_select(&samples, i, &collection, &args.sel.grid()?, args.sel.measure()?, delta, form, false)?;
                    let c = s.calibration.final_constant();
                    (s.result.chosen, c)
                }
            }
        }
        None => {
            let universe: SiteSet = samples.site_labels().iter().copied().filter(|&s| s != i).collect();
            let params = EtaParams {
                delta,
                kappa: args.kappa,
                max_kept: args.max_kept,
            };
            let choice = match args.sel.c {
                Some(c) => ConstantChoice::Fixed(c),
                None => ConstantChoice::Slope {
                    grid: args.sel.grid()?,
                    measure: args.sel.measure()?,
                },
            };
            let e = efficient_select(&samples, i, &universe, &params, &choice)?;
            out.reduction(&e.reduction);
            let c = e.calibration.map_or(e.result.constant, |cal| cal.final_constant());
            (e.result.chosen, c)
        }
    };
    let estimate = cut(&samples, i, &selected, &spec)?;
    out.scalar("constant", constant);
    out.sites("selected", &selected);
    out.sites("estimate", &estimate);
    out.write(args.out.as_deref())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let scenario: Scenario = args.scenario.parse()?;
    let format: OutputFormat = args.format.parse()?;
    let mut config = ExperimentConfig::for_scenario(scenario)?;
    if let Some((model, target)) = args.model.load()? {
        config.model = model;
        config.target = target;
    }
    if let Some(s) = args.site {
        config.target = Site(s);
    }
    if let Some(list) = &args.n {
        config.sample_sizes = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::input(format!("bad sample size `{t}`"))))
            .collect::<Result<_>>()?;
    }
    if let Some(r) = args.replicas {
        config.replicas = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(d) = args.delta {
        config.delta = d;
    }
    if let Some(k) = args.kappa {
        config.kappa = k;
    }
    if let Some(g) = &args.c_grid {
        config.grid = ConstantGrid::parse(g)?;
    }
    if let Some(m) = &args.measure {
        config.measure = m.parse()?;
    }
    if let Some(c) = &args.cut {
        config.cut = CutSpec::parse(c, config.delta)?;
    }
    if let Some(m) = args.max_card {
        config.max_card = m;
    }
    let table = run_experiment(&config)?;
    table.emit(format, &args.out)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::input(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Select(a) => select(a),
        Command::Cut(a) => cut_cmd(a),
        Command::Reduce(a) => reduce(a),
        Command::Estimate(a) => estimate(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
