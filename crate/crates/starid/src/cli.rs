//! Command line front end.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data and build
//! errors. A `--config` file of `key=value` lines pre-seeds any flag of the
//! chosen subcommand; flags given on the command line win.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use starid_core::catalog::CatalogParams;
use starid_core::identify::{identify, Method, Outcome};
use starid_core::synth::sample_image;
use starid_core::{NoiseSpec, StarLabel};

use crate::bench::{self, BenchConfig, Overrides, Variant};
use crate::build::{build_store, count_tables, with_jobs};
use crate::config::{config_args, read_config, CATALOG_ENV};
use crate::image_io::{read_image, write_image};
use crate::records::write_records;
use crate::report::{self, GAUSS_CSV, PIVOT_CSV, QUERY_CSV, SPIKE_CSV, TUNE_CSV, VERIFY_CSV};
use crate::source::{format_for, load_source};
use crate::store_io::{load_store, save_store};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "starid", version, about = "Lost-in-space star identification toolkit")]
pub struct Cli {
    /// key=value file pre-seeding flags of the subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log progress to standard error
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the star, pair and trio catalogs from a star table
    BuildCatalog(BuildArgs),
    /// Write synthetic images with truth labels
    GenImages(GenArgs),
    /// Identify the stars of one image
    Identify(IdentifyArgs),
    /// Grid search of the query deviations
    TuneSigma(TuneArgs),
    /// Run a benchmark experiment
    Bench(BenchArgs),
    /// Summarize benchmark CSV files
    Report(ReportArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BuildArgs {
    /// Star table (.csv with HIP,RArad,DErad,Hpmag columns, or the raw .dat)
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long, default_value_t = starid_core::DEFAULT_MAGNITUDE_CUTOFF)]
    pub mag_cutoff: f64,
    /// Field of view in degrees; pairs and trios span at most this angle
    #[arg(long, default_value_t = starid_core::DEFAULT_PSI_MAX)]
    pub fov: f64,
    #[arg(long, default_value_t = starid_core::features::DEFAULT_MOMENT_DEPTH)]
    pub moment_depth: u32,
    #[arg(long, required_unless_present = "count_only")]
    pub out: Option<PathBuf>,
    /// Only report the table sizes
    #[arg(long)]
    pub count_only: bool,
    /// Worker threads (0 = one per core)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args, Clone)]
pub struct CatalogArg {
    /// Catalog directory written by build-catalog
    #[arg(long, env = CATALOG_ENV)]
    pub catalog: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct GenArgs {
    #[command(flatten)]
    pub catalog: CatalogArg,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = starid_core::DEFAULT_PSI_MAX)]
    pub fov: f64,
    /// Positional noise deviation, degrees
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub spikes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub min_stars: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SigmaArgs {
    #[arg(long)]
    pub sigma_theta: Option<f64>,
    #[arg(long)]
    pub sigma_phi: Option<f64>,
    #[arg(long)]
    pub sigma_a: Option<f64>,
    #[arg(long)]
    pub sigma_tau: Option<f64>,
    /// Overlay tolerance of the direct match test, degrees
    #[arg(long)]
    pub sigma_o: Option<f64>,
    #[arg(long)]
    pub access_limit: Option<u32>,
}

impl SigmaArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            sigma_theta: self.sigma_theta,
            sigma_phi: self.sigma_phi,
            sigma_a: self.sigma_a,
            sigma_tau: self.sigma_tau,
            sigma_o: self.sigma_o,
            access_limit: self.access_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Ang,
    Int,
    Sph,
    Pln,
    Pyr,
    Com,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Ang => Method::Angle,
            MethodArg::Int => Method::InteriorAngle,
            MethodArg::Sph => Method::SphericalTriangle,
            MethodArg::Pln => Method::PlanarTriangle,
            MethodArg::Pyr => Method::Pyramid,
            MethodArg::Com => Method::CompositePyramid,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct IdentifyArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub catalog: CatalogArg,
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub sigmas: SigmaArgs,
    /// Skip the verification stage of PYR and COM
    #[arg(long)]
    pub no_verification: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TuneArgs {
    #[command(flatten)]
    pub catalog: CatalogArg,
    /// Comma separated method tags
    #[arg(long, default_value = "ANG,INT,SPH,PLN,PYR,COM")]
    pub methods: String,
    #[arg(long, default_value_t = bench::TUNE_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = starid_core::DEFAULT_PSI_MAX)]
    pub fov: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Query,
    Pivot,
    Verify,
    E2eGauss,
    E2eSpike,
    Tune,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub catalog: CatalogArg,
    /// Comma separated method tags (`PYR-N` disables verification); each
    /// experiment has its own default set
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma separated noise deviations, degrees
    #[arg(long)]
    pub rho: Option<String>,
    /// Comma separated spike counts
    #[arg(long)]
    pub spikes: Option<String>,
    #[arg(long, default_value_t = starid_core::DEFAULT_PSI_MAX)]
    pub fov: f64,
    #[arg(long, default_value_t = 4)]
    pub min_stars: usize,
    #[command(flatten)]
    pub sigmas: SigmaArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ReportArgs {
    /// Directory holding the experiment CSV files
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write SVG charts
    #[arg(long)]
    pub plots: bool,
}

/// Inserts config file flags right after the subcommand name so that any
/// later command line flag overrides them.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Error> {
    let mut config: Option<PathBuf> = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        }
    }
    let Some(config) = config else { return Ok(args) };
    let entries = read_config(&config)?;
    let cmd = Cli::command();
    let Some((pos, sub)) = args.iter().enumerate().skip(1).find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s))) else {
        return Ok(args);
    };
    let flags: BTreeMap<String, bool> = sub
        .get_arguments()
        .filter_map(|a| Some((a.get_long()?.to_string(), a.get_action().takes_values())))
        .filter(|(name, _)| name != "config" && name != "help")
        .collect();
    let (extra, unknown) = config_args(&entries, &flags);
    for k in unknown {
        log::warn!("{}: `{k}` is not a flag of {}", config.display(), sub.get_name());
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run(args: Vec<String>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::BuildCatalog(a) => build_catalog(a),
        Command::GenImages(a) => gen_images(a),
        Command::Identify(a) => identify_image(a),
        Command::TuneSigma(a) => tune(a),
        Command::Bench(a) => run_bench(a),
        Command::Report(a) => {
            let text = report::report(&a.input, a.plots)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn build_catalog(a: BuildArgs) -> Result<(), Error> {
    if !(a.fov > 0.0 && a.fov <= 180.0) {
        return Err(Error::Usage("--fov must be in (0, 180]".into()));
    }
    let loaded = load_source(&a.source, &format_for(&a.source), a.mag_cutoff)?;
    let stars = loaded.parsed.stars;
    let params = CatalogParams { psi_max: a.fov, magnitude_cutoff: a.mag_cutoff, moment_depth: a.moment_depth };
    if a.count_only {
        let c = with_jobs(a.jobs, || count_tables(&stars, a.fov));
        println!("stars={}\npairs={}\ntrios={}\npermutations={}", c.stars, c.pairs, c.trios, c.permutations);
        return Ok(());
    }
    let out = a.out.expect("required unless count_only");
    let start = Instant::now();
    let store = with_jobs(a.jobs, || build_store(stars, params));
    save_store(&store, &out, &loaded.sha256)?;
    println!(
        "stars={}\npairs={}\ntrios={}\npermutations={}\nelapsed_s={:.1}",
        store.stars().len(),
        store.pairs.len(),
        store.trios_spherical.len(),
        store.permutations.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn gen_images(a: GenArgs) -> Result<(), Error> {
    let store = load_store(&a.catalog.catalog)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let noise = NoiseSpec { rho: a.rho, omega: a.spikes };
    for t in 0..a.count {
        let img = sample_image(&store, a.fov, noise, a.min_stars, a.seed.wrapping_add(t as u64))?;
        write_image(&a.out.join(format!("image_{t:05}.txt")), &img)?;
    }
    println!("wrote {} images to {}", a.count, a.out.display());
    Ok(())
}

fn identify_image(a: IdentifyArgs) -> Result<(), Error> {
    let store = load_store(&a.catalog.catalog)?;
    let img = read_image(&a.image)?;
    let method: Method = a.method.into();
    let variant = Variant { method, verification: !a.no_verification };
    let cfg = a.sigmas.overrides().config(variant, img.psi);
    cfg.validate()?;
    let start = Instant::now();
    let res = identify(method, &img.stars, &store, &cfg);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    println!("method={variant}");
    println!("outcome={}", res.outcome.tag());
    println!("accesses_query={}", res.accesses_query);
    println!("accesses_total={}", res.accesses_total);
    println!("elapsed_ms={ms:.3}");
    for (i, id) in &res.h.pairs {
        println!("map {i} {id}");
    }
    if res.outcome == Outcome::Identified && img.labels.iter().all(Option::is_some) {
        let ok = res.h.pairs.iter().all(|(i, id)| img.labels[*i] == Some(StarLabel::Catalog(*id)));
        println!("correct={ok}");
    }
    Ok(())
}

fn parse_variants(s: &str) -> Result<Vec<Variant>, Error> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Usage(format!("invalid {what} `{t}`"))))
        .collect()
}

fn tune(a: TuneArgs) -> Result<(), Error> {
    let store = load_store(&a.catalog.catalog)?;
    let variants = parse_variants(&a.methods)?;
    let cfg = BenchConfig { seed: a.seed, psi: a.fov, ..BenchConfig::default() };
    let mut all = Vec::new();
    for v in variants {
        let recs = with_jobs(a.jobs, || bench::tune_sigma(&store, v.method, &bench::sigma_grid(), a.steps, &cfg))?;
        if let Some(best) = bench::best_sigma(&recs) {
            let names = bench::tuned_parameters(v.method);
            match best.sigma2 {
                Some(s2) => println!("{v}: {}={} {}={s2} unique={}/{}", names[0], best.sigma1, names[1], best.unique, a.steps),
                None => println!("{v}: {}={} unique={}/{}", names[0], best.sigma1, best.unique, a.steps),
            }
        }
        all.extend(recs);
    }
    if let Some(out) = a.out {
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        write_records(&out.join(TUNE_CSV), &all)?;
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<(), Error> {
    let store = load_store(&a.catalog.catalog)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let cfg = BenchConfig {
        trials: a.trials,
        seed: a.seed,
        psi: a.fov,
        min_stars: a.min_stars,
        overrides: a.sigmas.overrides(),
    };
    let all_methods = || Method::ALL.iter().map(|m| Variant::new(*m)).collect::<Vec<_>>();
    let variants = match &a.methods {
        Some(s) => parse_variants(s)?,
        None => match a.experiment {
            Experiment::Pivot => bench::pivot_methods().into_iter().map(Variant::new).collect(),
            Experiment::Verify => bench::verification_variants(),
            _ => all_methods(),
        },
    };
    let methods: Vec<Method> = variants.iter().map(|v| v.method).collect();
    let rhos = a.rho.as_deref().map(|s| parse_list::<f64>(s, "rho")).transpose()?;
    let spikes = a.spikes.as_deref().map(|s| parse_list::<usize>(s, "spike count")).transpose()?;
    let grid = |default: Vec<NoiseSpec>| -> Vec<NoiseSpec> {
        match (&rhos, &spikes) {
            (None, None) => default,
            (r, w) => {
                let r = r.clone().unwrap_or_else(|| vec![0.0]);
                let w = w.clone().unwrap_or_else(|| vec![0]);
                r.iter().flat_map(|rho| w.iter().map(move |omega| NoiseSpec { rho: *rho, omega: *omega })).collect()
            }
        }
    };
    let out = |name: &str| a.out.join(name);
    let start = Instant::now();
    let written = with_jobs(a.jobs, || -> Result<PathBuf, Error> {
        Ok(match a.experiment {
            Experiment::Query => {
                let recs = bench::run_query_experiment(&store, &methods, &cfg)?;
                write_records(&out(QUERY_CSV), &recs)?;
                out(QUERY_CSV)
            }
            Experiment::Pivot => {
                let rho = rhos.as_ref().and_then(|r| r.first().copied()).unwrap_or(bench::PIVOT_RHO);
                let recs = bench::run_pivot_experiment(&store, &methods, rho, &cfg)?;
                write_records(&out(PIVOT_CSV), &recs)?;
                out(PIVOT_CSV)
            }
            Experiment::Verify => {
                let recs = bench::run_end_to_end(&store, &variants, &grid(bench::verification_grid()), &cfg)?;
                write_records(&out(VERIFY_CSV), &recs)?;
                out(VERIFY_CSV)
            }
            Experiment::E2eGauss => {
                let recs = bench::run_end_to_end(&store, &variants, &grid(bench::gaussian_grid()), &cfg)?;
                write_records(&out(GAUSS_CSV), &recs)?;
                out(GAUSS_CSV)
            }
            Experiment::E2eSpike => {
                let recs = bench::run_end_to_end(&store, &variants, &grid(bench::spike_grid()), &cfg)?;
                write_records(&out(SPIKE_CSV), &recs)?;
                out(SPIKE_CSV)
            }
            Experiment::Tune => {
                let mut all = Vec::new();
                for m in &methods {
                    all.extend(bench::tune_sigma(&store, *m, &bench::sigma_grid(), bench::TUNE_STEPS, &cfg)?);
                }
                write_records(&out(TUNE_CSV), &all)?;
                out(TUNE_CSV)
            }
        })
    })?;
    println!("wrote {} in {:.1}s", written.display(), start.elapsed().as_secs_f64());
    let name = written.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
    print!("{}", report::summarize(&a.out, false, Some(&name))?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(argv("starid frobnicate")), 1);
        assert_eq!(run(argv("starid identify --method xyz --catalog a --image b")), 1);
        assert_eq!(run(argv("starid report --in x --bogus")), 1);
        assert_eq!(run(argv("starid --help")), 0);
    }

    #[test]
    fn data_errors_exit_two() {
        assert_eq!(run(argv("starid bench --experiment query --catalog /nonexistent/cat --out /tmp/x")), 2);
    }

    #[test]
    fn config_file_seeds_flags_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "trials=7\nseed=3\nplots=true\nout=/tmp/a\n").unwrap();
        let args = expand_config(argv(&format!("starid bench --config {} --experiment query --catalog c --seed 9", cfg.display())))
            .unwrap();
        let cli = Cli::try_parse_from(args).unwrap();
        let Command::Bench(b) = cli.command else { panic!() };
        assert_eq!(b.trials, 7);
        assert_eq!(b.seed, 9);
        assert_eq!(b.out, PathBuf::from("/tmp/a"));
    }
}
