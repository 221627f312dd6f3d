use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tafi_core::bench::{
    clip_means, emit_report, read_flat_scores, render_stats, run_benchmark, statistical_tests,
    synth_split, tune_profiles, write_corpus, BenchError, Config, Manifest, Version,
};
use tafi_core::interp::{estimate_motion, interpolate, InterpParams, Mode};
use tafi_core::media::{load_y4m, save_y4m, Clip};
use tafi_core::tafi::{ProfileKey, TunedProfileSet};
use tafi_core::texclass::{classify, extract_features};
use tafi_core::TextureClass;

mod error;

use error::CliError;

#[derive(Parser)]
#[command(
    name = "tafi",
    version,
    about = "Texture-aware frame interpolation benchmark"
)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<Config, CliError> {
        Ok(match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate disjoint synthetic training and test corpora with manifests.
    Synth {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory; receives train/, test/, train.toml and test.toml.
        #[arg(short, long)]
        out: PathBuf,
        /// Overrides the corpus seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify the clips of a manifest.
    Classify {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long)]
        manifest: PathBuf,
        /// Write a copy of the manifest labelled with the predictions.
        #[arg(long)]
        write_manifest: Option<PathBuf>,
    },
    /// Tune interpolation profiles on the labelled clips of a manifest.
    Tune {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long)]
        manifest: PathBuf,
        /// Profile file; existing entries not being tuned are kept.
        #[arg(short, long)]
        out: PathBuf,
        /// Class profile to tune; repeatable.
        #[arg(long = "class")]
        classes: Vec<TextureClass>,
        /// Tune the mixed profile on all classes.
        #[arg(long)]
        mixed: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Interpolate a single triplet or the odd frames of a clip.
    Interpolate(InterpolateArgs),
    /// Run the benchmark and write report files.
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long)]
        manifest: PathBuf,
        #[arg(short, long)]
        profiles: PathBuf,
        /// Report directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Versions to evaluate; defaults to every version the profiles support.
        #[arg(long = "version-set", value_delimiter = ',')]
        versions: Vec<Version>,
        /// Also route by classifier output.
        #[arg(long)]
        classifier_routing: bool,
        /// Accept test clips that were used for tuning.
        #[arg(long)]
        allow_overlap: bool,
    },
    /// Run significance tests on a flat scores table.
    Stats {
        #[arg(short, long)]
        scores: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

#[derive(Args)]
struct InterpolateArgs {
    /// Previous frame (first frame of a Y4M file).
    #[arg(long, requires = "next", conflicts_with = "clip")]
    prev: Option<PathBuf>,
    /// Next frame (first frame of a Y4M file).
    #[arg(long, requires = "prev")]
    next: Option<PathBuf>,
    /// Clip whose odd frames are replaced by interpolations.
    #[arg(long, required_unless_present = "prev")]
    clip: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    /// Profile file to take parameters from; defaults to the baseline parameters.
    #[arg(short, long)]
    profiles: Option<PathBuf>,
    #[arg(long, default_value = "baseline")]
    profile: ProfileKey,
    /// Triplet mode only: write the forward motion field as text.
    #[arg(long)]
    dump_motion: Option<PathBuf>,
}

fn load_profiles(path: &Path) -> Result<TunedProfileSet, CliError> {
    if !path.is_file() {
        return Err(CliError::Input(format!(
            "missing profile file {}",
            path.display()
        )));
    }
    Ok(TunedProfileSet::load(path)?)
}

fn synth(config: Config, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut config = config;
    if let Some(seed) = seed {
        config.synth.seed = seed;
    }
    let (train, test) = synth_split(&config.synth)?;
    write_corpus(&train, &out.join("train"), &out.join("train.toml"))?;
    write_corpus(&test, &out.join("test"), &out.join("test.toml"))?;
    println!(
        "wrote {} training and {} test clips to {}",
        train.len(),
        test.len(),
        out.display()
    );
    Ok(())
}

fn classify_manifest(
    config: Config,
    manifest: &Path,
    write: Option<&Path>,
) -> Result<(), CliError> {
    let mut manifest = Manifest::load(manifest)?;
    let clips = manifest.load_clips()?;
    let mut correct = 0;
    let mut labelled = 0;
    println!("clip_id,label,predicted,gmc_residual,flow_incoherence,mean_motion,spatial_detail");
    for (entry, clip) in manifest.entries.iter_mut().zip(&clips) {
        let f = extract_features(clip, &InterpParams::default())?;
        let predicted = classify(&f, &config.classifier);
        println!(
            "{},{},{predicted},{:.4},{:.4},{:.4},{:.4}",
            entry.clip_id,
            entry.label.map_or("", TextureClass::as_str),
            f.gmc_residual,
            f.flow_incoherence,
            f.mean_motion,
            f.spatial_detail
        );
        if let Some(label) = entry.label {
            labelled += 1;
            correct += usize::from(label == predicted);
        }
        entry.label = Some(predicted);
    }
    if labelled > 0 {
        eprintln!("agreement with labels: {correct}/{labelled}");
    }
    if let Some(path) = write {
        manifest.save(path)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn tune(
    config: Config,
    manifest: &Path,
    out: &Path,
    classes: &[TextureClass],
    mixed: bool,
    seed: Option<u64>,
    rounds: Option<usize>,
) -> Result<(), CliError> {
    let mut config = config;
    if let Some(seed) = seed {
        config.tuning.seed = seed;
    }
    if let Some(rounds) = rounds {
        config.tuning.rounds = rounds;
    }
    config.validate()?;

    let mut keys: Vec<ProfileKey> = classes.iter().map(|&c| c.into()).collect();
    if mixed {
        keys.push(ProfileKey::Mixed);
    }
    if keys.is_empty() {
        keys = vec![
            ProfileKey::Static,
            ProfileKey::Dyndis,
            ProfileKey::Dyncon,
            ProfileKey::Mixed,
        ];
    }
    keys.dedup();

    let clips = Manifest::load(manifest)?.load_clips()?;
    let tuned = tune_profiles(&clips, &config, &keys)?;
    let mut set = if out.is_file() {
        TunedProfileSet::load(out)?
    } else {
        TunedProfileSet::new()
    };
    for key in tuned.keys().filter(|&k| k != ProfileKey::Baseline) {
        let entry = tuned.get(key).expect("tuned entry").clone();
        println!("{key}: {}", entry.params.summary());
        set.insert(key, entry)?;
    }
    set.save(out)?;
    Ok(())
}

fn profile_params(args: &InterpolateArgs) -> Result<InterpParams, CliError> {
    match &args.profiles {
        None if args.profile == ProfileKey::Baseline => Ok(InterpParams::default()),
        None => Err(CliError::Input(format!(
            "--profile {} needs --profiles",
            args.profile
        ))),
        Some(path) => load_profiles(path)?
            .params(args.profile)
            .cloned()
            .ok_or_else(|| {
                CliError::Input(format!("profile file has no `{}` entry", args.profile))
            }),
    }
}

fn run_interpolate(args: &InterpolateArgs) -> Result<(), CliError> {
    let params = profile_params(args)?;
    let result = match (&args.prev, &args.next, &args.clip) {
        (Some(prev), Some(next), _) => {
            let prev = load_y4m(prev)?;
            let next = load_y4m(next)?;
            let (a, b) = (prev.frame(0), next.frame(0));
            let mid = interpolate(a, b, &params)?;
            if let Some(path) = &args.dump_motion {
                if params.mode != Mode::Mci {
                    return Err(CliError::Input("--dump-motion needs an mci profile".into()));
                }
                let field = estimate_motion(a, b, &params)?;
                let file = std::fs::File::create(path)?;
                field.write_sidecar(std::io::BufWriter::new(file))?;
            }
            Clip::new("interpolated", vec![mid], prev.fps())?
        }
        (_, _, Some(clip)) => {
            if args.dump_motion.is_some() {
                return Err(CliError::Input(
                    "--dump-motion applies to triplet mode only".into(),
                ));
            }
            tafi_core::bench::interpolated_clip(&load_y4m(clip)?, &params)?
        }
        _ => return Err(CliError::Input("give --prev and --next, or --clip".into())),
    };
    save_y4m(&result, &args.out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    config: Config,
    manifest: &Path,
    profiles: &Path,
    out: &Path,
    versions: Vec<Version>,
    classifier_routing: bool,
    allow_overlap: bool,
) -> Result<(), CliError> {
    let mut config = config;
    if !versions.is_empty() {
        config.benchmark.versions = Some(versions);
    }
    config.benchmark.classifier_version |= classifier_routing;
    config.benchmark.allow_train_overlap |= allow_overlap;
    let manifest = Manifest::load(manifest)?;
    let profiles = load_profiles(profiles)?;
    let report = run_benchmark(&manifest, &profiles, &config)?;
    let files = emit_report(&report, out)?;
    for path in [
        &files.scores,
        &files.table,
        &files.distribution,
        &files.json,
    ] {
        println!("{}", path.display());
    }
    Ok(())
}

fn stats(scores: &Path, alpha: f64) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    let file = std::fs::File::open(scores).map_err(|_| BenchError::MissingFile(scores.into()))?;
    let rows = read_flat_scores(std::io::BufReader::new(file))?;
    let tests = statistical_tests(&clip_means(&rows), alpha);
    print!("{}", render_stats(&tests, alpha));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { config, out, seed } => synth(config.load()?, &out, seed),
        Command::Classify {
            config,
            manifest,
            write_manifest,
        } => classify_manifest(config.load()?, &manifest, write_manifest.as_deref()),
        Command::Tune {
            config,
            manifest,
            out,
            classes,
            mixed,
            seed,
            rounds,
        } => tune(
            config.load()?,
            &manifest,
            &out,
            &classes,
            mixed,
            seed,
            rounds,
        ),
        Command::Interpolate(args) => run_interpolate(&args),
        Command::Evaluate {
            config,
            manifest,
            profiles,
            out,
            versions,
            classifier_routing,
            allow_overlap,
        } => evaluate(
            config.load()?,
            &manifest,
            &profiles,
            &out,
            versions,
            classifier_routing,
            allow_overlap,
        ),
        Command::Stats { scores, alpha } => stats(&scores, alpha),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
