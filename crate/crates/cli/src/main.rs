use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spectracc::cbc::{build_model, read_model, write_model, ModelOptions, DEFAULT_SMOOTHING};
use spectracc::dataset::{DatasetManifest, Split};
use spectracc::evaluation::{angular_error, run_grid, run_noise, FitContext, GridConfig, GridData, IllPcaSource, Variant};
use spectracc::illuminant::{
    load_illuminants, read_name_list, select_projection_set, write_name_list, IlluminantSet, SetRole,
};
use spectracc::projection::{illuminant_pca_coordinates, read_projection, write_projection, NnmfOptions};
use spectracc::spectral::io::{read_scube, read_sensitivities_csv};
use spectracc::spectral::{downsample, relight};
use spectracc::synth::{recipes, synth_dataset, BUNDLED_SCENES, BUNDLED_SEED, BUNDLED_SIZE};
use spectracc::{ProjectionKind, ScoringMode, SpectralAxis};

#[derive(Parser)]
#[command(name = "spectracc", version, about = "Hyperspectral illuminant estimation with Color-by-Correlation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic reflectance dataset (.scube files + manifest.txt)
    Synth(SynthArgs),
    /// Pick k representative illuminants by k-means on their chromaticities
    SelectProjectionSet(SelectArgs),
    /// Fit a projection and write it as .proj
    Fit(FitArgs),
    /// Build a correlation model (.cbcm) for a projection
    BuildModel(BuildArgs),
    /// Estimate the illuminant of one image
    Classify(ClassifyArgs),
    /// Run the experimental grid described by a TOML config
    Grid(RunArgs),
    /// Run the noise protocol described by the [noise] section of a config
    Noise(RunArgs),
    /// Write illuminant coordinates on the leading Ill-PCA components as CSV
    ExportPcaCoords(ExportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = BUNDLED_SCENES)]
    scenes: usize,
    /// Width and height in pixels
    #[arg(long, default_value_t = BUNDLED_SIZE)]
    size: usize,
    /// Seed of the first scene; scene i uses seed + i
    #[arg(long, default_value_t = BUNDLED_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    mask_fraction: f64,
}

#[derive(Args)]
struct IlluminantArgs {
    /// Illuminant manifest (`<csv path> <name>` per line)
    #[arg(long, default_value = "data/cie/manifest.txt")]
    illuminants: PathBuf,
}

#[derive(Args)]
struct ProjectionSetArgs {
    /// Name list of the projection set; selected by k-means when absent
    #[arg(long)]
    projection_set: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    projection_seed: u64,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    illuminants: IlluminantArgs,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output name list; printed to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IllPcaArg {
    Projection,
    Full,
}

#[derive(Args)]
struct FitArgs {
    /// rgb, rand, pca, ill-pca, nnmf or lda
    #[arg(long)]
    method: String,
    #[arg(long)]
    dprime: usize,
    /// Seed for RAND and the NNMF initialization
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Spatial downsample factor of the training scenes (default 8, LDA 16)
    #[arg(long)]
    downsample: Option<usize>,
    /// Dataset manifest; its train scenes are used for PCA, NNMF and LDA
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Sensitivity CSV (RGB only)
    #[arg(long)]
    camera: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "projection")]
    ill_pca_source: IllPcaArg,
    #[arg(long, default_value_t = 500)]
    nnmf_max_iter: usize,
    #[command(flatten)]
    illuminants: IlluminantArgs,
    #[command(flatten)]
    projection_set: ProjectionSetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    projection: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    bins: usize,
    #[arg(long, default_value_t = 4)]
    downsample: usize,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    smoothing: f64,
    #[command(flatten)]
    illuminants: IlluminantArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoringArg {
    Log,
    Dot,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    projection: PathBuf,
    /// Radiance cube, or a reflectance cube when --relight is given
    #[arg(long)]
    image: PathBuf,
    /// Relight the image under this candidate first; it becomes the ground truth
    #[arg(long)]
    relight: Option<String>,
    /// Ground-truth illuminant name, for the angular error
    #[arg(long)]
    truth: Option<String>,
    #[arg(long, default_value_t = 4)]
    downsample: usize,
    #[arg(long, value_enum, default_value = "log")]
    scoring: ScoringArg,
    #[command(flatten)]
    illuminants: IlluminantArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir` in the config
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    illuminants: IlluminantArgs,
    #[command(flatten)]
    projection_set: ProjectionSetArgs,
    #[arg(long, default_value_t = 2)]
    components: usize,
    #[arg(long)]
    out: PathBuf,
}

fn projection_set(full: &IlluminantSet, args: &ProjectionSetArgs) -> Result<IlluminantSet> {
    Ok(match &args.projection_set {
        Some(p) => full.subset(&read_name_list(p)?, SetRole::Projection)?,
        None => select_projection_set(full, args.k, args.projection_seed)?,
    })
}

fn train_scenes(manifest: &Path) -> Result<Vec<spectracc::SpectralImage>> {
    let m = DatasetManifest::read(manifest)?;
    let scenes: Vec<_> = m.load(Split::Train)?.into_iter().map(|s| s.image).collect();
    if scenes.is_empty() {
        bail!("{} lists no train scenes", manifest.display());
    }
    Ok(scenes)
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut list = recipes(a.scenes, a.size, a.seed);
    list.iter_mut().for_each(|r| r.mask_fraction = a.mask_fraction);
    let manifest = synth_dataset(&list, SpectralAxis::default(), &a.out)?;
    println!("wrote {} scenes, manifest {}", list.len(), manifest.display());
    Ok(())
}

fn select(a: SelectArgs) -> Result<()> {
    let full = load_illuminants(&a.illuminants.illuminants)?;
    let set = select_projection_set(&full, a.k, a.seed)?;
    match a.out {
        Some(p) => {
            write_name_list(&p, &set.names())?;
            println!("wrote {} names to {}", set.len(), p.display());
        }
        None => set.names().iter().for_each(|n| println!("{n}")),
    }
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let kind: ProjectionKind = a.method.parse()?;
    if kind == ProjectionKind::Rgb && a.dprime != 3 {
        bail!("RGB is fixed to d′ = 3, got --dprime {}", a.dprime);
    }
    let full = load_illuminants(&a.illuminants.illuminants)?;
    let pset = projection_set(&full, &a.projection_set)?;
    let cameras = match (&a.camera, kind) {
        (Some(c), _) => vec![read_sensitivities_csv(c)?],
        (None, ProjectionKind::Rgb) => bail!("RGB needs --camera"),
        (None, _) => vec![],
    };
    let needs_scenes = matches!(kind, ProjectionKind::Pca | ProjectionKind::Nnmf | ProjectionKind::Lda);
    let train = match (&a.dataset, needs_scenes) {
        (Some(d), true) => train_scenes(d)?,
        (None, true) => bail!("{kind} needs --dataset"),
        _ => vec![],
    };
    let factor = a.downsample.unwrap_or(if kind == ProjectionKind::Lda { 16 } else { 8 });
    let ctx = FitContext::new(
        &[kind],
        &train,
        &pset,
        &full,
        &cameras,
        factor,
        factor,
        match a.ill_pca_source {
            IllPcaArg::Projection => IllPcaSource::Projection,
            IllPcaArg::Full => IllPcaSource::Full,
        },
        NnmfOptions { seed: a.seed, max_iter: a.nnmf_max_iter, ..NnmfOptions::default() },
    )?;
    let variant = match kind {
        ProjectionKind::Rgb => Variant::Camera(0),
        ProjectionKind::Rand => Variant::Seed(a.seed),
        _ => Variant::Single,
    };
    let p = ctx.fit(kind, a.dprime, variant)?;
    write_projection(&a.out, &p)?;
    println!("wrote {} projection {} -> {} to {}", kind, p.input_dim(), p.output_dim(), a.out.display());
    Ok(())
}

fn build(a: BuildArgs) -> Result<()> {
    let projection = read_projection(&a.projection)?;
    let full = load_illuminants(&a.illuminants.illuminants)?;
    let train = train_scenes(&a.dataset)?;
    let opts = ModelOptions { bins: a.bins, smoothing: a.smoothing, downsample: a.downsample };
    let model = build_model(&train, &full, &projection, &opts)?;
    write_model(&a.out, &model)?;
    println!(
        "wrote model with {} candidates, {} bins over {} dims to {}",
        model.names().len(),
        a.bins,
        model.spec().dims(),
        a.out.display()
    );
    Ok(())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let projection = read_projection(&a.projection)?;
    let full = load_illuminants(&a.illuminants.illuminants)?;
    if model.names().iter().map(String::as_str).ne(full.names()) {
        bail!("model candidates do not match the illuminant manifest");
    }
    let mut image = downsample(&read_scube(&a.image)?, a.downsample)?;
    let mut truth = a.truth.clone();
    if let Some(name) = &a.relight {
        image = relight(&image, &full.get(name)?.chromaticity())?;
        truth.get_or_insert_with(|| name.clone());
    }
    let mode = match a.scoring {
        ScoringArg::Log => ScoringMode::LogCorrelation,
        ScoringArg::Dot => ScoringMode::Dot,
    };
    let c = model.classify(&projection, &image, mode)?;
    println!("estimate {}", c.name);
    for (name, score) in model.names().iter().zip(&c.scores) {
        println!("score {name} {score}");
    }
    if let Some(t) = truth {
        let err = angular_error(full.members()[c.index].spd().values(), full.get(&t)?.spd().values())?;
        println!("truth {t}");
        println!("angular_error {err}");
    }
    Ok(())
}

fn load_run(a: &RunArgs) -> Result<(GridConfig, PathBuf)> {
    let cfg = GridConfig::from_file(&a.config)?;
    cfg.parsed_methods()?;
    let out = a.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn grid(a: RunArgs) -> Result<()> {
    let (cfg, out) = load_run(&a)?;
    let data = GridData::load(&cfg)?;
    let report = run_grid(&cfg, &data)?;
    report.write(&out, "report")?;
    println!("{} rows written to {}", report.rows.len(), out.join("report.csv").display());
    Ok(())
}

fn noise(a: RunArgs) -> Result<()> {
    let (cfg, out) = load_run(&a)?;
    let data = GridData::load(&cfg)?;
    let report = run_noise(&cfg, &data)?;
    report.write(&out, "noise_report")?;
    println!("{} rows written to {}", report.rows.len(), out.join("noise_report.csv").display());
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let full = load_illuminants(&a.illuminants.illuminants)?;
    let pset = projection_set(&full, &a.projection_set)?;
    let coords = illuminant_pca_coordinates(&full, a.components)?;
    let mut text = String::from("name");
    (1..=a.components).for_each(|k| text.push_str(&format!(",pc{k}")));
    text.push_str(",projection_set\n");
    for (m, c) in full.members().iter().zip(&coords) {
        text.push_str(&m.name);
        c.iter().for_each(|v| text.push_str(&format!(",{v}")));
        text.push_str(&format!(",{}\n", u8::from(pset.index_of(&m.name).is_some())));
    }
    fs::write(&a.out, text).with_context(|| format!("writing {}", a.out.display()))?;
    println!("wrote {} illuminants to {}", full.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::SelectProjectionSet(a) => select(a),
        Command::Fit(a) => fit(a),
        Command::BuildModel(a) => build(a),
        Command::Classify(a) => classify(a),
        Command::Grid(a) => grid(a),
        Command::Noise(a) => noise(a),
        Command::ExportPcaCoords(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
