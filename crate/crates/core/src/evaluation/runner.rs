use rayon::prelude::*;

use super::config::{GridConfig, IllPcaSource, Method};
use super::metrics::{angular_error, summarize, Summary};
use crate::baselines::spectral_gray_world;
use crate::cbc::{build_models, image_features, CorrelationModel};
use crate::dataset::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::illuminant::{load_illuminants, read_name_list, select_projection_set, IlluminantSet, SetRole};
use crate::projection::{
    fit_ill_pca, fit_lda, fit_nnmf, fit_pca, fit_rand, fit_rgb, training_matrix, LdaOptions, NnmfOptions, Projection,
    ProjectionKind, TrainingMatrix,
};
use crate::spectral::io::read_sensitivities_csv;
use crate::spectral::{add_noise, downsample, noise_stream_seed, relight, SensitivityFunctions, SpectralImage, Spectrum};

/// Everything a grid run reads from disk.
#[derive(Debug, Clone)]
pub struct GridData {
    pub train: Vec<SpectralImage>,
    pub test: Vec<SpectralImage>,
    pub test_names: Vec<String>,
    pub full: IlluminantSet,
    pub projection_set: IlluminantSet,
    pub cameras: Vec<SensitivityFunctions>,
}

impl GridData {
    pub fn load(cfg: &GridConfig) -> Result<Self> {
        let manifest = DatasetManifest::read(&cfg.dataset)?;
        let train: Vec<_> = manifest.load(Split::Train)?.into_iter().map(|s| s.image).collect();
        let (test_names, test) = manifest.load(Split::Test)?.into_iter().map(|s| (s.name, s.image)).unzip();
        let full = load_illuminants(&cfg.illuminants)?;
        let projection_set = match &cfg.projection_set {
            Some(p) => full.subset(&read_name_list(p)?, SetRole::Projection)?,
            None => select_projection_set(&full, cfg.projection_k, cfg.projection_seed)?,
        };
        let cameras = cfg.cameras.iter().map(read_sensitivities_csv).collect::<Result<_>>()?;
        GridData::new(train, test, test_names, full, projection_set, cameras)
    }

    pub fn new(
        train: Vec<SpectralImage>,
        test: Vec<SpectralImage>,
        test_names: Vec<String>,
        full: IlluminantSet,
        projection_set: IlluminantSet,
        cameras: Vec<SensitivityFunctions>,
    ) -> Result<Self> {
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one train and one test scene".into()));
        }
        if test_names.len() != test.len() {
            return Err(Error::DimensionMismatch { expected: test.len(), got: test_names.len() });
        }
        Ok(GridData { train, test, test_names, full, projection_set, cameras })
    }
}

/// Which instance of a method a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Single,
    Seed(u64),
    Camera(usize),
}

impl Variant {
    pub fn label(&self, cameras: &[SensitivityFunctions]) -> String {
        match *self {
            Variant::Single => "-".into(),
            Variant::Seed(s) => format!("seed{s}"),
            Variant::Camera(i) => cameras[i].camera_name.clone(),
        }
    }
}

/// Label of the row averaging the RAND seeds or RGB cameras.
pub const AVERAGE_VARIANT: &str = "mean";

/// Training inputs shared by every fit in a run. Training matrices are built
/// once per downsample factor.
pub struct FitContext<'a> {
    pub projection_set: &'a IlluminantSet,
    pub full: &'a IlluminantSet,
    pub cameras: &'a [SensitivityFunctions],
    pub ill_pca_source: IllPcaSource,
    pub nnmf: NnmfOptions,
    pub lda: LdaOptions,
    fit_matrix: Option<TrainingMatrix>,
    lda_matrix: Option<TrainingMatrix>,
}

impl<'a> FitContext<'a> {
    /// Prepares the training matrices the listed kinds need.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kinds: &[ProjectionKind],
        train: &[SpectralImage],
        projection_set: &'a IlluminantSet,
        full: &'a IlluminantSet,
        cameras: &'a [SensitivityFunctions],
        fit_downsample: usize,
        lda_downsample: usize,
        ill_pca_source: IllPcaSource,
        nnmf: NnmfOptions,
    ) -> Result<Self> {
        let needs = |ks: &[ProjectionKind]| kinds.iter().any(|k| ks.contains(k));
        let fit_matrix = if needs(&[ProjectionKind::Pca, ProjectionKind::Nnmf]) {
            Some(training_matrix(train, projection_set, fit_downsample)?)
        } else {
            None
        };
        let lda_matrix =
            if needs(&[ProjectionKind::Lda]) { Some(training_matrix(train, projection_set, lda_downsample)?) } else { None };
        Ok(FitContext {
            projection_set,
            full,
            cameras,
            ill_pca_source,
            nnmf,
            lda: LdaOptions::default(),
            fit_matrix,
            lda_matrix,
        })
    }

    pub fn fit(&self, kind: ProjectionKind, d_prime: usize, variant: Variant) -> Result<Projection> {
        let d = self.full.axis().count;
        let missing = || Error::InvalidArgument(format!("no training matrix prepared for {kind}"));
        match (kind, variant) {
            (ProjectionKind::Rgb, Variant::Camera(i)) => {
                if d_prime != 3 {
                    return Err(Error::InvalidArgument(format!("RGB is fixed to d′ = 3, got {d_prime}")));
                }
                fit_rgb(&self.cameras[i])
            }
            (ProjectionKind::Rand, Variant::Seed(seed)) => fit_rand(d, d_prime, seed),
            (ProjectionKind::Pca, Variant::Single) => fit_pca(&self.fit_matrix.as_ref().ok_or_else(missing)?.rows, d_prime),
            (ProjectionKind::Nnmf, Variant::Single) => {
                fit_nnmf(&self.fit_matrix.as_ref().ok_or_else(missing)?.rows, d_prime, &self.nnmf)
            }
            (ProjectionKind::Lda, Variant::Single) => fit_lda(self.lda_matrix.as_ref().ok_or_else(missing)?, d_prime, &self.lda),
            (ProjectionKind::IllPca, Variant::Single) => {
                let source = match self.ill_pca_source {
                    IllPcaSource::Projection => self.projection_set,
                    IllPcaSource::Full => self.full,
                };
                fit_ill_pca(source, d_prime)
            }
            (k, v) => Err(Error::InvalidArgument(format!("{k} has no variant {v:?}"))),
        }
    }
}

/// Outcome of one (test scene, true illuminant) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub scene: String,
    pub truth: String,
    pub estimate: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub d_prime: Option<usize>,
    pub bins: Option<usize>,
    pub variant: String,
    /// `None` for clean (noise-free) input.
    pub noise_db: Option<f64>,
    pub summary: Summary,
    pub cases: Vec<CaseResult>,
}

impl ReportRow {
    fn new(
        method: Method,
        d_prime: Option<usize>,
        bins: Option<usize>,
        variant: String,
        noise_db: Option<f64>,
        cases: Vec<CaseResult>,
    ) -> Result<Self> {
        let errors: Vec<f64> = cases.iter().map(|c| c.error).collect();
        Ok(ReportRow { method, d_prime, bins, variant, noise_db, summary: summarize(&errors)?, cases })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

/// Test scenes at scoring resolution, relit on demand.
struct TestSet<'a> {
    scenes: Vec<SpectralImage>,
    names: &'a [String],
    full: &'a IlluminantSet,
    chroma: Vec<Spectrum>,
}

impl<'a> TestSet<'a> {
    fn new(data: &'a GridData, factor: usize) -> Result<Self> {
        Ok(TestSet {
            scenes: data.test.iter().map(|s| downsample(s, factor)).collect::<Result<_>>()?,
            names: &data.test_names,
            full: &data.full,
            chroma: data.full.members().iter().map(|m| m.chromaticity()).collect(),
        })
    }

    /// (scene, illuminant) pairs in scene-major order.
    fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.scenes.len()).flat_map(|s| (0..self.full.len()).map(move |j| (s, j))).collect()
    }

    fn radiance(&self, scene: usize, illum: usize) -> Result<SpectralImage> {
        relight(&self.scenes[scene], &self.chroma[illum])
    }

    fn case(&self, scene: usize, truth: usize, estimate: usize) -> Result<CaseResult> {
        let m = self.full.members();
        Ok(CaseResult {
            scene: self.names[scene].clone(),
            truth: m[truth].name.clone(),
            estimate: m[estimate].name.clone(),
            error: angular_error(m[estimate].spd().values(), m[truth].spd().values())?,
        })
    }
}

fn classify_all(
    models: &[CorrelationModel],
    projection: &Projection,
    tests: &TestSet,
    cfg: &GridConfig,
    noise: &[Option<f64>],
) -> Result<Vec<Vec<Vec<CaseResult>>>> {
    // per pair: [noise level][model]
    let per_pair: Vec<Vec<Vec<CaseResult>>> = tests
        .pairs()
        .par_iter()
        .map(|&(s, j)| {
            let clean = tests.radiance(s, j)?;
            noise
                .iter()
                .map(|level| {
                    let radiance = match level {
                        None => clean.clone(),
                        Some(snr) => add_noise(&clean, *snr, noise_stream_seed(cfg.noise.seed, s as u64, j as u64))?,
                    };
                    let features = image_features(projection, &radiance)?;
                    models
                        .iter()
                        .map(|m| tests.case(s, j, m.classify_features(&features, cfg.scoring)?.index))
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // regroup as [noise level][model][pair]
    let mut out = vec![vec![Vec::with_capacity(per_pair.len()); models.len()]; noise.len()];
    for pair in per_pair {
        for (l, level) in pair.into_iter().enumerate() {
            for (b, case) in level.into_iter().enumerate() {
                out[l][b].push(case);
            }
        }
    }
    Ok(out)
}

fn gray_world_cases(tests: &TestSet) -> Result<Vec<CaseResult>> {
    tests
        .pairs()
        .par_iter()
        .map(|&(s, j)| {
            let est = spectral_gray_world(&tests.radiance(s, j)?, tests.full)?;
            tests.case(s, j, est.index)
        })
        .collect()
}

fn variants(method: Method, cfg: &GridConfig, data: &GridData) -> Vec<Variant> {
    match method {
        Method::Cbc(ProjectionKind::Rand) => cfg.seeds.iter().map(|&s| Variant::Seed(s)).collect(),
        Method::Cbc(ProjectionKind::Rgb) => (0..data.cameras.len()).map(Variant::Camera).collect(),
        _ => vec![Variant::Single],
    }
}

fn fit_context<'a>(cfg: &GridConfig, data: &'a GridData, kinds: &[ProjectionKind]) -> Result<FitContext<'a>> {
    FitContext::new(
        kinds,
        &data.train,
        &data.projection_set,
        &data.full,
        &data.cameras,
        cfg.fit_downsample,
        cfg.lda_downsample,
        cfg.ill_pca_source,
        cfg.nnmf.options(),
    )
}

/// Runs every (method, d′, B, variant) configuration: fit the projection on
/// the projection set, build per-B models over the full set, classify every
/// (test scene × candidate) relit pair. RAND and RGB also get an averaged row
/// pooling all their variants' cases.
pub fn run_grid(cfg: &GridConfig, data: &GridData) -> Result<EvalReport> {
    let methods = cfg.parsed_methods()?;
    if methods.contains(&Method::Cbc(ProjectionKind::Rgb)) && data.cameras.is_empty() {
        return Err(Error::Config("RGB needs at least one camera".into()));
    }
    let kinds: Vec<ProjectionKind> =
        methods.iter().filter_map(|m| if let Method::Cbc(k) = m { Some(*k) } else { None }).collect();
    let ctx = fit_context(cfg, data, &kinds)?;
    let tests = TestSet::new(data, cfg.model_downsample)?;

    let mut jobs = Vec::new();
    for &m in &methods {
        if let Method::Cbc(kind) = m {
            for &d in &cfg.dims {
                for v in variants(m, cfg, data) {
                    jobs.push((kind, d, v));
                }
            }
        }
    }
    // results[job][B] = cases
    let results: Vec<Vec<Vec<CaseResult>>> = jobs
        .par_iter()
        .map(|&(kind, d, v)| {
            let projection = ctx.fit(kind, d, v)?;
            let models = build_models(&data.train, &data.full, &projection, &cfg.bins, cfg.smoothing, cfg.model_downsample)?;
            Ok(classify_all(&models, &projection, &tests, cfg, &[None])?.remove(0))
        })
        .collect::<Result<_>>()?;

    let mut report = EvalReport::default();
    let mut next = 0;
    for &m in &methods {
        let Method::Cbc(kind) = m else {
            report.rows.push(ReportRow::new(m, None, None, "-".into(), None, gray_world_cases(&tests)?)?);
            continue;
        };
        let vars = variants(m, cfg, data);
        for &d in &cfg.dims {
            let block = &results[next..next + vars.len()];
            next += vars.len();
            for (b, &bins) in cfg.bins.iter().enumerate() {
                for (v, cases) in vars.iter().zip(block) {
                    report.rows.push(ReportRow::new(m, Some(d), Some(bins), v.label(&data.cameras), None, cases[b].clone())?);
                }
                if matches!(kind, ProjectionKind::Rand | ProjectionKind::Rgb) {
                    let pooled = block.iter().flat_map(|c| c[b].iter().cloned()).collect();
                    report.rows.push(ReportRow::new(m, Some(d), Some(bins), AVERAGE_VARIANT.into(), None, pooled)?);
                }
            }
        }
    }
    Ok(report)
}

/// Noise protocol for the configuration pinned in `cfg.noise`: a clean row
/// followed by one row per SNR level. Noise is added to each relit test image
/// at scoring resolution, one stream per (image, illuminant) pair.
pub fn run_noise(cfg: &GridConfig, data: &GridData) -> Result<EvalReport> {
    let kind = cfg.noise_method()?;
    let n = &cfg.noise;
    if n.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
        return Err(Error::Config("SNR levels must be numbers or +inf".into()));
    }
    let variant = match kind {
        ProjectionKind::Rand => {
            Variant::Seed(*cfg.seeds.first().ok_or_else(|| Error::Config("RAND needs at least one seed".into()))?)
        }
        _ => Variant::Single,
    };
    let ctx = fit_context(cfg, data, &[kind])?;
    let tests = TestSet::new(data, cfg.model_downsample)?;
    let projection = ctx.fit(kind, n.d_prime, variant)?;
    let models = build_models(&data.train, &data.full, &projection, &[n.bins], cfg.smoothing, cfg.model_downsample)?;
    let levels: Vec<Option<f64>> = std::iter::once(None).chain(n.snr_db.iter().map(|&s| Some(s))).collect();
    let results = classify_all(&models, &projection, &tests, cfg, &levels)?;
    let label = variant.label(&data.cameras);
    let rows = levels
        .iter()
        .zip(results)
        .map(|(level, mut cases)| {
            ReportRow::new(Method::Cbc(kind), Some(n.d_prime), Some(n.bins), label.clone(), *level, cases.remove(0))
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport { rows })
}
