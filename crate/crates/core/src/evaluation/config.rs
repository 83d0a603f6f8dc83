//! TOML experiment configuration. Relative paths are resolved against the
//! directory holding the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cbc::{ScoringMode, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::projection::{NnmfOptions, ProjectionKind};

/// An estimator evaluated in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cbc(ProjectionKind),
    /// Spectral Gray World; has no d′ or B.
    Sgw,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Cbc(k) => k.label(),
            Method::Sgw => "SGW",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("sgw") {
            return Ok(Method::Sgw);
        }
        s.parse().map(Method::Cbc)
    }
}

/// Which illuminants Ill-PCA is fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IllPcaSource {
    #[default]
    Projection,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnmfConfig {
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NnmfConfig {
    fn default() -> Self {
        let o = NnmfOptions::default();
        NnmfConfig { seed: o.seed, max_iter: o.max_iter, tol: o.tol }
    }
}

impl NnmfConfig {
    pub fn options(&self) -> NnmfOptions {
        NnmfOptions { seed: self.seed, max_iter: self.max_iter, tol: self.tol }
    }
}

/// The pinned configuration of the noise protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub method: String,
    pub d_prime: usize,
    pub bins: usize,
    /// Master seed for the per-(image, illuminant) noise streams.
    pub seed: u64,
    pub snr_db: Vec<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            method: "ill_pca".into(),
            d_prime: 3,
            bins: 30,
            seed: 0,
            snr_db: vec![50.0, 40.0, 30.0, 20.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub methods: Vec<String>,
    pub bins: Vec<usize>,
    pub dims: Vec<usize>,
    /// RAND seeds; the first one is also used when RAND is the noise method.
    pub seeds: Vec<u64>,
    /// Sensitivity CSVs for the RGB baseline.
    pub cameras: Vec<PathBuf>,
    pub dataset: PathBuf,
    pub illuminants: PathBuf,
    /// Name list of the projection set; selected by k-means when absent.
    pub projection_set: Option<PathBuf>,
    pub projection_k: usize,
    pub projection_seed: u64,
    pub ill_pca_source: IllPcaSource,
    pub fit_downsample: usize,
    pub lda_downsample: usize,
    pub model_downsample: usize,
    pub smoothing: f64,
    pub scoring: ScoringMode,
    pub output_dir: PathBuf,
    pub nnmf: NnmfConfig,
    pub noise: NoiseConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            methods: vec![],
            bins: vec![5, 10, 20, 30],
            dims: vec![1, 2, 3, 4, 5],
            seeds: vec![42, 43, 44],
            cameras: vec![],
            dataset: PathBuf::from("manifest.txt"),
            illuminants: PathBuf::from("illuminants.txt"),
            projection_set: None,
            projection_k: 10,
            projection_seed: 0,
            ill_pca_source: IllPcaSource::Projection,
            fit_downsample: 8,
            lda_downsample: 16,
            model_downsample: 4,
            smoothing: DEFAULT_SMOOTHING,
            scoring: ScoringMode::LogCorrelation,
            output_dir: PathBuf::from("results"),
            nnmf: NnmfConfig::default(),
            noise: NoiseConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file and resolves its relative paths.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = GridConfig::from_toml(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.cameras.iter_mut().for_each(fix);
        fix(&mut self.dataset);
        fix(&mut self.illuminants);
        self.projection_set.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
    }

    /// Parsed method list, checked against the grid settings.
    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<Method>().map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        for (i, m) in methods.iter().enumerate() {
            if methods[..i].contains(m) {
                return Err(Error::Config(format!("method {m} listed twice")));
            }
        }
        let cbc = methods.iter().any(|m| matches!(m, Method::Cbc(_)));
        if cbc && (self.bins.is_empty() || self.dims.is_empty()) {
            return Err(Error::Config("bins and dims must be non-empty".into()));
        }
        if self.bins.contains(&0) || self.dims.contains(&0) {
            return Err(Error::Config("bins and dims must be positive".into()));
        }
        if methods.contains(&Method::Cbc(ProjectionKind::Rgb)) && self.dims.iter().any(|&d| d != 3) {
            return Err(Error::Config("RGB is fixed to d′ = 3; restrict dims to [3] or drop RGB".into()));
        }
        if methods.contains(&Method::Cbc(ProjectionKind::Rand)) && self.seeds.is_empty() {
            return Err(Error::Config("RAND needs at least one seed".into()));
        }
        if [self.fit_downsample, self.lda_downsample, self.model_downsample].contains(&0) {
            return Err(Error::Config("downsample factors must be ≥ 1".into()));
        }
        if !(self.smoothing > 0.0) {
            return Err(Error::Config("smoothing must be positive".into()));
        }
        Ok(methods)
    }

    pub fn noise_method(&self) -> Result<ProjectionKind> {
        match self.noise.method.parse::<Method>().map_err(|e| Error::Config(e.to_string()))? {
            Method::Cbc(ProjectionKind::Rgb) => {
                Err(Error::Config("the noise protocol runs on spectral radiance; RGB is not supported".into()))
            }
            Method::Sgw => Err(Error::Config("the noise protocol needs a CbC method".into())),
            Method::Cbc(k) => Ok(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = GridConfig::from_toml("methods = [\"pca\", \"ill-pca\", \"sgw\"]\nbins = [30]\n[noise]\nsnr_db = [20.0]\n")
            .unwrap();
        assert_eq!(cfg.dims, [1, 2, 3, 4, 5]);
        assert_eq!(cfg.seeds, [42, 43, 44]);
        assert_eq!((cfg.fit_downsample, cfg.lda_downsample, cfg.model_downsample), (8, 16, 4));
        assert_eq!(cfg.noise.d_prime, 3);
        assert_eq!(cfg.noise.snr_db, [20.0]);
        assert_eq!(
            cfg.parsed_methods().unwrap(),
            [Method::Cbc(ProjectionKind::Pca), Method::Cbc(ProjectionKind::IllPca), Method::Sgw]
        );
        assert_eq!(GridConfig::default().noise.snr_db, [50.0, 40.0, 30.0, 20.0, 10.0]);
    }

    #[test]
    fn rejected_configs() {
        let err = |t: &str| GridConfig::from_toml(t).and_then(|c| c.parsed_methods()).unwrap_err().to_string();
        assert!(err("methods = []").contains("no methods selected"));
        assert!(err("methods = [\"rgb\"]\ncameras = [\"c.csv\"]").contains("d′ = 3"));
        assert!(err("methods = [\"svd\"]").contains("svd"));
        assert!(err("methods = [\"pca\", \"PCA\"]").contains("twice"));
        assert!(err("method = [\"pca\"]").contains("unknown field"));
        let ok = GridConfig::from_toml("methods = [\"rgb\"]\ndims = [3]\ncameras = [\"c.csv\"]").unwrap();
        assert!(ok.parsed_methods().is_ok());
        let noisy = GridConfig::from_toml("[noise]\nmethod = \"rgb\"").unwrap();
        assert!(noisy.noise_method().is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.toml");
        fs::write(&p, "methods = [\"pca\"]\ndataset = \"data/m.txt\"\nilluminants = \"/abs/ill.txt\"\n").unwrap();
        let cfg = GridConfig::from_file(&p).unwrap();
        assert_eq!(cfg.dataset, dir.path().join("data/m.txt"));
        assert_eq!(cfg.illuminants, PathBuf::from("/abs/ill.txt"));
        assert_eq!(cfg.output_dir, dir.path().join("results"));
    }
}
