//! Color-by-Correlation: per-illuminant chromaticity histograms in a reduced
//! spectral space, and test-image scoring against them.

mod format;
mod grid;
mod model;

pub(crate) use model::argmax_first;
pub use format::{decode_model, encode_model, read_model, write_model};
pub use grid::{
    calibrate_bounds, BoundsAccumulator, GridSpec, HistogramCounts, HistogramGrid, BOUNDS_MARGIN,
    DEGENERATE_WIDTH, DENSE_CELL_LIMIT,
};
pub use model::{
    build_model, build_models, image_features, pixel_features, Classification, CorrelationModel, ModelOptions, ScoringMode,
    DEFAULT_SMOOTHING,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::illuminant::{Illuminant, IlluminantSet, SetRole};
    use crate::projection::{fit_pca, fit_rand, Projection};
    use crate::spectral::{relight, SpectralAxis, SpectralImage, Spectrum};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn axis(d: usize) -> SpectralAxis {
        SpectralAxis::new(400.0, 10.0, d).unwrap()
    }

    fn illum(name: &str, v: Vec<f64>) -> Illuminant {
        Illuminant::new(name, Spectrum::new(axis(v.len()), v).unwrap()).unwrap()
    }

    fn random_scene(seed: u64, w: usize, h: usize, d: usize) -> SpectralImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * d).map(|_| rng.random_range(0.05..1.0)).collect();
        let mask = (0..w * h).map(|i| i % 7 != 3).collect();
        SpectralImage::new(w, h, axis(d), data, mask).unwrap()
    }

    fn candidates(d: usize) -> IlluminantSet {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let members = (0..4)
            .map(|i| illum(&format!("E{i}"), (0..d).map(|_| rng.random_range(0.1..2.0)).collect()))
            .collect();
        IlluminantSet::new(members, SetRole::Full).unwrap()
    }

    fn opts(bins: usize) -> ModelOptions {
        ModelOptions { bins, smoothing: DEFAULT_SMOOTHING, downsample: 1 }
    }

    #[test]
    fn single_pixel_one_hot_grids() {
        let d = 3;
        let scene = SpectralImage::unmasked(1, 1, axis(d), vec![0.2, 0.5, 0.3]).unwrap();
        let cands = candidates(d);
        let proj = fit_rand(d, 1, 5).unwrap();
        let model = build_model(&[scene], &cands, &proj, &opts(2)).unwrap();
        for g in model.grids() {
            assert_eq!(g.occupied().len(), 1);
            assert!((g.total_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_candidates_identical_grids() {
        let d = 4;
        let set = IlluminantSet::new(
            vec![illum("a", vec![1.0, 2.0, 3.0, 4.0]), illum("b", vec![1.0, 2.0, 3.0, 4.0])],
            SetRole::Full,
        )
        .unwrap();
        let proj = fit_rand(d, 2, 1).unwrap();
        let model = build_model(&[random_scene(1, 4, 4, d)], &set, &proj, &opts(6)).unwrap();
        assert_eq!(model.grids()[0], model.grids()[1]);
    }

    #[test]
    fn two_bin_hand_computation() {
        let eps = DEFAULT_SMOOTHING;
        let mut c1 = HistogramCounts::default();
        c1.add(0);
        let mut c2 = HistogramCounts::default();
        c2.add(1);
        let proj = fit_rand(2, 1, 0).unwrap();
        let model = CorrelationModel {
            spec: GridSpec::new(2, vec![(0.0, 1.0)]).unwrap(),
            smoothing: eps,
            projection_hash: crate::projection::content_hash(&proj),
            names: vec!["E1".into(), "E2".into()],
            grids: vec![
                HistogramGrid::from_counts(&c1, 2, eps).unwrap(),
                HistogramGrid::from_counts(&c2, 2, eps).unwrap(),
            ],
        };
        // hand values: p_occupied = (1+ε)/(1+2ε), p_empty = ε/(1+2ε)
        let hit = (1.0 + eps) / (1.0 + 2.0 * eps);
        let miss = eps / (1.0 + 2.0 * eps);
        let grids = model.grids();
        assert_eq!(grids[0].probability(0), hit);
        assert_eq!(grids[0].probability(1), miss);
        // test histogram = [1, 0]: log scores ln(hit) vs ln(miss), dot scores hit vs miss
        let hist = [(0u64, 1.0)];
        assert_eq!(model.score_histogram(&hist, ScoringMode::LogCorrelation), vec![hit.ln(), miss.ln()]);
        assert_eq!(model.score_histogram(&hist, ScoringMode::Dot), vec![hit, miss]);
        assert!((miss.ln() - eps.ln()).abs() < 1e-8);
        let c = model.classify_features(&[vec![0.2]], ScoringMode::LogCorrelation).unwrap();
        assert_eq!(c.name, "E1");
        let c = model.classify_features(&[vec![0.7], vec![0.9]], ScoringMode::Dot).unwrap();
        assert_eq!(c.name, "E2");
    }

    /// Brute-force dense accumulation straight from the definitions.
    fn dense_oracle(scenes: &[SpectralImage], spd: &[f64], proj: &Projection, spec: &GridSpec) -> Vec<u64> {
        let mut counts = vec![0u64; spec.cells() as usize];
        let b = spec.bins as f64;
        for s in scenes {
            for y in 0..s.height() {
                for x in 0..s.width() {
                    let i = y * s.width() + x;
                    if !s.mask()[i] {
                        continue;
                    }
                    let rad: Vec<f64> = s.pixel(i).iter().zip(spd).map(|(r, e)| e * r).collect();
                    let norm: f64 = rad.iter().sum();
                    if norm < 1e-12 {
                        continue;
                    }
                    let c: Vec<f64> = rad.iter().map(|v| v / norm).collect();
                    let z = proj.apply(&c).unwrap();
                    let mut flat = 0usize;
                    for (j, v) in z.iter().enumerate() {
                        let (lo, hi) = spec.bounds[j];
                        let k = ((b * (v - lo) / (hi - lo)).floor()).max(0.0).min(b - 1.0) as usize;
                        flat = flat * spec.bins + k;
                    }
                    counts[flat] += 1;
                }
            }
        }
        counts
    }

    #[test]
    fn accumulation_matches_dense_oracle() {
        let d = 5;
        let scenes: Vec<_> = (0..3).map(|s| random_scene(s, 8, 8, d)).collect();
        let cands = candidates(d);
        for (dims, bins) in [(1, 7), (2, 5), (3, 4), (4, 3)] {
            let proj = fit_rand(d, dims, 17 + dims as u64).unwrap();
            let model = build_model(&scenes, &cands, &proj, &opts(bins)).unwrap();
            for (m, g) in cands.members().iter().zip(model.grids()) {
                let counts = dense_oracle(&scenes, m.chromaticity().values(), &proj, model.spec());
                let total: u64 = counts.iter().sum();
                let occupied: Vec<(u64, f64)> = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(k, &c)| (k as u64, c as f64 / total as f64))
                    .collect();
                let got = g.occupied();
                assert_eq!(got.len(), occupied.len());
                for ((k1, p), (k2, f)) in got.iter().zip(&occupied) {
                    assert_eq!(k1, k2);
                    let expect = (f + DEFAULT_SMOOTHING) / (1.0 + DEFAULT_SMOOTHING * model.spec().cells() as f64);
                    assert_eq!(*p, expect);
                }
            }
        }
    }

    fn pca_projection(scenes: &[SpectralImage], cands: &IlluminantSet, dims: usize) -> Projection {
        let tm = crate::projection::training_matrix(scenes, cands, 1).unwrap();
        fit_pca(&tm.rows, dims).unwrap()
    }

    #[test]
    fn self_consistent_classification_and_invariances() {
        let d = 6;
        let scenes: Vec<_> = (0..4).map(|s| random_scene(s, 8, 8, d)).collect();
        let cands = candidates(d);
        let proj = pca_projection(&scenes, &cands, 3);
        let model = build_model(&scenes, &cands, &proj, &opts(12)).unwrap();
        for mode in [ScoringMode::LogCorrelation, ScoringMode::Dot] {
            for (i, m) in cands.members().iter().enumerate() {
                let test = relight(&scenes[1], &m.chromaticity()).unwrap();
                let c = model.classify(&proj, &test, mode).unwrap();
                assert_eq!(c.index, i, "{mode:?}");
                let scaled = model.score(&proj, &test.scaled(3.7), mode).unwrap();
                for (a, b) in c.scores.iter().zip(&scaled) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn pixel_order_and_candidate_order_invariance() {
        let d = 4;
        let scenes: Vec<_> = (0..3).map(|s| random_scene(s, 4, 4, d)).collect();
        let cands = candidates(d);
        let proj = fit_rand(d, 2, 3).unwrap();
        let model = build_model(&scenes, &cands, &proj, &opts(8)).unwrap();
        let test = relight(&scenes[0], cands.members()[2].spd()).unwrap();

        // reverse pixel order
        let (w, h, ax, data, mask) = test.clone().into_parts();
        let rev_data: Vec<f64> = data.chunks_exact(d).rev().flatten().copied().collect();
        let rev_mask: Vec<bool> = mask.iter().rev().copied().collect();
        let reversed = SpectralImage::new(w, h, ax, rev_data, rev_mask).unwrap();
        assert_eq!(
            model.score(&proj, &test, ScoringMode::LogCorrelation).unwrap(),
            model.score(&proj, &reversed, ScoringMode::LogCorrelation).unwrap()
        );

        // permute candidates
        let names = cands.names();
        let permuted = cands.subset(&[names[3], names[1], names[0], names[2]], SetRole::Full).unwrap();
        let pmodel = build_model(&scenes, &permuted, &proj, &opts(8)).unwrap();
        let a = model.classify(&proj, &test, ScoringMode::LogCorrelation).unwrap();
        let b = pmodel.classify(&proj, &test, ScoringMode::LogCorrelation).unwrap();
        assert_eq!(a.name, b.name);
        assert_eq!(a.scores[3], b.scores[0]);
        assert_eq!(a.scores[2], b.scores[3]);
    }

    #[test]
    fn single_bin_ties_to_first_candidate() {
        let d = 4;
        let scenes = vec![random_scene(2, 4, 4, d)];
        let cands = candidates(d);
        let proj = fit_rand(d, 2, 3).unwrap();
        let model = build_model(&scenes, &cands, &proj, &opts(1)).unwrap();
        assert!(model.grids().windows(2).all(|w| w[0] == w[1]));
        let test = relight(&scenes[0], cands.members()[3].spd()).unwrap();
        assert_eq!(model.classify(&proj, &test, ScoringMode::LogCorrelation).unwrap().index, 0);
    }

    #[test]
    fn single_candidate_model() {
        let d = 3;
        let scenes = vec![random_scene(5, 4, 4, d)];
        let set = IlluminantSet::new(vec![illum("only", vec![1.0, 0.5, 0.2])], SetRole::Full).unwrap();
        let proj = fit_rand(d, 2, 1).unwrap();
        let model = build_model(&scenes, &set, &proj, &opts(5)).unwrap();
        let test = relight(&scenes[0], set.members()[0].spd()).unwrap();
        let c = model.classify(&proj, &test, ScoringMode::LogCorrelation).unwrap();
        assert_eq!(c.name, "only");
        assert!(c.scores[0].is_finite());
    }

    #[test]
    fn scoring_errors() {
        let d = 3;
        let scenes = vec![random_scene(5, 4, 4, d)];
        let cands = candidates(d);
        let proj = fit_rand(d, 2, 1).unwrap();
        let model = build_model(&scenes, &cands, &proj, &opts(5)).unwrap();
        let black = SpectralImage::unmasked(2, 2, axis(d), vec![0.0; 12]).unwrap();
        assert!(model.score(&proj, &black, ScoringMode::Dot).is_err());
        let other = fit_rand(d, 2, 2).unwrap();
        assert!(model.score(&other, &scenes[0], ScoringMode::Dot).is_err());
        let wrong = Projection::new(
            crate::projection::ProjectionKind::Rand,
            None,
            DMatrix::zeros(2, 4),
            Default::default(),
        )
        .unwrap();
        assert!(build_model(&scenes, &cands, &wrong, &opts(5)).is_err());
    }

    #[test]
    fn multi_bin_build_matches_single_builds() {
        let d = 5;
        let scenes: Vec<_> = (0..2).map(|s| random_scene(s, 8, 8, d)).collect();
        let cands = candidates(d);
        let proj = fit_rand(d, 3, 8).unwrap();
        let bins = [1, 4, 9];
        let many = build_models(&scenes, &cands, &proj, &bins, DEFAULT_SMOOTHING, 2).unwrap();
        for (b, m) in bins.iter().zip(&many) {
            let single = build_model(&scenes, &cands, &proj, &ModelOptions { bins: *b, smoothing: DEFAULT_SMOOTHING, downsample: 2 }).unwrap();
            assert_eq!(&single, m);
        }
    }

    #[test]
    fn model_file_round_trip() {
        let d = 4;
        let scenes = vec![random_scene(8, 8, 8, d)];
        let cands = candidates(d);
        for (dims, bins) in [(2, 6), (4, 20)] {
            let proj = fit_rand(d, dims, 4).unwrap();
            let model = build_model(&scenes, &cands, &proj, &opts(bins)).unwrap();
            let bytes = encode_model(&model);
            let back = decode_model(&bytes).unwrap();
            assert_eq!(back, model);
            assert_eq!(encode_model(&back), bytes);
            assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
        }
    }
}
