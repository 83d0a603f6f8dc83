use std::collections::HashMap;

use crate::error::{Error, Result};

/// Grids with at most this many cells are stored densely, larger ones sparsely.
pub const DENSE_CELL_LIMIT: u64 = 1 << 16;

/// Relative margin added on each side of the calibrated range.
pub const BOUNDS_MARGIN: f64 = 1e-3;
/// Width given to a dimension whose training samples are all equal.
pub const DEGENERATE_WIDTH: f64 = 1e-6;

/// Uniform binning of a `d′`-dimensional box into `B^{d′}` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub bins: usize,
    /// Per-dimension `(lo, hi)`, `lo < hi`.
    pub bounds: Vec<(f64, f64)>,
}

impl GridSpec {
    pub fn new(bins: usize, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("B must be ≥ 1".into()));
        }
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one dimension".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite())) {
            return Err(Error::InvalidArgument(format!("bad bin bounds [{lo}, {hi}]")));
        }
        let spec = GridSpec { bins, bounds };
        spec.cells_checked()?;
        Ok(spec)
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    fn cells_checked(&self) -> Result<u64> {
        (self.bins as u64)
            .checked_pow(self.dims() as u32)
            .ok_or_else(|| Error::InvalidArgument(format!("B^d′ = {}^{} overflows", self.bins, self.dims())))
    }

    /// `B^{d′}`.
    pub fn cells(&self) -> u64 {
        self.cells_checked().expect("validated at construction")
    }

    /// Row-major flat bin index; each coordinate is clamped into `[0, B−1]`.
    pub fn bin_index(&self, z: &[f64]) -> u64 {
        debug_assert_eq!(z.len(), self.dims());
        let b = self.bins as f64;
        let mut flat = 0u64;
        for (&v, &(lo, hi)) in z.iter().zip(&self.bounds) {
            let raw = (b * (v - lo) / (hi - lo)).floor();
            let idx = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, b - 1.0) };
            flat = flat * self.bins as u64 + idx as u64;
        }
        flat
    }
}

/// Streaming per-dimension min/max used to calibrate bin bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsAccumulator {
    min: Vec<f64>,
    max: Vec<f64>,
    samples: usize,
}

impl BoundsAccumulator {
    pub fn new(dims: usize) -> Self {
        BoundsAccumulator { min: vec![f64::INFINITY; dims], max: vec![f64::NEG_INFINITY; dims], samples: 0 }
    }

    pub fn push(&mut self, z: &[f64]) {
        for ((lo, hi), &v) in self.min.iter_mut().zip(self.max.iter_mut()).zip(z) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &BoundsAccumulator) {
        for i in 0..self.min.len() {
            self.min[i] = self.min[i].min(other.min[i]);
            self.max[i] = self.max[i].max(other.max[i]);
        }
        self.samples += other.samples;
    }

    /// Observed range widened by [`BOUNDS_MARGIN`] of its width on each side.
    pub fn finish(&self) -> Result<Vec<(f64, f64)>> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("cannot calibrate bounds without samples".into()));
        }
        Ok(self
            .min
            .iter()
            .zip(&self.max)
            .map(|(&lo, &hi)| {
                let width = hi - lo;
                if width < 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    (mid - 0.5 * DEGENERATE_WIDTH, mid + 0.5 * DEGENERATE_WIDTH)
                } else {
                    (lo - BOUNDS_MARGIN * width, hi + BOUNDS_MARGIN * width)
                }
            })
            .collect())
    }
}

/// Bin bounds for a set of projected training samples.
pub fn calibrate_bounds(samples: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let first = samples.first().ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    let mut acc = BoundsAccumulator::new(first.len());
    for s in samples {
        if s.len() != first.len() {
            return Err(Error::DimensionMismatch { expected: first.len(), got: s.len() });
        }
        acc.push(s);
    }
    acc.finish()
}

/// Integer bin counts; merging is associative so accumulation order never matters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistogramCounts {
    pub cells: HashMap<u64, u64>,
    pub total: u64,
}

impl HistogramCounts {
    pub fn add(&mut self, index: u64) {
        *self.cells.entry(index).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &HistogramCounts) {
        for (&k, &v) in &other.cells {
            *self.cells.entry(k).or_insert(0) += v;
        }
        self.total += other.total;
    }

    /// Occupied cells in index order with their relative frequency.
    pub fn frequencies(&self) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> =
            self.cells.iter().map(|(&k, &v)| (k, v as f64 / self.total as f64)).collect();
        out.sort_unstable_by_key(|&(k, _)| k);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(Vec<(u64, f64)>),
}

/// A smoothed, normalized histogram over `cells` bins.
///
/// Cell probability is `(f + ε) / (1 + ε·K)` where `f` is the cell's relative
/// frequency and `K = B^{d′}`; empty cells share the background `ε / (1 + ε·K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    cells: u64,
    background: f64,
    storage: Storage,
}

pub(crate) fn background_probability(cells: u64, smoothing: f64) -> f64 {
    smoothing / (1.0 + smoothing * cells as f64)
}

impl HistogramGrid {
    pub fn from_counts(counts: &HistogramCounts, cells: u64, smoothing: f64) -> Result<Self> {
        if counts.total == 0 {
            return Err(Error::Degenerate("histogram has no samples".into()));
        }
        let occupied = counts
            .frequencies()
            .into_iter()
            .map(|(k, f)| (k, (f + smoothing) / (1.0 + smoothing * cells as f64)))
            .collect();
        HistogramGrid::from_occupied(occupied, cells, smoothing)
    }

    /// Rebuilds a grid from its occupied cells (sorted by index).
    pub(crate) fn from_occupied(occupied: Vec<(u64, f64)>, cells: u64, smoothing: f64) -> Result<Self> {
        if occupied.windows(2).any(|w| w[0].0 >= w[1].0) || occupied.last().is_some_and(|&(k, _)| k >= cells) {
            return Err(Error::Format("histogram cells out of order or out of range".into()));
        }
        let background = background_probability(cells, smoothing);
        let storage = if cells <= DENSE_CELL_LIMIT {
            let mut dense = vec![background; cells as usize];
            for (k, p) in occupied {
                dense[k as usize] = p;
            }
            Storage::Dense(dense)
        } else {
            Storage::Sparse(occupied)
        };
        Ok(HistogramGrid { cells, background, storage })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn probability(&self, index: u64) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[index as usize],
            Storage::Sparse(cells) => match cells.binary_search_by_key(&index, |&(k, _)| k) {
                Ok(i) => cells[i].1,
                Err(_) => self.background,
            },
        }
    }

    /// Cells that received at least one sample, in index order.
    pub fn occupied(&self) -> Vec<(u64, f64)> {
        match &self.storage {
            Storage::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != self.background)
                .map(|(k, &p)| (k as u64, p))
                .collect(),
            Storage::Sparse(cells) => cells.clone(),
        }
    }

    /// Sum of all cell probabilities.
    pub fn total_mass(&self) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v.iter().sum(),
            Storage::Sparse(cells) => {
                cells.iter().map(|&(_, p)| p).sum::<f64>()
                    + self.background * (self.cells - cells.len() as u64) as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_index_examples() {
        let spec = GridSpec::new(5, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(spec.bin_index(&[0.0, 0.0]), 0);
        assert_eq!(spec.bin_index(&[1.0, 1.0]), 24);
        assert_eq!(spec.bin_index(&[0.5, 0.1]), 10);
        assert_eq!(spec.bin_index(&[-3.0, 7.0]), 4);
    }

    #[test]
    fn bounds_examples() {
        let b = calibrate_bounds(&[vec![0.0], vec![1.0]]).unwrap();
        assert!((b[0].0 + 0.001).abs() < 1e-15 && (b[0].1 - 1.001).abs() < 1e-15);
        let b = calibrate_bounds(&[vec![0.3], vec![0.3]]).unwrap();
        assert!((b[0].1 - b[0].0 - 1e-6).abs() < 1e-15);
        assert!(b[0].0 < 0.3 && 0.3 < b[0].1);
        assert!(calibrate_bounds(&[]).is_err());
        let fwd = calibrate_bounds(&[vec![0.2, 5.0], vec![-1.0, 2.0], vec![0.7, 3.0]]).unwrap();
        let rev = calibrate_bounds(&[vec![0.7, 3.0], vec![-1.0, 2.0], vec![0.2, 5.0]]).unwrap();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(0, vec![(0.0, 1.0)]).is_err());
        assert!(GridSpec::new(3, vec![(1.0, 1.0)]).is_err());
        assert!(GridSpec::new(3, vec![]).is_err());
        assert!(GridSpec::new(1 << 20, vec![(0.0, 1.0); 4]).is_err());
        assert_eq!(GridSpec::new(30, vec![(0.0, 1.0); 5]).unwrap().cells(), 24_300_000);
    }

    #[test]
    fn smoothing_and_normalization() {
        let mut counts = HistogramCounts::default();
        for k in [3, 3, 7, 1] {
            counts.add(k);
        }
        for cells in [10u64, DENSE_CELL_LIMIT + 1] {
            let g = HistogramGrid::from_counts(&counts, cells, 1e-9).unwrap();
            assert_eq!(g.is_dense(), cells <= DENSE_CELL_LIMIT);
            assert!((g.total_mass() - 1.0).abs() < 1e-9);
            assert!(g.probability(3) > g.probability(7));
            assert_eq!(g.probability(0), g.background());
            assert_eq!(g.occupied().iter().map(|c| c.0).collect::<Vec<_>>(), vec![1, 3, 7]);
        }
        assert!(HistogramGrid::from_counts(&HistogramCounts::default(), 10, 1e-9).is_err());
    }

    proptest::proptest! {
        #[test]
        fn bin_index_in_range(
            z in proptest::collection::vec(-2.0f64..3.0, 3),
            bins in 1usize..12,
        ) {
            let spec = GridSpec::new(bins, vec![(0.0, 1.0); 3]).unwrap();
            proptest::prop_assert!(spec.bin_index(&z) < spec.cells());
        }
    }
}
