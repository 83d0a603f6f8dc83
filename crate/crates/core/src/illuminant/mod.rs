//! Candidate illuminants: loading, normalization and projection-set selection.

mod kmeans;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

pub use kmeans::{kmeans, wcss, KMeans};

use crate::error::{Error, Result};
use crate::spectral::{io::read_spectrum_csv, SpectralAxis, Spectrum};

/// A named illuminant SPD.
#[derive(Debug, Clone, PartialEq)]
pub struct Illuminant {
    pub name: String,
    spd: Spectrum,
}

impl Illuminant {
    pub fn new(name: impl Into<String>, spd: Spectrum) -> Result<Self> {
        let name = name.into();
        if !spd.is_non_negative() {
            return Err(Error::InvalidArgument(format!("illuminant {name} has negative values")));
        }
        if spd.values().iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument(format!("illuminant {name} is all zero")));
        }
        Ok(Illuminant { name, spd })
    }

    pub fn spd(&self) -> &Spectrum {
        &self.spd
    }

    /// The SPD scaled to unit L1 norm.
    pub fn chromaticity(&self) -> Spectrum {
        self.spd.l1_normalized().expect("illuminant SPD is non-zero")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    Full,
    Projection,
}

/// An ordered collection of uniquely named illuminants on a common axis.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminantSet {
    members: Vec<Illuminant>,
    pub role: SetRole,
}

impl IlluminantSet {
    pub fn new(members: Vec<Illuminant>, role: SetRole) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("empty illuminant set".into()));
        }
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.name.as_str()) {
                return Err(Error::DuplicateName(m.name.clone()));
            }
            members[0].spd.axis().ensure_same(m.spd.axis())?;
        }
        Ok(IlluminantSet { members, role })
    }

    pub fn members(&self) -> &[Illuminant] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn axis(&self) -> &SpectralAxis {
        self.members[0].spd.axis()
    }

    pub fn names(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&Illuminant> {
        self.members
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownIlluminant(name.to_string()))
    }

    /// The named members, in the order given.
    pub fn subset<S: AsRef<str>>(&self, names: &[S], role: SetRole) -> Result<IlluminantSet> {
        let members = names.iter().map(|n| self.get(n.as_ref()).cloned()).collect::<Result<Vec<_>>>()?;
        IlluminantSet::new(members, role)
    }
}

/// Loads a manifest of `<relative csv path> <name>` lines (`#` starts a comment).
/// Paths resolve against the manifest's directory; member order follows the manifest.
pub fn load_illuminants(manifest: impl AsRef<Path>) -> Result<IlluminantSet> {
    let manifest = manifest.as_ref();
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut members = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (path, name) = line
            .rsplit_once(char::is_whitespace)
            .map(|(p, n)| (p.trim(), n.trim()))
            .ok_or_else(|| Error::parse(manifest, i + 1, "expected `<csv path> <name>`"))?;
        if !seen.insert(name.to_string()) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let spd = read_spectrum_csv(base.join(path))?;
        if let Some(first) = members.first() {
            let first: &Illuminant = first;
            first.spd.axis().ensure_same(spd.axis())?;
        }
        members.push(Illuminant::new(name, spd)?);
    }
    IlluminantSet::new(members, SetRole::Full)
}

/// Reads a projection-set file: one illuminant name per line.
pub fn read_name_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

pub fn write_name_list(path: impl AsRef<Path>, names: &[&str]) -> Result<()> {
    let path = path.as_ref();
    let mut text = names.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Picks one representative illuminant per k-means cluster of L1-normalized SPDs:
/// the member closest to its cluster centroid (lowest manifest index on ties).
/// Output is ordered by cluster index.
pub fn select_projection_set(full: &IlluminantSet, k: usize, seed: u64) -> Result<IlluminantSet> {
    let points: Vec<Vec<f64>> = full.members.iter().map(|m| m.chromaticity().values().to_vec()).collect();
    let fit = kmeans(&points, k, seed, 300)?;
    let mut chosen = Vec::with_capacity(k);
    for (c, centroid) in fit.centroids.iter().enumerate() {
        let best = fit
            .assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == c)
            .map(|(i, _)| (i, kmeans::sq_dist(&points[i], centroid)))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            })
            .ok_or_else(|| Error::Degenerate(format!("k-means cluster {c} is empty")))?;
        chosen.push(full.members[best.0].clone());
    }
    IlluminantSet::new(chosen, SetRole::Projection)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn illum(name: &str, values: &[f64]) -> Illuminant {
        let axis = SpectralAxis::new(400.0, 10.0, values.len()).unwrap();
        Illuminant::new(name, Spectrum::new(axis, values.to_vec()).unwrap()).unwrap()
    }

    fn pairs() -> IlluminantSet {
        IlluminantSet::new(
            vec![
                illum("a1", &[1.0, 0.0, 0.0]),
                illum("b1", &[0.0, 0.0, 1.0]),
                illum("a2", &[0.95, 0.05, 0.0]),
                illum("b2", &[0.0, 0.1, 0.9]),
            ],
            SetRole::Full,
        )
        .unwrap()
    }

    #[test]
    fn rejects_duplicates_and_zero() {
        assert!(matches!(
            IlluminantSet::new(vec![illum("x", &[1.0]), illum("x", &[2.0])], SetRole::Full),
            Err(Error::DuplicateName(_))
        ));
        let axis = SpectralAxis::new(400.0, 10.0, 2).unwrap();
        assert!(Illuminant::new("z", Spectrum::new(axis, vec![0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn k_equals_n_returns_everything() {
        let full = pairs();
        let sel = select_projection_set(&full, 4, 3).unwrap();
        let mut names = sel.names();
        names.sort();
        assert_eq!(names, vec!["a1", "a2", "b1", "b2"]);
    }

    #[test]
    fn one_representative_per_pair() {
        let full = pairs();
        let points: Vec<Vec<f64>> = full.members().iter().map(|m| m.chromaticity().values().to_vec()).collect();
        for seed in 0..10 {
            let sel = select_projection_set(&full, 2, seed).unwrap();
            let names = sel.names();
            assert_eq!(names.len(), 2);
            let a = names.iter().filter(|n| n.starts_with('a')).count();
            assert_eq!(a, 1, "seed {seed}: {names:?}");
            // brute force: each chosen member is the nearest of its pair to the pair mean
            for n in names {
                let group: Vec<usize> =
                    (0..4).filter(|&i| full.members()[i].name.as_bytes()[0] == n.as_bytes()[0]).collect();
                let centroid: Vec<f64> =
                    (0..3).map(|j| group.iter().map(|&i| points[i][j]).sum::<f64>() / group.len() as f64).collect();
                let best = group
                    .iter()
                    .copied()
                    .min_by(|&x, &y| {
                        kmeans::sq_dist(&points[x], &centroid).total_cmp(&kmeans::sq_dist(&points[y], &centroid))
                    })
                    .unwrap();
                assert_eq!(full.members()[best].name, n);
            }
        }
    }

    #[test]
    fn k1_picks_nearest_to_global_mean() {
        let full = pairs();
        let points: Vec<Vec<f64>> = full.members().iter().map(|m| m.chromaticity().values().to_vec()).collect();
        let mean: Vec<f64> = (0..3).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / 4.0).collect();
        let expect = (0..4)
            .min_by(|&x, &y| kmeans::sq_dist(&points[x], &mean).total_cmp(&kmeans::sq_dist(&points[y], &mean)))
            .unwrap();
        let sel = select_projection_set(&full, 1, 9).unwrap();
        assert_eq!(sel.names(), vec![full.members()[expect].name.as_str()]);
    }

    #[test]
    fn subset_preserves_given_order() {
        let full = pairs();
        let sub = full.subset(&["b2", "a1"], SetRole::Projection).unwrap();
        assert_eq!(sub.names(), vec!["b2", "a1"]);
        assert!(full.subset(&["nope"], SetRole::Projection).is_err());
    }

    #[test]
    fn manifest_loading() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "wavelength_nm,value\n400,1\n410,2\n").unwrap();
        fs::write(dir.path().join("d65.csv"), "wavelength_nm,value\n400,3\n410,1\n").unwrap();
        fs::write(dir.path().join("bad.csv"), "wavelength_nm,value\n400,3\n410,-1\n").unwrap();
        fs::write(dir.path().join("m.txt"), "# comment\na.csv A\nd65.csv D65\n").unwrap();
        let set = load_illuminants(dir.path().join("m.txt")).unwrap();
        assert_eq!(set.names(), vec!["A", "D65"]);

        fs::write(dir.path().join("dup.txt"), "a.csv A\nd65.csv A\n").unwrap();
        assert!(matches!(load_illuminants(dir.path().join("dup.txt")), Err(Error::DuplicateName(_))));
        fs::write(dir.path().join("neg.txt"), "bad.csv X\n").unwrap();
        let err = load_illuminants(dir.path().join("neg.txt")).unwrap_err().to_string();
        assert!(err.contains(":3:") && err.contains("negative"), "{err}");
    }

    #[test]
    fn name_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("set.txt");
        write_name_list(&p, &["D65", "F2"]).unwrap();
        assert_eq!(read_name_list(&p).unwrap(), vec!["D65", "F2"]);
    }
}
