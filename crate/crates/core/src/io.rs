//! File formats: sampled functions as CSV, measures and basis manifests as JSON.
//!
//! A sampled function is one CSV row per atom, in measure order, under the
//! header `atom,weight,re,im`. A basis manifest records the provenance (enough
//! to rebuild the basis exactly), the field, the measure, and one CSV file per
//! element written next to the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Field, OrthoBasis, Provenance};
use crate::error::{invalid, Result, SprError};
use crate::measure::{DiscreteMeasure, MeasureKind, SampledFunction, SupportPoint};

/// Relative tolerance when comparing weights read from a file with the measure.
const WEIGHT_TOL: f64 = 1e-12;

/// Float formatting shared by every text output: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sampled_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["atom", "weight", "re", "im"]).map_err(csv_err)?;
    for (k, (v, wt)) in f.values().iter().zip(f.measure().weights()).enumerate() {
        w.write_record([k.to_string(), fmt_float(*wt), fmt_float(v.re), fmt_float(v.im)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a function sampled on `measure`; atom indices and weights must match.
pub fn read_sampled_csv(path: &Path, measure: &Arc<DiscreteMeasure>) -> Result<SampledFunction> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["atom", "weight", "re", "im"] {
        return Err(SprError::Parse(format!(
            "{}: expected header atom,weight,re,im",
            path.display()
        )));
    }
    let weights = measure.weights();
    let mut values = Vec::with_capacity(measure.len());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| SprError::Parse(format!("{}: row {} is short", path.display(), row + 1)))
        };
        let atom: usize = parse(field(0)?, path, row)?;
        let weight: f64 = parse(field(1)?, path, row)?;
        let re: f64 = parse(field(2)?, path, row)?;
        let im: f64 = parse(field(3)?, path, row)?;
        if atom != row || row >= weights.len() {
            return Err(SprError::Parse(format!(
                "{}: row {} has atom {atom}; rows must list atoms 0..{} in order",
                path.display(),
                row + 1,
                weights.len()
            )));
        }
        if (weight - weights[row]).abs() > WEIGHT_TOL * weights[row].max(f64::MIN_POSITIVE) {
            return Err(SprError::InvalidArgument(format!(
                "{}: weight of atom {atom} is {weight}, measure has {}",
                path.display(),
                weights[row]
            )));
        }
        values.push(Complex64::new(re, im));
    }
    SampledFunction::new(measure.clone(), values)
}

fn parse<T: std::str::FromStr>(s: &str, path: &Path, row: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| SprError::Parse(format!("{}: row {}: cannot parse '{s}'", path.display(), row + 1)))
}

fn csv_err(e: csv::Error) -> SprError {
    SprError::Parse(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl MeasureJson {
    pub fn from_measure(measure: &DiscreteMeasure) -> Self {
        let kind = measure.kind().tag().to_string();
        match measure.kind() {
            MeasureKind::IntervalGrid { n } | MeasureKind::SquareGrid { n } => {
                Self { kind, n: Some(*n), support: None, m: None }
            }
            MeasureKind::ProductSpace { support, m } => Self {
                kind,
                n: None,
                support: Some(support.iter().map(|s| [s.value.re, s.value.im, s.prob]).collect()),
                m: Some(*m),
            },
        }
    }

    pub fn to_measure(&self) -> Result<Arc<DiscreteMeasure>> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| SprError::Parse(format!("measure of kind {} needs '{name}'", self.kind)))
        };
        match self.kind.as_str() {
            "interval-grid" => DiscreteMeasure::interval_grid(need(self.n, "n")?),
            "square-grid" => DiscreteMeasure::square_grid(need(self.n, "n")?),
            "product-space" => {
                let support = self
                    .support
                    .as_ref()
                    .ok_or_else(|| SprError::Parse("product-space measure needs 'support'".into()))?
                    .iter()
                    .map(|t| SupportPoint::new(Complex64::new(t[0], t[1]), t[2]))
                    .collect();
                DiscreteMeasure::product_space(support, need(self.m, "m")?)
            }
            other => Err(SprError::Parse(format!("unknown measure kind '{other}'"))),
        }
    }
}

pub fn write_measure_json(measure: &DiscreteMeasure, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&MeasureJson::from_measure(measure))?)?;
    Ok(())
}

pub fn read_measure_json(path: &Path) -> Result<Arc<DiscreteMeasure>> {
    let m: MeasureJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    m.to_measure()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisManifest {
    pub provenance: Provenance,
    pub field: Field,
    #[serde(default)]
    pub complexified: bool,
    pub measure: MeasureJson,
    /// Element CSV files, relative to the manifest's directory.
    pub elements: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn element_path(manifest: &Path, name: &str) -> PathBuf {
    manifest.parent().unwrap_or_else(|| Path::new(".")).join(name)
}

/// Writes the manifest to `path` and each element to `<stem>_r<j>.csv` beside it.
pub fn write_basis(basis: &OrthoBasis, path: &Path) -> Result<BasisManifest> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| SprError::InvalidArgument(format!("bad manifest path {}", path.display())))?;
    let mut names = Vec::with_capacity(basis.len());
    for (j, r) in basis.elements().iter().enumerate() {
        let name = format!("{stem}_r{}.csv", j + 1);
        write_sampled_csv(r, &element_path(path, &name))?;
        names.push(name);
    }
    let manifest = BasisManifest {
        provenance: basis.provenance().clone(),
        field: basis.field(),
        complexified: basis.is_complexified(),
        measure: MeasureJson::from_measure(basis.measure()),
        elements: names,
        notes: basis.notes().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Loads a basis: rebuilt from provenance when possible, otherwise read from
/// the element files.
pub fn load_basis(path: &Path) -> Result<OrthoBasis> {
    let manifest: BasisManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    let basis = match &manifest.provenance {
        Provenance::Custom { label } => {
            let measure = manifest.measure.to_measure()?;
            let elements = manifest
                .elements
                .iter()
                .map(|name| read_sampled_csv(&element_path(path, name), &measure))
                .collect::<Result<Vec<_>>>()?;
            let base_field = if manifest.complexified { Field::Real } else { manifest.field };
            OrthoBasis::from_elements(elements, base_field, label.clone())?
        }
        p => OrthoBasis::from_provenance(p)?,
    };
    if MeasureJson::from_measure(basis.measure()) != manifest.measure {
        return invalid("manifest measure does not match the rebuilt basis");
    }
    Ok(if manifest.complexified { basis.complexified() } else { basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let m = DiscreteMeasure::interval_grid(7).unwrap();
        let f = m.sample_interval(|x| Complex64::new((3.0 * x).sin(), x.exp() / 3.0)).unwrap();
        let p = dir.path().join("f.csv");
        write_sampled_csv(&f, &p).unwrap();
        let g = read_sampled_csv(&p, &m).unwrap();
        assert_eq!(f.values(), g.values());
        assert!(fs::read_to_string(&p).unwrap().starts_with("atom,weight,re,im\n"));

        let other = DiscreteMeasure::interval_grid(8).unwrap();
        assert!(read_sampled_csv(&p, &other).is_err());
    }

    #[test]
    fn measure_json_round_trip() {
        let support = vec![SupportPoint::real(-1.0, 0.25), SupportPoint::real(1.0, 0.75)];
        for m in [
            DiscreteMeasure::interval_grid(16).unwrap(),
            DiscreteMeasure::square_grid(4).unwrap(),
            DiscreteMeasure::product_space(support, 3).unwrap(),
        ] {
            let j = MeasureJson::from_measure(&m);
            assert_eq!(*j.to_measure().unwrap(), *m);
        }
        let bad: std::result::Result<MeasureJson, _> =
            serde_json::from_str(r#"{"kind":"interval-grid","n":4,"extra":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn basis_manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = OrthoBasis::lacunary_sine(3, 4, 300).unwrap();
        let path = dir.path().join("basis.json");
        let manifest = write_basis(&b, &path).unwrap();
        assert_eq!(manifest.elements, ["basis_r1.csv", "basis_r2.csv", "basis_r3.csv"]);
        let back = load_basis(&path).unwrap();
        assert_eq!(back.provenance(), b.provenance());
        assert_eq!(back.element(2).values(), b.element(2).values());

        let cx = b.complexified();
        write_basis(&cx, &path).unwrap();
        let back = load_basis(&path).unwrap();
        assert!(back.is_complexified() && back.field() == Field::Complex);
    }

    #[test]
    fn custom_basis_reads_elements() {
        let dir = tempfile::tempdir().unwrap();
        let src = OrthoBasis::lacunary_sine(2, 4, 80).unwrap();
        let b = OrthoBasis::from_elements(src.elements().to_vec(), Field::Real, "copy").unwrap();
        let path = dir.path().join("custom.json");
        write_basis(&b, &path).unwrap();
        let back = load_basis(&path).unwrap();
        assert_eq!(back.element(1).values(), src.element(1).values());
    }
}
