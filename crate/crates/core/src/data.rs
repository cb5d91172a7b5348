//! Project records, CSV ingestion, train/test splitting and synthetic data.
//!
//! A record carries the four cost drivers of a field canal improvement
//! project (area served, pipeline length, irrigation valves, construction
//! year) and its observed cost. Any driver may be missing; the cost may not.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::regression::LinearModel;

pub const N_FEATURES: usize = 4;

/// Column names of the CSV schema, in order.
pub const CSV_COLUMNS: [&str; 6] = [
    "id",
    "area_served",
    "pipeline_length_m",
    "irrigation_valves",
    "construction_year",
    "cost_le",
];

/// Human-readable driver names, P1..P4.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "area_served",
    "pipeline_length_m",
    "irrigation_valves",
    "construction_year",
];

/// The four cost drivers P1..P4. `None` marks a missing value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([Option<f64>; N_FEATURES]);

impl FeatureVector {
    pub fn new(area_served: f64, pipeline_length: f64, irrigation_valves: f64, year: f64) -> Self {
        FeatureVector([
            Some(area_served),
            Some(pipeline_length),
            Some(irrigation_valves),
            Some(year),
        ])
    }

    pub fn from_values(values: [f64; N_FEATURES]) -> Self {
        FeatureVector(values.map(Some))
    }

    pub fn with_missing(slots: [Option<f64>; N_FEATURES]) -> Self {
        FeatureVector(slots)
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.0[i]
    }

    pub fn slots(&self) -> &[Option<f64>; N_FEATURES] {
        &self.0
    }

    pub fn has_missing(&self) -> bool {
        self.0.iter().any(Option::is_none)
    }

    /// All four values, or `UnsupportedMissing` when any slot is empty.
    pub fn complete(&self) -> Result<[f64; N_FEATURES]> {
        let mut out = [0.0; N_FEATURES];
        for (o, v) in out.iter_mut().zip(self.0.iter()) {
            *o = v.ok_or(Error::UnsupportedMissing)?;
        }
        Ok(out)
    }

    pub fn set_missing(&mut self, i: usize) {
        self.0[i] = None;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectRecord {
    pub id: String,
    pub features: FeatureVector,
    pub cost_le: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    records: Vec<ProjectRecord>,
}

impl Dataset {
    pub fn new(records: Vec<ProjectRecord>) -> Result<Self> {
        for (row, r) in records.iter().enumerate() {
            if !(r.cost_le > 0.0 && r.cost_le.is_finite()) {
                return Err(Error::NonpositiveTarget { row });
            }
            if let Some(year) = r.features.get(3) {
                if !(1900.0..=2100.0).contains(&year) {
                    return Err(Error::Parse {
                        row,
                        column: CSV_COLUMNS[4].into(),
                        message: format!("construction year {year} outside [1900, 2100]"),
                    });
                }
            }
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[ProjectRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.records.iter().map(|r| r.features).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost_le).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.records.iter().any(|r| r.features.has_missing())
    }

    /// Subset by row index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    pub fn mean_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost_le).sum::<f64>() / self.records.len() as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.records {
            let mut row = vec![r.id.clone()];
            row.extend(
                r.features
                    .slots()
                    .iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
            );
            row.push(r.cost_le.to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }
}

fn parse_cell(row: usize, column: &str, cell: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|e| Error::Parse {
        row,
        column: column.into(),
        message: format!("`{cell}`: {e}"),
    })
}

/// Reads a dataset from any reader holding the fixed CSV schema.
///
/// Row numbers in errors count data rows from 1 (the header is row 0).
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::SchemaMismatch(e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_COLUMNS {
        return Err(Error::SchemaMismatch(format!(
            "expected header `{}`, found `{}`",
            CSV_COLUMNS.join(","),
            names.join(",")
        )));
    }

    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        if rec.len() != CSV_COLUMNS.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", CSV_COLUMNS.len(), rec.len()),
            });
        }
        let mut slots = [None; N_FEATURES];
        for (f, slot) in slots.iter_mut().enumerate() {
            let cell = &rec[f + 1];
            if !cell.trim().is_empty() {
                let v = parse_cell(row, CSV_COLUMNS[f + 1], cell)?;
                if !v.is_finite() || (f < 3 && v < 0.0) {
                    return Err(Error::Parse {
                        row,
                        column: CSV_COLUMNS[f + 1].into(),
                        message: format!("invalid value {v}"),
                    });
                }
                if f == 3 && !(1900.0..=2100.0).contains(&v) {
                    return Err(Error::Parse {
                        row,
                        column: CSV_COLUMNS[4].into(),
                        message: format!("construction year {v} outside [1900, 2100]"),
                    });
                }
                *slot = Some(v);
            }
        }
        let cost_cell = &rec[5];
        if cost_cell.trim().is_empty() {
            return Err(Error::Parse {
                row,
                column: CSV_COLUMNS[5].into(),
                message: "missing cost".into(),
            });
        }
        let cost = parse_cell(row, CSV_COLUMNS[5], cost_cell)?;
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::Parse {
                row,
                column: CSV_COLUMNS[5].into(),
                message: format!("nonpositive target {cost}"),
            });
        }
        records.push(ProjectRecord {
            id: rec[0].trim().to_string(),
            features: FeatureVector::with_missing(slots),
            cost_le: cost,
        });
    }
    Ok(Dataset { records })
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSize {
    /// Fraction of records assigned to training, rounded to the nearest count.
    TrainFraction(f64),
    Counts { train: usize, test: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub size: SplitSize,
    pub seed: u64,
}

impl SplitSpec {
    /// 111 of 144 records for training, the field-study protocol.
    pub const DEFAULT_TRAIN_FRACTION: f64 = 111.0 / 144.0;

    pub fn new(seed: u64) -> Self {
        SplitSpec {
            size: SplitSize::TrainFraction(Self::DEFAULT_TRAIN_FRACTION),
            seed,
        }
    }
}

/// Seeded random partition into (train, test). Each side keeps the source order.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidSplit(format!("need at least 2 records, have {n}")));
    }
    let n_train = match spec.size {
        SplitSize::TrainFraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidSplit(format!("train fraction {f} not in (0, 1)")));
            }
            ((n as f64 * f).round() as usize).clamp(1, n - 1)
        }
        SplitSize::Counts { train, test } => {
            if train + test != n || train == 0 || test == 0 {
                return Err(Error::InvalidSplit(format!(
                    "counts {train}+{test} do not partition {n} records into nonempty sides"
                )));
            }
            train
        }
    };
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let (tr, te) = idx.split_at_mut(n_train);
    tr.sort_unstable();
    te.sort_unstable();
    Ok((d.select(tr), d.select(te)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleAdequacy {
    Adequate { minimum: usize },
    Inadequate { minimum: usize },
}

impl SampleAdequacy {
    pub fn is_adequate(&self) -> bool {
        matches!(self, SampleAdequacy::Adequate { .. })
    }
}

impl fmt::Display for SampleAdequacy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleAdequacy::Adequate { minimum } => write!(f, "adequate (minimum {minimum})"),
            SampleAdequacy::Inadequate { minimum } => write!(f, "inadequate (minimum {minimum})"),
        }
    }
}

/// Green's rule of thumb: a regression needs at least 50 + 8N training rows.
pub fn check_green_rule(train_size: usize, n_features: usize) -> SampleAdequacy {
    let minimum = 50 + 8 * n_features;
    if train_size >= minimum {
        SampleAdequacy::Adequate { minimum }
    } else {
        SampleAdequacy::Inadequate { minimum }
    }
}

/// Uniform sampling ranges for synthetic drivers.
pub const SYNTH_RANGES: [(f64, f64); N_FEATURES] = [
    (20.0, 300.0),
    (200.0, 3000.0),
    (5.0, 60.0),
    (2010.0, 2015.0),
];

const MAX_REJECTIONS: usize = 1000;

/// Draws `n` projects whose cost follows the frozen square-root regression,
/// squared, times a uniform multiplicative perturbation in ±`noise_pct`%.
pub fn synthesize(n: usize, seed: u64, noise_pct: f64) -> Result<Dataset> {
    synthesize_in(n, seed, noise_pct, &SYNTH_RANGES)
}

pub fn synthesize_in(
    n: usize,
    seed: u64,
    noise_pct: f64,
    ranges: &[(f64, f64); N_FEATURES],
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidConfig("synthesize needs n >= 1".into()));
    }
    if !(noise_pct >= 0.0 && noise_pct.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise_pct {noise_pct} must be >= 0")));
    }
    let reference = LinearModel::eq6_reference();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (n.max(1) as f64).log10().floor() as usize + 1;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut rejected = 0;
        loop {
            let values = ranges.map(|(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo });
            let root = reference.linear_output(&values);
            let factor = 1.0 + noise_pct / 100.0 * rng.gen_range(-1.0..=1.0);
            let cost = root * root * factor;
            if root > 0.0 && cost > 0.0 {
                records.push(ProjectRecord {
                    id: format!("FCIP-{:0width$}", i + 1, width = width.max(3)),
                    features: FeatureVector::from_values(values),
                    cost_le: cost,
                });
                break;
            }
            rejected += 1;
            if rejected >= MAX_REJECTIONS {
                return Err(Error::RangeExhausted(rejected));
            }
        }
    }
    Ok(Dataset { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "id,area_served,pipeline_length_m,irrigation_valves,construction_year,cost_le\n\
        a,100,1000,10,2013,655552.6\n\
        b,50,,8,2012,400000\n\
        c,80,900,9,2014,500000\n";

    #[test]
    fn reads_well_formed_file() {
        let d = read_csv(SAMPLE.as_bytes()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.records()[0].features.get(0), Some(100.0));
    }

    #[test]
    fn empty_cell_becomes_missing() {
        let d = read_csv(SAMPLE.as_bytes()).unwrap();
        assert_eq!(d.records()[1].features.get(1), None);
        assert!(d.has_missing());
    }

    #[test]
    fn zero_cost_is_a_parse_error() {
        let text = "id,area_served,pipeline_length_m,irrigation_valves,construction_year,cost_le\nx,1,2,3,2012,0\n";
        let err = read_csv(text.as_bytes()).unwrap_err();
        assert_eq!(err.class(), "PARSE_ERROR");
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "cost_le");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn bad_number_reports_row_and_column() {
        let text = "id,area_served,pipeline_length_m,irrigation_valves,construction_year,cost_le\n\
            x,1,2,3,2012,10\ny,1,abc,3,2012,10\n";
        match read_csv(text.as_bytes()).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "pipeline_length_m");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn wrong_header_is_schema_mismatch() {
        let text = "id,p1,p2,p3,p4,cost\nx,1,2,3,2012,10\n";
        assert_eq!(read_csv(text.as_bytes()).unwrap_err().class(), "SCHEMA_MISMATCH");
    }

    #[test]
    fn default_split_is_111_33() {
        let d = synthesize(144, 1, 5.0).unwrap();
        let (tr, te) = split(&d, &SplitSpec::new(9)).unwrap();
        assert_eq!((tr.len(), te.len()), (111, 33));
    }

    #[test]
    fn half_split_of_four() {
        let d = synthesize(4, 1, 0.0).unwrap();
        let spec = SplitSpec {
            size: SplitSize::TrainFraction(0.5),
            seed: 3,
        };
        let (tr, te) = split(&d, &spec).unwrap();
        assert_eq!((tr.len(), te.len()), (2, 2));
    }

    #[test]
    fn split_is_seed_deterministic() {
        let d = synthesize(30, 1, 5.0).unwrap();
        let a = split(&d, &SplitSpec::new(5)).unwrap();
        let b = split(&d, &SplitSpec::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_bad_specs() {
        let d = synthesize(10, 1, 5.0).unwrap();
        let counts = SplitSpec {
            size: SplitSize::Counts { train: 5, test: 4 },
            seed: 0,
        };
        assert_eq!(split(&d, &counts).unwrap_err().class(), "INVALID_SPLIT");
        let one = synthesize(1, 1, 5.0).unwrap();
        assert!(split(&one, &SplitSpec::new(0)).is_err());
    }

    #[test]
    fn green_rule_examples() {
        assert_eq!(check_green_rule(111, 4), SampleAdequacy::Adequate { minimum: 82 });
        assert_eq!(check_green_rule(82, 4), SampleAdequacy::Adequate { minimum: 82 });
        assert_eq!(check_green_rule(81, 4), SampleAdequacy::Inadequate { minimum: 82 });
    }

    #[test]
    fn synthesize_reference_point() {
        let root: f64 = -37032.81 + 2.21 * 100.0 + 0.1691 * 1000.0 + 2.265 * 10.0 + 18.594 * 2013.0;
        assert!((root - 809.662).abs() < 1e-6);
        let fixed = [(100.0, 100.0), (1000.0, 1000.0), (10.0, 10.0), (2013.0, 2013.0)];
        let d = synthesize_in(1, 0, 0.0, &fixed).unwrap();
        assert!((d.records()[0].cost_le - root * root).abs() < 1e-6);
        assert!((d.records()[0].cost_le - 655_553.0).abs() < 1.0);
    }

    #[test]
    fn synthesize_is_seed_deterministic() {
        assert_eq!(synthesize(20, 4, 5.0).unwrap(), synthesize(20, 4, 5.0).unwrap());
        assert_ne!(synthesize(20, 4, 5.0).unwrap(), synthesize(20, 5, 5.0).unwrap());
    }

    #[test]
    fn synthesize_exhausts_on_impossible_ranges() {
        let bad = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (1990.0, 1991.0)];
        assert_eq!(synthesize_in(1, 0, 0.0, &bad).unwrap_err(), Error::RangeExhausted(1000));
    }

    #[test]
    fn csv_write_read_preserves_records() {
        let mut d = synthesize(5, 2, 5.0).unwrap();
        d.records[2].features.set_missing(1);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), d);
    }
}
