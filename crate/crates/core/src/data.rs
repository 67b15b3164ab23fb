//! Instances built from MovieLens rating dumps and PKIS2 inhibition tables.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{BanditError, Result};
use crate::instance::{gap_profile, ArmModel, StochasticInstance};

/// Default PKIS2 raw scale: percent inhibition in `[0, 100]`.
pub const PKIS2_RAW_SCALE: f64 = 100.0;

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> BanditError {
    BanditError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| BanditError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn record_error(path: &Path, e: csv::Error) -> BanditError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BanditError::io(path, io),
        other => parse_error(path, line, format!("{other:?}")),
    }
}

/// Rejects instances whose best mean is shared by two arms.
fn unique_optimum(instance: StochasticInstance) -> Result<StochasticInstance> {
    gap_profile(&instance)?;
    Ok(instance)
}

/// Per-movie rating count and sum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    movies: BTreeMap<u64, (u64, f64)>,
}

impl RatingsTable {
    /// Reads a `userId,movieId,rating,timestamp` CSV.
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = open_csv(path)?;
        let header = reader.byte_headers().map_err(|e| record_error(path, e))?.clone();
        let expected: [&[u8]; 4] = [b"userId", b"movieId", b"rating", b"timestamp"];
        if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(parse_error(path, 1, "expected header userId,movieId,rating,timestamp"));
        }
        let mut table = RatingsTable::default();
        let mut record = csv::ByteRecord::new();
        while reader.read_byte_record(&mut record).map_err(|e| record_error(path, e))? {
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| std::str::from_utf8(&record[i]).unwrap_or("").trim();
            let movie: u64 = field(1)
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad movieId {:?}", field(1))))?;
            let rating: f64 = field(2)
                .parse()
                .ok()
                .filter(|r: &f64| r.is_finite())
                .ok_or_else(|| parse_error(path, line, format!("bad rating {:?}", field(2))))?;
            let entry = table.movies.entry(movie).or_insert((0, 0.0));
            entry.0 += 1;
            entry.1 += rating;
        }
        Ok(table)
    }

    pub fn num_movies(&self) -> usize {
        self.movies.len()
    }

    /// `(movie id, count, mean)` in ascending id order.
    pub fn summaries(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        self.movies.iter().map(|(&id, &(n, sum))| (id, n, sum / n as f64))
    }
}

/// Movies rated at least `min_ratings` times become unit-variance Gaussian
/// arms centred at their mean rating, ordered by movie id.
pub fn load_movielens(path: &Path, min_ratings: u64) -> Result<StochasticInstance> {
    load_movielens_with_variance(path, min_ratings, 1.0)
}

/// [`load_movielens`] with a reward variance other than 1.
pub fn load_movielens_with_variance(path: &Path, min_ratings: u64, variance: f64) -> Result<StochasticInstance> {
    let table = RatingsTable::read(path)?;
    let (names, arms): (Vec<String>, Vec<ArmModel>) = table
        .summaries()
        .filter(|&(_, n, _)| n >= min_ratings)
        .map(|(id, _, mean)| (id.to_string(), ArmModel::gaussian(mean, variance)))
        .unzip();
    if arms.is_empty() {
        return Err(BanditError::EmptySelection(format!(
            "no movie in {} has {min_ratings} or more ratings",
            path.display()
        )));
    }
    let label = format!("movielens:min_ratings={min_ratings}");
    unique_optimum(StochasticInstance::new(label, arms)?.with_arm_names(names)?)
}

/// Percent-inhibition matrix: one row per inhibitor, one column per kinase.
/// Empty cells mean the pair was not tested.
#[derive(Debug, Clone, PartialEq)]
pub struct InhibitionTable {
    pub kinases: Vec<String>,
    pub inhibitors: Vec<String>,
    /// `values[row][column]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl InhibitionTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = open_csv(path)?;
        let header = reader.headers().map_err(|e| record_error(path, e))?.clone();
        if header.len() < 2 {
            return Err(parse_error(path, 1, "expected an inhibitor column and at least one kinase"));
        }
        let kinases: Vec<String> = header.iter().skip(1).map(|k| k.trim().to_string()).collect();
        let mut inhibitors = Vec::new();
        let mut values = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| record_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            inhibitors.push(rec[0].trim().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|cell| match cell.trim() {
                    "" => Ok(None),
                    s => s
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| parse_error(path, line, format!("bad value {s:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Ok(InhibitionTable {
            kinases,
            inhibitors,
            values,
        })
    }

    /// Tested `(inhibitor, raw value)` pairs for `kinase`.
    pub fn column(&self, kinase: &str) -> Result<Vec<(&str, f64)>> {
        let col = self
            .kinases
            .iter()
            .position(|k| k == kinase)
            .ok_or_else(|| BanditError::UnknownKinase(kinase.to_string()))?;
        Ok(self
            .inhibitors
            .iter()
            .zip(&self.values)
            .filter_map(|(name, row)| row.get(col).copied().flatten().map(|v| (name.as_str(), v)))
            .collect())
    }
}

/// `ln(1 − raw / raw_scale)`, or `None` when the percent control is not positive.
pub fn pkis2_log_control(raw: f64, raw_scale: f64) -> Option<f64> {
    let control = 1.0 - raw / raw_scale;
    (control > 0.0).then(|| control.ln())
}

/// Inhibitors tested against `kinase` become unit-variance Gaussian arms
/// centred at the log of their percent control.
pub fn load_pkis2(path: &Path, kinase: &str, raw_scale: f64) -> Result<StochasticInstance> {
    if !(raw_scale > 0.0 && raw_scale.is_finite()) {
        return Err(BanditError::InvalidParameter(format!("raw scale {raw_scale} must be positive")));
    }
    let table = InhibitionTable::read(path)?;
    let column = table.column(kinase)?;
    let mut dropped = 0usize;
    let mut names = Vec::new();
    let mut arms = Vec::new();
    for (name, raw) in column {
        match pkis2_log_control(raw, raw_scale) {
            Some(log_mean) => {
                names.push(name.to_string());
                arms.push(ArmModel::LogDomainGaussian { log_mean });
            }
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::info!("{kinase}: dropped {dropped} entries with zero percent control");
    }
    if arms.is_empty() {
        return Err(BanditError::EmptySelection(format!("no usable entries for {kinase}")));
    }
    let label = format!("pkis2:kinase={kinase}");
    unique_optimum(StochasticInstance::new(label, arms)?.with_arm_names(names)?)
}
