use std::io::{Read, Write};

use super::assemble::FeatureVector;
use super::FeatureError;

const META_COLUMNS: [&str; 3] = ["subject_id", "trial_index", "label"];

/// Patterns x features, plus per-row metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub subjects: Vec<u32>,
    pub trials: Vec<usize>,
}

impl FeatureMatrix {
    pub fn from_vectors(names: Vec<String>, vectors: Vec<FeatureVector>) -> Self {
        let mut m = Self {
            names,
            rows: Vec::with_capacity(vectors.len()),
            labels: Vec::with_capacity(vectors.len()),
            subjects: Vec::with_capacity(vectors.len()),
            trials: Vec::with_capacity(vectors.len()),
        };
        for v in vectors {
            m.rows.push(v.values);
            m.labels.push(v.label);
            m.subjects.push(v.subject_id);
            m.trials.push(v.trial_index);
        }
        m
    }

    /// Matrix without metadata: subject and trial columns default to 0 and
    /// feature names to `f1..fD`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        Self {
            names: (1..=dim).map(|i| format!("f{i}")).collect(),
            rows,
            labels,
            subjects: vec![0; n],
            trials: vec![0; n],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    /// Feature columns at the given 0-based positions, in that order.
    pub fn select(&self, columns: &[usize]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| columns.iter().map(|&c| r[c]).collect())
            .collect()
    }

    /// CSV with a header of feature names followed by
    /// `subject_id,trial_index,label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.names.iter().map(String::as_str).chain(META_COLUMNS))?;
        for i in 0..self.rows.len() {
            let mut rec: Vec<String> = self.rows[i].iter().map(|v| v.to_string()).collect();
            rec.push(self.subjects[i].to_string());
            rec.push(self.trials[i].to_string());
            rec.push(self.labels[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, FeatureError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let n = header.len();
        if n <= META_COLUMNS.len()
            || header[n - META_COLUMNS.len()..]
                .iter()
                .zip(META_COLUMNS)
                .any(|(h, m)| h != m)
        {
            return Err(FeatureError::Csv(
                "header must end with subject_id,trial_index,label".to_string(),
            ));
        }
        let dim = n - META_COLUMNS.len();
        let mut m = Self {
            names: header[..dim].to_vec(),
            rows: Vec::new(),
            labels: Vec::new(),
            subjects: Vec::new(),
            trials: Vec::new(),
        };
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row_no = i + 2;
            let bad = || FeatureError::Csv(format!("row {row_no}: malformed value"));
            if rec.len() != n {
                return Err(bad());
            }
            let values: Vec<f64> = rec
                .iter()
                .take(dim)
                .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            m.rows.push(values);
            m.subjects.push(rec[dim].trim().parse().map_err(|_| bad())?);
            m.trials.push(rec[dim + 1].trim().parse().map_err(|_| bad())?);
            let label: usize = rec[dim + 2].trim().parse().map_err(|_| bad())?;
            if label == 0 {
                return Err(bad());
            }
            m.labels.push(label);
        }
        if m.rows.is_empty() {
            return Err(FeatureError::Csv("feature matrix has no rows".to_string()));
        }
        Ok(m)
    }
}
