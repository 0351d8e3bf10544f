//! Labeled log-periodogram samples and the phoneme dataset.
//!
//! Values use 1-based logical indexing in the public API (`s_1 .. s_N`),
//! stored 0-based in `Spectrum::values`. The dataset keeps its own published
//! train/test division; nothing here re-randomizes splits.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Parses a split/speaker field: anything starting with `train` or `test`
    /// (case-insensitive).
    pub fn parse_tag(tag: &str) -> Option<Split> {
        let lower = tag.trim().to_ascii_lowercase();
        if lower.starts_with("train") {
            Some(Split::Train)
        } else if lower.starts_with("test") {
            Some(Split::Test)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Class membership within a pair task. `Pos` is the first-named class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Sign::Pos
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub label: String,
    pub split: Split,
    pub sample_id: String,
}

impl Spectrum {
    pub fn new(values: Vec<f64>, label: impl Into<String>, split: Split) -> Self {
        Spectrum {
            values,
            label: label.into(),
            split,
            sample_id: String::new(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.sample_id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Returns a copy of `s` as heard `d` units louder: every value shifted by `d`.
pub fn shift_loudness(s: &Spectrum, d: f64) -> Spectrum {
    Spectrum {
        values: s.values.iter().map(|v| v + d).collect(),
        ..s.clone()
    }
}

/// Per-split sample counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Test => self.test,
        }
    }

    fn bump(&mut self, split: Split) {
        match split {
            Split::Train => self.train += 1,
            Split::Test => self.test += 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<Spectrum>,
    n_points: usize,
    class_counts: BTreeMap<String, SplitCounts>,
}

impl Dataset {
    /// Builds a dataset, checking that every sample has the same finite length.
    pub fn from_samples(samples: Vec<Spectrum>) -> Result<Self> {
        let n_points = samples
            .first()
            .map(Spectrum::len)
            .ok_or(Error::Empty("dataset has no samples"))?;
        if n_points == 0 {
            return Err(Error::Empty("spectra have no points"));
        }
        let mut class_counts: BTreeMap<String, SplitCounts> = BTreeMap::new();
        for (i, s) in samples.iter().enumerate() {
            if s.len() != n_points {
                return Err(Error::MalformedRow {
                    row: i + 1,
                    reason: format!("expected {n_points} values, found {}", s.len()),
                });
            }
            if let Some(j) = s.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::MalformedRow {
                    row: i + 1,
                    reason: format!("value {} is not finite", j + 1),
                });
            }
            class_counts.entry(s.label.clone()).or_default().bump(s.split);
        }
        Ok(Dataset {
            samples,
            n_points,
            class_counts,
        })
    }

    pub fn samples(&self) -> &[Spectrum] {
        &self.samples
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn class_counts(&self) -> &BTreeMap<String, SplitCounts> {
        &self.class_counts
    }

    /// Class labels in ascending (alphabetical) order.
    pub fn labels(&self) -> Vec<&str> {
        self.class_counts.keys().map(String::as_str).collect()
    }

    pub fn count(&self, label: &str, split: Split) -> usize {
        self.class_counts.get(label).map_or(0, |c| c.get(split))
    }
}

/// An ordered pair of distinct classes; `pos` maps to `Sign::Pos`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairTask {
    pos: String,
    neg: String,
}

impl PairTask {
    pub fn new(pos: impl Into<String>, neg: impl Into<String>) -> Result<Self> {
        let (pos, neg) = (pos.into(), neg.into());
        if pos == neg {
            return Err(Error::SamePair(pos));
        }
        Ok(PairTask { pos, neg })
    }

    /// Parses `"dcl,iy"` or `"dcl-iy"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.splitn(2, [',', '-']);
        match (parts.next(), parts.next()) {
            (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                PairTask::new(a.trim(), b.trim())
            }
            _ => Err(Error::Config(format!(
                "pair must look like `a,b`, got {text:?}"
            ))),
        }
    }

    pub fn pos(&self) -> &str {
        &self.pos
    }

    pub fn neg(&self) -> &str {
        &self.neg
    }

    pub fn sign_of(&self, label: &str) -> Option<Sign> {
        if label == self.pos {
            Some(Sign::Pos)
        } else if label == self.neg {
            Some(Sign::Neg)
        } else {
            None
        }
    }

    /// `pos-neg`, the naming used in reports.
    pub fn name(&self) -> String {
        format!("{}-{}", self.pos, self.neg)
    }
}

impl fmt::Display for PairTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.pos, self.neg)
    }
}

/// Samples of one split restricted to the two classes of `task`, in dataset order.
pub fn select_pair<'a>(
    d: &'a Dataset,
    task: &PairTask,
    split: Split,
) -> Result<Vec<(&'a Spectrum, Sign)>> {
    for label in [task.pos(), task.neg()] {
        if d.count(label, split) == 0 {
            return Err(Error::EmptyClass {
                label: label.to_string(),
                split: split.to_string(),
            });
        }
    }
    Ok(d.samples
        .iter()
        .filter(|s| s.split == split)
        .filter_map(|s| task.sign_of(&s.label).map(|sign| (s, sign)))
        .collect())
}

/// Column roles in a dataset CSV. Unset fields fall back to header detection.
#[derive(Debug, Clone, Default)]
pub struct ColumnMap {
    pub label: Option<String>,
    pub split: Option<String>,
    pub id: Option<String>,
}

const DEFAULT_LABEL: &str = "g";
const DEFAULT_SPLIT: &str = "speaker";
const ID_CANDIDATES: [&str; 4] = ["row.names", "rownames", "", "id"];

struct Layout {
    label: usize,
    split: usize,
    id: Option<usize>,
    features: Vec<usize>,
}

fn resolve_layout(header: &csv::StringRecord, map: &ColumnMap) -> Result<Layout> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let find = |name: &str| names.iter().position(|h| h.eq_ignore_ascii_case(name));

    let label_name = map.label.as_deref().unwrap_or(DEFAULT_LABEL);
    let label = find(label_name)
        .ok_or_else(|| Error::Header(format!("no label column {label_name:?}")))?;
    let split_name = map.split.as_deref().unwrap_or(DEFAULT_SPLIT);
    let split = find(split_name)
        .ok_or_else(|| Error::Header(format!("no split column {split_name:?}")))?;
    let id = match map.id.as_deref() {
        Some(name) => Some(
            find(name).ok_or_else(|| Error::Header(format!("no id column {name:?}")))?,
        ),
        None => ID_CANDIDATES
            .iter()
            .find_map(|c| find(c))
            .filter(|&i| i != label && i != split),
    };
    let features: Vec<usize> = (0..names.len())
        .filter(|&i| i != label && i != split && Some(i) != id)
        .collect();
    if features.is_empty() {
        return Err(Error::Header("no feature columns".into()));
    }
    Ok(Layout {
        label,
        split,
        id,
        features,
    })
}

/// Loads a dataset CSV: header row, one label column, one split column, an
/// optional row id column and numeric feature columns in frequency order.
pub fn load_dataset(path: impl AsRef<Path>, map: &ColumnMap) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, map)
}

pub fn read_dataset<R: std::io::Read>(reader: R, map: &ColumnMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let layout = resolve_layout(&header, map)?;

    let mut samples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != header.len() {
            return Err(Error::MalformedRow {
                row,
                reason: format!(
                    "expected {} columns, found {}",
                    header.len(),
                    record.len()
                ),
            });
        }
        let mut values = Vec::with_capacity(layout.features.len());
        for &c in &layout.features {
            let field = record[c].trim();
            let v: f64 = field.parse().map_err(|_| Error::MalformedRow {
                row,
                reason: format!("column {:?}: {field:?} is not numeric", &header[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("column {:?}: {field:?} is not finite", &header[c]),
                });
            }
            values.push(v);
        }
        let tag = &record[layout.split];
        let split = Split::parse_tag(tag).ok_or_else(|| Error::UnknownSplit {
            row,
            tag: tag.to_string(),
        })?;
        let sample_id = match layout.id {
            Some(c) => record[c].to_string(),
            None => row.to_string(),
        };
        samples.push(Spectrum {
            values,
            label: record[layout.label].trim().to_string(),
            split,
            sample_id,
        });
    }
    Dataset::from_samples(samples)
}

/// Writes `d` in the default layout (`row.names, x.1 .. x.N, g, speaker`).
pub fn write_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(d, file)
}

pub fn write_dataset_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["row.names".to_string()];
    header.extend((1..=d.n_points()).map(|i| format!("x.{i}")));
    header.push(DEFAULT_LABEL.into());
    header.push(DEFAULT_SPLIT.into());
    wtr.write_record(&header)?;
    for s in d.samples() {
        let mut row = Vec::with_capacity(d.n_points() + 3);
        row.push(s.sample_id.clone());
        row.extend(s.values.iter().map(|v| v.to_string()));
        row.push(s.label.clone());
        row.push(s.split.as_str().to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<dataset writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_dataset(text.as_bytes(), &ColumnMap::default())
    }

    #[test]
    fn small_csv_counts() {
        let d = parse("row.names,x.1,x.2,x.3,g,speaker\n1,1,2,3,a,train.dr1\n2,4,5,6,b,test.dr2\n")
            .unwrap();
        assert_eq!(d.n_points(), 3);
        assert_eq!(d.class_counts()["a"], SplitCounts { train: 1, test: 0 });
        assert_eq!(d.class_counts()["b"], SplitCounts { train: 0, test: 1 });
        assert_eq!(d.samples()[1].values, vec![4.0, 5.0, 6.0]);
        assert_eq!(d.samples()[0].sample_id, "1");
    }

    #[test]
    fn split_tags_are_case_insensitive() {
        let d = parse("x.1,g,speaker\n1,a,TRAIN.x\n2,a,Test\n").unwrap();
        assert_eq!(d.samples()[0].split, Split::Train);
        assert_eq!(d.samples()[1].split, Split::Test);
    }

    #[test]
    fn nan_feature_names_the_row() {
        let err = parse("x.1,x.2,g,speaker\n1,2,a,train\n3,NaN,b,test\n").unwrap_err();
        match err {
            Error::MalformedRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_numeric_and_short_rows_are_rejected() {
        let err = parse("x.1,x.2,g,speaker\n1,oops,a,train\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 1, .. }), "{err}");
        let err = parse("x.1,x.2,g,speaker\n1,2,a,train\n1,a,train\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_split_is_an_error() {
        let err = parse("x.1,g,speaker\n1,a,validation\n").unwrap_err();
        assert!(matches!(err, Error::UnknownSplit { row: 1, .. }), "{err}");
    }

    #[test]
    fn column_overrides() {
        let map = ColumnMap {
            label: Some("phoneme".into()),
            split: Some("part".into()),
            id: Some("key".into()),
        };
        let d = read_dataset("key,part,f1,f2,phoneme\nk1,train,1,2,x\n".as_bytes(), &map).unwrap();
        assert_eq!(d.n_points(), 2);
        assert_eq!(d.samples()[0].sample_id, "k1");
        assert_eq!(d.samples()[0].label, "x");
        assert!(parse("key,part,f1,phoneme\nk,train,1,x\n").is_err());
    }

    #[test]
    fn select_pair_filters_in_dataset_order() {
        let mut samples = Vec::new();
        for (label, n) in [("dcl", 5), ("iy", 7), ("sh", 3)] {
            for i in 0..n {
                samples.push(Spectrum::new(vec![i as f64], label, Split::Train));
                samples.push(Spectrum::new(vec![i as f64], label, Split::Test));
            }
        }
        let d = Dataset::from_samples(samples).unwrap();
        let task = PairTask::new("dcl", "iy").unwrap();
        let train = select_pair(&d, &task, Split::Train).unwrap();
        assert_eq!(train.len(), 12);
        assert!(train[..5].iter().all(|(s, sign)| s.label == "dcl" && *sign == Sign::Pos));
        assert!(train[5..].iter().all(|(s, sign)| s.label == "iy" && *sign == Sign::Neg));

        let missing = PairTask::new("dcl", "zz").unwrap();
        assert!(matches!(
            select_pair(&d, &missing, Split::Train),
            Err(Error::EmptyClass { .. })
        ));
    }

    #[test]
    fn pair_task_rejects_identical_classes() {
        assert!(matches!(PairTask::new("dcl", "dcl"), Err(Error::SamePair(_))));
        assert!(PairTask::parse("aa,aa").is_err());
        let t = PairTask::parse("dcl-iy").unwrap();
        assert_eq!((t.pos(), t.neg()), ("dcl", "iy"));
    }

    #[test]
    fn shift_examples() {
        let s = Spectrum::new(vec![1.0, 2.0, 3.0], "a", Split::Train);
        assert_eq!(shift_loudness(&s, 0.0).values, vec![1.0, 2.0, 3.0]);
        assert_eq!(shift_loudness(&s, 2.5).values, vec![3.5, 4.5, 5.5]);
        let back = shift_loudness(&shift_loudness(&s, 2.5), -2.5);
        assert_eq!(back, s);
    }

    #[test]
    fn ragged_or_empty_datasets_are_rejected() {
        assert!(Dataset::from_samples(vec![]).is_err());
        let r = Dataset::from_samples(vec![
            Spectrum::new(vec![1.0, 2.0], "a", Split::Train),
            Spectrum::new(vec![1.0], "a", Split::Train),
        ]);
        assert!(r.is_err());
    }
}
