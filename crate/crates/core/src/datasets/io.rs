//! JSON-lines storage. The first line is a header with the schema version,
//! generator version, spec and ground truth; every further line is one item
//! tagged with its split. Reals are written in shortest round-trip form, so
//! a load reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetSpec, GroundTruth, Item};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = "1.0";

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    generator_version: String,
    spec: DatasetSpec,
    ground_truth: GroundTruth,
    train_size: usize,
    test_size: usize,
}

#[derive(Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Split {
    Train,
    Test,
}

#[derive(Serialize, Deserialize)]
struct Record {
    split: Split,
    #[serde(flatten)]
    item: Item,
}

/// Serialized bytes of `ds`.
pub fn to_jsonl(ds: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_jsonl(ds, &mut out)?;
    Ok(out)
}

fn write_jsonl<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let header = Header {
        schema_version: SCHEMA_VERSION,
        generator_version: GENERATOR_VERSION.into(),
        spec: ds.spec.clone(),
        ground_truth: ds.ground_truth.clone(),
        train_size: ds.train.len(),
        test_size: ds.test.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let tagged = ds
        .train
        .iter()
        .map(|it| (Split::Train, it))
        .chain(ds.test.iter().map(|it| (Split::Test, it)));
    for (split, item) in tagged {
        serde_json::to_writer(
            &mut w,
            &Record {
                split,
                item: item.clone(),
            },
        )?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    write_jsonl(ds, BufWriter::new(File::create(path)?))
}

pub fn load(path: &Path) -> Result<Dataset> {
    let fail = |line: usize, msg: String| Error::DatasetFormat {
        path: path.to_path_buf(),
        msg: format!("line {line}: {msg}"),
    };
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines.next().ok_or_else(|| fail(1, "empty file".into()))??;

    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| fail(1, e.to_string()))?;
    let version = raw.get("schema_version").and_then(|v| v.as_u64());
    match version {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::SchemaVersion {
                found: v as u32,
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(fail(1, "header has no schema_version".into())),
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| fail(1, e.to_string()))?;

    let (input_dim, label_dim) = expected_dims(&header);
    let mut ds = Dataset {
        spec: header.spec,
        ground_truth: header.ground_truth,
        train: Vec::with_capacity(header.train_size),
        test: Vec::with_capacity(header.test_size),
    };
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| fail(lineno, e.to_string()))?;
        let it = &rec.item;
        if it.input.len() != input_dim || it.label.len() != label_dim {
            return Err(fail(
                lineno,
                format!(
                    "item has input/label lengths {}/{}, expected {input_dim}/{label_dim}",
                    it.input.len(),
                    it.label.len()
                ),
            ));
        }
        let side = [&it.weights, &it.prices];
        if side.iter().any(|v| v.as_ref().is_some_and(|v| v.len() != label_dim)) {
            return Err(fail(lineno, "weights/prices length mismatch".into()));
        }
        match rec.split {
            Split::Train => ds.train.push(rec.item),
            Split::Test => ds.test.push(rec.item),
        }
    }
    if ds.train.len() != header.train_size || ds.test.len() != header.test_size {
        return Err(fail(
            0,
            format!(
                "header announces {}/{} items, file has {}/{}",
                header.train_size,
                header.test_size,
                ds.train.len(),
                ds.test.len()
            ),
        ));
    }
    Ok(ds)
}

fn expected_dims(h: &Header) -> (usize, usize) {
    match &h.spec {
        DatasetSpec::Rc(s) => (s.n, s.n),
        DatasetSpec::Wsc(s) => (s.num_subsets(), s.num_subsets()),
        DatasetSpec::Knapsack(s) => (s.items * s.feature_dim, s.items),
    }
}
