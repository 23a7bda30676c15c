use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact CSV header.
pub const CSV_HEADER: &str = "engine,S,k,theta,a,p,t,observable,mean,variance,n_samples,seed";

/// One observable at one grid point and time. Fields that do not apply to an
/// engine are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub engine: String,
    #[serde(rename = "S")]
    pub spin: Option<f64>,
    pub k: f64,
    pub theta: f64,
    pub a: f64,
    pub p: Option<f64>,
    pub t: Option<u64>,
    pub observable: String,
    pub mean: f64,
    pub variance: f64,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::Config {
                field: path.display().to_string(),
                reason: format!("unexpected header `{}`", header.join(",")),
            });
        }
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(SweepTable { rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
        append_rows(&mut w, &self.rows)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Rows for one observable, in table order.
    pub fn observable<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.observable == name)
    }
}

/// Serializes rows without a header.
pub fn append_rows<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(obs: &str, spin: Option<f64>, t: Option<u64>) -> SweepRow {
        SweepRow {
            engine: "quantum".into(),
            spin,
            k: 6.0,
            theta: std::f64::consts::FRAC_PI_2,
            a: 0.5f64.sqrt(),
            p: Some(0.25),
            t,
            observable: obs.into(),
            mean: 0.123456789,
            variance: 1e-300,
            n_samples: 500,
            seed: u64::MAX,
        }
    }

    #[test]
    fn round_trip_with_empty_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let table = SweepTable {
            rows: vec![
                row("F", Some(64.0), Some(64)),
                row("p_c", None, None),
                row("F", Some(2f64.powi(64)), Some(20000)),
            ],
        };
        table.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert!(text.lines().nth(2).unwrap().starts_with("quantum,,6.0,"));
        assert_eq!(SweepTable::read(&path).unwrap(), table);
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(SweepTable::read(&path).is_err());
    }
}
