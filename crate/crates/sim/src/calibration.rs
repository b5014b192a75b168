//! Calibration CSV: `n_bits,esnr_db,wer`, rows sorted by `(n_bits, esnr_db)`,
//! plus a `# provenance: ...` comment line.

use std::fmt;
use std::path::Path;

use agentcomm_core::semantic::{CalibrationRow, CalibrationTable, Repair};

use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};

pub const HEADER: [&str; 3] = ["n_bits", "esnr_db", "wer"];

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFile {
    pub provenance: String,
    pub rows: Vec<CalibrationRow>,
}

fn bad<T>(name: &str, line: u64, msg: impl fmt::Display) -> Result<T> {
    Err(Error::Format(format!("{name}:{line}: {msg}")))
}

/// Schema and range checks; no repair.
pub fn parse(text: &str, name: &str) -> Result<CalibrationFile> {
    let provenance = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|c| {
            c.trim().strip_prefix("provenance").map(|v| v.trim_start_matches([':', '=', ' ']).trim().to_string())
        })
        .filter(|p| !p.is_empty());
    let Some(provenance) = provenance else {
        return bad(name, 1, "missing '# provenance: ...' line");
    };
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Format(format!("{name}: {e}")))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        let line = header.position().map_or(1, |p| p.line());
        return bad(name, line, format!("header must be {}", HEADER.join(",")));
    }
    let mut rows: Vec<CalibrationRow> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(format!("{name}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let n_bits: u32 = match rec[0].parse() {
            Ok(n) if n > 0 => n,
            _ => return bad(name, line, format!("n_bits '{}' is not a positive integer", &rec[0])),
        };
        let esnr_db: f64 = match rec[1].parse::<f64>() {
            Ok(e) if e.is_finite() => e,
            _ => return bad(name, line, format!("esnr_db '{}' is not a finite number", &rec[1])),
        };
        let wer: f64 = match rec[2].parse::<f64>() {
            Ok(w) if (0.0..=1.0).contains(&w) => w,
            _ => return bad(name, line, format!("wer '{}' outside [0, 1]", &rec[2])),
        };
        if let Some(prev) = rows.last() {
            if (prev.n_bits, prev.esnr_db) >= (n_bits, esnr_db) {
                return bad(name, line, "rows must be strictly sorted by (n_bits, esnr_db)");
            }
        }
        rows.push(CalibrationRow { n_bits, esnr_db, wer });
    }
    if rows.is_empty() {
        return bad(name, 2, "no rows");
    }
    Ok(CalibrationFile { provenance, rows })
}

pub fn read(path: &Path) -> Result<CalibrationFile> {
    parse(&read_to_string(path)?, &path.display().to_string())
}

/// Loads a table, applying the monotone repair.
pub fn load_table(path: &Path) -> Result<(CalibrationTable, Vec<Repair>)> {
    let f = read(path)?;
    CalibrationTable::new(f.rows, f.provenance).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn render(table: &CalibrationTable) -> String {
    let mut s = format!("# provenance: {}\n{}\n", table.provenance, HEADER.join(","));
    for r in table.rows() {
        s.push_str(&format!("{},{},{}\n", r.n_bits, r.esnr_db, r.wer));
    }
    s
}

pub fn write(path: &Path, table: &CalibrationTable) -> Result<()> {
    write_atomic(path, render(table).as_bytes())
}

/// Outcome of `calibrate-check`.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub provenance: String,
    pub rows: usize,
    pub budgets: Vec<u32>,
    pub repairs: Vec<Repair>,
}

pub fn check(path: &Path) -> Result<CheckReport> {
    let (table, repairs) = load_table(path)?;
    Ok(CheckReport {
        provenance: table.provenance.clone(),
        rows: table.rows().len(),
        budgets: table.bit_budgets(),
        repairs,
    })
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budgets: Vec<String> = self.budgets.iter().map(u32::to_string).collect();
        writeln!(f, "provenance: {}", self.provenance)?;
        writeln!(f, "rows: {}, n_bits: {}", self.rows, budgets.join(" "))?;
        if self.repairs.is_empty() {
            return writeln!(f, "monotone: yes");
        }
        writeln!(f, "monotone: no, {} value(s) repaired", self.repairs.len())?;
        writeln!(f, "n_bits,esnr_db,raw,repaired")?;
        for r in &self.repairs {
            writeln!(f, "{},{},{},{}", r.n_bits, r.esnr_db, r.raw, r.repaired)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "# provenance: trained\nn_bits,esnr_db,wer\n1000,0,0.1\n1000,5,0.02\n1000,10,0.03\n";

    #[test]
    fn parses_and_repairs() {
        let f = parse(GOOD, "t").unwrap();
        assert_eq!(f.provenance, "trained");
        let (table, repairs) = CalibrationTable::new(f.rows, f.provenance).unwrap();
        assert_eq!(repairs.len(), 2);
        assert_eq!(table.rows()[2].wer, 0.025);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse("# provenance: x\nn_bits,esnr_db,wer\n1000,0,0.1\n1000,5,1.5\n", "t").unwrap_err();
        assert!(e.to_string().starts_with("t:4:"), "{e}");
        let e = parse("# provenance: x\nn_bits,esnr_db,wer\n1000,5,0.1\n1000,0,0.2\n", "t").unwrap_err();
        assert!(e.to_string().contains("sorted"), "{e}");
        assert!(parse("n_bits,esnr_db,wer\n1000,0,0.1\n", "t").is_err());
        assert!(parse("# provenance: x\nbits,snr,wer\n1000,0,0.1\n", "t").is_err());
        assert!(parse("# provenance: x\nn_bits,esnr_db,wer\n1000,0\n", "t").is_err());
    }

    #[test]
    fn render_reads_back() {
        let t = CalibrationTable::anchored();
        let f = parse(&render(&t), "t").unwrap();
        assert_eq!(f.rows, t.rows());
        assert_eq!(f.provenance, t.provenance);
    }
}
