//! Word-error-rate calibration of the semantic codec.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub n_bits: u32,
    pub esnr_db: f64,
    pub wer: f64,
}

/// A row whose WER was changed by the isotonic repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repair {
    pub n_bits: u32,
    pub esnr_db: f64,
    pub raw: f64,
    pub repaired: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    rows: Vec<CalibrationRow>,
    pub provenance: String,
}

impl CalibrationTable {
    /// Validates rows and enforces non-increasing WER in ESNR for every
    /// bit budget (pool-adjacent-violators). Returns the repairs made.
    pub fn new(mut rows: Vec<CalibrationRow>, provenance: impl Into<String>) -> Result<(Self, Vec<Repair>)> {
        for r in &rows {
            if !(0.0..=1.0).contains(&r.wer) || !r.esnr_db.is_finite() || r.n_bits == 0 {
                return invalid(alloc::format!("bad calibration row {r:?}"));
            }
        }
        rows.sort_by(|a, b| a.n_bits.cmp(&b.n_bits).then(a.esnr_db.total_cmp(&b.esnr_db)));
        if rows.windows(2).any(|w| w[0].n_bits == w[1].n_bits && w[0].esnr_db == w[1].esnr_db) {
            return invalid("duplicate (n_bits, esnr_db) calibration point");
        }
        let mut by_n: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            by_n.entry(r.n_bits).or_default().push(i);
        }
        if by_n.is_empty() {
            return invalid("calibration table is empty");
        }
        let mut repairs = Vec::new();
        for (n, idx) in &by_n {
            if idx.len() < 2 {
                return invalid(alloc::format!("n_bits = {n} needs at least two ESNR points"));
            }
            let raw: Vec<f64> = idx.iter().map(|&i| rows[i].wer).collect();
            let fixed = isotonic_non_increasing(&raw);
            for (k, &i) in idx.iter().enumerate() {
                if fixed[k] != raw[k] {
                    log::warn!(
                        "calibration n_bits={} esnr_db={}: WER {} repaired to {}",
                        n,
                        rows[i].esnr_db,
                        raw[k],
                        fixed[k]
                    );
                    repairs.push(Repair { n_bits: *n, esnr_db: rows[i].esnr_db, raw: raw[k], repaired: fixed[k] });
                    rows[i].wer = fixed[k];
                }
            }
        }
        Ok((Self { rows, provenance: provenance.into() }, repairs))
    }

    pub fn rows(&self) -> &[CalibrationRow] {
        &self.rows
    }

    pub fn bit_budgets(&self) -> Vec<u32> {
        let mut n: Vec<u32> = self.rows.iter().map(|r| r.n_bits).collect();
        n.dedup();
        n
    }

    /// Linear interpolation in ESNR (dB), clamped at the grid ends.
    pub fn wer(&self, n_bits: u32, esnr_db: f64) -> Result<f64> {
        let pts: Vec<&CalibrationRow> = self.rows.iter().filter(|r| r.n_bits == n_bits).collect();
        if pts.is_empty() {
            return Err(Error::MissingCalibration(n_bits));
        }
        if esnr_db.is_nan() {
            return invalid("ESNR is NaN");
        }
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if esnr_db <= first.esnr_db {
            return Ok(first.wer);
        }
        if esnr_db >= last.esnr_db {
            return Ok(last.wer);
        }
        let hi = pts.iter().position(|r| r.esnr_db >= esnr_db).unwrap();
        let (a, b) = (pts[hi - 1], pts[hi]);
        if b.esnr_db == esnr_db {
            return Ok(b.wer);
        }
        let t = (esnr_db - a.esnr_db) / (b.esnr_db - a.esnr_db);
        Ok(a.wer + t * (b.wer - a.wer))
    }

    /// Operating points stated for the sentence codec, with the 10 dB and
    /// the 2000-bit 10 dB points set below the stated ceilings.
    pub fn anchored() -> Self {
        let rows = [(1000, 0.0, 0.10), (1000, 5.0, 0.01), (1000, 10.0, 0.005), (2000, 0.0, 0.01), (2000, 10.0, 0.001)]
            .iter()
            .map(|&(n_bits, esnr_db, wer)| CalibrationRow { n_bits, esnr_db, wer })
            .collect();
        Self::new(rows, "anchored").expect("built-in table is valid").0
    }

    /// Extends the table to other bit budgets: `log(wer)` is interpolated
    /// linearly in `n_bits` between the nearest known budgets (extrapolated
    /// outside them) at every ESNR of the union grid.
    pub fn extend_log_linear(&self, budgets: &[u32]) -> Result<Self> {
        let known = self.bit_budgets();
        if known.len() < 2 {
            return invalid("need two bit budgets to extend a calibration table");
        }
        let mut grid: Vec<f64> = self.rows.iter().map(|r| r.esnr_db).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut rows: Vec<CalibrationRow> = Vec::new();
        for &n in budgets {
            for &e in &grid {
                let wer = if known.contains(&n) {
                    self.wer(n, e)?
                } else {
                    let (lo, hi) = bracket(&known, n);
                    let (wl, wh) = (self.wer(lo, e)?.max(1e-9), self.wer(hi, e)?.max(1e-9));
                    let t = (f64::from(n) - f64::from(lo)) / (f64::from(hi) - f64::from(lo));
                    libm::exp(libm::log(wl) + t * (libm::log(wh) - libm::log(wl))).min(1.0)
                };
                rows.push(CalibrationRow { n_bits: n, esnr_db: e, wer });
            }
        }
        Ok(Self::new(rows, self.provenance.to_string() + "+log-linear-in-n")?.0)
    }
}

fn bracket(known: &[u32], n: u32) -> (u32, u32) {
    let last = known.len() - 1;
    match known.iter().position(|&k| k > n) {
        Some(0) => (known[0], known[1]),
        Some(i) => (known[i - 1], known[i]),
        None => (known[last - 1], known[last]),
    }
}

/// Pool-adjacent-violators fit of a non-increasing sequence.
pub fn isotonic_non_increasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let c = c1 + c2;
            blocks.push(((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c));
        }
    }
    blocks.iter().flat_map(|&(m, c)| core::iter::repeat_n(m, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn anchors() {
        let t = CalibrationTable::anchored();
        assert!(t.wer(1000, 5.0).unwrap() <= 0.01);
        assert!((t.wer(1000, 0.0).unwrap() - 0.10).abs() < 1e-12);
        assert!(t.wer(2000, 0.1).unwrap() <= 0.01);
        assert!((t.wer(1000, 2.5).unwrap() - 0.055).abs() < 1e-12);
        assert_eq!(t.wer(1000, -20.0).unwrap(), 0.10);
        assert_eq!(t.wer(1000, 40.0).unwrap(), 0.005);
        assert_eq!(t.wer(1500, 5.0), Err(Error::MissingCalibration(1500)));
    }

    #[test]
    fn repair_is_monotone_and_reported() {
        let rows = vec![
            CalibrationRow { n_bits: 10, esnr_db: 0.0, wer: 0.1 },
            CalibrationRow { n_bits: 10, esnr_db: 5.0, wer: 0.2 },
            CalibrationRow { n_bits: 10, esnr_db: 10.0, wer: 0.01 },
        ];
        let (t, repairs) = CalibrationTable::new(rows, "test").unwrap();
        assert_eq!(repairs.len(), 2);
        let w: Vec<f64> = t.rows().iter().map(|r| r.wer).collect();
        assert!((w[0] - 0.15).abs() < 1e-12 && (w[1] - 0.15).abs() < 1e-12 && w[2] == 0.01);
    }

    #[test]
    fn rejects_bad_tables() {
        let one = vec![CalibrationRow { n_bits: 10, esnr_db: 0.0, wer: 0.1 }];
        assert!(CalibrationTable::new(one, "x").is_err());
        let bad = vec![
            CalibrationRow { n_bits: 10, esnr_db: 0.0, wer: 1.5 },
            CalibrationRow { n_bits: 10, esnr_db: 1.0, wer: 0.1 },
        ];
        assert!(CalibrationTable::new(bad, "x").is_err());
        assert!(CalibrationTable::new(vec![], "x").is_err());
    }

    #[test]
    fn log_linear_extension() {
        let t = CalibrationTable::anchored().extend_log_linear(&[500, 1000, 1500, 2000]).unwrap();
        // Independent evaluation: at 0 dB WER falls tenfold per 1000 bits.
        assert!((t.wer(1500, 0.0).unwrap() - 0.031_622_776_601_683_79).abs() < 1e-12);
        assert!((t.wer(500, 0.0).unwrap() - 0.316_227_766_016_837_9).abs() < 1e-12);
        assert_eq!(t.wer(1000, 5.0).unwrap(), 0.01);
        for e in [0.0, 5.0, 10.0] {
            let w: Vec<f64> = [500, 1000, 1500, 2000].iter().map(|&n| t.wer(n, e).unwrap()).collect();
            assert!(w.windows(2).all(|p| p[0] >= p[1]), "{w:?}");
        }
    }
}
