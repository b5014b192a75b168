//! Regular (3,6) LDPC code built by progressive edge growth, with a
//! systematic GF(2) encoder and a normalized min-sum decoder.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::rng::{rng_for, SimRng};

pub const DV: usize = 3;
pub const DC: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    /// Variables attached to each check, `DC` per row.
    check_vars: Vec<u32>,
    /// Edge ids (`check * DC + slot`) of each variable, `DV` per column.
    var_edges: Vec<u32>,
    info_cols: Vec<u32>,
    /// For each parity column: the info columns it sums over.
    parity_rules: Vec<(u32, Vec<u32>)>,
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub info: Vec<u8>,
    pub converged: bool,
    pub iterations: u32,
}

pub const MAX_ITERATIONS: u32 = 50;
pub const NORMALIZATION: f64 = 0.8;

impl LdpcCode {
    /// The default 1024-bit, rate-1/2 code.
    pub fn standard() -> Self {
        Self::peg(1024, 0x1d9c_5eed).expect("standard code parameters are valid")
    }

    /// Builds an `n`-bit code with `n/2` checks.
    pub fn peg(n: usize, seed: u64) -> Result<Self> {
        if n < 2 * DC || !n.is_multiple_of(2) {
            return invalid("LDPC block length must be a an even number of at least 12");
        }
        for attempt in 0..64u64 {
            if let Some(adj) = peg_attempt(n, n / 2, seed, attempt) {
                return Self::from_adjacency(n, seed, &adj);
            }
        }
        Err(Error::InvalidArgument("PEG construction did not converge".into()))
    }

    /// Builds the code from the variable list of each check row.
    pub fn from_check_rows(n: usize, seed: u64, rows: &[Vec<u32>]) -> Result<Self> {
        Self::from_adjacency(n, seed, rows)
    }

    fn from_adjacency(n: usize, seed: u64, rows: &[Vec<u32>]) -> Result<Self> {
        let m = rows.len();
        if m * 2 != n {
            return invalid("code must have rate 1/2");
        }
        let mut col_deg = vec![0usize; n];
        for r in rows {
            if r.len() != DC {
                return invalid("every check must have degree 6");
            }
            for &v in r {
                if v as usize >= n {
                    return invalid("variable index out of range");
                }
                col_deg[v as usize] += 1;
            }
        }
        if col_deg.iter().any(|&d| d != DV) {
            return invalid("every variable must have degree 3");
        }
        let check_vars: Vec<u32> = rows.iter().flatten().copied().collect();
        let mut var_edges = vec![u32::MAX; n * DV];
        let mut fill = vec![0usize; n];
        for (e, &v) in check_vars.iter().enumerate() {
            let v = v as usize;
            var_edges[v * DV + fill[v]] = e as u32;
            fill[v] += 1;
        }

        let (pivots, reduced) = rref(n, rows);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<u32> = (0..n).filter(|&c| !is_pivot[c]).map(|c| c as u32).collect();
        let k = m;
        if free.len() < k {
            return invalid("parity-check matrix rank too high for rate 1/2");
        }
        let info_cols: Vec<u32> = free[..k].to_vec();
        let mut info_mask = vec![false; n];
        for &c in &info_cols {
            info_mask[c as usize] = true;
        }
        let parity_rules = pivots
            .iter()
            .zip(&reduced)
            .map(|(&p, row)| {
                let deps = (0..n).filter(|&c| c != p && get(row, c) && info_mask[c]).map(|c| c as u32).collect();
                (p as u32, deps)
            })
            .collect();
        Ok(Self { n, m, k, seed, check_vars, var_edges, info_cols, parity_rules })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn check_rows(&self) -> Vec<Vec<u32>> {
        self.check_vars.chunks(DC).map(<[u32]>::to_vec).collect()
    }

    pub fn info_columns(&self) -> &[u32] {
        &self.info_cols
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return invalid(alloc::format!("LDPC message block must be {} bits, got {}", self.k, info.len()));
        }
        let mut cw = vec![0u8; self.n];
        for (&c, &b) in self.info_cols.iter().zip(info) {
            cw[c as usize] = b & 1;
        }
        for (p, deps) in &self.parity_rules {
            cw[*p as usize] = deps.iter().fold(0u8, |acc, &c| acc ^ cw[c as usize]);
        }
        Ok(cw)
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_vars.chunks(DC).all(|row| row.iter().fold(0u8, |a, &v| a ^ bits[v as usize]) == 0)
    }

    /// Normalized min-sum, flooding schedule. Positive LLR favours bit 0.
    pub fn decode(&self, llr: &[f64]) -> Result<Decoded> {
        if llr.len() != self.n {
            return invalid(alloc::format!("LDPC codeword must be {} values, got {}", self.n, llr.len()));
        }
        let mut hard: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        if self.syndrome_ok(&hard) {
            return Ok(Decoded { info: self.extract(&hard), converged: true, iterations: 0 });
        }
        let edges = self.check_vars.len();
        let mut v2c: Vec<f64> = self.check_vars.iter().map(|&v| llr[v as usize]).collect();
        let mut c2v = vec![0.0f64; edges];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            for row in 0..self.m {
                let base = row * DC;
                let msgs = &v2c[base..base + DC];
                let (mut min1, mut min2, mut idx) = (f64::INFINITY, f64::INFINITY, 0usize);
                let mut sign = false;
                for (i, &x) in msgs.iter().enumerate() {
                    let a = libm::fabs(x);
                    sign ^= x < 0.0;
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        idx = i;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for i in 0..DC {
                    let mag = NORMALIZATION * if i == idx { min2 } else { min1 };
                    let s = sign ^ (msgs[i] < 0.0);
                    c2v[base + i] = if s { -mag } else { mag };
                }
            }
            for v in 0..self.n {
                let es = &self.var_edges[v * DV..v * DV + DV];
                let total = llr[v] + es.iter().map(|&e| c2v[e as usize]).sum::<f64>();
                hard[v] = u8::from(total < 0.0);
                for &e in es {
                    v2c[e as usize] = total - c2v[e as usize];
                }
            }
            if self.syndrome_ok(&hard) {
                converged = true;
                break;
            }
        }
        Ok(Decoded { info: self.extract(&hard), converged, iterations })
    }

    fn extract(&self, cw: &[u8]) -> Vec<u8> {
        self.info_cols.iter().map(|&c| cw[c as usize]).collect()
    }
}

fn get(row: &[u64], c: usize) -> bool {
    (row[c / 64] >> (c % 64)) & 1 == 1
}

/// Reduced row echelon form over GF(2). Returns pivot columns and the
/// matching nonzero rows.
fn rref(n: usize, rows: &[Vec<u32>]) -> (Vec<usize>, Vec<Vec<u64>>) {
    let words = n.div_ceil(64);
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for &c in r {
                w[c as usize / 64] ^= 1 << (c % 64);
            }
            w
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == mat.len() {
            break;
        }
        let Some(p) = (r..mat.len()).find(|&i| get(&mat[i], c)) else { continue };
        mat.swap(r, p);
        let pivot_row = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i != r && get(row, c) {
                row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(c);
        r += 1;
    }
    mat.truncate(r);
    (pivots, mat)
}

fn peg_attempt(n: usize, m: usize, seed: u64, attempt: u64) -> Option<Vec<Vec<u32>>> {
    let mut rng: SimRng = rng_for(seed, &[0x9e6, attempt]);
    let mut check_adj: Vec<Vec<u32>> = vec![Vec::with_capacity(DC); m];
    let mut var_adj: Vec<Vec<u32>> = vec![Vec::with_capacity(DV); n];
    let mut seen_check = vec![u32::MAX; m];
    let mut seen_var = vec![u32::MAX; n];
    let mut stamp = 0u32;

    for v in 0..n {
        for _ in 0..DV {
            let open = |c: usize, check_adj: &Vec<Vec<u32>>, var_adj: &Vec<Vec<u32>>| {
                check_adj[c].len() < DC && !var_adj[v].contains(&(c as u32))
            };
            let candidates: Vec<usize> = if var_adj[v].is_empty() {
                (0..m).filter(|&c| open(c, &check_adj, &var_adj)).collect()
            } else {
                // BFS from v; keep the checks first reached at the deepest level,
                // or the unreachable ones if any exist.
                stamp += 1;
                let mut queue = VecDeque::new();
                seen_var[v] = stamp;
                let mut reached = 0usize;
                let mut last_level: Vec<usize> = Vec::new();
                for &c in &var_adj[v] {
                    if seen_check[c as usize] != stamp {
                        seen_check[c as usize] = stamp;
                        reached += 1;
                        last_level.push(c as usize);
                    }
                }
                queue.extend(last_level.iter().copied());
                loop {
                    let mut next_level = Vec::new();
                    while let Some(c) = queue.pop_front() {
                        for &u in &check_adj[c] {
                            if seen_var[u as usize] == stamp {
                                continue;
                            }
                            seen_var[u as usize] = stamp;
                            for &c2 in &var_adj[u as usize] {
                                if seen_check[c2 as usize] != stamp {
                                    seen_check[c2 as usize] = stamp;
                                    reached += 1;
                                    next_level.push(c2 as usize);
                                }
                            }
                        }
                    }
                    if next_level.is_empty() || reached == m {
                        break;
                    }
                    queue.extend(next_level.iter().copied());
                    last_level = next_level;
                }
                let unreached: Vec<usize> =
                    (0..m).filter(|&c| seen_check[c] != stamp && open(c, &check_adj, &var_adj)).collect();
                if !unreached.is_empty() {
                    unreached
                } else {
                    let deep: Vec<usize> = last_level.into_iter().filter(|&c| open(c, &check_adj, &var_adj)).collect();
                    if deep.is_empty() {
                        (0..m).filter(|&c| open(c, &check_adj, &var_adj)).collect()
                    } else {
                        deep
                    }
                }
            };
            let min_deg = candidates.iter().map(|&c| check_adj[c].len()).min()?;
            let best: Vec<usize> = candidates.into_iter().filter(|&c| check_adj[c].len() == min_deg).collect();
            let &c = best.choose(&mut rng)?;
            check_adj[c].push(v as u32);
            var_adj[v].push(c as u32);
        }
    }
    Some(check_adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small() -> LdpcCode {
        LdpcCode::peg(96, 5).unwrap()
    }

    #[test]
    fn degrees_are_regular() {
        let code = LdpcCode::standard();
        assert_eq!((code.n(), code.m(), code.k()), (1024, 512, 512));
        let rows = code.check_rows();
        assert!(rows.iter().all(|r| r.len() == DC));
        let mut deg = vec![0; 1024];
        rows.iter().flatten().for_each(|&v| deg[v as usize] += 1);
        assert!(deg.iter().all(|&d| d == DV));
    }

    #[test]
    fn codewords_satisfy_checks() {
        let code = small();
        let mut rng = rng_for(1, &[]);
        for _ in 0..20 {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
            let cw = code.encode(&info).unwrap();
            assert!(code.syndrome_ok(&cw));
            let llr: Vec<f64> = cw.iter().map(|&b| if b == 0 { 5.0 } else { -5.0 }).collect();
            let d = code.decode(&llr).unwrap();
            assert!(d.converged && d.iterations <= 2);
            assert_eq!(d.info, info);
        }
    }

    #[test]
    fn corrects_a_single_error() {
        let code = LdpcCode::standard();
        let info = vec![1u8; 512];
        let cw = code.encode(&info).unwrap();
        let mut llr: Vec<f64> = cw.iter().map(|&b| if b == 0 { 3.0 } else { -3.0 }).collect();
        llr[17] = -llr[17];
        let d = code.decode(&llr).unwrap();
        assert!(d.converged);
        assert_eq!(d.info, info);
    }

    #[test]
    fn wrong_lengths_rejected() {
        let code = small();
        assert!(code.encode(&[0; 3]).is_err());
        assert!(code.decode(&[0.0; 3]).is_err());
        assert!(LdpcCode::peg(101, 1).is_err());
    }

    #[test]
    fn rebuild_from_rows() {
        let code = small();
        let again = LdpcCode::from_check_rows(code.n(), code.seed(), &code.check_rows()).unwrap();
        assert_eq!(code, again);
    }
}
