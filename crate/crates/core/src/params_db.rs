//! Optimal parameter tables keyed by (P, N).
//!
//! # File format
//!
//! Plain text, one record per three lines:
//!
//! ```text
//! # optional comment lines, kept with the record that follows
//! 2 100 4.15 6 paper-table
//! 321.074 0.968096
//! 0.00993673 0.990063
//! ```
//!
//! The header holds `P N rho digits provenance`. The next line holds the P
//! weights ω_1 > … > ω_P and the last one the P fractions β. Values are
//! stored as written, so a row keeps every digit it was given. Blank lines
//! are ignored. Comments before the first record form the table preamble;
//! any other comment attaches to the record it precedes or interrupts.
//! `provenance` is `paper-table` or `computed`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::amplification::WeightSchedule;
use crate::optimizer::SolveReport;

/// Σβ tolerance for digitized rows, which carry six printed digits.
pub const PAPER_SUM_TOL: f64 = 1e-4;
/// Σβ tolerance for rows produced by the optimizer.
pub const COMPUTED_SUM_TOL: f64 = 1e-12;
/// Relative gap allowed between a printed ρ and Σωβ of a digitized row.
pub const PAPER_RHO_TOL: f64 = 5e-3;

const SHIPPED: &str = include_str!("../data/paper_tables.srj");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row P={p} N={n}: {msg}")]
    Invariant { p: usize, n: usize, msg: String },
    #[error("row P={p} N={n} already present")]
    Duplicate { p: usize, n: usize },
    #[error("no row for P={p} with N <= {n_target}")]
    NotFound { p: usize, n_target: usize },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    PaperTable,
    Computed,
}

impl FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-table" => Ok(Self::PaperTable),
            "computed" => Ok(Self::Computed),
            other => Err(format!("unknown provenance '{other}'")),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PaperTable => "paper-table",
            Self::Computed => "computed",
        })
    }
}

/// One stored schedule. The `*_text` fields are authoritative; the `f64`
/// vectors are parsed from them.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub p: usize,
    pub n: usize,
    pub rho_text: String,
    pub digits: u32,
    pub provenance: Provenance,
    pub omega_text: Vec<String>,
    pub beta_text: Vec<String>,
    pub notes: Vec<String>,
}

impl TableRow {
    pub fn computed(report: &SolveReport) -> Self {
        let s = &report.schedule;
        TableRow {
            p: s.levels(),
            n: s.n,
            rho_text: format!("{:.17e}", s.rho),
            digits: report.precision_digits_used,
            provenance: Provenance::Computed,
            omega_text: report.omega_text.clone(),
            beta_text: report.beta_text.clone(),
            notes: Vec::new(),
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.omega_text.iter().map(|t| t.parse().unwrap_or(f64::NAN)).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.beta_text.iter().map(|t| t.parse().unwrap_or(f64::NAN)).collect()
    }

    /// ρ as printed in the record.
    pub fn rho(&self) -> f64 {
        self.rho_text.parse().unwrap_or(f64::NAN)
    }

    /// The row as a schedule; ρ is recomputed as Σωβ.
    pub fn schedule(&self) -> WeightSchedule {
        WeightSchedule::unchecked(self.omegas(), self.betas(), self.n)
    }

    /// Schedule invariants, with Σβ and ρ tolerances chosen by provenance.
    pub fn validate(&self) -> Result<(), TableError> {
        let err = |msg: String| TableError::Invariant {
            p: self.p,
            n: self.n,
            msg,
        };
        if self.omega_text.len() != self.p || self.beta_text.len() != self.p {
            return Err(err(format!(
                "expected {} values, got {} omegas and {} betas",
                self.p,
                self.omega_text.len(),
                self.beta_text.len()
            )));
        }
        let s = self.schedule();
        if s.omegas.iter().chain(&s.betas).any(|v| !v.is_finite()) {
            return Err(err("non-numeric value".into()));
        }
        let sum_tol = match self.provenance {
            Provenance::PaperTable => PAPER_SUM_TOL,
            Provenance::Computed => COMPUTED_SUM_TOL,
        };
        s.validate(sum_tol).map_err(|e| err(e.to_string()))?;
        let rho_tol = match self.provenance {
            Provenance::PaperTable => PAPER_RHO_TOL,
            Provenance::Computed => 1e-10,
        };
        let printed = self.rho();
        if !((printed - s.rho).abs() <= rho_tol * s.rho) {
            return Err(err(format!("printed rho {printed} vs sum(omega*beta) {}", s.rho)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterTable {
    pub preamble: Vec<String>,
    rows: BTreeMap<(usize, usize), TableRow>,
}

impl ParameterTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The digitized published tables bundled with the crate.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("bundled table is well formed")
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.values()
    }

    pub fn get(&self, p: usize, n: usize) -> Option<&TableRow> {
        self.rows.get(&(p, n))
    }

    /// Every stored N for `p`, ascending.
    pub fn sizes(&self, p: usize) -> Vec<usize> {
        self.rows.range((p, 0)..=(p, usize::MAX)).map(|(k, _)| k.1).collect()
    }

    /// Adds a validated row. An existing (P, N) key is replaced only when
    /// `overwrite` is set.
    pub fn insert(&mut self, row: TableRow, overwrite: bool) -> Result<(), TableError> {
        row.validate()?;
        let key = (row.p, row.n);
        if !overwrite && self.rows.contains_key(&key) {
            return Err(TableError::Duplicate { p: row.p, n: row.n });
        }
        self.rows.insert(key, row);
        Ok(())
    }

    /// Inserts every row of `other`; stops at the first rejected row.
    pub fn merge(&mut self, other: &ParameterTable, overwrite: bool) -> Result<usize, TableError> {
        let mut added = 0;
        for row in other.rows() {
            self.insert(row.clone(), overwrite)?;
            added += 1;
        }
        Ok(added)
    }

    /// Row with the largest N ≤ `n_target` for `p`.
    pub fn lookup_row(&self, p: usize, n_target: usize) -> Result<&TableRow, TableError> {
        self.rows
            .range((p, 0)..=(p, n_target))
            .next_back()
            .map(|(_, r)| r)
            .ok_or(TableError::NotFound { p, n_target })
    }

    pub fn lookup(&self, p: usize, n_target: usize) -> Result<WeightSchedule, TableError> {
        self.lookup_row(p, n_target).map(TableRow::schedule)
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = ParameterTable::new();
        let mut notes: Vec<String> = Vec::new();
        // (header line number, row under construction, value lines read)
        let mut pending: Option<(usize, TableRow, usize)> = None;
        let mut seen_record = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                let c = c.strip_prefix(' ').unwrap_or(c).to_string();
                match (&mut pending, seen_record) {
                    (Some((_, row, _)), _) => row.notes.push(c),
                    (None, false) => table.preamble.push(c),
                    (None, true) => notes.push(c),
                }
                continue;
            }
            let perr = |msg: String| TableError::Parse { line: line_no, msg };
            match pending.take() {
                None => {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    if f.len() != 5 {
                        return Err(perr(format!(
                            "header needs `P N rho digits provenance`, got {} fields",
                            f.len()
                        )));
                    }
                    let p: usize = f[0].parse().map_err(|_| perr(format!("bad P '{}'", f[0])))?;
                    let n: usize = f[1].parse().map_err(|_| perr(format!("bad N '{}'", f[1])))?;
                    if p == 0 {
                        return Err(perr("P must be positive".into()));
                    }
                    f[2].parse::<f64>()
                        .map_err(|_| perr(format!("bad rho '{}'", f[2])))?;
                    let digits: u32 = f[3]
                        .parse()
                        .map_err(|_| perr(format!("bad digits '{}'", f[3])))?;
                    let provenance: Provenance = f[4].parse().map_err(perr)?;
                    seen_record = true;
                    let row = TableRow {
                        p,
                        n,
                        rho_text: f[2].to_string(),
                        digits,
                        provenance,
                        omega_text: Vec::new(),
                        beta_text: Vec::new(),
                        notes: std::mem::take(&mut notes),
                    };
                    pending = Some((line_no, row, 0));
                }
                Some((hl, mut row, k)) => {
                    let vals: Vec<String> = line.split_whitespace().map(str::to_string).collect();
                    if vals.len() != row.p {
                        return Err(perr(format!("expected {} values, got {}", row.p, vals.len())));
                    }
                    if let Some(bad) = vals.iter().find(|v| v.parse::<f64>().is_err()) {
                        return Err(perr(format!("bad number '{bad}'")));
                    }
                    if k == 0 {
                        row.omega_text = vals;
                        pending = Some((hl, row, 1));
                    } else {
                        row.beta_text = vals;
                        let key = (row.p, row.n);
                        row.validate().map_err(|e| match e {
                            TableError::Invariant { p, n, msg } => TableError::Invariant {
                                p,
                                n,
                                msg: format!("record at line {hl}: {msg}"),
                            },
                            other => other,
                        })?;
                        if table.rows.insert(key, row).is_some() {
                            return Err(TableError::Parse {
                                line: hl,
                                msg: format!("duplicate row P={} N={}", key.0, key.1),
                            });
                        }
                    }
                }
            }
        }
        if let Some((hl, _, _)) = pending {
            return Err(TableError::Parse {
                line: hl,
                msg: "record ends before its omega and beta lines".into(),
            });
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.preamble {
            out.push_str(&format!("# {c}\n"));
        }
        for r in self.rows() {
            for c in &r.notes {
                out.push_str(&format!("# {c}\n"));
            }
            out.push_str(&format!(
                "{} {} {} {} {}\n{}\n{}\n",
                r.p,
                r.n,
                r.rho_text,
                r.digits,
                r.provenance,
                r.omega_text.join(" "),
                r.beta_text.join(" ")
            ));
        }
        out
    }

    pub fn import(path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TableError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn export(&self, path: &Path) -> Result<(), TableError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| TableError::Io(format!("{}: {e}", path.display())))
    }
}
