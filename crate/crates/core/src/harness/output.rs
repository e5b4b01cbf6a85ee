//! Result rows and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::stats::{wilson_interval, Z_95};

/// Closed-form value a Monte Carlo frequency is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    Value(f64),
    /// Asymptotic `(lower, upper)` bounds, written as `lower;upper`.
    Bounds(f64, f64),
}

impl Reference {
    fn to_field(self) -> String {
        match self {
            Reference::None => String::new(),
            Reference::Value(v) => v.to_string(),
            Reference::Bounds(lo, hi) => format!("{lo};{hi}"),
        }
    }
}

/// One Monte Carlo frequency with its Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub kernel1: String,
    pub kernel2: String,
    pub r: f64,
    pub rho: f64,
    pub level: f64,
    pub h: f64,
    pub replicates: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reference: Reference,
    pub master_seed: u64,
}

impl ResultRow {
    pub const CSV_HEADER: &'static str = "experiment,kernel1,kernel2,R,rho,level,h,replicates,successes,p_hat,ci_low,ci_high,closed_form_reference,master_seed";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.kernel1,
            self.kernel2,
            self.r,
            self.rho,
            self.level,
            self.h,
            self.replicates,
            self.successes,
            self.p_hat,
            self.ci_low,
            self.ci_high,
            self.reference.to_field(),
            self.master_seed
        )
    }
}

/// Fills the counting columns of a row; the rest come from the caller.
#[derive(Debug, Clone)]
pub(crate) struct RowTemplate {
    pub kernel1: String,
    pub kernel2: String,
    pub rho: f64,
    pub master_seed: u64,
}

impl RowTemplate {
    #[allow(clippy::too_many_arguments)]
    pub fn row(
        &self,
        experiment: &str,
        r: f64,
        level: f64,
        h: f64,
        successes: u64,
        replicates: u64,
        reference: Reference,
    ) -> ResultRow {
        let (p_hat, ci_low, ci_high) = wilson_interval(successes, replicates, Z_95);
        ResultRow {
            experiment: experiment.to_string(),
            kernel1: self.kernel1.clone(),
            kernel2: self.kernel2.clone(),
            r,
            rho: self.rho,
            level,
            h,
            replicates,
            successes,
            p_hat,
            ci_low,
            ci_high,
            reference,
            master_seed: self.master_seed,
        }
    }
}

/// A free-form CSV table (KS distances, ratios, render statistics).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Value in `column` of the first row whose `key_column` equals `key`.
    pub fn lookup(&self, key_column: &str, key: &str, column: &str) -> Option<&str> {
        let k = self.header.iter().position(|h| h == key_column)?;
        let c = self.header.iter().position(|h| h == column)?;
        self.rows.iter().find(|r| r[k] == key).map(|r| r[c].as_str())
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub tables: Vec<Table>,
    /// Files written besides the CSVs (images, path dumps).
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(ResultRow::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.to_csv());
        }
        out
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Rows of one experiment id.
    pub fn select<'a>(&'a self, experiment: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.experiment == experiment)
    }

    /// Writes `<stem>.csv` plus `<stem>_<table>.csv` for each table; returns the paths.
    pub fn write_csv(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if !self.rows.is_empty() {
            let p = dir.join(format!("{stem}.csv"));
            fs::write(&p, self.rows_csv())?;
            written.push(p);
        }
        for t in &self.tables {
            let p = dir.join(format!("{stem}_{}.csv", t.name));
            fs::write(&p, t.to_csv())?;
            written.push(p);
        }
        Ok(written)
    }
}
