//! Line-oriented experiment configuration: `section.key=value`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{KernelBuilder, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    CrossingScan,
    WindowScan,
    GumbelStudy,
    ExtremesStudy,
    BlockingStudy,
    CertificateAudit,
    Slice3D,
    Render,
    Sample,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::CrossingScan,
        Self::WindowScan,
        Self::GumbelStudy,
        Self::ExtremesStudy,
        Self::BlockingStudy,
        Self::CertificateAudit,
        Self::Slice3D,
        Self::Render,
        Self::Sample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CrossingScan => "crossing_scan",
            Self::WindowScan => "window_scan",
            Self::GumbelStudy => "gumbel_study",
            Self::ExtremesStudy => "extremes_study",
            Self::BlockingStudy => "blocking_study",
            Self::CertificateAudit => "certificate_audit",
            Self::Slice3D => "slice3d",
            Self::Render => "render",
            Self::Sample => "sample",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Everything an experiment run needs. Defaults are the acceptance budgets
/// for the chosen kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// `kernel1`, `kernel2` and optionally `kernel3`.
    pub kernels: Vec<KernelSpec>,
    pub eps: f64,
    /// `R` or `T` values, strictly increasing.
    pub sizes: Vec<f64>,
    pub levels: Vec<f64>,
    pub h_values: Vec<f64>,
    pub rho: f64,
    pub replicates: u64,
    pub master_seed: u64,
    pub workers: usize,
    /// Crossing scan: also run the anisotropic window `R × ρR^{K1(0)/K2(0)}`.
    pub rescaled: bool,
    /// Slice study: length of the search window for `g3`.
    pub search_length: f64,
    /// Blocking study: ladder rungs `n` (empty to skip).
    pub ladder_rungs: Vec<u32>,
    pub ladder_level: f64,
    pub ladder_replicates: u64,
    /// Certificate audit: horizon and budget of the blocking-rectangle part.
    pub blocking_t: f64,
    pub blocking_replicates: u64,
    /// Extremes study: exponent of the variance ratio and tail abscissae.
    pub theta: f64,
    pub tail_x: Vec<f64>,
    /// Render: side of the square window in grid points.
    pub render_size: usize,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let g = KernelSpec::standard_gaussian();
        let mut c = Self {
            kind,
            kernels: vec![g, g],
            eps: 0.25,
            sizes: vec![64.0, 128.0, 256.0],
            levels: vec![0.0],
            h_values: vec![0.0],
            rho: 1.0,
            replicates: 500,
            master_seed: 20_240_601,
            workers: 1,
            rescaled: false,
            search_length: 1e4,
            ladder_rungs: Vec::new(),
            ladder_level: 0.5,
            ladder_replicates: 2000,
            blocking_t: 2.0,
            blocking_replicates: 10_000,
            theta: 0.5,
            tail_x: vec![1.0, 2.0, 3.0, 4.0],
            render_size: 1024,
        };
        match kind {
            ExperimentKind::CrossingScan => {}
            ExperimentKind::Sample => {
                c.sizes = vec![64.0];
                c.replicates = 1;
            }
            ExperimentKind::WindowScan => {
                c.sizes = vec![128.0, 512.0];
                c.h_values = vec![0.0, 1.0, 2.0, 3.0];
            }
            ExperimentKind::GumbelStudy => {
                c.kernels = vec![g];
                c.eps = 0.125;
                c.sizes = vec![256.0, 1024.0, 4096.0];
                c.levels = vec![-1.0, 0.0, 1.0, 2.0];
                c.replicates = 2000;
            }
            ExperimentKind::ExtremesStudy => {
                c.kernels = vec![g];
                c.sizes = vec![256.0, 1024.0, 4096.0];
                c.replicates = 10_000;
            }
            ExperimentKind::BlockingStudy => {
                c.sizes = vec![256.0, 512.0];
                c.replicates = 200_000;
                c.ladder_rungs = (4..=9).collect();
            }
            ExperimentKind::CertificateAudit => {
                c.sizes = vec![256.0];
                c.h_values = vec![0.0, 1.0, 2.0];
                c.replicates = 1000;
            }
            ExperimentKind::Slice3D => {
                c.kernels = vec![g, g, g];
                c.sizes = vec![256.0];
                c.levels = vec![-0.5];
                c.replicates = 200;
            }
            ExperimentKind::Render => {
                c.replicates = 1;
            }
        }
        c
    }

    /// Parses a config file. `default_kind` applies when the file has no
    /// `experiment.kind` line; defaults for the resulting kind are filled in
    /// before the file's values are applied.
    pub fn parse(text: &str, default_kind: ExperimentKind) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected section.key=value", n + 1)))?;
            let (section, key) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("line {}: key needs a section prefix", n + 1)))?;
            entries.push((n + 1, section.to_string(), key.to_string(), value.trim().to_string()));
        }

        let mut kind = default_kind;
        for (_, section, key, value) in &entries {
            if section == "experiment" && key == "kind" {
                kind = value.parse()?;
            }
        }
        let mut config = Self::defaults(kind);
        let mut builders: Vec<Option<KernelBuilder>> = vec![None, None, None];
        for (line, section, key, value) in &entries {
            let at = |e: Error| Error::Config(format!("line {line}: {e}"));
            match section.as_str() {
                "kernel1" | "kernel2" | "kernel3" => {
                    let slot = section.as_bytes()[6] as usize - b'1' as usize;
                    builders[slot]
                        .get_or_insert_with(KernelBuilder::default)
                        .set(key, value)
                        .map_err(at)?;
                }
                "grid" => match key.as_str() {
                    "eps" => config.eps = number(value).map_err(at)?,
                    other => return Err(at(Error::Config(format!("unknown key `grid.{other}`")))),
                },
                "experiment" => config.set(key, value).map_err(at)?,
                other => return Err(at(Error::Config(format!("unknown section `{other}`")))),
            }
        }
        for (slot, builder) in builders.iter().enumerate() {
            if let Some(b) = builder {
                let spec = b.build().map_err(|e| Error::Config(e.to_string()))?;
                if slot < config.kernels.len() {
                    config.kernels[slot] = spec;
                } else if slot == config.kernels.len() {
                    config.kernels.push(spec);
                } else {
                    return Err(Error::Config(format!("kernel{} given without kernel{slot}", slot + 1)));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kind" => {}
            "sizes" => self.sizes = list(value)?,
            "levels" => self.levels = list(value)?,
            "h_values" => self.h_values = list(value)?,
            "rho" => self.rho = number(value)?,
            "replicates" => self.replicates = integer(value)?,
            "master_seed" => self.master_seed = integer(value)?,
            "workers" => self.workers = integer(value)?,
            "rescaled" => {
                self.rescaled = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`rescaled` expects true or false, got `{value}`")))?
            }
            "search_length" => self.search_length = number(value)?,
            "ladder_rungs" => {
                self.ladder_rungs = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|v| integer(v.trim())).collect::<Result<_>>()?
                }
            }
            "ladder_level" => self.ladder_level = number(value)?,
            "ladder_replicates" => self.ladder_replicates = integer(value)?,
            "blocking_t" => self.blocking_t = number(value)?,
            "blocking_replicates" => self.blocking_replicates = integer(value)?,
            "theta" => self.theta = number(value)?,
            "tail_x" => self.tail_x = list(value)?,
            "render_size" => self.render_size = integer(value)?,
            other => return Err(Error::Config(format!("unknown key `experiment.{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.replicates < 1 {
            return fail("replicates must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return fail(format!("grid.eps must be positive, got {}", self.eps));
        }
        if self.workers < 1 {
            return fail("workers must be at least 1".into());
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sizes must be nonempty and strictly increasing".into());
        }
        if self.kernels.len() < 2 && !matches!(self.kind, ExperimentKind::GumbelStudy | ExperimentKind::ExtremesStudy) {
            return fail(format!("{} needs kernel1 and kernel2", self.kind));
        }
        if !(self.rho > 0.0) {
            return fail(format!("rho must be positive, got {}", self.rho));
        }
        if self.ladder_replicates < 1 || self.blocking_replicates < 1 {
            return fail("replicate budgets must be at least 1".into());
        }
        match self.kind {
            ExperimentKind::WindowScan => {
                let (k1, k2) = (self.kernels[0].variance(), self.kernels[1].variance());
                if k1 != k2 {
                    return fail(format!("window scan needs K1(0) = K2(0), got {k1} and {k2}"));
                }
            }
            ExperimentKind::GumbelStudy | ExperimentKind::ExtremesStudy => {
                if self.sizes[0] <= 1.0 {
                    return fail("horizons T must exceed 1".into());
                }
            }
            ExperimentKind::Slice3D => {
                if self.kernels.len() != 3 {
                    return fail(format!("slice3d needs exactly three kernels, got {}", self.kernels.len()));
                }
                if self.levels.is_empty() || self.levels.iter().any(|&l| !(l < 0.0)) {
                    return fail("slice3d levels must be negative".into());
                }
            }
            ExperimentKind::Render => {
                if self.render_size < 2 {
                    return fail("render_size must be at least 2".into());
                }
            }
            ExperimentKind::BlockingStudy | ExperimentKind::CertificateAudit => {
                if self.sizes[0] <= 1.0 {
                    return fail("horizons T must exceed 1".into());
                }
            }
            ExperimentKind::CrossingScan | ExperimentKind::Sample => {}
        }
        if self.kernels.len() > 3 {
            return fail("at most three kernels are supported".into());
        }
        if self.kind != ExperimentKind::Slice3D && self.kernels.len() == 3 {
            return fail(format!("{} does not use kernel3", self.kind));
        }
        Ok(())
    }

    /// The config as parseable text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, k) in self.kernels.iter().enumerate() {
            for line in k.to_kv_lines().lines() {
                out.push_str(&format!("kernel{}.{line}\n", i + 1));
            }
        }
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        out.push_str(&format!("grid.eps={}\n", self.eps));
        out.push_str(&format!("experiment.kind={}\n", self.kind));
        out.push_str(&format!("experiment.sizes={}\n", join(&self.sizes)));
        out.push_str(&format!("experiment.levels={}\n", join(&self.levels)));
        out.push_str(&format!("experiment.h_values={}\n", join(&self.h_values)));
        out.push_str(&format!("experiment.rho={}\n", self.rho));
        out.push_str(&format!("experiment.replicates={}\n", self.replicates));
        out.push_str(&format!("experiment.master_seed={}\n", self.master_seed));
        out.push_str(&format!("experiment.workers={}\n", self.workers));
        out.push_str(&format!("experiment.rescaled={}\n", self.rescaled));
        out.push_str(&format!("experiment.search_length={}\n", self.search_length));
        let rungs: Vec<String> = self.ladder_rungs.iter().map(u32::to_string).collect();
        out.push_str(&format!("experiment.ladder_rungs={}\n", rungs.join(",")));
        out.push_str(&format!("experiment.ladder_level={}\n", self.ladder_level));
        out.push_str(&format!("experiment.ladder_replicates={}\n", self.ladder_replicates));
        out.push_str(&format!("experiment.blocking_t={}\n", self.blocking_t));
        out.push_str(&format!("experiment.blocking_replicates={}\n", self.blocking_replicates));
        out.push_str(&format!("experiment.theta={}\n", self.theta));
        out.push_str(&format!("experiment.tail_x={}\n", join(&self.tail_x)));
        out.push_str(&format!("experiment.render_size={}\n", self.render_size));
        out
    }
}

fn number(v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| Error::Config(format!("not a number: `{v}`")))
}

fn integer<T: FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("not a nonnegative integer: `{v}`")))
}

fn list(v: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| number(x.trim())).collect()
}
