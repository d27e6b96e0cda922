//! Codebook files and run configuration documents.
//!
//! Codebooks are stored as pretty-printed JSON with complex numbers written
//! as `[re, im]` pairs. Floats are printed in shortest round-trip form, so
//! reading a file back reproduces every `f64` bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::factor_graph::IndicatorMatrix;
use crate::group_optimizer::ConstellationGroup;
use crate::progressive_builder::Codebook;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance of the per-user energy check.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

/// How the codebooks of a file were produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub search_mode: String,
    pub tool_version: String,
    pub objectives_per_re: Vec<f64>,
    /// Fully resolved settings of the producing run.
    #[serde(default)]
    pub config: serde_json::Value,
}

/// On-disk codebook document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    pub schema_version: u32,
    #[serde(rename = "F")]
    pub indicator: Vec<String>,
    #[serde(rename = "M")]
    pub m: usize,
    pub d_f: usize,
    pub d_v: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub channel: ChannelSpec,
    pub design_snr_db: f64,
    /// `codebooks[user][symbol][re] = [re, im]`.
    pub codebooks: Vec<Vec<Vec<[f64; 2]>>>,
    /// Sub-constellations the codebooks were built from, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<Vec<[f64; 2]>>>,
    pub provenance: Provenance,
}

fn pair(x: Complex64) -> [f64; 2] {
    [x.re, x.im]
}

fn complex([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

impl CodebookFile {
    pub fn new(
        f: &IndicatorMatrix,
        codebooks: &[Codebook],
        channel: ChannelSpec,
        design_snr_db: f64,
        group: Option<&ConstellationGroup>,
        provenance: Provenance,
    ) -> Result<Self> {
        let file = CodebookFile {
            schema_version: SCHEMA_VERSION,
            indicator: f.to_bitstrings(),
            m: codebooks.first().map(Codebook::size).unwrap_or(0),
            d_f: f.df(),
            d_v: f.dv(),
            k: f.res(),
            l: f.users(),
            channel,
            design_snr_db,
            codebooks: codebooks
                .iter()
                .map(|cb| cb.codewords.iter().map(|c| c.iter().copied().map(pair).collect()).collect())
                .collect(),
            group: group.map(|g| g.subconstellations().iter().map(|s| s.iter().copied().map(pair).collect()).collect()),
            provenance,
        };
        file.validate()?;
        Ok(file)
    }

    pub fn indicator_matrix(&self) -> Result<IndicatorMatrix> {
        IndicatorMatrix::from_bitstrings(&self.indicator)
    }

    pub fn to_codebooks(&self) -> Vec<Codebook> {
        self.codebooks
            .iter()
            .enumerate()
            .map(|(user, cws)| Codebook {
                user,
                codewords: cws.iter().map(|c| c.iter().copied().map(complex).collect()).collect(),
            })
            .collect()
    }

    pub fn constellation_group(&self) -> Result<Option<ConstellationGroup>> {
        self.group
            .as_ref()
            .map(|g| ConstellationGroup::new(g.iter().map(|s| s.iter().copied().map(complex).collect()).collect()))
            .transpose()
    }

    /// Checks dimensions and the codebook invariants: sparsity pattern,
    /// energy normalization (average codeword energy `d_v`) and distinct
    /// codewords within every codebook.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema { found: self.schema_version, supported: SCHEMA_VERSION });
        }
        let f = self.indicator_matrix().map_err(|e| Error::Invariant { name: "indicator matrix", detail: e.to_string() })?;
        let dims = |detail: String| Error::Invariant { name: "dimensions", detail };
        if (f.res(), f.users(), f.dv(), f.df()) != (self.k, self.l, self.d_v, self.d_f) {
            return Err(dims(format!(
                "declared K={}, L={}, d_v={}, d_f={} but F gives K={}, L={}, d_v={}, d_f={}",
                self.k,
                self.l,
                self.d_v,
                self.d_f,
                f.res(),
                f.users(),
                f.dv(),
                f.df()
            )));
        }
        if self.m < 2 {
            return Err(dims(format!("M = {} must be at least 2", self.m)));
        }
        if self.codebooks.len() != self.l {
            return Err(dims(format!("{} codebooks for L = {}", self.codebooks.len(), self.l)));
        }
        self.channel.validated()?;
        if !self.design_snr_db.is_finite() {
            return Err(dims("design SNR is not finite".into()));
        }

        for (user, cws) in self.codebooks.iter().enumerate() {
            if cws.len() != self.m {
                return Err(dims(format!("user {user} has {} codewords, expected M = {}", cws.len(), self.m)));
            }
            for (n, c) in cws.iter().enumerate() {
                if c.len() != self.k {
                    return Err(dims(format!("user {user} codeword {n} has length {}", c.len())));
                }
                if c.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Invariant { name: "finite values", detail: format!("user {user} codeword {n}") });
                }
                for (k, x) in c.iter().enumerate() {
                    if !f.get(k, user) && *x != [0.0, 0.0] {
                        return Err(Error::Invariant {
                            name: "sparsity pattern",
                            detail: format!("user {user} codeword {n} is non-zero on RE {k}, outside F"),
                        });
                    }
                }
            }
            let energy: f64 = cws.iter().flatten().map(|x| x[0] * x[0] + x[1] * x[1]).sum::<f64>() / self.m as f64;
            if (energy - self.d_v as f64).abs() > ENERGY_TOLERANCE * self.d_v as f64 {
                return Err(Error::Invariant {
                    name: "energy normalization",
                    detail: format!("user {user} has average codeword energy {energy}, expected {}", self.d_v),
                });
            }
            for a in 0..self.m {
                for b in a + 1..self.m {
                    if cws[a] == cws[b] {
                        return Err(Error::Invariant {
                            name: "distinct codewords",
                            detail: format!("user {user} codewords {a} and {b} coincide"),
                        });
                    }
                }
            }
        }
        if let Some(group) = self.constellation_group()? {
            if group.m() != self.m || group.df() != self.d_f {
                return Err(dims("constellation group does not match M x d_f".into()));
            }
        }
        Ok(())
    }

    /// Canonical serialized form, ending in a newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: Option<u32>,
        }
        let version: Version = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        match version.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(found) => return Err(Error::Schema { found, supported: SCHEMA_VERSION }),
            None => return Err(Error::Format("missing schema_version".into())),
        }
        let file: CodebookFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }
}

pub fn write_codebook(path: &Path, file: &CodebookFile) -> Result<()> {
    file.validate()?;
    write_text(path, &file.to_json()?)
}

pub fn read_codebook(path: &Path) -> Result<CodebookFile> {
    CodebookFile::from_json(&read_text(path)?)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Declarative form of the command-line flags. Every key is optional and
/// unknown keys are rejected. Command-line flags take precedence.
///
/// ```toml
/// channel = "rician"
/// sigma2 = 0.5
/// u = 2.0
/// snr = "0:2:20"
/// detector = "mpa"
/// seed = 7
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `rayleigh`, `rician` or `nakagami`.
    pub channel: Option<String>,
    pub sigma2: Option<f64>,
    pub u: Option<f64>,
    #[serde(alias = "m")]
    pub nakagami_m: Option<f64>,
    pub omega: Option<f64>,
    /// `start:step:stop` in dB, or a comma-separated list.
    pub snr: Option<String>,
    /// `ml` or `mpa`.
    pub detector: Option<String>,
    pub mpa_iterations: Option<usize>,
    pub mpa_damping: Option<f64>,
    pub seed: Option<u64>,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
    pub workers: Option<usize>,
    pub batch_size: Option<u64>,
    pub restarts: Option<usize>,
    pub design_snr_db: Option<f64>,
    /// `auto`, `exhaustive` or `binary-switching`.
    pub search_mode: Option<String>,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string().lines().next().unwrap_or("").to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?)
    }
}

/// Parses `start:step:stop` (inclusive) or `a,b,c` into dB values.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("invalid SNR list {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    let list = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad()),
    };
    if list.is_empty() || list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad());
    }
    Ok(list)
}
