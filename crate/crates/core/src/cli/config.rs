//! Flat `key = value` settings merged from a config file and command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::CliError;
use crate::model::{BleeVariant, EstimatorId, LossSpec, ScenarioKind, SchemeConfig, MIN_ABS_P};

pub const KEYS: [&str; 20] = [
    "scenario",
    "scheme",
    "k",
    "n",
    "mu",
    "sigma",
    "m",
    "removals",
    "records",
    "p",
    "reps",
    "seed",
    "tables",
    "out_dir",
    "estimator",
    "baseline",
    "target",
    "blee_variant",
    "grid",
    "level",
];

pub const DEFAULT_REPS: u64 = 50_000;
pub const DEFAULT_SEED: u64 = 20_240_501;

/// Settings after merging. Later sources override earlier ones key by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse_file_text(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!(
                    "config line {}: expected `key = value`",
                    lineno + 1
                ))
            })?;
            let key = normalize_key(key);
            check_key(&key)
                .map_err(|e| CliError::Validation(format!("config line {}: {e}", lineno + 1)))?;
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = normalize_key(key);
        check_key(&key).map_err(CliError::Validation)?;
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Applies a flag if present.
    pub fn set_opt(&mut self, key: &str, value: Option<&str>) -> Result<(), CliError> {
        match value {
            Some(v) => self.set(key, v),
            None => Ok(()),
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// SHA-256 over the sorted settings, ignoring the output location.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in &self.values {
            if k == "out_dir" {
                continue;
            }
            h.update([0u8]);
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn reps(&self) -> Result<u64, CliError> {
        let reps = match self.get("reps") {
            Some(v) => parse_scalar::<u64>("reps", v)?,
            None => DEFAULT_REPS,
        };
        if reps < 2 {
            return Err(CliError::Validation(format!(
                "reps must be at least 2, got {reps}"
            )));
        }
        Ok(reps)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        match self.get("seed") {
            Some(v) => parse_scalar("seed", v),
            None => Ok(DEFAULT_SEED),
        }
    }

    pub fn out_dir(&self) -> &str {
        self.get("out_dir").unwrap_or("results")
    }

    pub fn p_list(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.get("p").map(parse_p_list).transpose()
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }

    pub fn scenario_kind(&self) -> Result<ScenarioKind, CliError> {
        match self.get("scenario") {
            Some(v) => v
                .parse()
                .map_err(|e: crate::Error| CliError::Validation(e.to_string())),
            None => Err(CliError::Validation("missing `scenario`".into())),
        }
    }

    pub fn blee_variant(&self) -> Result<Option<BleeVariant>, CliError> {
        match self.get("blee_variant") {
            None => Ok(None),
            Some(v) => match v.trim().to_ascii_lowercase().as_str() {
                "printed" | "paper-printed" => Ok(Some(BleeVariant::PaperPrinted)),
                "loss" | "loss-consistent" => Ok(Some(BleeVariant::LossConsistent)),
                other => Err(CliError::Validation(format!(
                    "unknown blee_variant `{other}` (expected printed or loss)"
                ))),
            },
        }
    }

    pub fn estimators(&self, key: &str) -> Result<Option<Vec<EstimatorId>>, CliError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let variant = self.blee_variant()?;
        v.split(',')
            .map(|s| {
                let e: EstimatorId = s
                    .parse()
                    .map_err(|e: crate::Error| CliError::Validation(e.to_string()))?;
                Ok(match (e, variant) {
                    (EstimatorId::Blee(_), Some(v)) => EstimatorId::Blee(v),
                    (EstimatorId::ImprovedKnownScale(_), Some(v)) => {
                        EstimatorId::ImprovedKnownScale(v)
                    }
                    _ => e,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Scheme built from `scheme`, `m`, `removals` and `records`.
    pub fn scheme(&self) -> Result<SchemeConfig, CliError> {
        let name = self
            .get("scheme")
            .unwrap_or("iid")
            .trim()
            .to_ascii_lowercase();
        match name.as_str() {
            "iid" | "complete" => Ok(SchemeConfig::Iid),
            "type2" | "type-ii" => {
                let m = self
                    .list("m")?
                    .ok_or_else(|| CliError::Validation("type2 scheme needs `m`".into()))?;
                Ok(SchemeConfig::TypeII { m })
            }
            "progressive" => {
                let text = self.get("removals").ok_or_else(|| {
                    CliError::Validation("progressive scheme needs `removals`".into())
                })?;
                let removals = text
                    .split(';')
                    .map(|group| parse_list("removals", group))
                    .collect::<Result<Vec<Vec<u32>>, _>>()?;
                Ok(SchemeConfig::ProgressiveII { removals })
            }
            "records" => {
                let r = self
                    .list("records")?
                    .ok_or_else(|| CliError::Validation("records scheme needs `records`".into()))?;
                Ok(SchemeConfig::Records { r })
            }
            other => Err(CliError::Validation(format!(
                "unknown scheme `{other}` (expected iid, type2, progressive or records)"
            ))),
        }
    }

    /// Sample-size pairs such as `5,5;8,10`.
    pub fn grid(&self) -> Result<Option<Vec<(u32, u32)>>, CliError> {
        let Some(text) = self.get("grid") else {
            return Ok(None);
        };
        text.split(';')
            .map(|pair| {
                let v: Vec<u32> = parse_list("grid", pair)?;
                match v.as_slice() {
                    [a, b] => Ok((*a, *b)),
                    _ => Err(CliError::Validation(format!(
                        "grid entry `{}` must be a pair n1,n2",
                        pair.trim()
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn check_key(key: &str) -> Result<(), String> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(format!("unknown key `{key}`"))
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse `{}` for `{key}`", v.trim())))
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::Validation(format!("`{key}` is empty")));
    }
    items.into_iter().map(|s| parse_scalar(key, s)).collect()
}

/// Comma-separated loss shapes; each must be a valid [`LossSpec`].
pub fn parse_p_list(v: &str) -> Result<Vec<f64>, CliError> {
    let ps: Vec<f64> = parse_list("p", v)?;
    for &p in &ps {
        LossSpec::new(p).map_err(|_| {
            CliError::Validation(format!(
                "loss shape p must be finite with |p| >= {MIN_ABS_P:e}, got {p}"
            ))
        })?;
    }
    Ok(ps)
}

/// Integer list that also accepts inclusive ranges such as `2..30`.
pub fn parse_n_list(v: &str) -> Result<Vec<u32>, CliError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u32 = parse_scalar("n", a)?;
            let b: u32 = parse_scalar("n", b.trim_start_matches('='))?;
            if a > b {
                return Err(CliError::Validation(format!("empty range `{item}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_scalar("n", item)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("`n` is empty".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut s =
            Settings::parse_file_text("# comment\np = 1, -1\nreps=100 # inline\nout-dir = x\n")
                .unwrap();
        assert_eq!(s.p_list().unwrap(), Some(vec![1.0, -1.0]));
        assert_eq!(s.reps().unwrap(), 100);
        s.set_opt("reps", Some("200")).unwrap();
        assert_eq!(s.reps().unwrap(), 200);
        assert_eq!(s.out_dir(), "x");
    }

    #[test]
    fn rejects_unknown_keys_and_zero_p() {
        assert!(Settings::parse_file_text("colour = red").is_err());
        assert!(Settings::parse_file_text("no equals sign").is_err());
        assert!(parse_p_list("1,0").is_err());
        assert!(parse_p_list("1e-12").is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = Settings::parse_file_text("p = 1\nout_dir = a").unwrap();
        let b = Settings::parse_file_text("p = 1\nout_dir = b").unwrap();
        let c = Settings::parse_file_text("p = 2\nout_dir = a").unwrap();
        assert_eq!(a.hash("table"), b.hash("table"));
        assert_ne!(a.hash("table"), c.hash("table"));
    }

    #[test]
    fn structured_values() {
        let s = Settings::parse_file_text(
            "scheme = progressive\nremovals = 0,2;0,0,1\ngrid = 5,5;8,10",
        )
        .unwrap();
        assert_eq!(
            s.scheme().unwrap(),
            SchemeConfig::ProgressiveII {
                removals: vec![vec![0, 2], vec![0, 0, 1]]
            }
        );
        assert_eq!(s.grid().unwrap(), Some(vec![(5, 5), (8, 10)]));
        assert_eq!(parse_n_list("2..4,7").unwrap(), vec![2, 3, 4, 7]);
    }
}
