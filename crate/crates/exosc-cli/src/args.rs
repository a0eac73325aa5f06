//! Flag parsing: `--key value` pairs after a subcommand, optionally seeded
//! from a flat key=value config file (flags override the file). Unknown keys
//! are rejected so typos surface as validation errors instead of defaults.

use std::collections::BTreeMap;

use exosc::models::{CorbeillerParams, Epsilon, HesterParams, Model};

#[derive(Debug, Clone)]
pub struct Args {
    values: BTreeMap<String, String>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

pub type ArgResult<T> = Result<T, String>;

impl Args {
    /// Parse `--key value` pairs; `--config FILE` merges file entries first.
    pub fn parse(raw: &[String]) -> ArgResult<Self> {
        let mut flags = BTreeMap::new();
        let mut i = 0;
        while i < raw.len() {
            let key = raw[i]
                .strip_prefix("--")
                .ok_or_else(|| format!("expected a --flag, got '{}'", raw[i]))?;
            let value = raw
                .get(i + 1)
                .ok_or_else(|| format!("flag --{key} is missing its value"))?;
            flags.insert(key.to_string(), value.clone());
            i += 2;
        }
        let mut values = BTreeMap::new();
        if let Some(path) = flags.get("config") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {path}: {e}"))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("{path}:{}: expected key=value", ln + 1))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        values.extend(flags);
        Ok(Self { values, consumed: Default::default() })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.consumed.borrow_mut().insert(key.to_string());
        self.values.get(key).cloned()
    }

    pub fn f64_opt(&self, key: &str) -> ArgResult<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("--{key} expects a number, got '{v}'")),
        }
    }

    pub fn f64_req(&self, key: &str) -> ArgResult<f64> {
        self.f64_opt(key)?.ok_or_else(|| format!("missing required flag --{key}"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> ArgResult<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> ArgResult<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| format!("--{key} expects an integer, got '{v}'")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> ArgResult<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn string_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or_else(|| default.to_string())
    }

    /// After a command consumed what it understands, anything left is a typo.
    pub fn reject_unknown(&self) -> ArgResult<()> {
        let consumed = self.consumed.borrow();
        let unknown: Vec<&String> =
            self.values.keys().filter(|k| !consumed.contains(*k) && *k != "config").collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("unknown option(s): {}", unknown.iter().map(|s| format!("--{s}")).collect::<Vec<_>>().join(", ")))
        }
    }

    /// Model from --system plus its parameter flags.
    pub fn model(&self) -> ArgResult<Model> {
        let system = self
            .get("system")
            .ok_or_else(|| "missing required flag --system (hester | corbeiller)".to_string())?;
        match system.as_str() {
            "hester" => {
                let p = HesterParams::new(
                    self.f64_req("alpha")?,
                    self.f64_req("mu")?,
                    self.f64_req("kappa")?,
                    self.f64_req("gamma")?,
                )
                .map_err(|e| e.to_string())?;
                Ok(Model::Hester(p))
            }
            "corbeiller" => {
                let p = CorbeillerParams::new(self.f64_req("a")?, self.f64_req("b")?)
                    .map_err(|e| e.to_string())?;
                Ok(Model::Corbeiller(p))
            }
            other => Err(format!("--system must be hester or corbeiller, got '{other}'")),
        }
    }

    pub fn eps(&self) -> ArgResult<Epsilon> {
        Epsilon::new(self.f64_req("eps")?).map_err(|e| e.to_string())
    }

    pub fn eps_list(&self) -> ArgResult<Vec<f64>> {
        let raw = self.get("eps-list").ok_or_else(|| "missing required flag --eps-list".to_string())?;
        raw.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad eps value '{s}' in --eps-list")))
            .collect()
    }
}

/// Grid specification `lo:hi:n` or a plain number (grid of one).
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub values: Vec<f64>,
}

pub fn parse_grid(raw: &str) -> ArgResult<GridSpec> {
    if let Ok(v) = raw.parse::<f64>() {
        return Ok(GridSpec { values: vec![v] });
    }
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected a number or lo:hi:n, got '{raw}'"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid start '{}'", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid end '{}'", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
    if n == 0 {
        return Err("grid count must be positive".into());
    }
    let values = if n == 1 {
        vec![lo]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    Ok(GridSpec { values })
}
