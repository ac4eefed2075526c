//! `[experiment]` blocks of `key = value` lines.

use std::fmt;
use std::str::FromStr;

use hardy_core::{Exponents64, Interval64, MonotoneExponents64, Weight64};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

fn at(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Iterated,
    Monotone,
    Discrete,
    Lemmas,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "iterated" => Ok(Mode::Iterated),
            "monotone" => Ok(Mode::Monotone),
            "discrete" => Ok(Mode::Discrete),
            "lemmas" => Ok(Mode::Lemmas),
            _ => Err(format!("unknown mode `{s}` (expected iterated, monotone, discrete or lemmas)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Iterated => "iterated",
            Mode::Monotone => "monotone",
            Mode::Discrete => "discrete",
            Mode::Lemmas => "lemmas",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub id: String,
    pub mode: Mode,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub u: Weight64,
    pub v: Weight64,
    pub w: Weight64,
    pub grid_size: usize,
    pub trunc_depth: i64,
    pub search_budget: usize,
    pub seed: u64,
    pub tol: f64,
    pub scale_u: f64,
    pub scale_v: f64,
    pub scale_w: f64,
    pub bound_upper: f64,
    pub bound_lower: f64,
    pub divergence_floor: f64,
    pub lemma_draws: usize,
    pub lemma_bound: f64,
    /// First line of the block, for error messages.
    pub line: usize,
}

impl Experiment {
    pub fn new(line: usize) -> Self {
        let one = Weight64::constant(1.0);
        Self {
            id: String::new(),
            mode: Mode::Iterated,
            p: 2.0,
            q: 2.0,
            r: 2.0,
            a: 0.0,
            b: 1.0,
            u: one.clone(),
            v: one.clone(),
            w: one,
            grid_size: 2048,
            trunc_depth: 20,
            search_budget: 20_000,
            seed: 24_301,
            tol: 1e-8,
            scale_u: 1.0,
            scale_v: 1.0,
            scale_w: 1.0,
            bound_upper: 16.0,
            bound_lower: 256.0,
            divergence_floor: 1e3,
            lemma_draws: 20,
            lemma_bound: 64.0,
            line,
        }
    }

    pub fn interval(&self) -> Interval64 {
        Interval64::new(self.a, self.b).expect("validated at parse time")
    }

    pub fn exponents(&self) -> hardy_core::Result<Exponents64> {
        Exponents64::new(self.p, self.q, self.r)
    }

    pub fn monotone_exponents(&self) -> hardy_core::Result<MonotoneExponents64> {
        MonotoneExponents64::new(self.p, self.q)
    }

    /// `u`, `v`, `w` with their scale factors applied.
    pub fn weights(&self) -> (Weight64, Weight64, Weight64) {
        (self.u.scaled(self.scale_u), self.v.scaled(self.scale_v), self.w.scaled(self.scale_w))
    }

    /// Sets a numeric field by name.
    pub fn set_numeric(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let count = |v: f64| v.max(0.0).round() as usize;
        match name {
            "p" => self.p = value,
            "q" => self.q = value,
            "r" => self.r = value,
            "a" => self.a = value,
            "b" => self.b = value,
            "grid_size" => self.grid_size = count(value),
            "trunc_depth" => self.trunc_depth = value.round() as i64,
            "search_budget" => self.search_budget = count(value),
            "seed" => self.seed = value.max(0.0) as u64,
            "tol" => self.tol = value,
            "scale_u" => self.scale_u = value,
            "scale_v" => self.scale_v = value,
            "scale_w" => self.scale_w = value,
            "bound_upper" => self.bound_upper = value,
            "bound_lower" => self.bound_lower = value,
            "divergence_floor" => self.divergence_floor = value,
            "lemma_draws" => self.lemma_draws = count(value),
            "lemma_bound" => self.lemma_bound = value,
            _ => return Err(ConfigError::UnknownParameter(name.to_string())),
        }
        Ok(())
    }

    fn validate(&self, lines: &Lines) -> Result<(), ConfigError> {
        if self.id.is_empty() {
            return Err(at(self.line, "experiment has no `id`"));
        }
        Interval64::new(self.a, self.b).map_err(|e| at(lines.get("b").or(lines.get("a")).unwrap_or(self.line), e.to_string()))?;
        let exp_line = lines.get("p").unwrap_or(self.line);
        match self.mode {
            Mode::Monotone => {
                self.monotone_exponents().map_err(|e| at(exp_line, e.to_string()))?;
            }
            _ => {
                self.exponents().map_err(|e| at(exp_line, e.to_string()))?;
            }
        }
        for (key, w) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            w.validate().map_err(|e| at(lines.get(key).unwrap_or(self.line), e.to_string()))?;
        }
        for (key, s) in [("scale_u", self.scale_u), ("scale_v", self.scale_v), ("scale_w", self.scale_w)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(at(lines.get(key).unwrap_or(self.line), format!("{key} must be positive")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(at(lines.get("tol").unwrap_or(self.line), "tol must be positive"));
        }
        Ok(())
    }

    pub fn revalidate(&self) -> Result<(), ConfigError> {
        self.validate(&Lines::default())
    }
}

/// Line numbers of the keys seen in one block.
#[derive(Default)]
struct Lines(Vec<(String, usize)>);

impl Lines {
    fn get(&self, key: &str) -> Option<usize> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, l)| *l)
    }
}

fn number(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")),
    }
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| number(x.trim())).collect()
}

/// `const c`, `power c alpha beta`, `piecewise breaks=... values=...`, `tabulated grid=... values=...`.
pub fn parse_weight(s: &str) -> Result<Weight64, String> {
    let mut parts = s.split_whitespace();
    let kind = parts.next().ok_or("empty weight descriptor")?;
    let rest: Vec<&str> = parts.collect();
    let named = |key: &str| -> Result<Vec<f64>, String> {
        let tag = format!("{key}=");
        let v = rest
            .iter()
            .find_map(|t| t.strip_prefix(tag.as_str()))
            .ok_or(format!("`{kind}` weight needs `{key}=`"))?;
        list(v)
    };
    let w = match kind {
        "const" => {
            let [c] = rest[..] else {
                return Err("`const` takes one value".into());
            };
            Weight64::constant(number(c)?)
        }
        "power" => {
            let [c, alpha, beta] = rest[..] else {
                return Err("`power` takes c, alpha and beta".into());
            };
            Weight64::power_law(number(c)?, number(alpha)?, number(beta)?)
        }
        "piecewise" => Weight64::piecewise_constant(named("breaks")?, named("values")?).map_err(|e| e.to_string())?,
        "tabulated" => Weight64::tabulated(named("grid")?, named("values")?).map_err(|e| e.to_string())?,
        _ => return Err(format!("unknown weight kind `{kind}`")),
    };
    Ok(w)
}

fn assign(exp: &mut Experiment, key: &str, value: &str) -> Result<(), String> {
    match key {
        "id" => exp.id = value.to_string(),
        "mode" => exp.mode = value.parse()?,
        "u" => exp.u = parse_weight(value)?,
        "v" => exp.v = parse_weight(value)?,
        "w" => exp.w = parse_weight(value)?,
        _ => {
            let x = number(value)?;
            exp.set_numeric(key, x).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

/// Parses a campaign. Blank lines and `#` comments are ignored.
pub fn parse(text: &str) -> Result<Vec<Experiment>, ConfigError> {
    let mut out = Vec::new();
    let mut cur: Option<(Experiment, Lines)> = None;
    let finish = |cur: Option<(Experiment, Lines)>, out: &mut Vec<Experiment>| -> Result<(), ConfigError> {
        if let Some((exp, lines)) = cur {
            exp.validate(&lines)?;
            if out.iter().any(|e: &Experiment| e.id == exp.id) {
                return Err(at(exp.line, format!("duplicate experiment id `{}`", exp.id)));
            }
            out.push(exp);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if s.starts_with('[') {
            if s != "[experiment]" {
                return Err(at(line, format!("unknown section `{s}`")));
            }
            finish(cur.take(), &mut out)?;
            cur = Some((Experiment::new(line), Lines::default()));
            continue;
        }
        let Some((exp, lines)) = cur.as_mut() else {
            return Err(at(line, "key outside of an [experiment] block"));
        };
        let (key, value) = s.split_once('=').ok_or_else(|| at(line, format!("expected `key = value`, got `{s}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if lines.get(key).is_some() {
            return Err(at(line, format!("`{key}` given twice")));
        }
        assign(exp, key, value).map_err(|m| at(line, m))?;
        lines.0.push((key.to_string(), line));
    }
    finish(cur, &mut out)?;
    Ok(out)
}
