use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Duration;

pub const SCHEMA: &str = "# hardy-lab report v1";

const COLUMNS: [&str; 17] = [
    "id",
    "mode",
    "regime",
    "p",
    "q",
    "r",
    "constants",
    "combined",
    "finite",
    "estimate",
    "reference",
    "ratio",
    "bound_upper",
    "bound_lower",
    "pass",
    "worst_tail",
    "note",
];

/// One report line. `estimate`, `reference` and `ratio` mean different things per mode; see the README.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    pub id: String,
    pub mode: String,
    pub regime: String,
    pub p: f64,
    pub q: f64,
    pub r: Option<f64>,
    pub constants: Vec<(String, f64)>,
    pub combined: Option<f64>,
    pub finite: Option<bool>,
    pub estimate: Option<f64>,
    pub reference: Option<f64>,
    pub ratio: Option<f64>,
    pub bound_upper: Option<f64>,
    pub bound_lower: Option<f64>,
    pub pass: bool,
    pub worst_tail: Option<f64>,
    pub note: String,
    /// Wall time; goes to the summary only so the CSV stays reproducible.
    pub elapsed: Duration,
}

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Row {
    fn record(&self) -> Vec<String> {
        let constants = self
            .constants
            .iter()
            .map(|(n, v)| format!("{n}={}", num(*v)))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.id.clone(),
            self.mode.clone(),
            self.regime.clone(),
            num(self.p),
            num(self.q),
            opt(self.r),
            constants,
            opt(self.combined),
            self.finite.map(|b| b.to_string()).unwrap_or_default(),
            opt(self.estimate),
            opt(self.reference),
            opt(self.ratio),
            opt(self.bound_upper),
            opt(self.bound_lower),
            self.pass.to_string(),
            opt(self.worst_tail),
            self.note.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> io::Result<()> {
    let mut out = out;
    writeln!(out, "{SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()
}

pub fn summary(rows: &[Row], total: Duration) -> String {
    let passed = rows.iter().filter(|r| r.pass).count();
    let mut s = String::new();
    let _ = writeln!(s, "hardy-lab: {passed}/{} experiments passed in {:.2}s", rows.len(), total.as_secs_f64());
    for r in rows {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let _ = write!(s, "{tag} {} [{}", r.id, r.mode);
        if !r.regime.is_empty() {
            let _ = write!(s, ", regime {}", r.regime);
        }
        let _ = write!(s, "] {:.2}s", r.elapsed.as_secs_f64());
        if let Some(c) = r.combined {
            let _ = write!(s, " combined={}", num(c));
        }
        if let Some(e) = r.estimate {
            let _ = write!(s, " estimate={}", num(e));
        }
        if let Some(x) = r.ratio {
            let _ = write!(s, " ratio={}", num(x));
        }
        if !r.note.is_empty() {
            let _ = write!(s, " ({})", r.note);
        }
        s.push('\n');
    }
    s
}
