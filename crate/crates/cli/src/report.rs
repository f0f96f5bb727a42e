use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use polybetti::asymptotics::{ExperimentResult, SCHEMA_VERSION};
use polybetti::exact::{self, Enumerator};
use polybetti::{Kind, LengthVector, McEstimate};
use serde::Serialize;
use serde_json::{json, Value};

pub enum Emit {
    Table,
    Json,
}

/// One scalar result line.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub statistic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wilson_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wilson_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl Row {
    pub fn value(statistic: &str, index: Option<usize>, value: f64) -> Self {
        Self { statistic: statistic.into(), index, value, std_error: None, wilson_low: None, wilson_high: None, samples: None }
    }

    pub fn estimate(statistic: &str, index: Option<usize>, est: &McEstimate) -> Self {
        Self {
            statistic: statistic.into(),
            index,
            value: est.value,
            std_error: Some(est.std_error),
            wilson_low: est.wilson.map(|w| w.0),
            wilson_high: est.wilson.map(|w| w.1),
            samples: Some(est.n_samples),
        }
    }
}

pub struct ExactReport {
    pub lengths: String,
    pub mode: String,
    pub kind: Kind,
    pub n: usize,
    pub generic: bool,
    pub short_counts: Vec<u64>,
    pub median_counts: Vec<u64>,
    pub betti: Vec<u64>,
    pub poincare: Vec<i64>,
    pub poincare_text: String,
    pub total: u64,
}

pub fn exact_report(l: &LengthVector, kind: Kind, e: &Enumerator) -> polybetti::Result<ExactReport> {
    let profile = e.short_profile(l, kind)?;
    let generic = e.is_generic(l)?;
    let betti = e.betti(l, kind)?;
    let poincare = e.poincare(l, kind)?;
    Ok(ExactReport {
        lengths: l.to_string(),
        mode: format!("{:?}", l.mode()).to_lowercase(),
        kind,
        n: l.n(),
        generic,
        short_counts: profile.counts,
        median_counts: profile.median_counts,
        total: betti.total(),
        betti: betti.values,
        poincare: poincare.as_int_poly().coeffs().to_vec(),
        poincare_text: poincare.to_string(),
    })
}

pub struct EquilateralReport {
    pub n: usize,
    pub kind: Kind,
    pub betti: Vec<u64>,
    pub total: u64,
    /// Planar: the generic bound constant. Spatial: the binomial sum often quoted as the total.
    pub extra: (&'static str, u64),
}

pub fn equilateral_report(n: usize, kind: Kind) -> polybetti::Result<EquilateralReport> {
    match kind {
        Kind::Planar => {
            let c = exact::equilateral_planar(n)?;
            Ok(EquilateralReport { n, kind, total: c.total, betti: c.betti.values, extra: ("bound_constant", c.bound_constant) })
        }
        Kind::Spatial => {
            let b = exact::equilateral_spatial_betti(n)?;
            let sum = exact::equilateral_spatial_total(n)?;
            Ok(EquilateralReport { n, kind, total: b.total(), betti: b.values, extra: ("binomial_sum", sum) })
        }
    }
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn joined<T: ToString>(xs: &[T]) -> String {
    strings(xs).join(" ")
}

#[derive(Default)]
pub struct Report {
    pub invocation: Vec<String>,
    pub seed: Option<u64>,
    pub rows: Vec<Row>,
    pub exact: Option<ExactReport>,
    pub equilateral: Option<EquilateralReport>,
    pub experiment: Option<ExperimentResult>,
    pub written: Vec<PathBuf>,
    pub pass: bool,
}

impl Report {
    pub fn new(invocation: Vec<String>) -> Self {
        Self { invocation, pass: true, ..Self::default() }
    }

    pub fn to_json(&self) -> Value {
        if let Some(r) = &self.experiment {
            return experiment_json(r, &self.invocation);
        }
        let mut results: Vec<Value> = self.rows.iter().map(|r| json!(r)).collect();
        let mut diagnostics = Vec::new();
        if let Some(x) = &self.exact {
            results.push(json!({
                "lengths": x.lengths,
                "mode": x.mode,
                "kind": x.kind,
                "n": x.n,
                "generic": x.generic,
                "short_counts": strings(&x.short_counts),
                "median_counts": strings(&x.median_counts),
                "betti": strings(&x.betti),
                "poincare": strings(&x.poincare),
                "poincare_text": x.poincare_text,
                "total": x.total.to_string(),
            }));
        }
        if let Some(x) = &self.equilateral {
            results.push(json!({
                "n": x.n,
                "kind": x.kind,
                "betti": strings(&x.betti),
                "total": x.total.to_string(),
            }));
            diagnostics.push(json!({ "name": x.extra.0, "value": x.extra.1.to_string() }));
        }
        json!({
            "schema_version": SCHEMA_VERSION,
            "invocation": self.invocation,
            "seed": self.seed,
            "results": results,
            "diagnostics": diagnostics,
            "pass": self.pass,
        })
    }

    fn write_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        if let Some(seed) = self.seed {
            writeln!(w, "seed        {seed}")?;
        }
        if let Some(x) = &self.exact {
            writeln!(w, "lengths     {} [{}]", x.lengths, x.mode)?;
            writeln!(w, "kind        {}", x.kind)?;
            writeln!(w, "generic     {}", if x.generic { "yes" } else { "no" })?;
            writeln!(w, "short       {}", joined(&x.short_counts))?;
            if x.kind == Kind::Planar {
                writeln!(w, "median      {}", joined(&x.median_counts))?;
            }
            writeln!(w, "betti       {}", joined(&x.betti))?;
            writeln!(w, "poincare    {}", x.poincare_text)?;
            writeln!(w, "total       {}", x.total)?;
        }
        if let Some(x) = &self.equilateral {
            writeln!(w, "n           {}", x.n)?;
            writeln!(w, "kind        {}", x.kind)?;
            writeln!(w, "betti       {}", joined(&x.betti))?;
            writeln!(w, "total       {}", x.total)?;
            writeln!(w, "{:<12}{}", x.extra.0, x.extra.1)?;
        }
        for r in &self.rows {
            let name = match r.index {
                Some(i) if !r.statistic.ends_with(&format!("_{i}")) => format!("{} (n={i})", r.statistic),
                _ => r.statistic.clone(),
            };
            write!(w, "{name} = {:.6}", r.value)?;
            if let Some(se) = r.std_error {
                write!(w, " ± {se:.6}")?;
            }
            if let (Some(lo), Some(hi)) = (r.wilson_low, r.wilson_high) {
                write!(w, "  95% [{lo:.6}, {hi:.6}]")?;
            }
            if let Some(s) = r.samples {
                write!(w, "  ({s} samples)")?;
            }
            writeln!(w)?;
        }
        if let Some(r) = &self.experiment {
            writeln!(w, "experiment  {}", r.config.experiment)?;
            for e in &r.results {
                write!(w, "n={:<5} {:<22} {:.6}", e.n, e.statistic, e.value)?;
                if let Some(se) = e.std_error {
                    write!(w, " ± {se:.6}")?;
                }
                if let Some(t) = e.target {
                    write!(w, "  target {t:.6}")?;
                }
                writeln!(w)?;
            }
            for c in &r.checks {
                let observed = c.observed.map_or("-".to_string(), |o| format!("{o:.6}"));
                write!(w, "[{}] {} observed {observed} threshold {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.threshold)?;
                if !c.note.is_empty() {
                    write!(w, "  ({})", c.note)?;
                }
                writeln!(w)?;
            }
            if !r.flags.is_empty() {
                writeln!(w, "flags       {}", r.flags.join(", "))?;
            }
            writeln!(w, "pass        {}", r.pass)?;
            for p in &self.written {
                writeln!(w, "wrote       {}", p.display())?;
            }
        }
        Ok(())
    }

    pub fn emit(&self, how: Emit) -> io::Result<()> {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        match how {
            Emit::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json())?;
                writeln!(out)
            }
            Emit::Table => self.write_table(out),
        }
    }

    /// Flat `statistic,index,value,std_error` rows.
    pub fn write_csv(&self, path: &Path) -> polybetti::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["statistic", "index", "value", "std_error"])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([r.statistic.clone(), r.index.map(|i| i.to_string()).unwrap_or_default(), r.value.to_string(), opt(r.std_error)])?;
        }
        if let Some(x) = &self.exact {
            let series: [(&str, Vec<String>); 4] = [
                ("short", strings(&x.short_counts)),
                ("median", strings(&x.median_counts)),
                ("betti", strings(&x.betti)),
                ("poincare", strings(&x.poincare)),
            ];
            for (name, values) in series {
                for (i, v) in values.into_iter().enumerate() {
                    w.write_record([name.to_string(), i.to_string(), v, String::new()])?;
                }
            }
            w.write_record(["total".to_string(), String::new(), x.total.to_string(), String::new()])?;
        }
        if let Some(x) = &self.equilateral {
            for (i, b) in x.betti.iter().enumerate() {
                w.write_record(["betti".to_string(), i.to_string(), b.to_string(), String::new()])?;
            }
            w.write_record(["total".to_string(), String::new(), x.total.to_string(), String::new()])?;
            w.write_record([x.extra.0.to_string(), String::new(), x.extra.1.to_string(), String::new()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn experiment_json(r: &ExperimentResult, invocation: &[String]) -> Value {
    let mut v = json!(r);
    if let Value::Object(map) = &mut v {
        map.insert("invocation".into(), json!(invocation));
    }
    v
}

/// Writes the experiment result as JSON (with the invocation added) and CSV.
pub fn write_experiment(r: &ExperimentResult, invocation: &[String], json_path: &Path, csv_path: &Path) -> polybetti::Result<()> {
    let mut f = File::create(json_path)?;
    serde_json::to_writer_pretty(&mut f, &experiment_json(r, invocation))?;
    writeln!(f)?;
    r.write_csv(File::create(csv_path)?)
}
