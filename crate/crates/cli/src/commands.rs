use std::path::Path;

use ked_core::oracle::{estimate_kp, estimate_kpp, Method};
use ked_core::quadrature::{bq_posterior, mmd2};
use ked_core::{
    embed, BqPosterior, Budget, Embedding, Kernel, Measure, Provenance, QuadratureProblem,
};
use serde::Serialize;

use crate::document::{DataSet, SpecDocument};
use crate::error::{input, CliError, Result};

/// Seed used when neither `--seed` nor the spec sets one.
pub const SEED_ENV: &str = "KED_DEFAULT_SEED";

pub struct Compiled {
    pub kernel: Kernel,
    pub measure: Measure,
}

impl Compiled {
    pub fn new(doc: &SpecDocument) -> Result<Self> {
        let measure = Measure::compile(&doc.measure)?;
        let kernel = Kernel::compile(&doc.kernel, Some(&measure))?;
        Ok(Compiled { kernel, measure })
    }

    fn pair(&self) -> String {
        format!("{}/{}", self.kernel.family(), self.measure.family())
    }
}

pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| input(format!("'{t}' in '{s}' is not a number")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Kp,
    Kpp,
    Kernel,
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    pub value: f64,
    pub provenance: Provenance,
    pub pair: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

pub fn eval(
    doc: &SpecDocument,
    what: What,
    x: Option<&[f64]>,
    y: Option<&[f64]>,
) -> Result<EvalOutput> {
    let c = Compiled::new(doc)?;
    let need = |p: Option<&[f64]>, flag: &str| {
        p.map(<[f64]>::to_vec)
            .ok_or_else(|| input(format!("--what needs {flag}")))
    };
    if what == What::Kernel {
        let (x, y) = (need(x, "--x")?, need(y, "--y")?);
        return Ok(EvalOutput {
            value: c.kernel.eval(&x, &y)?,
            provenance: Provenance::ClosedForm,
            pair: c.pair(),
            stderr: None,
        });
    }
    let e = embed(&c.kernel, &c.measure)?;
    Ok(match what {
        What::Kp => {
            let x = need(x, "--x")?;
            EvalOutput {
                value: e.kp(&x)?,
                provenance: e.kp_provenance,
                pair: e.pair.clone(),
                stderr: None,
            }
        }
        _ => EvalOutput {
            value: e.kpp,
            provenance: e.kpp_provenance,
            pair: e.pair.clone(),
            stderr: (e.kpp_stderr > 0.0).then_some(e.kpp_stderr),
        },
    })
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    pub closed: f64,
    pub reference: f64,
    pub stderr: f64,
    /// Oracle method, or `"expected"` for stored values.
    pub source: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub pair: String,
    pub passed: bool,
    pub tolerance: f64,
    pub seed: u64,
    pub checks: Vec<Check>,
}

pub struct VerifyOptions {
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub tol: f64,
    pub points: usize,
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| input(format!("{SEED_ENV}='{v}' is not a u64"))),
        Err(_) => Ok(0),
    }
}

pub fn verify(doc: &SpecDocument, opts: &VerifyOptions) -> Result<VerifyReport> {
    if !(opts.tol.is_finite() && opts.tol >= 0.0) {
        return Err(input("--tol must be a non-negative number"));
    }
    let c = Compiled::new(doc)?;
    let e = embed(&c.kernel, &c.measure)?;
    if e.kp_provenance != Provenance::ClosedForm && e.kpp_provenance != Provenance::ClosedForm {
        return Err(CliError::Unsupported(format!(
            "{} has no closed form to verify",
            e.pair
        )));
    }
    let seed = match opts.seed.or(doc.oracle.seed) {
        Some(s) => s,
        None => default_seed()?,
    };
    let defaults = Budget::default();
    let budget = Budget::new(
        doc.oracle.nodes.unwrap_or(defaults.nodes),
        opts.budget
            .or(doc.oracle.samples)
            .unwrap_or(defaults.samples),
    );
    let tol = opts.tol;
    let judge = |closed: f64, reference: f64, stderr: f64| {
        (closed - reference).abs() <= tol.max(3.0 * stderr)
    };
    let mut checks = Vec::new();
    // Evaluation points use their own seed so that they are independent of
    // the Monte Carlo draws.
    for x in c.measure.sample(opts.points, seed.wrapping_add(1))? {
        let closed = e.kp(&x)?;
        let o = estimate_kp(&c.kernel, &c.measure, &x, budget, seed)?;
        checks.push(Check {
            name: "kp",
            x: Some(x),
            closed,
            reference: o.value,
            stderr: o.stderr,
            source: method_name(o.method),
            pass: judge(closed, o.value, o.stderr),
        });
    }
    let o = estimate_kpp(&c.kernel, &c.measure, budget, seed)?;
    checks.push(Check {
        name: "kpp",
        x: None,
        closed: e.kpp,
        reference: o.value,
        stderr: o.stderr,
        source: method_name(o.method),
        pass: judge(e.kpp, o.value, o.stderr),
    });
    if let Some(exp) = &doc.expected {
        checks.extend(expected_checks(&e, exp, &judge)?);
    }
    Ok(VerifyReport {
        pair: e.pair.clone(),
        passed: checks.iter().all(|c| c.pass),
        tolerance: tol,
        seed,
        checks,
    })
}

fn expected_checks(
    e: &Embedding,
    exp: &crate::document::Expected,
    judge: &dyn Fn(f64, f64, f64) -> bool,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in &exp.kp {
        let closed = e.kp(&p.x)?;
        out.push(Check {
            name: "kp",
            x: Some(p.x.clone()),
            closed,
            reference: p.value,
            stderr: 0.0,
            source: "expected".into(),
            pass: judge(closed, p.value, 0.0),
        });
    }
    if let Some(v) = exp.kpp {
        out.push(Check {
            name: "kpp",
            x: None,
            closed: e.kpp,
            reference: v,
            stderr: 0.0,
            source: "expected".into(),
            pass: judge(e.kpp, v, 0.0),
        });
    }
    Ok(out)
}

pub fn bq(doc: &SpecDocument, data: Option<&Path>, jitter: f64) -> Result<BqPosterior> {
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(input("--jitter must be a non-negative number"));
    }
    let path = data
        .map(Path::to_path_buf)
        .or_else(|| doc.data.clone())
        .ok_or_else(|| input("bq needs --data or a 'data' entry in the spec"))?;
    let set = DataSet::load(&path)?;
    let values = set
        .values
        .ok_or_else(|| input(format!("{}: no y column", path.display())))?;
    let c = Compiled::new(doc)?;
    let e = embed(&c.kernel, &c.measure)?;
    let problem =
        QuadratureProblem::new(&c.kernel, &e, set.points, Some(values))?.with_jitter(jitter);
    Ok(bq_posterior(&problem)?)
}

#[derive(Debug, Serialize)]
pub struct MmdOutput {
    pub mmd2: f64,
}

pub fn mmd(doc: &SpecDocument, samples: &Path) -> Result<MmdOutput> {
    let set = DataSet::load(samples)?;
    if set.values.is_some() {
        return Err(input(format!(
            "{}: samples must not have a y column",
            samples.display()
        )));
    }
    let c = Compiled::new(doc)?;
    let q = Measure::empirical(set.points, set.weights)?;
    let e = embed(&c.kernel, &c.measure)?;
    Ok(MmdOutput {
        mmd2: mmd2(&c.kernel, &c.measure, &e, &q)?,
    })
}
