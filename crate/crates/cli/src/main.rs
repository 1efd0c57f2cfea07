//! Command-line front end: manifest-driven canonicity checks,
//! transformation of evolutionary systems, conservation-law
//! verification and direct access to the symbolic operators.
//!
//! Exit codes: 0 success, 1 a checked verdict is false, 2 input error,
//! 3 an internal limit was hit.

mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetcalc::{
    bracket_density, check_canonical, cross_validate, euler_lagrange, is_total_divergence,
    CaseKind, Density, Error, EvoSystem, Expr, Prolongation,
};
use serde_json::json;

use manifest::Manifest;
use report::{
    compare, conditions_json, cross_validation_json, orientation_name, paper_mismatch_json,
    paper_mismatch_text, render_json, Comparison,
};

#[derive(Parser)]
#[command(
    name = "jetcalc",
    version,
    about = "Exact variational calculus on jet bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Path to the .jv manifest
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Jet order budget (overrides the manifest)
    #[arg(long)]
    max_order: Option<usize>,
}

#[derive(Args)]
struct CaseFlags {
    /// Which canonicity criterion to apply
    #[arg(long, default_value = "auto")]
    case: String,
    /// Random density pairs for the bracket cross-check
    #[arg(long)]
    samples: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide canonicity of the manifest's transformation for its operator
    CheckCanonical {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        case: CaseFlags,
    },
    /// Transform the system: Hamiltonian, right-hand side and claws
    Transform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        case: CaseFlags,
        /// Transform even when the canonicity check fails
        #[arg(long)]
        allow_noncanonical: bool,
    },
    /// Verify every declared conservation law against the system
    VerifyClaws {
        #[command(flatten)]
        common: Common,
    },
    /// Euler-Lagrange components of an expression
    El {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Poisson bracket density of two functionals
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Pull an expression back through the transformation
    Pullback {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Test whether an expression is a total divergence
    IsDivergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
}

struct Failure {
    msg: String,
    code: u8,
}

fn engine_exit_code(e: &Error) -> u8 {
    match e {
        Error::JetOrderLimit { .. } | Error::CompCoeffRange { .. } | Error::BaseTooLarge { .. } => {
            3
        }
        Error::NonCanonical => 1,
        _ => 2,
    }
}

trait OrFail<T> {
    fn or_fail(self) -> Result<T, Failure>;
}

impl<T> OrFail<T> for Result<T, Error> {
    fn or_fail(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            msg: e.to_string(),
            code: engine_exit_code(&e),
        })
    }
}

fn input_error(msg: impl Into<String>) -> Failure {
    Failure {
        msg: msg.into(),
        code: 2,
    }
}

fn load(common: &Common) -> Result<Manifest, Failure> {
    let mut m = manifest::load(&common.manifest).map_err(|e| input_error(e.to_string()))?;
    if let Some(k) = common.max_order {
        // CLI flag wins over the manifest option
        m.options.max_order = Some(k);
        let rebuilt = (*m.bundle).clone().with_max_order(k);
        m.bundle = Arc::new(rebuilt);
    }
    Ok(m)
}

fn prolongation(m: &Manifest) -> Result<Prolongation, Failure> {
    let auto = m
        .transform
        .clone()
        .ok_or_else(|| input_error("manifest has no [transform] section"))?;
    Prolongation::new(auto).or_fail()
}

fn resolve_case(m: &Manifest, flags: &CaseFlags) -> Result<Option<CaseKind>, Failure> {
    if flags.case == "auto" {
        // an explicit manifest option still applies under `auto`
        return Ok(m.options.case);
    }
    match manifest::parse_case(&flags.case) {
        Some(c) => Ok(c),
        None => Err(input_error("`--case` must be auto, 1, 2 or 3")),
    }
}

fn system(m: &Manifest) -> EvoSystem {
    EvoSystem::new(
        m.bundle.clone(),
        m.operator.clone(),
        Density::new(m.bundle.clone(), m.hamiltonian.clone()),
        m.claws
            .iter()
            .map(|(n, e)| (n.clone(), Density::new(m.bundle.clone(), e.clone())))
            .collect(),
    )
}

fn parse_expr(m: &Manifest, text: &str) -> Result<Expr, Failure> {
    jetcalc::parse(text, &m.bundle).or_fail()
}

fn run_check_canonical(common: &Common, flags: &CaseFlags) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let case = resolve_case(&m, flags)?;
    let mut prol = prolongation(&m)?;
    let rep = check_canonical(&mut prol, &m.operator, case).or_fail()?;
    let samples = flags.samples.or(m.options.samples).unwrap_or(50);
    let seed = flags.seed.or(m.options.seed).unwrap_or(0);
    let cv = cross_validate(&mut prol, &m.operator, samples, seed).or_fail()?;
    let b = &m.bundle;

    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "check-canonical",
            "case": rep.case.name(),
            "orientation": orientation_name(rep.orientation),
            "conditions": conditions_json(b, &rep),
            "verdict": rep.verdict,
            "cross_validation": cross_validation_json(b, &cv),
        })),
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!("case: {}\n", rep.case.name()));
            s.push_str(&format!(
                "orientation: {}\n",
                orientation_name(rep.orientation)
            ));
            for c in &rep.conditions {
                s.push_str(&format!(
                    "condition {}: residual {} [{}]\n",
                    c.label,
                    c.residual.render(b),
                    if c.satisfied { "ok" } else { "VIOLATED" }
                ));
            }
            s.push_str(&format!(
                "verdict: {}\n",
                if rep.verdict {
                    "CANONICAL"
                } else {
                    "NON-CANONICAL"
                }
            ));
            s.push_str(&format!(
                "cross-validation: {}/{} preserved (seed {seed})\n",
                cv.preserved, cv.samples
            ));
            if let Some((p, q)) = &cv.counterexample {
                s.push_str(&format!(
                    "counterexample: P = {} ; Q = {}\n",
                    p.render(b),
                    q.render(b)
                ));
            }
            s
        }
    };
    Ok((out, if rep.verdict { 0 } else { 1 }))
}

fn run_transform(
    common: &Common,
    flags: &CaseFlags,
    allow_noncanonical: bool,
) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let case = resolve_case(&m, flags)?;
    let mut prol = prolongation(&m)?;
    let rep = check_canonical(&mut prol, &m.operator, case).or_fail()?;
    let sys = system(&m);
    let transformed = sys
        .transform(&mut prol, rep.verdict, allow_noncanonical)
        .or_fail()?;
    let rhs = transformed.rhs().or_fail()?;
    let conserved = transformed.verify_claws().or_fail()?;
    let b = &m.bundle;

    let mut comparisons: Vec<Comparison> = Vec::new();
    for (key, published) in &m.published {
        let computed = if key == "H" {
            transformed.hamiltonian.value.clone()
        } else if let Some(f) = key.strip_prefix("rhs.") {
            let a = b.fiber_index(f).expect("validated on load");
            rhs[a as usize].clone()
        } else if let Some(n) = key.strip_prefix("claw.") {
            transformed
                .claws
                .iter()
                .find(|(name, _)| name == n)
                .expect("validated on load")
                .1
                .value
                .clone()
        } else {
            unreachable!("validated on load")
        };
        comparisons.push(compare(key, published, &computed));
    }

    let out = match common.format {
        Format::Json => {
            let claws: Vec<_> = transformed
                .claws
                .iter()
                .zip(conserved.iter())
                .map(|((name, d), (_, ok))| {
                    json!({
                        "name": name,
                        "density": d.value.render(b),
                        "conserved": ok,
                    })
                })
                .collect();
            render_json(&json!({
                "command": "transform",
                "case": rep.case.name(),
                "verdict": rep.verdict,
                "orientation": orientation_name(rep.orientation),
                "hamiltonian'": transformed.hamiltonian.value.render(b),
                "rhs'": rhs.iter().map(|e| e.render(b)).collect::<Vec<_>>(),
                "claws'": claws,
                "paper_mismatch": paper_mismatch_json(b, &comparisons),
            }))
        }
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!("case: {}\n", rep.case.name()));
            s.push_str(&format!(
                "verdict: {}\n",
                if rep.verdict {
                    "CANONICAL"
                } else {
                    "NON-CANONICAL"
                }
            ));
            s.push_str(&format!(
                "orientation: {}\n",
                orientation_name(rep.orientation)
            ));
            s.push_str(&format!(
                "hamiltonian' = {}\n",
                transformed.hamiltonian.value.render(b)
            ));
            for (a, e) in rhs.iter().enumerate() {
                s.push_str(&format!("rhs' {} = {}\n", b.fiber_names()[a], e.render(b)));
            }
            for ((name, d), (_, ok)) in transformed.claws.iter().zip(conserved.iter()) {
                s.push_str(&format!(
                    "claw' {} = {}  [{}]\n",
                    name,
                    d.value.render(b),
                    if *ok { "conserved" } else { "NOT CONSERVED" }
                ));
            }
            paper_mismatch_text(b, &comparisons, &mut s);
            s
        }
    };
    Ok((out, 0))
}

fn run_verify_claws(common: &Common) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let sys = system(&m);
    let results = sys.verify_claws().or_fail()?;
    let verdict = results.iter().all(|(_, ok)| *ok);
    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "verify-claws",
            "claws": results
                .iter()
                .map(|(n, ok)| json!({ "name": n, "conserved": ok }))
                .collect::<Vec<_>>(),
            "verdict": verdict,
        })),
        Format::Text => {
            let mut s = String::new();
            for (n, ok) in &results {
                s.push_str(&format!("{n}: {}\n", if *ok { "PASS" } else { "FAIL" }));
            }
            s
        }
    };
    Ok((out, if verdict { 0 } else { 1 }))
}

fn run_el(common: &Common, expr: &str) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let p = parse_expr(&m, expr)?;
    let el = euler_lagrange(&m.bundle, &p).or_fail()?;
    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "el",
            "components": el.iter().map(|e| e.render(&m.bundle)).collect::<Vec<_>>(),
        })),
        Format::Text => el
            .iter()
            .map(|e| format!("{}\n", e.render(&m.bundle)))
            .collect(),
    };
    Ok((out, 0))
}

fn run_bracket(common: &Common, p: &str, q: &str) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let p = parse_expr(&m, p)?;
    let q = parse_expr(&m, q)?;
    let r = bracket_density(&m.operator, &p, &q).or_fail()?;
    let is_div = r.reduced_witness.iter().all(Expr::is_zero);
    let b = &m.bundle;
    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "bracket",
            "density": r.density.render(b),
            "witness": r.reduced_witness.iter().map(|e| e.render(b)).collect::<Vec<_>>(),
            "is_divergence": is_div,
        })),
        Format::Text => {
            let mut s = format!("density = {}\n", r.density.render(b));
            for (a, w) in r.reduced_witness.iter().enumerate() {
                s.push_str(&format!(
                    "witness {} = {}\n",
                    b.fiber_names()[a],
                    w.render(b)
                ));
            }
            s.push_str(&format!("is_divergence: {is_div}\n"));
            s
        }
    };
    Ok((out, 0))
}

fn run_pullback(common: &Common, expr: &str) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let p = parse_expr(&m, expr)?;
    let mut prol = prolongation(&m)?;
    let pulled = prol.pullback(&p).or_fail()?;
    let density = prol.transform_density(&p).or_fail()?;
    let b = &m.bundle;
    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "pullback",
            "pullback": pulled.render(b),
            "density": density.render(b),
        })),
        Format::Text => format!(
            "pullback = {}\ndensity = {}\n",
            pulled.render(b),
            density.render(b)
        ),
    };
    Ok((out, 0))
}

fn run_is_divergence(common: &Common, expr: &str) -> Result<(String, u8), Failure> {
    let m = load(common)?;
    let p = parse_expr(&m, expr)?;
    let verdict = is_total_divergence(&m.bundle, &p).or_fail()?;
    let out = match common.format {
        Format::Json => render_json(&json!({
            "command": "is-divergence",
            "is_divergence": verdict,
        })),
        Format::Text => format!("{verdict}\n"),
    };
    Ok((out, if verdict { 0 } else { 1 }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CheckCanonical { common, case } => run_check_canonical(common, case),
        Command::Transform {
            common,
            case,
            allow_noncanonical,
        } => run_transform(common, case, *allow_noncanonical),
        Command::VerifyClaws { common } => run_verify_claws(common),
        Command::El { common, expr } => run_el(common, expr),
        Command::Bracket { common, p, q } => run_bracket(common, p, q),
        Command::Pullback { common, expr } => run_pullback(common, expr),
        Command::IsDivergence { common, expr } => run_is_divergence(common, expr),
    };
    match result {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
