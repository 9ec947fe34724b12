//! `defq` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use defq_core::modrep::{
    classical_limit_metric, cp_check, cp_check_module, gns, verify_representation, Column, InnerProductModule,
    Representation,
};
use defq_core::morita::{dual_bases, roundtrip_equivalence_test, verify_dual_bases, verify_sme_axioms, EquivalenceBimoduleSpec};
use defq_core::positivity::{
    deform_classical_functional, formal_psd_check, is_positive_functional, test_elements, witness_element,
    LinearFunctional, PSDVerdict,
};
use defq_core::rieffel::{gns_via_induction, InductionRequest};
use defq_core::staralg::{
    verify_star_axioms, AlgebraElement, AlgebraRef, BidiffTerm, PhaseSpaceSignature, SampleSpec, StarProductRule,
};
use defq_core::{CheckEntry, Error, Report, ScalarMatrix, TruncationContext, Verdict, DEFAULT_ORDER};

#[derive(Parser, Debug)]
#[command(name = "defq", version, about = "Exact checks for formal deformation quantization")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Truncation order N (series are computed modulo λ^(N+1)).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Degree cap D for function algebras.
    #[arg(long = "degree-cap", global = true, default_value_t = 4)]
    pub degree_cap: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random samples for randomized checks.
    #[arg(long, global = true, default_value_t = 25, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn ctx(&self) -> TruncationContext {
        TruncationContext::new(self.order)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignatureArg {
    Canonical,
    Conjugate,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the star-product axioms on random polynomials.
    StarVerify {
        /// moyal, wick, pointwise, or a JSON file with {"custom_table": [[term, ...], ...]}.
        #[arg(long)]
        rule: String,
        #[arg(long, default_value_t = 1)]
        dof: usize,
        /// Defaults to conjugate for wick and canonical otherwise.
        #[arg(long, value_enum)]
        signature: Option<SignatureArg>,
        /// Maximal degree of the random polynomials.
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
    /// GNS representation of a positive functional.
    Gns {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        functional: PathBuf,
        /// Replace a Moyal point evaluation by its positive deformation.
        #[arg(long)]
        deform: bool,
    },
    /// Rieffel induction of a representation through a bimodule.
    Induce {
        /// {"bimodule", "representation", "checks"}.
        #[arg(long, conflicts_with_all = ["bimodule", "representation", "gns_check"])]
        request: Option<PathBuf>,
        #[arg(long, requires = "representation")]
        bimodule: Option<PathBuf>,
        #[arg(long, requires = "bimodule")]
        representation: Option<PathBuf>,
        /// Compare GNS with induction from the scalars for --algebra/--functional.
        #[arg(long, requires_all = ["algebra", "functional"])]
        gns_check: bool,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        functional: Option<PathBuf>,
    },
    /// Formal positivity of a Hermitian matrix of series.
    Psd {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Complete positivity of a module inner product.
    Cp {
        #[arg(long)]
        module: PathBuf,
        /// Also report on the classical limit of the metric.
        #[arg(long)]
        classical_limit: bool,
    },
    /// Strong Morita equivalence axioms, dual bases and round trips.
    Morita {
        #[arg(long)]
        spec: PathBuf,
        /// Representations of the right algebra for round trips.
        #[arg(long)]
        representation: Vec<PathBuf>,
        /// Functionals on the right algebra whose GNS representations are used for round trips.
        #[arg(long)]
        functional: Vec<PathBuf>,
    },
}

/// Exit status and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = std::result::Result<Report, Failure>;

fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Library errors that mean the input itself is unusable.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Input(_)
            | Error::Dimension(_)
            | Error::ParentMismatch
            | Error::ContextMismatch(..)
            | Error::SignatureMismatch
            | Error::RuleSignature { .. }
            | Error::NotInModule
            | Error::NotHermitian
    )
}

/// Errors that decide the question asked: a property fails.
fn is_property_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotPositiveFunctional
            | Error::CpCheckFailed(_)
            | Error::NotFull(_)
            | Error::Degenerate
            | Error::NotStronglyNondegenerate
            | Error::NotAdjointable(_)
    )
}

fn error_entry(name: &str, e: &Error) -> CheckEntry {
    let verdict = if is_property_error(e) { Verdict::Fail } else { Verdict::Indeterminate };
    CheckEntry::new(name, verdict).with_detail(e.to_string())
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = dispatch(&cli);
    let report = match result {
        Ok(r) => r,
        Err(Failure::Input(msg)) => {
            return Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("input error: {msg}\n") };
        }
        Err(Failure::Core(e)) if is_input_error(&e) => {
            return Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("input error: {e}\n") };
        }
        Err(Failure::Core(e)) => {
            let mut r = Report::new(command_name(&cli.command));
            r.push(error_entry("construction", &e));
            r
        }
    };
    let code = match report.status() {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    };
    let rendered = render(&report, cli.config.format);
    match &cli.config.out {
        Some(path) => match fs::write(path, &rendered) {
            Ok(()) => Outcome {
                code,
                stdout: format!("{}: {:?} (written to {})\n", report.command, report.status(), path.display()),
                stderr: String::new(),
            },
            Err(e) => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: rendered, stderr: String::new() },
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = report.to_text();
            if let Some(Value::Object(o)) = &report.output {
                if let Some(Value::String(c)) = o.get("certificate_text") {
                    s.push_str("  certificate:\n");
                    for line in c.lines() {
                        s.push_str(&format!("    {line}\n"));
                    }
                }
                if let Some(Value::Object(norms)) = o.get("norms") {
                    s.push_str("  norms:\n");
                    for (k, v) in norms {
                        s.push_str(&format!("    {k}: {}\n", v.as_str().unwrap_or_default()));
                    }
                }
            }
            s
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::StarVerify { .. } => "star-verify",
        Command::Gns { .. } => "gns",
        Command::Induce { .. } => "induce",
        Command::Psd { .. } => "psd",
        Command::Cp { .. } => "cp",
        Command::Morita { .. } => "morita",
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let cfg = &cli.config;
    match &cli.command {
        Command::StarVerify { rule, dof, signature, degree } => cmd_star_verify(rule, *dof, *signature, *degree, cfg),
        Command::Gns { algebra, functional, deform } => cmd_gns(algebra, functional, *deform, cfg),
        Command::Induce { request, bimodule, representation, gns_check, algebra, functional } => {
            if *gns_check {
                cmd_gns_check(algebra.as_deref().unwrap(), functional.as_deref().unwrap(), cfg)
            } else if let Some(r) = request {
                cmd_induce(&read_json(r)?, cfg)
            } else if let (Some(b), Some(h)) = (bimodule, representation) {
                let v = json!({"bimodule": read_json(b)?, "representation": read_json(h)?});
                cmd_induce(&v, cfg)
            } else {
                Err(Failure::Input("induce needs --request, --bimodule/--representation or --gns-check".into()))
            }
        }
        Command::Psd { matrix } => cmd_psd(matrix, cfg),
        Command::Cp { module, classical_limit } => cmd_cp(module, *classical_limit, cfg),
        Command::Morita { spec, representation, functional } => cmd_morita(spec, representation, functional, cfg),
    }
}

fn parse_rule(rule: &str) -> std::result::Result<StarProductRule, Failure> {
    match rule {
        "moyal" => Ok(StarProductRule::Moyal),
        "wick" => Ok(StarProductRule::Wick),
        "pointwise" => Ok(StarProductRule::Pointwise),
        path => {
            let v = read_json(Path::new(path))?;
            let orders = v["custom_table"]
                .as_array()
                .ok_or_else(|| Failure::Input("custom rule needs custom_table".into()))?;
            let mut table = Vec::with_capacity(orders.len());
            for terms in orders {
                let terms = terms.as_array().ok_or_else(|| Failure::Input("custom_table entries are arrays".into()))?;
                table.push(terms.iter().map(BidiffTerm::from_json).collect::<defq_core::Result<Vec<_>>>()?);
            }
            Ok(StarProductRule::CustomTable(table))
        }
    }
}

fn cmd_star_verify(rule: &str, dof: usize, sig: Option<SignatureArg>, degree: u32, cfg: &RunConfig) -> CmdResult {
    if dof == 0 {
        return Err(Failure::Input("dof must be positive".into()));
    }
    let rule = parse_rule(rule)?;
    let kind = sig.unwrap_or(if rule == StarProductRule::Wick { SignatureArg::Conjugate } else { SignatureArg::Canonical });
    let sig = match kind {
        SignatureArg::Canonical => PhaseSpaceSignature::canonical(dof),
        SignatureArg::Conjugate => PhaseSpaceSignature::conjugate(dof),
    };
    let spec = SampleSpec { degree, count: cfg.samples as usize, seed: cfg.seed };
    Ok(verify_star_axioms(&rule, sig, cfg.ctx(), spec))
}

fn load_functional(alg_path: &Path, f_path: &Path, cfg: &RunConfig) -> std::result::Result<LinearFunctional, Failure> {
    let alg = AlgebraRef::from_json(&read_json(alg_path)?, cfg.ctx(), cfg.degree_cap)?;
    Ok(LinearFunctional::from_json(&read_json(f_path)?, &alg)?)
}

fn positivity_entry(w: &LinearFunctional) -> std::result::Result<(CheckEntry, bool), Failure> {
    let v = is_positive_functional(w, None)?;
    let mut entry = v.to_entry("functional_positive");
    if let PSDVerdict::NotPositive(wit) = &v {
        let elems = test_elements(&w.algebra, None)?;
        entry = entry.with_witness(json!({
            "vector": wit.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "element": witness_element(&elems, wit).to_json(),
        }));
    }
    Ok((entry, v.is_positive()))
}

fn cmd_gns(alg_path: &Path, f_path: &Path, deform: bool, cfg: &RunConfig) -> CmdResult {
    let mut w = load_functional(alg_path, f_path, cfg)?;
    if deform {
        w = deform_classical_functional(&w)?;
    }
    let mut report = Report::new("gns");
    let (entry, positive) = positivity_entry(&w)?;
    report.push(entry);
    if !positive {
        return Ok(report);
    }
    let g = gns(&w, None)?;
    report.push(CheckEntry::pass("rank").with_detail(format!("{}", g.rep.rank())));
    report.extend("rep.", verify_representation(&g.rep));
    let alg = &g.rep.algebra;
    let mut norms = serde_json::Map::new();
    for k in 0..alg.dim() {
        norms.insert(alg.label(k), Value::String(g.pre_gram.get(k, k).to_string()));
    }
    let inadmissible: Vec<String> = g.inadmissible.iter().map(|&k| alg.label(k)).collect();
    report.output = Some(json!({
        "representation": g.rep.to_json(),
        "rank": g.rep.rank(),
        "inadmissible": inadmissible,
        "norms": norms,
    }));
    Ok(report)
}

fn cmd_gns_check(alg_path: &Path, f_path: &Path, cfg: &RunConfig) -> CmdResult {
    let w = load_functional(alg_path, f_path, cfg)?;
    let gi = gns_via_induction(&w)?;
    let mut report = Report::new("induce --gns-check");
    report.extend("canonical.", gi.verify());
    report.output = Some(json!({
        "induced": gi.induced.to_json(),
        "gns": gi.gns.rep.to_json(),
        "canonical": gi.canonical.to_json(),
    }));
    Ok(report)
}

fn cmd_induce(v: &Value, cfg: &RunConfig) -> CmdResult {
    let req = InductionRequest::from_json(v, cfg.ctx(), cfg.degree_cap)?;
    let (mut report, ind) = req.run()?;
    if let Some(ind) = ind {
        report.output = Some(ind.to_json());
    }
    Ok(report)
}

fn cmd_psd(path: &Path, cfg: &RunConfig) -> CmdResult {
    let v = read_json(path)?;
    let m = v.get("matrix").unwrap_or(&v);
    let h = ScalarMatrix::from_json(m, cfg.ctx())?;
    if h.rows() != h.cols() {
        return Err(Failure::Input("matrix must be square".into()));
    }
    let verdict = formal_psd_check(&h)?;
    let mut report = Report::new("psd");
    report.push(verdict.to_entry("psd"));
    if let Some(c) = verdict.certificate() {
        report.output = Some(json!({"certificate_text": c.to_text()}));
    }
    Ok(report)
}

fn read_columns(v: &Value, alg: &AlgebraRef) -> std::result::Result<Option<Vec<Column>>, Failure> {
    let Some(gs) = v.get("generators").filter(|g| !g.is_null()) else { return Ok(None) };
    let gs = gs.as_array().ok_or_else(|| Failure::Input("generators must be an array".into()))?;
    let mut out = Vec::with_capacity(gs.len());
    for g in gs {
        let g = g.as_array().ok_or_else(|| Failure::Input("a generator is an array of elements".into()))?;
        out.push(g.iter().map(|x| AlgebraElement::from_json(alg, x)).collect::<defq_core::Result<Vec<_>>>()?);
    }
    Ok(Some(out))
}

fn cmd_cp(path: &Path, classical: bool, cfg: &RunConfig) -> CmdResult {
    let v = read_json(path)?;
    let e = InnerProductModule::from_json(&v, cfg.ctx(), cfg.degree_cap)?;
    let mut report = Report::new("cp");
    let verdict = match read_columns(&v, &e.algebra)? {
        Some(gens) => cp_check(&e, &gens),
        None => cp_check_module(&e),
    };
    report.push(verdict.to_entry("cp"));
    if classical {
        match classical_limit_metric(&e) {
            Ok((_, r)) => report.extend("classical.", r),
            Err(err) if !is_input_error(&err) => report.push(error_entry("classical.h0_strongly_nondegenerate", &err)),
            Err(err) => return Err(err.into()),
        }
    }
    Ok(report)
}

fn cmd_morita(path: &Path, reps: &[PathBuf], functionals: &[PathBuf], cfg: &RunConfig) -> CmdResult {
    let spec = EquivalenceBimoduleSpec::from_json(&read_json(path)?, cfg.ctx())?;
    let mut report = Report::new("morita").with_seed(cfg.seed);
    report.extend("axioms.", verify_sme_axioms(&spec, cfg.samples as usize, cfg.seed));
    let mut output = json!({});
    match dual_bases(&spec) {
        Ok(db) => {
            report.extend("dual_bases.", verify_dual_bases(&spec, &db));
            output["dual_bases"] = db.to_json();
        }
        Err(e) => report.push(error_entry("dual_bases.construction", &e)),
    }
    let mut hs: Vec<Representation> = Vec::new();
    for r in reps {
        hs.push(Representation::from_json(&read_json(r)?, cfg.ctx(), cfg.degree_cap)?);
    }
    for f in functionals {
        let w = LinearFunctional::from_json(&read_json(f)?, spec.right_algebra())?;
        hs.push(gns(&w, None)?.rep);
    }
    for (k, h) in hs.iter().enumerate() {
        report.extend(&format!("roundtrip{}.", k + 1), roundtrip_equivalence_test(&spec, h));
    }
    report.output = Some(output);
    Ok(report)
}
