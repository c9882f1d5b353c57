use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lnfree::amalgam::{self, parse_branches};
use lnfree::blackbox::BlackBoxGroup;
use lnfree::collect::Collector;
use lnfree::epi::{build_epi, epi_family, EpiOptions};
use lnfree::hall::{HallBasis, HallConfig};
use lnfree::magnus::{coefficient_list, embed};
use lnfree::pseudofree::{split, verify_summand, verify_torsion_free, Preset};
use lnfree::report::Report;
use lnfree::varieties::{epi_lv, projection_check, VarietyChain};
use lnfree::word::{Alphabet, Word};
use lnfree::{Error, Result};

#[derive(Parser)]
#[command(name = "lnfree", version, about = "Commutator calculus for free nilpotent and pseudo-free groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of samples per randomized check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Leave the timestamp out of JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Hall basis.
    Hall {
        #[arg(long)]
        gens: usize,
        #[arg(long)]
        max_weight: usize,
    },
    /// Collect a word into Hall normal form modulo the lower central series.
    Collect {
        #[arg(long)]
        gens: usize,
        #[arg(long)]
        class: usize,
        #[arg(long)]
        word: String,
    },
    /// Magnus coefficients of a word, truncated at a degree.
    Oracle {
        #[arg(long)]
        gens: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        word: String,
        /// Compare with this word instead of listing coefficients.
        #[arg(long)]
        equal: Option<String>,
    },
    /// Load a preset, print its weight table, and optionally reduce a word.
    Preset {
        #[arg(long)]
        preset: PathBuf,
        #[arg(long)]
        word: Option<String>,
        /// Include the basis with its K-basic flags.
        #[arg(long)]
        basis: bool,
    },
    /// Run the summand, torsion-free and split suites on a preset.
    Verify {
        #[arg(long)]
        preset: PathBuf,
        /// Smaller preset for the split suite; defaults to dropping the last
        /// generator.
        #[arg(long)]
        sub: Option<PathBuf>,
    },
    /// Build and verify the epimorphism onto a finite group.
    Epi {
        #[arg(long)]
        group: PathBuf,
        /// Further groups; the joint preset must map onto all of them.
        #[arg(long)]
        family: Vec<PathBuf>,
    },
    /// The GF(2) holomorph computations.
    Amalgam {
        #[command(subcommand)]
        action: AmalgamAction,
    },
    /// Variety chains: epimorphisms from locally-V pseudo-free groups, or
    /// the projection check between two presets.
    Lv {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, required_unless_present = "project")]
        group: Option<PathBuf>,
        #[arg(long, requires = "onto")]
        project: Option<PathBuf>,
        #[arg(long)]
        onto: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AmalgamAction {
    Demo {
        /// Length of the commutator descent chain checked.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Largest k for the star identity.
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        /// Branch file for the local-finiteness check.
        #[arg(long)]
        branches: Option<PathBuf>,
        /// Divergence depth for the branch check.
        #[arg(long)]
        divergence: Option<usize>,
    },
}

/// What a subcommand produced.
struct Outcome {
    reports: Vec<Report>,
    result: Value,
    text: Vec<String>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.reports.iter().all(Report::passed)
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    inputs: Vec<InputDigest>,
    status: &'static str,
    reports: &'a [Report],
    result: &'a Value,
}

struct Ctx<'a> {
    global: &'a Global,
    inputs: Vec<InputDigest>,
}

impl Ctx<'_> {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).map_err(|_| Error::Input(format!("{}: not UTF-8", path.display())))
    }

    fn preset(&mut self, path: &Path) -> Result<Preset> {
        let text = self.read(path)?;
        Preset::from_json(&text)
    }

    fn group(&mut self, path: &Path) -> Result<BlackBoxGroup> {
        let text = self.read(path)?;
        BlackBoxGroup::from_json(&text)
    }

    fn samples(&self, default: usize) -> usize {
        self.global.samples.unwrap_or(default)
    }
}

fn report_lines(r: &Report) -> Vec<String> {
    let mut out = vec![format!("{}: {:?}{}", r.name, r.status, if r.vacuous { " (vacuous)" } else { "" })];
    for c in &r.checks {
        let mut line = format!("  {:<36} {:?}  [{} trials]", c.name, c.status, c.trials);
        if !c.detail.is_empty() {
            line.push_str(&format!("  {}", c.detail));
        }
        out.push(line);
        for w in &c.witnesses {
            out.push(format!("    witness: {w}"));
        }
    }
    out.extend(r.notes.iter().map(|n| format!("  note: {n}")));
    out.into_iter().map(|l| l.replace("Pass", "PASS").replace("Fail", "FAIL")).collect()
}

fn hall(gens: usize, max_weight: usize) -> Result<Outcome> {
    let basis = HallBasis::over(&Alphabet::standard(gens), max_weight, &HallConfig::default())?;
    let mut text = vec![format!("{} basis entries, layer sizes {:?}", basis.len(), basis.layer_sizes())];
    for e in basis.export() {
        text.push(format!("{:>5}  w{}  {}", e.index, e.weight, e.bracket));
    }
    Ok(Outcome { reports: vec![], result: json!({ "count": basis.len(), "basis": basis.export() }), text })
}

fn collect(gens: usize, class: usize, word: &str) -> Result<Outcome> {
    let alphabet = Alphabet::standard(gens);
    let w = Word::parse(word, &alphabet)?;
    let basis = Arc::new(HallBasis::over(&alphabet, class, &HallConfig::default())?);
    let collector = Collector::new(basis.clone(), class)?;
    let nf = collector.normal_form(&w)?;
    let brackets: Vec<String> = (0..basis.len()).map(|i| basis.bracket_string(i)).collect();
    let exps: Vec<String> = nf.exponents().iter().map(ToString::to_string).collect();
    let width = brackets.iter().map(String::len).max().unwrap_or(0);
    let text = brackets.iter().zip(&exps).map(|(b, e)| format!("{b:<width$}  {e}")).collect();
    Ok(Outcome { reports: vec![], result: json!({ "basis": brackets, "exponents": exps }), text })
}

fn oracle(gens: usize, degree: usize, word: &str, equal: Option<&str>) -> Result<Outcome> {
    let alphabet = Alphabet::standard(gens);
    let u = embed(&Word::parse(word, &alphabet)?, degree);
    if let Some(other) = equal {
        let same = u == embed(&Word::parse(other, &alphabet)?, degree);
        return Ok(Outcome {
            reports: vec![],
            result: json!({ "equal": same, "degree": degree }),
            text: vec![format!("equal modulo degree > {degree}: {same}")],
        });
    }
    let coeffs = coefficient_list(&u, alphabet.names());
    let text = coeffs.iter().map(|(m, c)| format!("{m:>12}  {c}")).collect();
    let result: Vec<Value> = coeffs.iter().map(|(m, c)| json!({ "monomial": m, "coefficient": c })).collect();
    Ok(Outcome { reports: vec![], result: json!({ "degree": degree, "coefficients": result }), text })
}

fn preset_cmd(ctx: &mut Ctx, path: &Path, word: Option<&str>, show_basis: bool) -> Result<Outcome> {
    let p = ctx.preset(path)?;
    let w = p.weights();
    let a = p.alphabet();
    let mut table = Vec::new();
    let mut text = vec![format!("generators {:?}, class bound {}", a.names(), p.class_bound())];
    for m in 1..=w.full_mask() {
        let names: Vec<&str> = a.names().iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, n)| n.as_str()).collect();
        text.push(format!("  c({{{}}}) = {}", names.join(","), w.value(m)));
        table.push(json!({ "subset": names, "value": w.value(m) }));
    }
    let mut result = json!({ "generators": a.names(), "class": p.class_bound(), "closure": table });
    if let Some(word) = word {
        let nf = p.nf_fr(&p.parse(word)?)?;
        let b = p.basis();
        let terms: Vec<Value> = nf
            .normal_form()
            .support()
            .map(|i| json!({ "bracket": b.bracket_string(i), "exponent": nf.exponents()[i].to_string() }))
            .collect();
        text.push(format!("reduced form: {}", nf.to_word()));
        result["reduced"] = json!({ "word": nf.to_word().to_string(), "terms": terms });
    }
    if show_basis {
        let export = p.basis().export();
        for e in &export {
            text.push(format!("{:>5}  w{}  {:<24} kBasic={}", e.index, e.weight, e.bracket, e.k_basic.unwrap_or(false)));
        }
        result["basis"] = serde_json::to_value(export).expect("serializable");
    }
    Ok(Outcome { reports: vec![], result, text })
}

fn verify(ctx: &mut Ctx, path: &Path, sub: Option<&Path>) -> Result<Outcome> {
    let p = ctx.preset(path)?;
    let seed = ctx.global.seed;
    let samples = ctx.samples(200);
    let mut reports = Vec::new();
    for n in 1..=p.class_bound() {
        reports.push(verify_summand(&p, n, samples, seed)?);
    }
    reports.push(verify_torsion_free(&p, samples.min(100), 6, seed)?);
    let smaller = match sub {
        Some(s) => Some(ctx.preset(s)?),
        None if p.alphabet().len() >= 2 => {
            let names = p.alphabet().names();
            Some(p.restrict(&names[..names.len() - 1])?)
        }
        None => None,
    };
    if let Some(p1) = smaller {
        reports.push(split(&p, &p1, samples, seed)?);
    }
    Ok(Outcome { reports, result: json!({ "preset": path.display().to_string() }), text: vec![] })
}

fn epi(ctx: &mut Ctx, group: &Path, family: &[PathBuf]) -> Result<Outcome> {
    let opts = EpiOptions { samples: ctx.samples(500), seed: ctx.global.seed, ..EpiOptions::default() };
    let g = ctx.group(group)?;
    if family.is_empty() {
        let e = build_epi(&g, &opts)?;
        let a = e.preset.alphabet();
        let table: Vec<Value> = (1..=e.weights.full_mask()).map(|m| json!({ "mask": m, "value": e.weights.value(m) })).collect();
        let result = json!({ "generators": a.names(), "weights": table, "preset": e.preset.to_file() });
        return Ok(Outcome { reports: vec![e.report], result, text: vec![] });
    }
    let mut groups = vec![g];
    for f in family {
        groups.push(ctx.group(f)?);
    }
    let f = epi_family(&groups, &opts)?;
    let result = match &f.joint {
        Some(j) => json!({ "joint": j.preset.to_file(), "components": j.components }),
        None => Value::Null,
    };
    Ok(Outcome { reports: vec![f.report], result, text: vec![] })
}

fn amalgam_demo(ctx: &mut Ctx, depth: usize, kmax: usize, branches: Option<&Path>, divergence: Option<usize>) -> Result<Outcome> {
    if depth == 0 || kmax == 0 {
        return Err(Error::Input("--depth and --kmax must be at least 1".into()));
    }
    let mut reports = vec![amalgam::relations_check(64), amalgam::descent_chain(depth), amalgam::star_identity(kmax)];
    let mut orders = Vec::new();
    for k in (1..=depth.min(9)).step_by(2) {
        let (n, r) = amalgam::truncated_order(k)?;
        orders.push(json!({ "k": k, "order": n }));
        reports.push(r);
    }
    reports.push(amalgam::aut_equality_check(ctx.samples(200), ctx.global.seed));
    let mut result = json!({ "truncated_orders": orders });
    if let Some(path) = branches {
        let text = ctx.read(path)?;
        let bs = parse_branches(&text)?;
        let a = amalgam::branch_group_check(&bs, divergence)?;
        result["branches"] = json!({ "c_dim": a.c_dim, "w_star": a.w_star, "bound": a.bound.to_string(), "window_order": a.window_order });
        reports.push(a.report);
    }
    Ok(Outcome { reports, result, text: vec![] })
}

fn lv(ctx: &mut Ctx, chain: &Path, group: Option<&Path>, project: Option<&Path>, onto: Option<&Path>) -> Result<Outcome> {
    let text = ctx.read(chain)?;
    let chain = VarietyChain::from_json(&text)?;
    let samples = ctx.samples(200);
    let seed = ctx.global.seed;
    let mut reports = Vec::new();
    let mut result = json!({});
    if let Some(g) = group {
        let g = ctx.group(g)?;
        let e = epi_lv(&g, &chain, samples, seed)?;
        let table: Vec<Value> = (1..=e.weights.full_mask()).map(|m| json!({ "mask": m, "value": e.weights.value(m) })).collect();
        result["weights"] = json!(table);
        reports.push(e.report);
    }
    if let (Some(p2), Some(p1)) = (project, onto) {
        let p2 = ctx.preset(p2)?;
        let p1 = ctx.preset(p1)?;
        reports.push(projection_check(&p2, &p1, &chain, samples, seed)?);
    }
    Ok(Outcome { reports, result, text: vec![] })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Hall { .. } => "hall",
        Command::Collect { .. } => "collect",
        Command::Oracle { .. } => "oracle",
        Command::Preset { .. } => "preset",
        Command::Verify { .. } => "verify",
        Command::Epi { .. } => "epi",
        Command::Amalgam { .. } => "amalgam",
        Command::Lv { .. } => "lv",
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let mut ctx = Ctx { global: &cli.global, inputs: Vec::new() };
    let outcome = match &cli.command {
        Command::Hall { gens, max_weight } => hall(*gens, *max_weight)?,
        Command::Collect { gens, class, word } => collect(*gens, *class, word)?,
        Command::Oracle { gens, degree, word, equal } => oracle(*gens, *degree, word, equal.as_deref())?,
        Command::Preset { preset, word, basis } => preset_cmd(&mut ctx, preset, word.as_deref(), *basis)?,
        Command::Verify { preset, sub } => verify(&mut ctx, preset, sub.as_deref())?,
        Command::Epi { group, family } => epi(&mut ctx, group, family)?,
        Command::Amalgam { action: AmalgamAction::Demo { depth, kmax, branches, divergence } } => {
            amalgam_demo(&mut ctx, *depth, *kmax, branches.as_deref(), *divergence)?
        }
        Command::Lv { chain, group, project, onto } => {
            lv(&mut ctx, chain, group.as_deref(), project.as_deref(), onto.as_deref())?
        }
    };
    let passed = outcome.passed();
    let timestamp = (!cli.global.no_timestamp).then(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    let envelope = Envelope {
        tool: "lnfree",
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        seed: cli.global.seed,
        timestamp,
        inputs: ctx.inputs,
        status: if passed { "PASS" } else { "FAIL" },
        reports: &outcome.reports,
        result: &outcome.result,
    };
    let json = serde_json::to_string_pretty(&envelope).expect("serializable") + "\n";
    if let Some(path) = &cli.global.report {
        std::fs::write(path, &json).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    let mut out = String::new();
    match cli.global.format {
        Format::Json => out.push_str(&json),
        Format::Text => {
            for line in outcome.text.iter().cloned().chain(outcome.reports.iter().flat_map(report_lines)) {
                out.push_str(&line);
                out.push('\n');
            }
            if !outcome.reports.is_empty() {
                out.push_str(envelope.status);
                out.push('\n');
            }
        }
    }
    // a closed pipe downstream is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
