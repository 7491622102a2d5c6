//! `chebimg`: command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on errors
//! (bad input, refused sizes, numerical breakdown).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use chebimg::chebmap::{build_cheb_map, verify_functional_equation};
use chebimg::critical::{critical_locus_check, deltoid_residual, diagram_invariance_check, post_critical_check, sample_diagram_points};
use chebimg::gencos::GeneralizedCosine;
use chebimg::monodromy::{affine_generators, check_img_size, img_verification, ImgOptions, NumericOptions};
use chebimg::rootsys::{AffineElement, RootSystem, DEFAULT_WEYL_CAP};
use chebimg::selfsim::{act_on_word, build_automaton, export_automaton, ExportFormat, TreeAutomorphism, TreeWord, DEFAULT_STATE_CAP};
use chebimg::Error;

#[derive(Parser)]
#[command(name = "chebimg", version, about = "Chebyshev-like maps of root systems and their monodromy on preimage trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Root system data and axiom checks
    Roots(Common),
    /// Weyl group enumeration
    Weyl(Common),
    /// Synthesize T_{Phi,d} and check its functional equation
    Chebmap(Common),
    /// Check T(Psi(x)) = Psi(d x) at random points
    VerifyFunctional(Common),
    /// Critical points over (1/d)H, invariance of H, critical locus of Psi, deltoid (A2)
    VerifyPostcritical(Common),
    /// Compare lifted monodromy with the affine Weyl group action
    ImgVerify(Common),
    /// Finite automaton of the affine generators
    Automaton(Common),
    /// Apply a generator word to a tree word: `act A1 2 t 111`
    Act(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Positional form: TYPE [D [LEVELS]], or for `act`: TYPE D GENWORD TREEWORD
    positional: Vec<String>,
    #[arg(long = "type")]
    type_spec: Option<String>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cap_vertices: Option<u128>,
    #[arg(long)]
    cap_group: Option<u128>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Outcome {
    Pass(String),
    Fail(String),
}

type CmdResult = Result<Outcome, String>;

impl Common {
    fn type_spec(&self) -> Result<String, String> {
        self.type_spec
            .clone()
            .or_else(|| self.positional.first().cloned())
            .ok_or_else(|| "missing root system type (e.g. A2 or B2xA1)".to_string())
    }

    fn root_system(&self) -> Result<RootSystem, String> {
        RootSystem::build(&self.type_spec()?).map_err(|e| e.to_string())
    }

    fn positional_num<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<Option<T>, String> {
        self.positional
            .get(i)
            .map(|s| s.parse::<T>().map_err(|_| format!("invalid {what}: {s}")))
            .transpose()
    }

    fn d(&self) -> Result<u64, String> {
        let d = match self.d {
            Some(d) => d,
            None => self.positional_num(1, "d")?.ok_or("missing d")?,
        };
        if d == 0 {
            return Err("d must be positive".into());
        }
        Ok(d)
    }

    fn levels(&self, default: u32) -> Result<u32, String> {
        Ok(match self.levels {
            Some(k) => k,
            None => self.positional_num(2, "levels")?.unwrap_or(default),
        })
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serializes")
}

fn outcome(passed: bool, body: String) -> Outcome {
    if passed {
        Outcome::Pass(body)
    } else {
        Outcome::Fail(body)
    }
}

fn cmd_roots(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let axioms = rs.verify_axioms();
    let mut v = rs.to_json();
    v["axioms"] = json!(axioms);
    Ok(outcome(axioms.all_pass(), pretty(&v)))
}

fn cmd_weyl(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let cap = c.cap_group.unwrap_or(DEFAULT_WEYL_CAP);
    let group = rs.weyl_group_elements_capped(cap).map_err(|e| e.to_string())?;
    let order = group.len() as u128;
    let expected = rs.weyl_order_estimate();
    let elements: Vec<Value> = group.iter().map(|w| json!(w.coroot.rows())).collect();
    let v = json!({
        "type_spec": rs.type_spec,
        "order": order,
        "classification_order": expected,
        "elements": elements,
    });
    Ok(outcome(order == expected, pretty(&v)))
}

fn cmd_chebmap(c: &Common, with_map: bool) -> CmdResult {
    let rs = c.root_system()?;
    let d = c.d()?;
    let p = build_cheb_map(&rs, d).map_err(|e| e.to_string())?;
    let report = verify_functional_equation(&rs, d, &p, c.samples.unwrap_or(100), c.tol.unwrap_or(1e-8), c.seed);
    if with_map && matches!(c.format, Format::Text) {
        let mut lines: Vec<String> =
            p.components.iter().enumerate().map(|(i, q)| format!("T{} = {}", i + 1, q.display(&p.height))).collect();
        lines.push(format!(
            "functional equation: max residual {:.3e} over {} samples ({})",
            report.max_residual,
            report.samples,
            if report.passed { "pass" } else { "fail" }
        ));
        return Ok(outcome(report.passed, lines.join("\n")));
    }
    let v = if with_map {
        let mut v = p.to_json();
        v["display"] = json!(p.components.iter().map(|q| q.display(&p.height)).collect::<Vec<_>>());
        v["verification"] = json!(report);
        v
    } else {
        json!(report)
    };
    Ok(outcome(report.passed, pretty(&v)))
}

fn cmd_postcritical(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let d = c.d()?;
    let samples = c.samples.unwrap_or(50);
    let p = build_cheb_map(&rs, d).map_err(|e| e.to_string())?;
    let post = post_critical_check(&rs, d, &p, samples, c.tol.unwrap_or(1e-7), c.seed).map_err(|e| e.to_string())?;
    let inv = diagram_invariance_check(&rs, d, samples, c.seed);
    let crit = critical_locus_check(&rs, samples, 2 * samples, c.seed);
    let mut passed = post.passed && inv.passed && crit.passed;
    let mut v = json!({ "post_critical": post, "invariance": inv, "critical_locus": crit });
    if rs.type_spec == "A2" {
        let psi = GeneralizedCosine::new(&rs);
        let worst = sample_diagram_points(&rs, 2 * samples, -2..=2, c.seed)
            .iter()
            .map(|s| {
                let x = psi.eval(&s.point_c());
                deltoid_residual(x[0], x[1]).norm()
            })
            .fold(0.0, f64::max);
        passed &= worst <= 1e-7;
        v["deltoid_max_residual"] = json!(worst);
    }
    v["passed"] = json!(passed);
    Ok(outcome(passed, pretty(&v)))
}

fn img_options(c: &Common) -> ImgOptions {
    let mut o = ImgOptions { numeric: NumericOptions { seed: c.seed, ..Default::default() }, ..Default::default() };
    if let Some(v) = c.cap_vertices {
        o.numeric.vertex_cap = v;
    }
    if let Some(g) = c.cap_group {
        o.group_cap = g;
    }
    o
}

fn refusal(e: Error) -> String {
    match e {
        Error::CapExceeded { what, estimated, cap } => {
            let hint = match what {
                "tree vertices" => "lower --levels or raise --cap-vertices",
                "permutation group order bound" | "permutation group order" => "lower --levels or raise --cap-group",
                _ => "lower --levels or d",
            };
            format!("refusing: {what} would be {estimated}, above the cap {cap}; {hint}")
        }
        other => other.to_string(),
    }
}

fn cmd_img(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let d = c.d()?;
    let k = c.levels(2)?;
    let opts = img_options(c);
    check_img_size(&rs, d, k, &opts).map_err(refusal)?;
    let r = img_verification(&rs, d, k, &opts).map_err(refusal)?;
    Ok(outcome(r.passed, pretty(&json!(r))))
}

fn generator_automorphisms(rs: &RootSystem, d: u64) -> (Vec<String>, Vec<TreeAutomorphism>) {
    affine_generators(rs).into_iter().map(|g| (g.name, TreeAutomorphism::new(g.element, d))).unzip()
}

fn cmd_automaton(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let d = c.d()?;
    let (names, gens) = generator_automorphisms(&rs, d);
    let a = build_automaton(&gens, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let format = match c.format {
        Format::Json => ExportFormat::Json,
        Format::Text => ExportFormat::Text,
    };
    Ok(Outcome::Pass(export_automaton(&a, format, &names)))
}

/// Parses a product of tokens `id`, `s0..sn` (affine generators), `t1..tn`
/// (coroot translations; `t` alone for rank 1), applied right to left.
fn parse_group_word(rs: &RootSystem, word: &str) -> Result<AffineElement, String> {
    let n = rs.rank;
    let gens = affine_generators(rs);
    let mut g = AffineElement::identity(n);
    for tok in word.split(|c: char| c.is_whitespace() || c == '*' || c == '.').filter(|s| !s.is_empty()) {
        let (base, inverse) = match tok.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let mut x = if base == "id" {
            AffineElement::identity(n)
        } else if let Some(gen) = gens.iter().find(|x| x.name == base) {
            gen.element.clone()
        } else if let Some(rest) = base.strip_prefix('t') {
            let i: usize = if rest.is_empty() && n == 1 {
                1
            } else {
                rest.parse().map_err(|_| format!("unknown token {tok}"))?
            };
            if i == 0 || i > n {
                return Err(format!("translation index out of range: {tok}"));
            }
            let mut t = vec![0; n];
            t[i - 1] = 1;
            AffineElement::translation(t)
        } else {
            return Err(format!("unknown token {tok}"));
        };
        if inverse {
            x = x.inverse();
        }
        g = g.compose(&x);
    }
    Ok(g)
}

fn cmd_act(c: &Common) -> CmdResult {
    let rs = c.root_system()?;
    let d = c.d()?;
    let (gen_word, tree_word) = match c.positional.len() {
        4 => (&c.positional[2], &c.positional[3]),
        _ => return Err("usage: act TYPE D GENWORD TREEWORD".into()),
    };
    let g = parse_group_word(&rs, gen_word)?;
    let w = TreeWord::parse(tree_word, d, rs.rank).map_err(|e| e.to_string())?;
    let image = act_on_word(&TreeAutomorphism::new(g, d), &w).map_err(|e| e.to_string())?;
    Ok(Outcome::Pass(image.to_string()))
}

fn emit(c: &Common, text: &str) -> Result<(), String> {
    match &c.out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| format!("{}: {e}", path.display())),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Roots(c) => (c, cmd_roots(c)),
        Command::Weyl(c) => (c, cmd_weyl(c)),
        Command::Chebmap(c) => (c, cmd_chebmap(c, true)),
        Command::VerifyFunctional(c) => (c, cmd_chebmap(c, false)),
        Command::VerifyPostcritical(c) => (c, cmd_postcritical(c)),
        Command::ImgVerify(c) => (c, cmd_img(c)),
        Command::Automaton(c) => (c, cmd_automaton(c)),
        Command::Act(c) => (c, cmd_act(c)),
    };
    let (text, code) = match result {
        Ok(Outcome::Pass(t)) => (t, ExitCode::SUCCESS),
        Ok(Outcome::Fail(t)) => (t, ExitCode::from(1)),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(common, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_words() {
        let rs = RootSystem::build("A1").unwrap();
        assert_eq!(parse_group_word(&rs, "t").unwrap(), AffineElement::translation(vec![1]));
        assert_eq!(parse_group_word(&rs, "s0 s1").unwrap(), AffineElement::translation(vec![1]));
        assert_eq!(parse_group_word(&rs, "t^-1").unwrap(), AffineElement::translation(vec![-1]));
        assert!(parse_group_word(&rs, "id").unwrap().is_identity());
        assert!(parse_group_word(&rs, "q").is_err());
        assert!(parse_group_word(&rs, "t2").is_err());
        let rs = RootSystem::build("A2").unwrap();
        assert!(parse_group_word(&rs, "t").is_err());
        assert_eq!(parse_group_word(&rs, "t2*t2").unwrap(), AffineElement::translation(vec![0, 2]));
    }
}
