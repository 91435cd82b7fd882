//! Command-line front end. Every subcommand prints a human summary, or JSON
//! with `--json`, and exits 0 (clean), 1 (findings), 2 (bad input) or
//! 3 (size cap).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{
    abelianization_invariants, bigint_json, canonical_images, crossing_orbit_growth, is_periodic,
    order_sequence, smith_normal_form, AlgebraError, IntMatrix,
};
use crate::complex::{
    build_quotient_complex, check_npc, ComplexError, SquareComplex, DEFAULT_SIZE_CAP,
};
use crate::group::{GroupError, GroupParams};
use crate::hyperplane::interaction_report;
use crate::verifier::{all_empty, certificates_json, cross_validate, verify, CaseCertificate};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;

const GROWTH_LABEL: &str = "lower bound on orbit count";

#[derive(Debug, Parser)]
#[command(
    name = "special-cube",
    version,
    about = "Build and check quotients of branched cube complexes"
)]
pub struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the primary artefact to this file.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Largest group order a build may enumerate.
    #[arg(long, global = true, env = "SPECIAL_CUBE_SIZE_CAP")]
    pub size_cap: Option<u64>,
    /// Add tool metadata (including a timestamp) to JSON payloads.
    #[arg(long, global = true)]
    pub stamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a height truncation of the quotient complex.
    Build {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, allow_hyphen_values = true)]
        hmin: i64,
        #[arg(long, allow_hyphen_values = true)]
        hmax: i64,
    },
    /// Check hyperplanes and links of a complex file.
    Check {
        input: PathBuf,
        /// Ignore witnesses within this many heights of the truncation.
        #[arg(long)]
        margin: Option<i64>,
        /// Also write the hyperplane interaction graph.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Certify the osculation cases and structural conditions.
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Compare certificates with the engine on a built truncation.
        #[arg(long)]
        cross_validate: bool,
        #[arg(long, allow_hyphen_values = true)]
        hmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        hmax: Option<i64>,
        #[arg(long)]
        margin: Option<i64>,
    },
    /// Smith normal form of an integer matrix (JSON array or text grid).
    Snf {
        /// Matrix file, or `-` for stdin.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Invariant factors of the abelianised group.
    Abelianize {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Count crossing classes of `x1^i`, |i| <= radius, in the abelianisation.
    Growth {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        radius: u64,
    },
    /// Orders of `s1^i ⋯ sm^i` for the canonical images, and their period.
    TorsionProbe {
        #[command(flatten)]
        group: GroupArgs,
        /// Sample i in [-radius, radius]; defaults to 3k.
        #[arg(long)]
        radius: Option<i64>,
        /// Largest period searched; defaults to 2k.
        #[arg(long)]
        max_period: Option<usize>,
    },
}

/// What the process should report and how it should exit.
struct Outcome {
    code: i32,
    doc: Value,
    human: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<ComplexError> for Failure {
    fn from(e: ComplexError) -> Failure {
        let code = match e {
            ComplexError::SizeCap { .. } => EXIT_CAP,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Failure {
        Failure::input(e)
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Failure {
        Failure::input(e)
    }
}

/// Parse `args` (program name first) and run, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_CLEAN
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, err) {
        Ok(outcome) => {
            let mut doc = outcome.doc;
            if cli.stamp {
                doc = stamped(doc);
            }
            let text = if cli.json {
                pretty(&doc)
            } else {
                outcome.human
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            outcome.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialises");
    s.push('\n');
    s
}

fn stamped(doc: Value) -> Value {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix": secs,
    });
    match doc {
        Value::Object(mut map) => {
            map.insert("meta".into(), meta);
            Value::Object(map)
        }
        other => json!({"meta": meta, "result": other}),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn params(g: GroupArgs, err: &mut dyn Write) -> Result<GroupParams, Failure> {
    let p = GroupParams::new(g.m, g.k)?;
    if !p.meets_theorem_hypotheses() {
        let _ = writeln!(
            err,
            "warning: {p} is outside the proven range (m >= 4, k prime); results are enumerated honestly"
        );
    }
    Ok(p)
}

fn dispatch(cli: &Cli, err: &mut dyn Write) -> Result<Outcome, Failure> {
    let cap = cli.size_cap.unwrap_or(DEFAULT_SIZE_CAP);
    match &cli.command {
        Command::Build { group, hmin, hmax } => {
            let p = params(*group, err)?;
            let x = build_quotient_complex(&p, *hmin, *hmax, cap)?;
            let summary = json!({
                "m": p.m(), "k": p.k(), "h_min": hmin, "h_max": hmax,
                "vertices": x.vertices().len(),
                "edges": x.edges().len(),
                "squares": x.squares().len(),
            });
            let mut complex = x.to_json_value();
            if cli.stamp {
                complex = stamped(complex);
            }
            match &cli.output {
                Some(path) => {
                    write_file(path, &pretty(&complex))?;
                    Ok(Outcome {
                        code: EXIT_CLEAN,
                        doc: summary,
                        human: format!("{x}\n"),
                    })
                }
                // Without a file the complex itself is the payload.
                None => {
                    let _ = writeln!(err, "{x}");
                    Ok(Outcome {
                        code: EXIT_CLEAN,
                        human: pretty(&complex),
                        doc: complex,
                    })
                }
            }
        }
        Command::Check { input, margin, dot } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", input.display())))?;
            let x = SquareComplex::load_json(&text)?;
            cmd_check(cli, &x, *margin, dot.as_ref())
        }
        Command::Verify {
            group,
            cross_validate: cv,
            hmin,
            hmax,
            margin,
        } => {
            let p = params(*group, err)?;
            cmd_verify(cli, &p, cap, *cv, *hmin, *hmax, *margin)
        }
        Command::Snf { matrix } => {
            let text = if matrix.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::input(format!("cannot read stdin: {e}")))?;
                s
            } else {
                std::fs::read_to_string(matrix)
                    .map_err(|e| Failure::input(format!("cannot read {}: {e}", matrix.display())))?
            };
            let m = IntMatrix::parse(&text)?;
            let r = smith_normal_form(&m);
            let factors: Vec<Value> = r.invariant_factors.iter().map(bigint_json).collect();
            let doc = json!({
                "invariant_factors": factors,
                "rank": r.rank(),
                "d": r.d.to_json(),
                "u": r.u.to_json(),
                "v": r.v.to_json(),
            });
            finish(cli, doc, |d| {
                format!("invariant factors: {}\n", d["invariant_factors"])
            })
        }
        Command::Abelianize { group } => {
            let p = params(*group, err)?;
            let a = abelianization_invariants(&p);
            let doc = json!({
                "m": p.m(), "k": p.k(),
                "torsion": a.torsion.iter().map(bigint_json).collect::<Vec<_>>(),
                "free_rank": a.free_rank,
                "group": a.to_string(),
            });
            finish(cli, doc, |d| {
                format!("{}\n", d["group"].as_str().unwrap_or_default())
            })
        }
        Command::Growth { group, radius } => {
            let p = params(*group, err)?;
            let count = crossing_orbit_growth(&p, *radius)?;
            let doc = json!({
                "m": p.m(), "k": p.k(), "radius": radius, "count": count,
                "interpretation": GROWTH_LABEL,
            });
            finish(cli, doc, |_| format!("{count} ({GROWTH_LABEL})\n"))
        }
        Command::TorsionProbe {
            group,
            radius,
            max_period,
        } => {
            let p = params(*group, err)?;
            let k = p.k() as i64;
            let r = radius.unwrap_or(3 * k);
            if r < 0 {
                return Err(Failure::input("radius must be non-negative"));
            }
            let max_period = max_period.unwrap_or(2 * p.k() as usize);
            let seq = order_sequence(&canonical_images(&p), -r..=r)?;
            let period = is_periodic(&seq, max_period)?;
            let trivial = seq.trivial_positions();
            let exact = (-r..=r).filter(|i| i % k == 0).eq(trivial.iter().copied());
            let doc = json!({
                "m": p.m(), "k": p.k(),
                "start": seq.start,
                "values": seq.values,
                "period": period,
                "trivial_positions": trivial,
                "trivial_exactly_at_multiples_of_k": exact,
            });
            finish(cli, doc, |d| {
                format!(
                    "orders over [{}, {r}]: {}\nperiod: {}\n",
                    -r,
                    d["values"],
                    period.map_or("none".to_string(), |p| p.to_string())
                )
            })
        }
    }
}

/// Write `doc` to the output file if requested and build a clean outcome.
fn finish(cli: &Cli, doc: Value, human: impl FnOnce(&Value) -> String) -> Result<Outcome, Failure> {
    if let Some(path) = &cli.output {
        write_file(path, &pretty(&doc))?;
    }
    let human = human(&doc);
    Ok(Outcome {
        code: EXIT_CLEAN,
        doc,
        human,
    })
}

fn cmd_check(
    cli: &Cli,
    x: &SquareComplex,
    margin: Option<i64>,
    dot: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    let full = interaction_report(x);
    let report = match margin {
        None => full,
        Some(m) => {
            let heights: Vec<i64> = x
                .vertices()
                .iter()
                .map(|v| {
                    v.height.ok_or_else(|| {
                        Failure::input(format!("--margin needs heights; vertex {} has none", v.id))
                    })
                })
                .collect::<Result<_, _>>()?;
            let lo = heights.iter().min().copied().unwrap_or(0) + m;
            let hi = heights.iter().max().copied().unwrap_or(0) - m;
            if lo > hi {
                return Err(Failure::input(format!("margin {m} leaves an empty core")));
            }
            full.core_restrict(x, lo, hi).map_err(Failure::input)?
        }
    };
    let npc = check_npc(x);
    let doc = report.to_json(x, Some(&npc));
    if let Some(path) = dot {
        write_file(path, &report.to_dot(x))?;
    }
    if let Some(path) = &cli.output {
        write_file(path, &pretty(&doc))?;
    }
    let v = &report.violations;
    let clean = v.is_empty() && npc.pass;
    let mut human = String::new();
    let _ = writeln!(human, "{x}");
    let _ = writeln!(human, "hyperplanes: {}", report.partition.class_count());
    let _ = writeln!(human, "crossing pairs: {}", report.crossing_count());
    let _ = writeln!(human, "osculating pairs: {}", report.osculation_count());
    if let Some((lo, hi)) = report.core {
        let _ = writeln!(human, "core heights: [{lo}, {hi}]");
    }
    for (name, n) in [
        ("self_cross", v.self_cross.len()),
        ("one_sided", v.one_sided.len()),
        ("self_osc", v.self_osc.len()),
        ("inter_osc", v.inter_osc.len()),
        ("npc", npc.failures.len()),
    ] {
        let _ = writeln!(human, "{name:<12}{n}");
    }
    let _ = writeln!(
        human,
        "{}",
        if clean { "clean" } else { "violations found" }
    );
    Ok(Outcome {
        code: if clean { EXIT_CLEAN } else { EXIT_FINDINGS },
        doc,
        human,
    })
}

fn cmd_verify(
    cli: &Cli,
    p: &GroupParams,
    cap: u64,
    cv: bool,
    hmin: Option<i64>,
    hmax: Option<i64>,
    margin: Option<i64>,
) -> Result<Outcome, Failure> {
    let certs = verify(p, cap)?;
    let mut clean = all_empty(&certs);
    let mut human = certificate_table(&certs);
    let doc = if cv {
        let k = p.k() as i64;
        let (lo, hi) = (hmin.unwrap_or(-(2 * k + 2)), hmax.unwrap_or(2 * k + 2));
        let margin = margin.unwrap_or(k);
        if margin < 0 || lo + margin > hi - margin {
            return Err(Failure::input(format!(
                "margin {margin} leaves an empty core in [{lo}, {hi}]"
            )));
        }
        let report = cross_validate(p, lo, hi, margin, cap)?;
        clean &= report.agreement;
        let _ = writeln!(
            human,
            "cross-validation on [{lo}, {hi}] margin {margin}: {}",
            if report.agreement {
                "agreement"
            } else {
                "disagreement"
            }
        );
        for f in &report.findings {
            let _ = writeln!(human, "  {f}");
        }
        json!({"certificates": certificates_json(&certs), "cross_validation": report.to_json()})
    } else {
        certificates_json(&certs)
    };
    let _ = writeln!(
        human,
        "{}",
        if clean {
            "all cases empty"
        } else {
            "non-empty cases found"
        }
    );
    if let Some(path) = &cli.output {
        write_file(path, &pretty(&doc))?;
    }
    Ok(Outcome {
        code: if clean { EXIT_CLEAN } else { EXIT_FINDINGS },
        doc,
        human,
    })
}

fn certificate_table(certs: &[CaseCertificate]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22}{:>4}  {:<6}{:>10}  separating",
        "case", "j", "empty", "checked"
    );
    for c in certs {
        let j = c.j.map_or("all".to_string(), |j| j.to_string());
        let sep = match (&c.named_character, &c.separating_character) {
            (Some(n), _) if n.valid => format!("{} = {}", n.name, n.character),
            (_, Some(ch)) => ch.to_string(),
            _ => "-".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<22}{:>4}  {:<6}{:>10}  {sep}",
            c.case_id,
            j,
            if c.empty { "yes" } else { "no" },
            c.enumerated
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["special-cube"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            call(&["build", "--m", "4", "--k", "2", "--hmin", "0", "--hmax", "0"]).0,
            EXIT_INPUT
        );
        assert_eq!(
            call(&["build", "--m", "10", "--k", "5", "--hmin", "0", "--hmax", "2"]).0,
            EXIT_CAP
        );
        assert_eq!(
            call(&["build", "--m", "2", "--k", "5", "--hmin", "0", "--hmax", "2"]).0,
            EXIT_INPUT
        );
        assert_eq!(call(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(call(&["--help"]).0, EXIT_CLEAN);
    }

    #[test]
    fn algebra_commands() {
        let (code, out, _) = call(&["abelianize", "--m", "4", "--k", "2"]);
        assert_eq!((code, out.as_str()), (0, "C2 x Z^3\n"));
        let (code, out, _) = call(&["--json", "growth", "--m", "4", "--k", "2", "--radius", "5"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!((code, v["count"].as_u64()), (0, Some(11)));
        assert_eq!(v["interpretation"], GROWTH_LABEL);
        let (_, out, _) = call(&["--json", "torsion-probe", "--m", "4", "--k", "3"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["period"], 3);
        assert_eq!(v["trivial_exactly_at_multiples_of_k"], true);
    }

    #[test]
    fn warning_outside_hypotheses() {
        let (_, _, err) = call(&["abelianize", "--m", "3", "--k", "2"]);
        assert!(err.contains("warning"));
        let (_, _, err) = call(&["abelianize", "--m", "4", "--k", "3"]);
        assert!(err.is_empty());
    }
}
