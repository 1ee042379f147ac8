//! Command-line front end. [`run`] is the whole program minus process exit.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bredon::{bredon_chains, bredon_cochains, Representatives};
use crate::complexes::{order_complex, partition_poset, subgroup_poset_b, unreduced_suspension, GComplex, Poset};
use crate::exactalg::{FGAbGroup, GroupRingModule, Ring};
use crate::mackey::{check_mackey_axioms, BorelFunctor, FixedPointFunctor, MackeyFunctor};
use crate::permgroups::{is_prime, symmetric_group};
use crate::verify::{
    builtin_functor, check_group_theory_cases, pointed_partition_complex, steinberg, survey_fixed_points, verify_all,
    verify_main_theorem, verify_poset_lemmas, VerificationReport,
};
use crate::{Error, Result};

fn parse_prime(s: &str) -> std::result::Result<usize, String> {
    let p: usize = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if is_prime(p) {
        Ok(p)
    } else {
        Err(format!("{p} is not prime"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "parcx", version, about = "Bredon homology of partition complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComplexArgs {
    #[arg(long)]
    pub n: usize,
    /// Use the suspension pointed at the south pole.
    #[arg(long)]
    pub suspended: bool,
    /// Include reduced integral homology in JSON output.
    #[arg(long)]
    pub homology: bool,
}

#[derive(Debug, Args)]
pub struct BredonArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_prime)]
    pub p: usize,
    /// Coefficient family: constant, fp-trivial, fp-sign, fp-regular,
    /// fp-module:<file>, borel:<n,p,j,bmax>.
    #[arg(long)]
    pub coeff: String,
    /// Internal degree of the coefficients.
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    /// Unreduced homology of `P_n` instead of reduced homology of its suspension.
    #[arg(long)]
    pub unreduced: bool,
    /// Choose orbit representatives with this seed instead of canonically.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct NpArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_prime)]
    pub p: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order complex of proper nontrivial partitions of {1..n}.
    PartitionComplex(ComplexArgs),
    /// Order complex of proper nontrivial subspaces of F_p^k.
    TitsBuilding {
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_prime)]
        p: usize,
        #[arg(long)]
        suspended: bool,
        #[arg(long)]
        homology: bool,
    },
    /// The Steinberg module of GL_k(F_p) with its action matrices.
    Steinberg {
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_prime)]
        p: usize,
    },
    /// Bredon homology of the partition complex.
    BredonHomology(BredonArgs),
    /// Bredon cohomology of the partition complex.
    BredonCohomology(BredonArgs),
    /// Mackey axioms, including the double coset formula.
    MackeyCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_prime)]
        p: usize,
        #[arg(long)]
        coeff: String,
    },
    /// Fixed subcomplexes of every p-subgroup class.
    FixedPointSurvey(NpArgs),
    /// Centralizer cases over isotropy groups.
    GroupTheoryCases(NpArgs),
    /// Compare the direct Bredon side with the Steinberg side.
    VerifyMainTheorem {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_prime)]
        p: usize,
        #[arg(long)]
        coeff: String,
    },
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// The full acceptance suite.
    All {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
    /// Lemmas on p-subgroup and partition posets.
    PosetLemmas,
}

/// JSON form of a simplicial complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexArtifact {
    pub name: String,
    pub group_order: usize,
    pub vertices: Vec<String>,
    /// Simplices by dimension, as 0-based vertex indices.
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub counts: Vec<usize>,
    pub euler_characteristic: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_homology: Option<Vec<FGAbGroup>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinbergArtifact {
    pub k: usize,
    pub p: usize,
    pub rank: usize,
    pub degree: usize,
    pub nonzero_degrees: Vec<usize>,
    pub homology: Vec<FGAbGroup>,
    /// `GL_k(F_p)` and one matrix per generator.
    pub action: serde_json::Value,
    pub tor1_trivial: FGAbGroup,
    pub tor1_regular: Option<FGAbGroup>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BredonTable {
    pub n: usize,
    pub p: usize,
    pub functor: String,
    pub internal_degree: usize,
    pub reduced: bool,
    pub kind: String,
    pub ranks: Vec<usize>,
    pub groups: Vec<FGAbGroup>,
}

/// Resolves a coefficient family name on `Σ_n`.
pub fn parse_coefficients(coeff: &str, n: usize, p: usize) -> Result<Arc<dyn MackeyFunctor>> {
    if let Some(path) = coeff.strip_prefix("fp-module:") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {path}: {e}")))?;
        let m: GroupRingModule =
            serde_json::from_str(&text).map_err(|e| Error::Usage(format!("invalid module file {path}: {e}")))?;
        if m.group != symmetric_group(n)? {
            return Err(Error::Usage(format!("module in {path} is not over the symmetric group of degree {n}")));
        }
        let label = std::path::Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("module");
        return Ok(Arc::new(FixedPointFunctor::new(m, label)));
    }
    if let Some(rest) = coeff.strip_prefix("borel:") {
        let v: Vec<usize> = rest
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Usage(format!("bad borel parameter {s:?}"))))
            .collect::<Result<_>>()?;
        let [bn, bp, j, bmax] = v[..] else {
            return Err(Error::Usage("borel takes four parameters n,p,j,bmax".into()));
        };
        if bn != n {
            return Err(Error::Usage(format!("borel functor is on degree {bn} but n = {n}")));
        }
        return Ok(Arc::new(BorelFunctor::new(bn, bp as u64, j, bmax)?));
    }
    builtin_functor(coeff, n, p)
}

fn complex_artifact(name: String, x: &GComplex, homology: bool) -> Result<ComplexArtifact> {
    Ok(ComplexArtifact {
        name,
        group_order: x.group.order(),
        vertices: x.vertex_labels.iter().map(|l| l.to_string()).collect(),
        simplices: x.simplices.clone(),
        counts: x.counts(),
        euler_characteristic: x.euler_characteristic(),
        reduced_homology: if homology { Some(x.reduced_homology_all(Ring::Integers)?) } else { None },
    })
}

fn complex_csv(a: &ComplexArtifact) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Integrity(e.to_string());
    w.write_record(["kind", "dimension", "index", "vertices", "label"]).map_err(io)?;
    for (q, level) in a.simplices.iter().enumerate() {
        let kind = match q {
            0 => "vertex",
            1 => "edge",
            _ => "simplex",
        };
        for (i, s) in level.iter().enumerate() {
            let verts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            let label = if q == 0 { a.vertices[s[0]].clone() } else { String::new() };
            w.write_record([kind, &q.to_string(), &i.to_string(), &verts.join(" "), &label]).map_err(io)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Integrity(e.to_string()))?).map_err(|e| Error::Integrity(e.to_string()))
}

fn complex_output(name: String, x: &GComplex, poset: Option<&Poset>, homology: bool, format: Format) -> Result<String> {
    let a = complex_artifact(name, x, homology)?;
    match format {
        Format::Json => Ok(to_json(&a)),
        Format::Csv => complex_csv(&a),
        Format::Dot => match poset {
            Some(p) => Ok(p.to_dot()),
            None => Err(Error::Usage("dot output is only available for the unsuspended poset".into())),
        },
    }
}

fn report_csv(r: &VerificationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Integrity(e.to_string());
    w.write_record(["report", "check", "passed", "detail"]).map_err(io)?;
    for f in &r.findings {
        w.write_record([r.name.as_str(), &f.check, &f.passed.to_string(), &f.detail]).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Integrity(e.to_string()))?).map_err(|e| Error::Integrity(e.to_string()))
}

fn table_csv(t: &BredonTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Integrity(e.to_string());
    w.write_record(["degree", "group", "rank", "torsion"]).map_err(io)?;
    for (q, g) in t.groups.iter().enumerate() {
        let tors: Vec<String> = g.torsion.iter().map(|x| x.to_string()).collect();
        w.write_record([q.to_string(), g.to_string(), g.rank.to_string(), tors.join(" ")]).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Integrity(e.to_string()))?).map_err(|e| Error::Integrity(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serializes");
    s.push('\n');
    s
}

/// Output text and whether it counts as success.
fn report_output(r: &VerificationReport, format: Format) -> Result<(String, bool)> {
    let text = match format {
        Format::Json => {
            let mut s = r.deterministic_json();
            s.push('\n');
            s
        }
        Format::Csv => report_csv(r)?,
        Format::Dot => return Err(Error::Usage("dot output is only available for complexes".into())),
    };
    Ok((text, r.status != crate::verify::Status::Fail))
}

fn bredon(args: &BredonArgs, cohomology: bool, format: Format) -> Result<String> {
    let g = parse_coefficients(&args.coeff, args.n, args.p)?;
    if args.degree >= g.degrees() {
        return Err(Error::Usage(format!("internal degree {} is out of range for {}", args.degree, g.name())));
    }
    let reduced = !args.unreduced;
    let x = if reduced { pointed_partition_complex(args.n)? } else { order_complex(&partition_poset(args.n)?)? };
    let reps = args.shuffle_seed.map_or(Representatives::Canonical, Representatives::Shuffled);
    let groups = if cohomology {
        bredon_cochains(&x, g.as_ref(), args.degree, reduced, reps)?.cohomology_all()?
    } else {
        bredon_chains(&x, g.as_ref(), args.degree, reduced, reps)?.homology_all()?
    };
    let t = BredonTable {
        n: args.n,
        p: args.p,
        functor: g.name(),
        internal_degree: args.degree,
        reduced,
        kind: if cohomology { "cohomology" } else { "homology" }.into(),
        ranks: groups.iter().map(|a| a.rank).collect(),
        groups,
    };
    match format {
        Format::Json => Ok(to_json(&t)),
        Format::Csv => table_csv(&t),
        Format::Dot => Err(Error::Usage("dot output is only available for complexes".into())),
    }
}

fn execute(cli: &Cli) -> Result<(String, bool)> {
    let f = cli.format;
    match &cli.command {
        Command::PartitionComplex(a) => {
            let poset = partition_poset(a.n)?;
            let x = order_complex(&poset)?;
            let (x, name) =
                if a.suspended { (unreduced_suspension(&x)?, format!("P_{}^susp", a.n)) } else { (x, format!("P_{}", a.n)) };
            let dot_poset = (!a.suspended).then_some(&poset);
            Ok((complex_output(name, &x, dot_poset, a.homology, f)?, true))
        }
        Command::TitsBuilding { k, p, suspended, homology } => {
            let poset = subgroup_poset_b(*k, *p)?;
            let x = order_complex(&poset)?;
            let (x, name) =
                if *suspended { (unreduced_suspension(&x)?, format!("B_{k}(F_{p})^susp")) } else { (x, format!("B_{k}(F_{p})")) };
            let dot_poset = (!suspended).then_some(&poset);
            Ok((complex_output(name, &x, dot_poset, *homology, f)?, true))
        }
        Command::Steinberg { k, p } => {
            let st = steinberg(*k, *p)?;
            let a = SteinbergArtifact {
                k: *k,
                p: *p,
                rank: st.rank,
                degree: k - 1,
                nonzero_degrees: st.nonzero_degrees.clone(),
                homology: st.homology.clone(),
                action: json!({"group": st.module.group, "matrices": st.module.action}),
                tor1_trivial: st.tor1_trivial.clone(),
                tor1_regular: st.tor1_regular.clone(),
            };
            match f {
                Format::Json => Ok((to_json(&a), true)),
                _ => Err(Error::Usage("steinberg supports json output only".into())),
            }
        }
        Command::BredonHomology(a) => Ok((bredon(a, false, f)?, true)),
        Command::BredonCohomology(a) => Ok((bredon(a, true, f)?, true)),
        Command::MackeyCheck { n, p, coeff } => {
            let g = parse_coefficients(coeff, *n, *p)?;
            report_output(&check_mackey_axioms(g.as_ref(), None)?, f)
        }
        Command::FixedPointSurvey(a) => report_output(&survey_fixed_points(a.n, a.p)?, f),
        Command::GroupTheoryCases(a) => report_output(&check_group_theory_cases(a.n, a.p)?, f),
        Command::VerifyMainTheorem { n, p, coeff } => {
            let g = parse_coefficients(coeff, *n, *p)?;
            report_output(&verify_main_theorem(*n, *p, g.as_ref())?, f)
        }
        Command::Verify(VerifyCommand::PosetLemmas) => report_output(&verify_poset_lemmas()?, f),
        Command::Verify(VerifyCommand::All { max_n }) => {
            let suite = verify_all(*max_n)?;
            let text = match f {
                Format::Json => {
                    let mut s = suite.deterministic_json();
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let io = |e: csv::Error| Error::Integrity(e.to_string());
                    w.write_record(["criterion", "title", "passed"]).map_err(io)?;
                    for c in &suite.criteria {
                        w.write_record([c.id.to_string(), c.title.clone(), c.passed.to_string()]).map_err(io)?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| Error::Integrity(e.to_string()))?)
                        .map_err(|e| Error::Integrity(e.to_string()))?
                }
                Format::Dot => return Err(Error::Usage("dot output is only available for complexes".into())),
            };
            Ok((text, suite.passed))
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    format!("{}\n", json!({"error": kind, "message": message}))
}

/// Runs the program on `argv` and returns the exit status: 0 on success,
/// 1 on a failed verification, 2 on usage or capacity errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = err.write_all(error_json("usage", e.to_string().trim()).as_bytes());
            return 2;
        }
    };
    match execute(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = err.write_all(error_json("io", &e).as_bytes());
                return 2;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = err.write_all(error_json(e.kind(), &e.to_string()).as_bytes());
            match e {
                Error::Integrity(_) => 1,
                _ => 2,
            }
        }
    }
}
