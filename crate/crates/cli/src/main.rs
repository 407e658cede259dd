// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use clone_minor::boolean::{class_label, expected_poset, representative, BooleanClone};
use clone_minor::bounds::{bound_arity, check_bound, reduce_to_d_ary};
use clone_minor::minors::{enumerate_classes, is_minor, minor_bruteforce, minor_decide};
use clone_minor::{CloneHandle, Error, NamedClone, Operation, Poset};
use num_traits::ToPrimitive;
use serde_json::json;

/// Minor relations between operations on finite sets.
///
/// Operations are written `k:n:digits`: base size, arity, then the value
/// table in lexicographic order of the inputs (`2:2:0001` is AND).
#[derive(Parser)]
#[command(name = "clone-minor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Orbit criterion; needs a clone containing the discriminator.
    Decide,
    /// Exhaustive search for a witness tuple.
    Brute,
    /// Orbit criterion when applicable, search otherwise.
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Class label of a Boolean operation under O, T0, T1, Tid, S or D.
    Classify {
        op: String,
        #[arg(long)]
        clone: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether F is a C-minor of G.
    Minor {
        f: String,
        g: String,
        #[arg(long)]
        clone: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether F and G are C-equivalent.
    Equiv {
        f: String,
        g: String,
        #[arg(long)]
        clone: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// Equivalence classes meeting arities up to the maximum.
    Classes {
        #[arg(long)]
        clone: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long)]
        json: bool,
    },
    /// Hasse diagram of the class poset, compared with the known diagram
    /// for the Boolean discriminator clones.
    Hasse {
        #[arg(long)]
        clone: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Check N(k,r) ≤ S(d,r) for d = k^k − k^(k−1) + 1.
    VerifyBound {
        #[arg(long)]
        k: usize,
    },
    /// Build a d-ary operation equivalent to OP under the discriminator clone.
    Reduce {
        op: String,
        /// Target arity; defaults to k^k − k^(k−1) + 1.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Check that x1+…+xm is a C-minor of x1+…+xn exactly when m ≤ n
    /// (for R1 the sums carry the constant n+1).
    Witness {
        #[arg(long)]
        clone: String,
        #[arg(long, default_value_t = 3)]
        max: usize,
        #[arg(long)]
        json: bool,
    },
    /// Members of a clone at one arity.
    CloneGen {
        #[arg(long)]
        clone: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Domain(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

type Outcome = Result<bool, Failure>;

// a closed stdout (e.g. piping into `head`) is not an error
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn parse_op(text: &str) -> Result<Operation, Failure> {
    Ok(text.parse::<Operation>()?)
}

fn boolean_id(clone: &str) -> Result<BooleanClone, Failure> {
    BooleanClone::from_id(clone).ok_or_else(|| {
        Failure::Domain(format!(
            "{clone:?} is not one of the Boolean discriminator clones O, T0, T1, Tid, S, D"
        ))
    })
}

fn print_json(v: &serde_json::Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("plain data"));
}

fn decide(
    f: &Operation,
    g: &Operation,
    clone: &CloneHandle,
    method: Method,
) -> Result<(bool, Option<Vec<Operation>>), Failure> {
    Ok(match method {
        Method::Decide => (minor_decide(f, g, clone)?, None),
        Method::Auto => (is_minor(f, g, clone)?, None),
        Method::Brute => {
            let w = minor_bruteforce(f, g, clone)?;
            (w.is_some(), w)
        }
    })
}

fn classify(op: &str, clone: &str, as_json: bool) -> Outcome {
    let f = parse_op(op)?;
    let c = boolean_id(clone)?;
    let label = class_label(&f, c)?;
    let (rep, formula) = representative(&label);
    if as_json {
        print_json(&json!({
            "clone": c.id(),
            "label": label.to_string(),
            "representative": rep.to_string(),
            "formula": formula,
        }));
    } else {
        out!("{label}");
        out!("representative: {formula} ({rep})");
    }
    Ok(true)
}

fn minor(f: &str, g: &str, clone: &str, method: Method, as_json: bool) -> Outcome {
    let (f, g) = (parse_op(f)?, parse_op(g)?);
    let c = CloneHandle::parse(clone, f.k())?;
    let (yes, witness) = decide(&f, &g, &c, method)?;
    if as_json {
        print_json(&json!({
            "clone": c.name(),
            "f": f.to_string(),
            "g": g.to_string(),
            "minor": yes,
            "witness": witness.as_ref().map(|w| w.iter().map(|h| h.to_string()).collect::<Vec<_>>()),
        }));
    } else {
        out!("{}", if yes { "yes" } else { "no" });
        if let Some(w) = witness {
            for (i, h) in w.iter().enumerate() {
                out!("h{} = {h}", i + 1);
            }
        }
    }
    Ok(yes)
}

fn equiv(f: &str, g: &str, clone: &str, method: Method, as_json: bool) -> Outcome {
    let (f, g) = (parse_op(f)?, parse_op(g)?);
    let c = CloneHandle::parse(clone, f.k())?;
    let forward = decide(&f, &g, &c, method)?.0;
    let backward = decide(&g, &f, &c, method)?.0;
    let yes = forward && backward;
    if as_json {
        print_json(&json!({
            "clone": c.name(),
            "f": f.to_string(),
            "g": g.to_string(),
            "f_le_g": forward,
            "g_le_f": backward,
            "equivalent": yes,
        }));
    } else {
        out!("{}", if yes { "yes" } else { "no" });
    }
    Ok(yes)
}

fn computed_poset(clone: &str, k: usize, max_arity: usize) -> Result<Poset, Failure> {
    let c = CloneHandle::parse(clone, k)?;
    Ok(enumerate_classes(&c, max_arity)?)
}

fn classes(clone: &str, k: usize, max_arity: usize, as_json: bool) -> Outcome {
    let p = computed_poset(clone, k, max_arity)?;
    if as_json {
        print_json(&p.to_json_value());
    } else {
        out!("{} classes", p.len());
        for v in p.nodes() {
            out!("{}\t{}", v.key, v.representative);
        }
    }
    Ok(true)
}

fn hasse(clone: &str, k: usize, max_arity: usize, format: Format) -> Outcome {
    let p = computed_poset(clone, k, max_arity)?;
    match format {
        Format::Dot => {
            let _ = write!(std::io::stdout(), "{}", p.to_dot());
        }
        Format::Json => print_json(&p.to_json_value()),
    }
    let known = match NamedClone::from_id(clone).and_then(BooleanClone::from_named) {
        Some(c) if k == 2 => c,
        _ => return Ok(true),
    };
    let diff = expected_poset(known).diff(&p);
    if diff.is_empty() {
        eprintln!("matches the known diagram for {known}");
        Ok(true)
    } else {
        eprintln!("differs from the known diagram for {known}:");
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&diff).expect("plain data")
        );
        Ok(false)
    }
}

fn verify_bound(k: usize) -> Outcome {
    let report = check_bound(k)?;
    print_json(&report.to_json_value());
    Ok(report.holds())
}

fn reduce(op: &str, d: Option<usize>, as_json: bool) -> Outcome {
    let f = parse_op(op)?;
    let d = match d {
        Some(d) => d,
        None => bound_arity(f.k())
            .to_usize()
            .ok_or_else(|| Failure::Resource("target arity does not fit in memory".into()))?,
    };
    let g = reduce_to_d_ary(&f, d)?;
    let dc = CloneHandle::named(NamedClone::D, f.k())?;
    let same = minor_decide(&f, &g, &dc)? && minor_decide(&g, &f, &dc)?;
    if as_json {
        print_json(
            &json!({ "input": f.to_string(), "d": d, "output": g.to_string(), "equivalent": same }),
        );
    } else {
        out!("{g}");
        out!("equivalent under D: {}", if same { "yes" } else { "no" });
    }
    Ok(same)
}

fn witness(clone: &str, max: usize, as_json: bool) -> Outcome {
    if !matches!(clone, "M" | "R0" | "R1") {
        return Err(Failure::Domain(format!(
            "witness checks are defined for M, R0 and R1, not {clone:?}"
        )));
    }
    if max == 0 {
        return Err(Failure::Domain("--max must be at least 1".into()));
    }
    let c = CloneHandle::parse(clone, 2)?;
    // R1 is the 0/1 dual of R0, so it gets the dual chain x1+…+xn+(n+1)
    let chain = |n: usize| -> Result<Operation, Failure> {
        let flip = if clone == "R1" { (n as u8 + 1) & 1 } else { 0 };
        Ok(Operation::from_fn(2, n, |a| {
            a.iter().fold(flip, |acc, &x| acc ^ x)
        })?)
    };
    let mut matrix = vec![vec![false; max]; max];
    for m in 1..=max {
        for n in 1..=max {
            let (fm, fn_) = (chain(m)?, chain(n)?);
            if let Some(h) = minor_bruteforce(&fm, &fn_, &c)? {
                if fn_.compose(&h)? != fm {
                    return Err(Failure::Domain("search returned an invalid witness".into()));
                }
                matrix[m - 1][n - 1] = true;
            }
        }
    }
    let ok = (0..max).all(|i| (0..max).all(|j| matrix[i][j] == (i <= j)));
    if as_json {
        print_json(&json!({ "clone": clone, "max": max, "matrix": matrix, "ok": ok }));
    } else {
        out!(
            "m\\n {}",
            (1..=max)
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        for (m, row) in matrix.iter().enumerate() {
            let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out!("{:>3} {}", m + 1, cells.join(" "));
        }
        out!(
            "{}",
            if ok {
                "minor exactly when m <= n"
            } else {
                "pattern differs from m <= n"
            }
        );
    }
    Ok(ok)
}

fn clone_gen(clone: &str, k: usize, arity: usize, as_json: bool) -> Outcome {
    let c = CloneHandle::parse(clone, k)?;
    let members = c.members(arity)?;
    if as_json {
        print_json(&json!({
            "clone": c.name(),
            "k": c.k(),
            "arity": arity,
            "count": members.len(),
            "members": members.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        }));
    } else {
        out!(
            "{} operations of arity {arity} in {}",
            members.len(),
            c.name()
        );
        for f in members.iter() {
            out!("{f}");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Classify { op, clone, json } => classify(&op, &clone, json),
        Command::Minor {
            f,
            g,
            clone,
            method,
            json,
        } => minor(&f, &g, &clone, method, json),
        Command::Equiv {
            f,
            g,
            clone,
            method,
            json,
        } => equiv(&f, &g, &clone, method, json),
        Command::Classes {
            clone,
            k,
            max_arity,
            json,
        } => classes(&clone, k, max_arity, json),
        Command::Hasse {
            clone,
            k,
            max_arity,
            format,
        } => hasse(&clone, k, max_arity, format),
        Command::VerifyBound { k } => verify_bound(k),
        Command::Reduce { op, d, json } => reduce(&op, d, json),
        Command::Witness { clone, max, json } => witness(&clone, max, json),
        Command::CloneGen {
            clone,
            k,
            arity,
            json,
        } => clone_gen(&clone, k, arity, json),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
