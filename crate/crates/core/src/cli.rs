//! Command-line front end. [`run`] returns the process exit code:
//! 0 affirmative, 1 negative or declined, 2 usage or input error,
//! 3 a certificate failed its own verification.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::check;
use crate::error::Error;
use crate::folding::{factor_through_almost_rose, fold_to_completion, FoldSequence};
use crate::graph::{wedge_of_words, LabeledGraph};
use crate::oracles::{
    basis_pipeline, primitive_orbit, random_separable_set, write_corpus, Automorphism,
};
use crate::tameness::{decide_tame, theta, verify_certificate, AlmostRose, Evidence, Verdict};
use crate::whitehead::{wh_of_set, WhiteheadGraph};
use crate::words::{max_letter_index, CyclicWord, Word, MAX_RANK};

#[derive(Parser, Debug)]
#[command(
    name = "whfold",
    version,
    about = "Stallings folds, Whitehead graphs and tameness certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct WordArgs {
    /// Words over a..z, with capitals for inverses
    #[arg(required = true)]
    words: Vec<String>,
    /// Rank of the free group; defaults to the largest letter used (at least 2)
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free and cyclic reduction of each word
    Reduce(WordArgs),
    /// Whitehead graph of a set of conjugacy classes
    Wh {
        #[command(flatten)]
        input: WordArgs,
        #[arg(long)]
        dot: bool,
    },
    /// Cut vertices of the Whitehead graph
    Cutvx(WordArgs),
    /// Decide tameness and print a certificate
    Tame {
        #[command(flatten)]
        input: WordArgs,
        /// Write the certificate here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fold a wedge of basis words or a graph file onto its immersed image
    Fold {
        /// Comma-separated words
        #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
        basis: Option<String>,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Automorphism file whose images are the basis words
        #[arg(long, requires = "basis")]
        witness: Option<PathBuf>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        dot: bool,
    },
    /// Whitehead graph of the almost-rose Θ(n, k, l)
    RoseWh {
        n: usize,
        k: usize,
        l: usize,
        #[arg(long)]
        dot: bool,
    },
    /// Primitive classes reachable from x1 by Nielsen moves within a length cap
    Orbit {
        n: usize,
        max_len: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A seeded random separable set with its witness
    Sep {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Corpus file; the witness goes to the same path with `.witness` appended
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks
    Check,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buf = String::new();
    let result = dispatch(cli.command, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, o: &mut String) -> Outcome {
    match command {
        Command::Reduce(input) => cmd_reduce(&input, o),
        Command::Wh { input, dot } => cmd_wh(&input, dot, o),
        Command::Cutvx(input) => cmd_cutvx(&input, o),
        Command::Tame { input, out } => cmd_tame(&input, out, o),
        Command::Fold {
            basis,
            graph,
            witness,
            rank,
            dot,
        } => cmd_fold(basis, graph, witness, rank, dot, o),
        Command::RoseWh { n, k, l, dot } => cmd_rose_wh(n, k, l, dot, o),
        Command::Orbit {
            n,
            max_len,
            budget,
            out,
        } => cmd_orbit(n, max_len, budget, out, o),
        Command::Sep {
            n,
            seed,
            count,
            max_len,
            out,
        } => cmd_sep(n, seed, count, max_len, out, o),
        Command::Check => cmd_check(o),
    }
}

fn resolve_rank(explicit: Option<usize>, texts: &[&str]) -> Result<usize, Failure> {
    let needed = texts.iter().map(|t| max_letter_index(t)).max().unwrap_or(0);
    match explicit {
        Some(r) if !(2..=MAX_RANK).contains(&r) => Err(Error::InvalidRank(r).into()),
        Some(r) if r < needed => Err(Error::RankExceeded {
            index: needed,
            rank: r,
        }
        .into()),
        Some(r) => Ok(r),
        None => Ok(needed.max(2)),
    }
}

fn parse_words(input: &WordArgs) -> Result<(usize, Vec<Word>), Failure> {
    let texts: Vec<&str> = input.words.iter().map(String::as_str).collect();
    let rank = resolve_rank(input.rank, &texts)?;
    let words = texts
        .iter()
        .map(|t| Word::parse(t, rank))
        .collect::<Result<_, _>>()?;
    Ok((rank, words))
}

fn parse_classes(input: &WordArgs) -> Result<(usize, Vec<CyclicWord>), Failure> {
    let (rank, words) = parse_words(input)?;
    let classes = words
        .iter()
        .map(|w| CyclicWord::class_of(w).map_err(|e| usage(format!("{w}: {e}"))))
        .collect::<Result<_, _>>()?;
    Ok((rank, classes))
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_reduce(input: &WordArgs, o: &mut String) -> Outcome {
    let (_, words) = parse_words(input)?;
    for w in &words {
        let reduced = w.free_reduce();
        match reduced.cyclic_reduce() {
            Ok((class, _)) => writeln!(o, "{}: reduced {reduced}, class {class}", show(w)),
            Err(_) => writeln!(o, "{}: reduced 1, trivial", show(w)),
        }
        .unwrap();
    }
    Ok(0)
}

fn show(w: &Word) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.to_string()
    }
}

fn describe_wh(wh: &WhiteheadGraph, o: &mut String) {
    writeln!(o, "edges:").unwrap();
    for (x, y) in wh.edges() {
        writeln!(o, "  {{{x},{y}}}").unwrap();
    }
    writeln!(o, "{}", wh.status()).unwrap();
}

fn cmd_wh(input: &WordArgs, dot: bool, o: &mut String) -> Outcome {
    let (rank, set) = parse_classes(input)?;
    let wh = wh_of_set(rank, &set)?;
    if dot {
        o.push_str(&wh.to_dot("wh"));
    } else {
        describe_wh(&wh, o);
    }
    Ok(0)
}

fn cmd_cutvx(input: &WordArgs, o: &mut String) -> Outcome {
    let (rank, set) = parse_classes(input)?;
    let wh = wh_of_set(rank, &set)?;
    let cuts = wh.cut_vertices();
    if cuts.is_empty() {
        writeln!(o, "no cut vertex").unwrap();
        Ok(1)
    } else {
        let names: Vec<String> = cuts.iter().map(|c| c.to_string()).collect();
        writeln!(o, "cut vertices: {}", names.join(" ")).unwrap();
        Ok(0)
    }
}

fn cmd_tame(input: &WordArgs, out: Option<PathBuf>, o: &mut String) -> Outcome {
    let (rank, set) = parse_classes(input)?;
    let cert = decide_tame(rank, &set).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    if !verify_certificate(rank, &set, &cert) {
        return Err(Failure {
            code: 3,
            message: "certificate failed self-verification".into(),
        });
    }
    match &cert.evidence {
        Evidence::Tame { rose, .. } => {
            writeln!(o, "tame: {} {}", theta_name(rose), relabel_text(rose))
        }
        Evidence::NotTame { whitehead, .. } => {
            writeln!(o, "not tame: Whitehead graph {}", whitehead.status())
        }
    }
    .unwrap();
    let text = cert.to_text();
    match out {
        Some(path) => write_file(&path, &text)?,
        None => o.push_str(&text),
    }
    Ok(match cert.verdict() {
        Verdict::Tame => 0,
        Verdict::NotTame => 1,
    })
}

fn digits(n: usize, table: &[char; 10]) -> String {
    n.to_string()
        .chars()
        .map(|c| table[c.to_digit(10).unwrap() as usize])
        .collect()
}

fn theta_name(r: &AlmostRose) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    format!(
        "Θ{}{},{}",
        digits(r.n(), &SUP),
        digits(r.k(), &SUB),
        digits(r.l(), &SUB)
    )
}

fn relabel_text(r: &AlmostRose) -> String {
    let parts: Vec<String> = r
        .relabeling()
        .images()
        .iter()
        .enumerate()
        .map(|(j, y)| format!("x{} -> {y}", j + 1))
        .collect();
    format!("(relabeled: {})", parts.join(", "))
}

fn report_sequence(seq: &FoldSequence, o: &mut String) {
    let g = &seq.start;
    writeln!(
        o,
        "start: {} vertices, {} edge pairs, Betti number {}",
        g.vertex_count(),
        g.edge_pair_count(),
        g.betti()
    )
    .unwrap();
    for (i, step) in seq.steps.iter().enumerate() {
        let label = seq.snapshots[i].label(step.edge_a);
        write!(
            o,
            "step {}: fold {} and {} (label {label})",
            i + 1,
            step.edge_a,
            step.edge_b
        )
        .unwrap();
        if let Some((keep, gone)) = step.identified_vertices {
            write!(o, ", identify v{gone} into v{keep}").unwrap();
        }
        if step.betti_dropped {
            write!(o, ", Betti number drops").unwrap();
        }
        o.push('\n');
    }
    writeln!(o, "steps: {}", seq.steps.len()).unwrap();
    let trace: Vec<String> = seq.betti_trace().iter().map(|b| b.to_string()).collect();
    writeln!(o, "betti trace: {}", trace.join(" ")).unwrap();
}

fn cmd_fold(
    basis: Option<String>,
    graph: Option<PathBuf>,
    witness: Option<PathBuf>,
    rank: Option<usize>,
    dot: bool,
    o: &mut String,
) -> Outcome {
    let g: LabeledGraph = match (&basis, &graph) {
        (Some(list), _) => {
            let texts: Vec<&str> = list.split(',').map(str::trim).collect();
            let rank = resolve_rank(rank, &texts)?;
            let words = texts
                .iter()
                .map(|t| Word::parse(t, rank).map(|w| w.free_reduce()))
                .collect::<Result<Vec<_>, _>>()?;
            if words.iter().any(Word::is_empty) {
                return Err(usage("basis words must be nontrivial"));
            }
            wedge_of_words(&words, rank)?.graph
        }
        (None, Some(path)) => {
            let g = LabeledGraph::parse_text(&read_file(path)?)?;
            if rank.is_some_and(|r| r != g.rank()) {
                return Err(usage(format!("graph file has rank {}", g.rank())));
            }
            g
        }
        (None, None) => return Err(usage("one of --basis or --graph is required")),
    };
    let seq = fold_to_completion(&g);
    if dot {
        o.push_str(&seq.to_dot());
        return Ok(0);
    }
    report_sequence(&seq, o);

    if let Some(path) = witness {
        let phi = Automorphism::parse_text(&read_file(&path)?)?;
        let (Some(list), true) = (&basis, phi.rank() == g.rank()) else {
            return Err(usage("witness rank differs from the basis rank"));
        };
        let images: Vec<String> = phi.forward.images().iter().map(|w| w.to_string()).collect();
        let given: Vec<String> = list
            .split(',')
            .map(|t| Word::parse(t.trim(), g.rank()).map(|w| w.free_reduce().to_string()))
            .collect::<Result<_, _>>()?;
        if images != given {
            return Err(usage("witness images differ from the basis words"));
        }
        return match basis_pipeline(&phi) {
            Ok(out) => {
                writeln!(
                    o,
                    "penultimate = {} {}",
                    theta_name(&out.rose),
                    relabel_text(&out.rose)
                )
                .unwrap();
                let path: Vec<String> = out.reading.1.iter().map(|d| d.to_string()).collect();
                writeln!(
                    o,
                    "w1 = {} read at v{}: {}",
                    images[0],
                    out.reading.0,
                    path.join(" ")
                )
                .unwrap();
                Ok(0)
            }
            Err(e) => {
                writeln!(o, "recognition declined: {e}").unwrap();
                Ok(1)
            }
        };
    }

    if seq.steps.is_empty() && g.is_rose() {
        writeln!(o, "already the rose").unwrap();
        return Ok(0);
    }
    match factor_through_almost_rose(&g) {
        Ok((rose, _)) => {
            writeln!(
                o,
                "penultimate = {} {}",
                theta_name(&rose),
                relabel_text(&rose)
            )
            .unwrap();
            Ok(0)
        }
        Err(e) => {
            writeln!(o, "recognition declined: {e}").unwrap();
            Ok(1)
        }
    }
}

fn cmd_rose_wh(n: usize, k: usize, l: usize, dot: bool, o: &mut String) -> Outcome {
    let r = theta(n, k, l)?;
    let wh = r.whitehead_graph();
    if dot {
        o.push_str(&wh.to_dot("wh"));
        return Ok(0);
    }
    writeln!(o, "{}", theta_name(&r)).unwrap();
    o.push_str(&r.realized_graph().to_text());
    describe_wh(&wh, o);
    Ok(0)
}

fn cmd_orbit(
    n: usize,
    max_len: usize,
    budget: usize,
    out: Option<PathBuf>,
    o: &mut String,
) -> Outcome {
    if max_len == 0 {
        return Err(usage("max_len must be at least 1"));
    }
    let orbit = primitive_orbit(n, max_len, budget)?;
    let classes: Vec<CyclicWord> = orbit.classes.into_iter().collect();
    let corpus = write_corpus(&classes);
    match out {
        Some(path) => write_file(&path, &corpus)?,
        None => o.push_str(&corpus),
    }
    writeln!(o, "# {} classes", classes.len()).unwrap();
    if orbit.budget_exhausted {
        writeln!(o, "# budget exhausted; the list is partial").unwrap();
    }
    Ok(0)
}

fn cmd_sep(
    n: usize,
    seed: u64,
    count: usize,
    max_len: usize,
    out: Option<PathBuf>,
    o: &mut String,
) -> Outcome {
    if count == 0 {
        return Err(usage("count must be at least 1"));
    }
    let (set, witness) = random_separable_set(n, seed, count, max_len)?;
    let corpus = write_corpus(&set);
    let wtext = witness.to_text(&set);
    match out {
        Some(path) => {
            write_file(&path, &corpus)?;
            let mut wpath = path.into_os_string();
            wpath.push(".witness");
            write_file(&PathBuf::from(wpath), &wtext)?;
            writeln!(o, "# {} classes, split at x{}", set.len(), witness.split).unwrap();
        }
        None => {
            o.push_str(&corpus);
            o.push_str(&wtext);
        }
    }
    Ok(0)
}

fn cmd_check(o: &mut String) -> Outcome {
    let mut failed = 0;
    for c in check::criteria() {
        let outcome = c.run();
        failed += usize::from(!outcome.passed);
        writeln!(o, "{}", outcome.line()).unwrap();
    }
    writeln!(o, "{} failed", failed).unwrap();
    Ok(if failed == 0 { 0 } else { 1 })
}
