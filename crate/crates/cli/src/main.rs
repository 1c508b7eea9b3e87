use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loopsoup::freegroup::{enumerate_geodesic_classes, Word};
use loopsoup::fourier::{homology2_field_law, homology2_intensities, TorusGrid};
use loopsoup::graph::{GraphModel, SpanningTreeFrame};
use loopsoup::measure::{enumerate_measure, total_mass, truncation_length};
use loopsoup::signature::lyndon::bracket_string;
use loopsoup::signature::{degree_and_lead, DEFAULT_DEPTH};
use loopsoup::soup::{sample_soup, MeasureConfig, OccupationField, DEFAULT_TOLERANCE};
use loopsoup::spectra::{class_intensity, contractible_intensity, ihara_check, solve_rho};
use loopsoup::{Error, ErrorKind};

mod output;

use output::{Manifest, Table};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_CONFIG: u8 = 4;

/// Loop measures, loop soups and loop homology on weighted graphs.
#[derive(Debug, Parser)]
#[command(name = "loopsoup", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a graph file and report its basic quantities.
    Validate { graph: PathBuf },
    /// Sample a Poisson loop soup.
    Sample(SampleArgs),
    /// Exact loop-measure masses by free homotopy class, up to a length.
    Enumerate(EnumerateArgs),
    /// Poisson intensities of free homotopy classes.
    Homotopy(HomotopyArgs),
    /// First-homology intensities and field law.
    H1(H1Args),
    /// Second-homology intensities mod p and field law.
    H2(H2Args),
    /// Both sides of the Ihara zeta identity on a regular graph.
    Zeta(ZetaArgs),
    /// Degree and leading Lie polynomial of a free-group word.
    Signature(SignatureArgs),
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TruncationArgs {
    /// Longest loop kept.
    #[arg(long)]
    n_max: Option<usize>,
    /// Bound on the omitted mass; picks the truncation length when `--n-max` is absent.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    eps: f64,
}

#[derive(Debug, Args)]
struct SampleArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    truncation: TruncationArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the occupation field `u,v,N,Ncheck`.
    #[arg(long)]
    occupation: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    graph: PathBuf,
    #[command(flatten)]
    truncation: TruncationArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct HomotopyArgs {
    graph: PathBuf,
    /// Longest geodesic class listed (graph length).
    #[arg(long = "max-length", visible_alias = "l", default_value_t = 5)]
    max_length: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct H1Args {
    graph: PathBuf,
    /// A single winding vector, comma-separated; otherwise the box `[-range, range]^r`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    h: Option<Vec<i64>>,
    #[arg(long, default_value_t = 3)]
    range: i64,
    /// Grid points per dimension; doubled from 64 until values settle when absent.
    #[arg(long = "grid", visible_alias = "m")]
    grid: Option<usize>,
    /// Adds the field-law column for a soup of this intensity.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct H2Args {
    graph: PathBuf,
    /// Odd prime modulus.
    #[arg(long = "prime", visible_alias = "p", default_value_t = 5)]
    prime: u64,
    /// Adds the field-law column for a soup of this intensity.
    #[arg(long)]
    alpha: Option<f64>,
    /// Torus grid used by the field law.
    #[arg(long = "grid", visible_alias = "m", default_value_t = 64)]
    grid: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct ZetaArgs {
    graph: PathBuf,
    /// Highest series degree.
    #[arg(long = "max-length", visible_alias = "l", default_value_t = 6)]
    max_length: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct SignatureArgs {
    /// Signed generator indices, e.g. "+1 +2 -1 -2".
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    /// Number of generators; defaults to the largest index in the word.
    #[arg(long)]
    rank: Option<usize>,
    /// Highest degree searched.
    #[arg(long = "depth", visible_alias = "d", default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Numeric => EXIT_NUMERIC,
                ErrorKind::Configuration => EXIT_CONFIG,
            })
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { graph } => validate(&graph),
        Command::Sample(a) => sample(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Homotopy(a) => homotopy(a),
        Command::H1(a) => h1(a),
        Command::H2(a) => h2(a),
        Command::Zeta(a) => zeta(a),
        Command::Signature(a) => signature(a),
    }
}

fn load(path: &Path) -> std::result::Result<(GraphModel, SpanningTreeFrame), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let g = GraphModel::parse(&text)?;
    let frame = SpanningTreeFrame::bfs(&g)?;
    Ok((g, frame))
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(path: &Path) -> Outcome {
    let (g, frame) = load(path)?;
    let lambda: Vec<String> = g.lambda().iter().map(|l| format!("{l}")).collect();
    println!("vertices={}, edges={}", g.vertex_count(), g.edge_count());
    println!("lambda={}", lambda.join(" "));
    println!("spectral_radius={:.10}", g.spectral_radius());
    match total_mass(&g) {
        Ok(m) => println!("r={}, mass={m:.10}", frame.rank()),
        Err(Error::Massless) => println!("r={}, mass: infinite (κ≡0)", frame.rank()),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn resolve_n_max(g: &GraphModel, t: &TruncationArgs) -> std::result::Result<usize, Failure> {
    match t.n_max {
        Some(n) if n < 2 => Err(Failure::Config("--n-max must be at least 2".into())),
        Some(n) => Ok(n),
        None => Ok(truncation_length(g, t.eps)?),
    }
}

fn sample(a: SampleArgs) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let cfg = MeasureConfig {
        alpha: a.alpha,
        n_max: a.truncation.n_max,
        tolerance: a.truncation.eps,
        seed: a.seed,
    };
    let soup = sample_soup(&g, &frame, &cfg)?;
    let manifest = Manifest::new("sample", &a.graph)
        .param("alpha", a.alpha)
        .param("n_max", soup.n_max)
        .param("eps", a.truncation.eps)
        .param("seed", a.seed);
    let mut table = Table::new(&manifest, &["loop", "length", "multiplicity", "class", "vertices"]);
    for (i, l) in soup.loops.iter().enumerate() {
        let vertices: Vec<String> = l.based.vertices().iter().map(|x| x.to_string()).collect();
        table.row(&[
            i.to_string(),
            l.based.len().to_string(),
            l.based.multiplicity().to_string(),
            l.class.to_string(),
            vertices.join(" "),
        ]);
    }
    emit(a.out.output.as_deref(), &table.finish())?;
    if let Some(path) = &a.occupation {
        let field = OccupationField::from_soup(&g, &soup);
        let text = format!("{}{}", manifest.line(), field.to_csv(&g));
        emit(Some(path), &text)?;
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let n_max = resolve_n_max(&g, &a.truncation)?;
    let e = enumerate_measure(&g, &frame, n_max)?;
    let manifest = Manifest::new("enumerate", &a.graph)
        .param("n_max", n_max)
        .param("tail_bound", e.tail_bound);
    let mut table = Table::new(&manifest, &["class", "length", "multiplicity", "mass"]);
    table.row(&["trivial".into(), "0".into(), "1".into(), fmt_f64(e.contractible)]);
    for (c, &m) in &e.classes {
        let length = c.geodesic_loop(&frame).len();
        table.row(&[c.to_string(), length.to_string(), c.multiplicity().to_string(), fmt_f64(m)]);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

fn homotopy(a: HomotopyArgs) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let rho = solve_rho(&g, 1.0)?;
    let trivial = contractible_intensity(&g)?;
    let manifest = Manifest::new("homotopy", &a.graph).param("max_length", a.max_length);
    let mut table = Table::new(&manifest, &["class", "length", "multiplicity", "intensity"]);
    table.row(&["trivial".into(), "0".into(), "1".into(), fmt_f64(trivial.value)]);
    let mut classes: Vec<_> = enumerate_geodesic_classes(frame.rank(), a.max_length)
        .into_iter()
        .map(|c| (c.geodesic_loop(&frame).len(), c))
        .filter(|(len, _)| *len <= a.max_length)
        .collect();
    classes.sort();
    for (len, c) in classes {
        let v = class_intensity(&c, &g, &frame, &rho)?;
        table.row(&[c.to_string(), len.to_string(), c.multiplicity().to_string(), fmt_f64(v)]);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

fn winding_box(r: usize, range: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-range..=range).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

const AUTO_GRID_START: usize = 64;
const AUTO_GRID_TOL: f64 = 1e-8;
const AUTO_GRID_MAX_POINTS: usize = 1 << 22;

fn h1(a: H1Args) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let r = frame.rank();
    if r == 0 {
        return Err(Failure::Config("graph is a tree: there is no first homology".into()));
    }
    let hs = match &a.h {
        Some(h) if h.len() != r => {
            return Err(Failure::Config(format!("--h needs {r} components, got {}", h.len())));
        }
        Some(h) => vec![h.clone()],
        None if a.range < 0 => return Err(Failure::Config("--range must be nonnegative".into())),
        None => winding_box(r, a.range),
    };
    let values = |grid: &TorusGrid| -> std::result::Result<Vec<f64>, Failure> {
        Ok(hs.iter().map(|h| grid.intensity(h)).collect::<loopsoup::Result<_>>()?)
    };
    let (grid, m) = match a.grid {
        Some(m) => (TorusGrid::new(&g, &frame, m)?, m),
        None => {
            let mut m = AUTO_GRID_START;
            let mut grid = TorusGrid::new(&g, &frame, m)?;
            let mut prev = values(&grid)?;
            loop {
                if (2 * m).pow(r as u32) > AUTO_GRID_MAX_POINTS {
                    return Err(Error::Numeric(format!("grid doubling stopped at M={m}")).into());
                }
                let next = TorusGrid::new(&g, &frame, 2 * m)?;
                let cur = values(&next)?;
                m *= 2;
                grid = next;
                let moved = prev.iter().zip(&cur).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if moved < AUTO_GRID_TOL {
                    break;
                }
                prev = cur;
            }
            (grid, m)
        }
    };
    let mut manifest = Manifest::new("h1", &a.graph).param("M", m);
    if let Some(alpha) = a.alpha {
        manifest = manifest.param("alpha", alpha);
    }
    let mut header: Vec<String> = (1..=r).map(|i| format!("h{i}")).collect();
    header.push("intensity".into());
    if a.alpha.is_some() {
        header.push("law".into());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&manifest, &header);
    for h in &hs {
        let mut row: Vec<String> = h.iter().map(|k| k.to_string()).collect();
        row.push(fmt_f64(grid.intensity(h)?));
        if let Some(alpha) = a.alpha {
            row.push(fmt_f64(grid.field_law(alpha, h)?));
        }
        table.row(&row);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

fn h2(a: H2Args) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let r = frame.rank();
    if r < 2 {
        return Err(Failure::Config(format!("second homology needs rank at least 2, graph has rank {r}")));
    }
    let intensities = homology2_intensities(&g, &frame, a.prime)?;
    let law = match a.alpha {
        Some(alpha) => Some(homology2_field_law(&g, &frame, alpha, a.prime, a.grid)?),
        None => None,
    };
    let mut manifest = Manifest::new("h2", &a.graph).param("p", a.prime);
    if let Some(alpha) = a.alpha {
        manifest = manifest.param("alpha", alpha).param("M", a.grid);
    }
    let mut header: Vec<String> = Vec::new();
    for i in 1..=r {
        for j in i + 1..=r {
            header.push(format!("m{i}_{j}"));
        }
    }
    header.push("p".into());
    header.push("intensity".into());
    if law.is_some() {
        header.push("law".into());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&manifest, &header);
    for (k, (m, v)) in intensities.iter().enumerate() {
        let mut row: Vec<String> = m.iter().map(|x| x.to_string()).collect();
        row.push(a.prime.to_string());
        row.push(fmt_f64(*v));
        if let Some(law) = &law {
            debug_assert_eq!(&law[k].0, m);
            row.push(fmt_f64(law[k].1));
        }
        table.row(&row);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

fn zeta(a: ZetaArgs) -> Outcome {
    let (g, frame) = load(&a.graph)?;
    let rows = ihara_check(&g, &frame, a.max_length)?;
    let manifest = Manifest::new("zeta", &a.graph).param("L", a.max_length);
    let mut table = Table::new(&manifest, &["degree", "lhs", "rhs", "diff"]);
    for row in rows {
        table.row(&[
            row.degree.to_string(),
            row.lhs.to_string(),
            row.rhs.to_string(),
            row.diff().to_string(),
        ]);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

fn signature(a: SignatureArgs) -> Outcome {
    let word: Word = a.word.parse()?;
    let rank = a.rank.unwrap_or_else(|| word.max_generator());
    if rank < word.max_generator() {
        return Err(Failure::Config(format!(
            "--rank {rank} is below the largest generator {} in the word",
            word.max_generator()
        )));
    }
    let (degree, lead) = degree_and_lead(&word, rank, a.depth)?;
    let manifest = Manifest::without_graph("signature")
        .param("word", word.reduce())
        .param("rank", rank)
        .param("D", a.depth);
    let mut table = Table::new(&manifest, &["degree", "lyndon_word", "bracket", "coefficient"]);
    for (w, c) in lead.terms() {
        let letters: Vec<String> = w.iter().map(|i| i.to_string()).collect();
        table.row(&[degree.to_string(), letters.join(" "), bracket_string(w), c.to_string()]);
    }
    emit(a.out.output.as_deref(), &table.finish())
}

/// Shortest decimal text that parses back to the same `f64`.
fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_box_is_ordered_and_complete() {
        let b = winding_box(2, 1);
        assert_eq!(b.len(), 9);
        assert_eq!(b[0], vec![-1, -1]);
        assert_eq!(b[1], vec![-1, 0]);
        assert_eq!(b[8], vec![1, 1]);
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.0, 1.0 / 3.0, 5.2325e-7, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
