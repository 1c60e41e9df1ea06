use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use harmory::eval::{benchmark_measures, evaluate_covers, synthetic_corpus, CliqueSet};
use harmory::harmory::{build_memory, export_ntriples, graph_stats, query_similar, BuildParams, MemoryGraph, PatternQuery};
use harmory::harte::{parse_chord, Chord, ChordInfo};
use harmory::io::{load_corpus, load_timeline, piece_stem, write_atomic};
use harmory::segmentation::{boundaries_csv, effective_kernel, segment, SegParams};
use harmory::similarity::{compare, corpus_similarity_matrix, Measure, MeasureParams};
use harmory::timeline::{encode_tps, estimate_key_from, format_beats, Beats, Grid};
use harmory::tps::{chord_distance, Key};
use harmory::{Error, Result};

/// Harmonic analysis of symbolic chord annotations.
#[derive(Parser)]
#[command(name = "harmory", version)]
struct Cli {
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    /// Directory for file outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a Harte chord and print it as JSON.
    Parse { chord: String },
    /// TPS distance between two chords.
    Dist {
        a: String,
        b: String,
        /// Key as `<root>:maj` or `<root>:min`; estimated from the two chords if absent.
        #[arg(long)]
        key: Option<Key>,
    },
    /// Print the key-relative TPS series of a piece as CSV.
    Encode {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Grid::Event)]
        grid: Grid,
    },
    /// Segment a piece; writes boundaries JSON/CSV, novelty CSV and SSM PGM.
    Segment {
        file: PathBuf,
        #[command(flatten)]
        seg: SegArgs,
    },
    /// Compare two pieces and print a similarity report.
    Sim {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Pairwise similarity matrix of a corpus directory, as CSV.
    Matrix {
        dir: PathBuf,
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Build the harmonic memory graph of a corpus.
    BuildGraph {
        dir: PathBuf,
        #[arg(long, default_value_t = BuildParams::default().theta_sim)]
        theta_sim: f64,
        #[arg(long, default_value_t = BuildParams::default().theta_merge)]
        theta_merge: f64,
        #[arg(long, default_value_t = BuildParams::default().scale)]
        scale: f64,
        #[command(flatten)]
        seg: SegArgs,
        /// N-Triples output; the JSON dump goes next to it. Defaults to
        /// `<out-dir>/harmory.nt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find patterns similar to a chord sequence in a graph JSON dump.
    Query {
        graph: PathBuf,
        /// Harte chords; a single argument may hold several separated by spaces.
        #[arg(required = true)]
        chords: Vec<String>,
        #[arg(long)]
        key: Option<Key>,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
    },
    /// Summary statistics of a graph JSON dump.
    Stats { graph: PathBuf },
    /// Cover-song detection metrics over a corpus with a clique CSV.
    EvalCovers {
        dir: PathBuf,
        #[arg(long)]
        cliques: PathBuf,
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Time the pairwise matrix of each measure.
    Bench {
        /// Corpus directory; a seeded synthetic corpus is used when absent.
        dir: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [Measure::Dtw, Measure::Tpsd])]
        measures: Vec<Measure>,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 16)]
        pieces: usize,
        #[arg(long, default_value_t = 256)]
        beats: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: MeasureParamArgs,
    },
}

#[derive(Args)]
struct SegArgs {
    #[arg(long, default_value_t = SegParams::default().kernel_size)]
    kernel_size: usize,
    #[arg(long, default_value_t = SegParams::default().taper)]
    taper: f64,
    #[arg(long, default_value_t = SegParams::default().lambda)]
    lambda: f64,
    #[arg(long, default_value_t = SegParams::default().min_gap)]
    min_gap: usize,
    #[arg(long, default_value_t = SegParams::default().min_len)]
    min_len: usize,
}

impl SegArgs {
    fn params(&self) -> SegParams {
        SegParams {
            kernel_size: self.kernel_size,
            taper: self.taper,
            lambda: self.lambda,
            min_gap: self.min_gap,
            min_len: self.min_len,
        }
    }
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, value_enum, default_value_t = Measure::Dtw)]
    measure: Measure,
    #[command(flatten)]
    params: MeasureParamArgs,
}

#[derive(Args)]
struct MeasureParamArgs {
    #[arg(long, default_value_t = MeasureParams::default().scale)]
    scale: f64,
    /// Sakoe-Chiba band width for DTW.
    #[arg(long)]
    band: Option<usize>,
    #[arg(long, default_value_t = MeasureParams::default().tau)]
    tau: f64,
    #[arg(long, default_value_t = MeasureParams::default().n_min)]
    n_min: usize,
    #[arg(long, default_value_t = MeasureParams::default().n_max)]
    n_max: usize,
}

impl MeasureParamArgs {
    fn params(&self) -> MeasureParams {
        MeasureParams {
            scale: self.scale,
            band: self.band,
            tau: self.tau,
            n_min: self.n_min,
            n_max: self.n_max,
        }
    }
}

struct Ctx {
    quiet: bool,
    out_dir: PathBuf,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.note(format!("wrote {}", path.display()));
        Ok(path)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let ctx = Ctx {
        quiet: cli.quiet,
        out_dir: cli.out_dir,
    };
    match run(&ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                // Transparent variants repeat their source's message.
                if !msg.ends_with(&s.to_string()) {
                    write!(msg, ": {s}").unwrap();
                }
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

fn parse_chords(args: &[String]) -> Result<Vec<Chord>> {
    args.iter()
        .flat_map(|a| a.split_whitespace())
        .map(|c| parse_chord(c).map_err(Error::from))
        .collect()
}

/// Writes to stdout, reporting a closed pipe as an error instead of panicking.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(ctx: &Ctx, command: Command) -> Result<()> {
    match command {
        Command::Parse { chord } => {
            let c = parse_chord(&chord)?;
            print_json(&ChordInfo::from(&c))?;
        }
        Command::Dist { a, b, key } => {
            let ca = parse_chord(&a)?;
            let cb = parse_chord(&b)?;
            let (sa, sb) = match (ca.as_sounded(), cb.as_sounded()) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::NoChord),
            };
            let (key, estimated) = match key {
                Some(k) => (k, false),
                None => {
                    let one = Beats::from_integer(1);
                    (estimate_key_from([(sa, one), (sb, one)].into_iter()), true)
                }
            };
            emit(&format!("{}\n", chord_distance(&ca, key, &cb, key)?.0))?;
            if estimated {
                emit(&format!("note: no --key given; used estimated key {key}\n"))?;
            }
        }
        Command::Encode { file, grid } => {
            let tl = load_timeline(&file)?;
            let series = encode_tps(&tl, grid)?;
            let mut out = String::from("index,value,weight\n");
            for (i, s) in series.steps.iter().enumerate() {
                writeln!(out, "{i},{},{}", s.value.0, format_beats(s.weight)).unwrap();
            }
            emit(&out)?;
        }
        Command::Segment { file, seg } => {
            let tl = load_timeline(&file)?;
            let params = seg.params();
            let s = segment(&tl, &params)?;
            let stem = piece_stem(&file);
            let doc = json!({
                "piece": tl.id,
                "events": s.ssm.len(),
                "kernel_size": effective_kernel(params.kernel_size, s.ssm.len()),
                "params": params,
                "boundaries": s.boundaries,
                "segments": s.segments.iter().map(|g| json!({
                    "index": g.index,
                    "start": g.start,
                    "end": g.end,
                    "chords": g.chord_sequence(),
                })).collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            ctx.write(&format!("{stem}.boundaries.json"), &text)?;
            ctx.write(&format!("{stem}.boundaries.csv"), &boundaries_csv(&s.boundaries))?;
            ctx.write(&format!("{stem}.novelty.csv"), &s.novelty.to_csv())?;
            ctx.write(&format!("{stem}.ssm.pgm"), &s.ssm.to_pgm())?;
            emit(&text)?;
        }
        Command::Sim { a, b, measure } => {
            let ta = load_timeline(&a)?;
            let tb = load_timeline(&b)?;
            let report = compare(&ta, &tb, measure.measure, &measure.params.params())?;
            emit(&(report.to_json() + "\n"))?;
        }
        Command::Matrix { dir, measure } => {
            let corpus = load_corpus(&dir)?;
            let m = corpus_similarity_matrix(&corpus, measure.measure, &measure.params.params())?;
            let csv = m.to_csv();
            ctx.write(&format!("matrix_{}.csv", measure.measure.name()), &csv)?;
            emit(&csv)?;
        }
        Command::BuildGraph {
            dir,
            theta_sim,
            theta_merge,
            scale,
            seg,
            out,
        } => {
            let corpus = load_corpus(&dir)?;
            let params = BuildParams {
                segmentation: seg.params(),
                theta_sim,
                theta_merge,
                scale,
            };
            let g = build_memory(&corpus, &params)?;
            let nt_path = out.unwrap_or_else(|| ctx.out_dir.join("harmory.nt"));
            write_atomic(&nt_path, export_ntriples(&g).as_bytes())?;
            let json_path = nt_path.with_extension("json");
            write_atomic(&json_path, (g.to_json() + "\n").as_bytes())?;
            ctx.note(format!("wrote {} and {}", nt_path.display(), json_path.display()));
            print_json(&graph_stats(&g))?;
        }
        Command::Query { graph, chords, key, k } => {
            let g = load_graph(&graph)?;
            let q = PatternQuery {
                chords: parse_chords(&chords)?,
                key,
                k,
            };
            print_json(&query_similar(&g, &q)?)?;
        }
        Command::Stats { graph } => {
            print_json(&graph_stats(&load_graph(&graph)?))?;
        }
        Command::EvalCovers { dir, cliques, measure } => {
            let corpus = load_corpus(&dir)?;
            let text = std::fs::read_to_string(&cliques).map_err(|e| file_error(&cliques, e.into()))?;
            let set = CliqueSet::from_csv(&text).map_err(|e| file_error(&cliques, e))?;
            let metrics = evaluate_covers(&corpus, &set, measure.measure, &measure.params.params())?;
            ctx.write(&format!("covers_{}.json", measure.measure.name()), &(metrics.to_json() + "\n"))?;
            emit(&metrics.to_table())?;
        }
        Command::Bench {
            dir,
            measures,
            repetitions,
            pieces,
            beats,
            seed,
            params,
        } => {
            let corpus = match dir {
                Some(d) => load_corpus(&d)?,
                None => {
                    if pieces < 2 || beats < 1 {
                        return Err(Error::InvalidParameter("synthetic corpus needs >= 2 pieces and >= 1 beat".into()));
                    }
                    synthetic_corpus(pieces, beats, seed)
                }
            };
            let report = benchmark_measures(&corpus, &measures, &params.params(), repetitions)?;
            ctx.write("bench.json", &(report.to_json() + "\n"))?;
            emit(&report.to_table())?;
        }
    }
    Ok(())
}

fn file_error(path: &Path, e: Error) -> Error {
    Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    }
}

fn load_graph(path: &Path) -> Result<MemoryGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| file_error(path, e.into()))?;
    MemoryGraph::from_json(&text).map_err(|e| file_error(path, e))
}
