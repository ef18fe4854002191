use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use netrand::classifier::{classify, classify_refined, AtlasCache};
use netrand::synthetic::{noise_prices, ChangePointFixture, FIXTURE_SEED};
use netrand::tseries::{ri_series, RiConfig, RiSeries, SeriesMatrix, DEFAULT_AR_ORDER, DEFAULT_SURROGATES};
use netrand::{
    build_atlas, gen_er, gen_ws, motif_census, relative_frequency_point, Atlas, ErParams, ErrorKind, Graph, Seed,
    WsParams,
};
use serde_json::json;

mod manifest;
mod montecarlo;

use manifest::ManifestBuilder;
use montecarlo::{parse_ws, Generator, MonteCarlo};

const EXIT_INPUT: u8 = 3;
const EXIT_DOMAIN: u8 = 4;
const EXIT_NO_TETRADS: u8 = 5;
const EXIT_GUARD: u8 = 6;
/// Largest `n` accepted by `montecarlo` without `--force`.
const MAX_UNFORCED_N: usize = 100;

/// Randomness index and model classification for undirected networks.
///
/// Exit codes: 0 success, 2 usage, 3 unreadable or malformed input,
/// 4 parameter outside a model's domain, 5 no connected 4-node subgraph,
/// 6 refused by the size guard.
#[derive(Parser)]
#[command(name = "netrand", version)]
struct Cli {
    /// Master seed; a fresh one is drawn and printed when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format; JSON for census and classify, CSV for tables.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Motif counts, RFP and density of an edge-list graph.
    Census {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest model for an edge-list graph.
    Classify {
        graph: PathBuf,
        #[arg(long, conflicts_with = "refined", required_unless_present = "refined")]
        atlas: Option<PathBuf>,
        /// Density-refined classification (ER at the graph's density
        /// against WS at the matching lattice degree).
        #[arg(long)]
        refined: bool,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and save the model atlas for one node count.
    Atlas {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Output file; without it the atlas goes into `--cache-dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "atlas-cache")]
        cache_dir: PathBuf,
    },
    /// Confusion table of assigned labels per generating model, as CSV.
    Montecarlo {
        #[arg(long)]
        n: usize,
        /// Graphs per generating model.
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// ER edge probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        er: Vec<f64>,
        /// WS models as `p_r:k` (lattice degree k).
        #[arg(long, value_delimiter = ',')]
        ws: Vec<String>,
        /// Replicates per WS embedding.
        #[arg(long, default_value_t = 100)]
        atlas_reps: usize,
        #[arg(long)]
        refined: bool,
        /// Allow n above the size guard.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-window randomness index of a price panel CSV.
    RiSeries {
        input: PathBuf,
        #[arg(long, default_value_t = 15)]
        window: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SURROGATES)]
        surrogates: usize,
        #[arg(long, default_value_t = DEFAULT_AR_ORDER)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// gnuplot data file: window end, then one RI column per alpha.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Sample a graph: `er:n,p` or `ws:n,k,p_r`.
    Generate {
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic change-point price panel (or pure noise) as CSV.
    Fixture {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Independent noise instead of the common-factor segment.
        #[arg(long)]
        noise: bool,
        #[arg(long, default_value_t = 55)]
        series: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[derive(Debug)]
struct GuardRefused(usize);

impl std::fmt::Display for GuardRefused {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "n = {} exceeds {MAX_UNFORCED_N}; the census cost grows as C(n, 4), pass --force to run anyway",
            self.0
        )
    }
}

impl std::error::Error for GuardRefused {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<GuardRefused>().is_some() {
        return EXIT_GUARD;
    }
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<netrand::Error>() {
            return match err.kind() {
                ErrorKind::Input => EXIT_INPUT,
                ErrorKind::Domain => EXIT_DOMAIN,
                ErrorKind::NoConnectedTetrads => EXIT_NO_TETRADS,
            };
        }
        if cause.is::<std::num::ParseFloatError>() || cause.is::<std::num::ParseIntError>() {
            return EXIT_INPUT;
        }
    }
    EXIT_INPUT
}

fn resolve_seed(seed: Option<u64>) -> Seed {
    Seed(seed.unwrap_or_else(|| {
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64);
        let s = Seed(nanos).derive(&[std::process::id() as u64]).0;
        eprintln!("seed: {s}");
        s
    }))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(netrand::Error::from).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(netrand::Error::from)?;
            Ok(())
        }
    }
}

fn read_graph(m: &mut ManifestBuilder, path: &Path) -> anyhow::Result<Graph> {
    let bytes = m.input(path)?;
    Graph::read_edge_list(bytes.as_slice()).with_context(|| format!("parsing {}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let threads = cli.threads;
    let json_first = cli.format.unwrap_or(Format::Json);
    let csv_first = cli.format.unwrap_or(Format::Csv);
    match cli.command {
        Command::Census { graph, out } => {
            let mut m = ManifestBuilder::new("census", json!({ "graph": graph }), None, threads);
            let g = read_graph(&mut m, &graph)?;
            let counts = motif_census(&g)?;
            let rfp = relative_frequency_point(&counts);
            let density = g.density()?;
            let text = match json_first {
                Format::Json => {
                    let rfp_value = match &rfp {
                        Ok(r) => json!(r.0),
                        Err(_) => serde_json::Value::Null,
                    };
                    let report = json!({
                        "n": g.n(),
                        "edges": g.edge_count(),
                        "density": density,
                        "f": counts.f,
                        "disconnected": counts.disconnected,
                        "rfp": rfp_value,
                    });
                    serde_json::to_string_pretty(&report)? + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("motif,count,frequency\n");
                    for (i, c) in counts.f.iter().enumerate() {
                        let freq = rfp.as_ref().ok().map(|r| r.0[i]);
                        s.push_str(&format!("M{},{c},{}\n", i + 1, fmt_opt(freq)));
                    }
                    s.push_str(&format!("disconnected,{},\n", counts.disconnected));
                    s
                }
            };
            emit(out.as_deref(), &text)?;
            m.finish(out.as_deref())?;
            rfp?;
        }
        Command::Classify { graph, atlas, refined, reps, out } => {
            let seed = refined.then(|| resolve_seed(cli.seed));
            let params = json!({ "graph": graph, "atlas": atlas, "refined": refined, "reps": reps });
            let mut m = ManifestBuilder::new("classify", params, seed.map(|s| s.0), threads);
            let g = read_graph(&mut m, &graph)?;
            let report = if let Some(seed) = seed {
                let c = classify_refined(&g, reps, seed)?;
                let runner_up = c
                    .candidates
                    .iter()
                    .filter(|(l, _)| *l != c.label)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(l, d)| (l.to_string(), *d));
                json!({
                    "label": c.label.to_string(),
                    "distance": c.distance,
                    "runner_up": runner_up.as_ref().map(|r| &r.0),
                    "runner_up_distance": runner_up.as_ref().map(|r| r.1),
                    "tie": c.tie,
                    "density": c.density,
                    "k_star": c.k_star,
                })
            } else {
                let path = atlas.expect("clap enforces --atlas or --refined");
                let bytes = m.input(&path)?;
                let atlas: Atlas = serde_json::from_slice(&bytes).map_err(netrand::Error::from)?;
                let c = classify(&g, &atlas)?;
                json!({
                    "label": c.best.label.to_string(),
                    "distance": c.distance,
                    "runner_up": c.runner_up.map(|r| r.0.to_string()),
                    "runner_up_distance": c.runner_up.map(|r| r.1),
                    "tie": c.tie,
                })
            };
            let text = match json_first {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => {
                    let field = |k: &str| match &report[k] {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Null => String::new(),
                        v => v.to_string(),
                    };
                    format!(
                        "label,distance,runner_up,runner_up_distance,tie\n{},{},{},{},{}\n",
                        field("label"),
                        field("distance"),
                        field("runner_up"),
                        field("runner_up_distance"),
                        field("tie")
                    )
                }
            };
            emit(out.as_deref(), &text)?;
            m.finish(out.as_deref())?;
        }
        Command::Atlas { n, reps, out, cache_dir } => {
            let seed = resolve_seed(cli.seed);
            let params = json!({ "n": n, "reps": reps, "cache_dir": cache_dir });
            let m = ManifestBuilder::new("atlas", params, Some(seed.0), threads);
            let path = match out {
                Some(path) => {
                    build_atlas(n, reps, seed)?.save(&path)?;
                    path
                }
                None => {
                    let cache = AtlasCache::new(&cache_dir);
                    cache.load_or_build(n, reps, seed)?;
                    cache.path_for(n, reps, seed)
                }
            };
            eprintln!("atlas written to {}", path.display());
            m.finish(Some(&path))?;
        }
        Command::Montecarlo { n, reps, er, ws, atlas_reps, refined, force, out } => {
            if n > MAX_UNFORCED_N && !force {
                bail!(GuardRefused(n));
            }
            let seed = resolve_seed(cli.seed);
            let mut generators: Vec<Generator> = er.iter().map(|&p| Generator::Er { p }).collect();
            for entry in &ws {
                let (p_r, k) = parse_ws(entry)?;
                generators.push(Generator::Ws { p_r, k });
            }
            let params = json!({
                "n": n, "reps": reps, "er": er, "ws": ws,
                "atlas_reps": atlas_reps, "refined": refined, "force": force,
            });
            let m = ManifestBuilder::new("montecarlo", params, Some(seed.0), threads);
            let table = MonteCarlo { n, reps, atlas_reps, refined, generators }.run(seed)?;
            let text = match csv_first {
                Format::Csv => table.to_csv(),
                Format::Json => serde_json::to_string_pretty(&table)? + "\n",
            };
            emit(out.as_deref(), &text)?;
            m.finish(out.as_deref())?;
        }
        Command::RiSeries { input, window, alpha, surrogates, order, out, plot } => {
            let seed = resolve_seed(cli.seed);
            let config = RiConfig { window_len: window, alphas: alpha, n_surrogates: surrogates, order };
            let params = json!({ "input": input, "config": config, "plot": plot });
            let mut m = ManifestBuilder::new("ri-series", params, Some(seed.0), threads);
            let bytes = m.input(&input)?;
            let x = SeriesMatrix::read_csv(bytes.as_slice()).with_context(|| format!("parsing {}", input.display()))?;
            let series = ri_series(&x, &config, seed)?;
            let text = match csv_first {
                Format::Csv => ri_csv(&series),
                Format::Json => serde_json::to_string_pretty(&series)? + "\n",
            };
            emit(out.as_deref(), &text)?;
            if let Some(plot) = &plot {
                fs::write(plot, gnuplot_data(&series)).map_err(netrand::Error::from)?;
            }
            m.details(json!({
                "input_rows": series.input_rows,
                "series": series.series,
                "prewhiten_dropped": series.prewhiten_dropped,
                "tail_dropped": series.tail_dropped,
                "regularized": series.regularized,
                "constant": series.constant,
                "windows": series.windows.len(),
                "null_ri_points": series.points.iter().filter(|p| p.ri.is_none()).count(),
            }));
            m.finish(out.as_deref())?;
        }
        Command::Generate { model, out } => {
            let seed = resolve_seed(cli.seed);
            let m = ManifestBuilder::new("generate", json!({ "model": model }), Some(seed.0), threads);
            let g = generate(&model, seed)?;
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)?;
            m.finish(out.as_deref())?;
        }
        Command::Fixture { out, noise, series } => {
            let seed = cli.seed.map_or(FIXTURE_SEED, Seed);
            let spec = ChangePointFixture { series, ..ChangePointFixture::default() };
            let params = json!({ "noise": noise, "fixture": spec });
            let m = ManifestBuilder::new("fixture", params, Some(seed.0), threads);
            let x = if noise { noise_prices(spec.rows(), series, seed) } else { spec.generate(seed) };
            let mut buf = Vec::new();
            x.write_csv(&mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)?;
            m.finish(out.as_deref())?;
        }
    }
    Ok(())
}

fn generate(model: &str, seed: Seed) -> anyhow::Result<Graph> {
    let (kind, args) = model
        .split_once(':')
        .with_context(|| format!("model `{model}` must be er:n,p or ws:n,k,p_r"))?;
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    Ok(match (kind, parts.as_slice()) {
        ("er", [n, p]) => gen_er(&ErParams::new(n.parse()?, p.parse()?)?, seed)?,
        ("ws", [n, k, p_r]) => gen_ws(&WsParams::new(n.parse()?, k.parse()?, p_r.parse()?)?, seed)?,
        _ => bail!("model `{model}` must be er:n,p or ws:n,k,p_r"),
    })
}

fn ri_csv(series: &RiSeries) -> String {
    let mut s = String::from("window_end,ri,density,alpha\n");
    for p in &series.points {
        s.push_str(&format!("{},{},{},{}\n", p.window_end, fmt_opt(p.ri), p.density, p.alpha));
    }
    s
}

fn gnuplot_data(series: &RiSeries) -> String {
    let alphas = &series.config.alphas;
    let mut s = String::from("# window_end");
    for a in alphas {
        s.push_str(&format!(" ri_alpha_{a}"));
    }
    s.push('\n');
    for chunk in series.points.chunks(alphas.len()) {
        s.push_str(&chunk[0].window_end);
        for p in chunk {
            s.push(' ');
            s.push_str(&p.ri.map_or("NaN".to_string(), |v| v.to_string()));
        }
        s.push('\n');
    }
    s
}
