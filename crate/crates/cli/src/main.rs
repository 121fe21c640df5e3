//! `knead`: compute, convert and compare kneading data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use knead_core::folding::{compare_folding, folding_to_kneading, kneading_to_folding, FoldingComparison};
use knead_core::henon::{self, HenonOptions, HenonParams};
use knead_core::io::{candidates_csv, regions_csv, Artifact, MapKind, Payload, Source};
use knead_core::kneading::{
    compare_kneading_sets, is_admissible, AdmissibleOptions, KneadingError, SetComparison, Verdict,
};
use knead_core::lozi::{self, GrowOptions, LoziParams};
use knead_core::tree::{folding_to_tree, mark_tree, tree_to_folding, tree_to_kneading};
use knead_core::{FoldingPattern, KneadingSet, MarkedTree, TwoSidedWindow};

const EXIT_ERROR: u8 = 5;

#[derive(Parser)]
#[command(name = "knead", version, about = "Kneading sequences, folding patterns and pruned trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Misiurewicz membership (Lozi) or plausibility warnings (Henon). Exit 2 if rejected.
    Check(MapArgs),
    /// Kneading set from an engine.
    Kneading {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Folding pattern from an engine, or converted from a kneading file.
    Folding {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 6)]
        generations: usize,
        /// Kneading file to convert instead of running an engine.
        #[arg(long)]
        from: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Marked pruned tree of a folding file.
    Tree {
        file: PathBuf,
        /// Emit Graphviz text instead of JSON.
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Converts between kneading, folding and tree files.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Kind,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        generations: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Admissibility of a window. Exit 3 if rejected, 4 if the search budget is exceeded.
    Admissible {
        window: String,
        #[arg(long)]
        kneading: PathBuf,
        /// Window radius n: coordinates -n..n are tested.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Longest prelude word tried before the window.
        #[arg(long)]
        prelude: Option<usize>,
    },
    /// Compares two files, or sweeps parameters against a reference. Exit 1 on a difference.
    Compare {
        files: Vec<PathBuf>,
        #[command(flatten)]
        map: MapArgs,
        /// Parameter pairs `a,b` compared against `--a/--b` with the engine.
        #[arg(long = "sweep", value_name = "A,B")]
        sweep: Vec<String>,
        /// What the sweep compares.
        #[arg(long, value_enum, default_value_t = Kind::Folding)]
        what: Kind,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        generations: usize,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Itinerary region of a window as CSV polygons (Lozi only).
    Region {
        window: String,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Unstable manifold with markers as CSV.
    Manifold {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 10.0)]
        arclength: f64,
        /// Emit the Henon critical candidates instead of the polyline.
        #[arg(long)]
        candidates: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Kind {
    Kneading,
    Folding,
    Tree,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MapName {
    Lozi,
    Henon,
}

#[derive(Args, Clone)]
struct MapArgs {
    #[arg(long, value_enum, default_value_t = MapName::Lozi)]
    map: MapName,
    /// Defaults to 1.8 (Lozi) or 1.9 (Henon).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Defaults to 0.3 (Lozi) or 0.025 (Henon).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Longest manifold segment (Henon growth, Lozi output subdivision).
    #[arg(long)]
    seg_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    locus_eps: f64,
    /// Horizon of the Henon contraction test.
    #[arg(long, default_value_t = henon::DEFAULT_J_MAX)]
    j_max: usize,
    #[arg(long, default_value_t = henon::DEFAULT_SCORE_THRESHOLD)]
    score_threshold: f64,
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum Engine {
    Lozi(LoziParams, GrowOptions),
    Henon(HenonParams, HenonOptions),
}

impl MapArgs {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("seg-tol", self.seg_tol.unwrap_or(1.0)), ("locus-eps", self.locus_eps)] {
            if !(v > 0.0) {
                bail!("--{name} must be positive");
            }
        }
        if self.j_max == 0 {
            bail!("--j-max must be at least 1");
        }
        Ok(())
    }

    fn engine(&self) -> Result<Engine> {
        self.validate()?;
        Ok(match self.map {
            MapName::Lozi => {
                let p = LoziParams::new(self.a.unwrap_or(1.8), self.b.unwrap_or(0.3));
                let mut o = GrowOptions { locus_eps: self.locus_eps, ..Default::default() };
                if let Some(s) = self.seg_tol {
                    o.seg_tol = s;
                }
                Engine::Lozi(p, o)
            }
            MapName::Henon => {
                let p = HenonParams::new(self.a.unwrap_or(henon::DEFAULT_A), self.b.unwrap_or(henon::DEFAULT_B));
                let mut o = HenonOptions { locus_eps: self.locus_eps, ..Default::default() };
                if let Some(s) = self.seg_tol {
                    o.grow.seg_tol = s;
                }
                o.detect.j_max = self.j_max;
                o.detect.score_threshold = self.score_threshold;
                Engine::Henon(p, o)
            }
        })
    }

    fn with_params(&self, a: f64, b: f64) -> MapArgs {
        MapArgs { a: Some(a), b: Some(b), ..self.clone() }
    }
}

impl Engine {
    fn source(&self) -> Source {
        match self {
            Engine::Lozi(p, _) => Source { map: MapKind::Lozi, a: p.a, b: p.b },
            Engine::Henon(p, _) => Source { map: MapKind::Henon, a: p.a, b: p.b },
        }
    }

    fn kneading(&self, count: usize, depth: usize) -> Result<KneadingSet> {
        Ok(match self {
            Engine::Lozi(p, o) => {
                require_misiurewicz(p)?;
                lozi::kneading_set_of(p, count, depth, o)?
            }
            Engine::Henon(p, o) => henon::kneading_set_of(p, count, depth, o)?,
        })
    }

    fn folding(&self, g: usize) -> Result<FoldingPattern> {
        Ok(match self {
            Engine::Lozi(p, o) => {
                require_misiurewicz(p)?;
                lozi::folding_pattern_of(p, g, o)?
            }
            Engine::Henon(p, o) => henon::folding_pattern_of(p, g, o)?,
        })
    }
}

fn require_misiurewicz(p: &LoziParams) -> Result<()> {
    if !p.in_misiurewicz() {
        return Err(lozi::LoziError::NotMisiurewicz { a: p.a, b: p.b }.into());
    }
    Ok(())
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_artifact(out: &OutArgs, a: &Artifact) -> Result<()> {
    match out.format {
        Format::Json => emit(out, &a.to_json()),
        Format::Csv => match &a.payload {
            Payload::Kneading { entries } => {
                let mut s = String::from("index,arc_code,tail\n");
                for e in entries {
                    s.push_str(&format!("{},{},{}\n", e.index, e.arc_code, e.tail));
                }
                emit(out, &s)
            }
            Payload::Folding(fp) => emit(out, &format!("{fp}\n")),
            Payload::Tree(_) => bail!("trees have no CSV form"),
        },
    }
}

fn read_artifact(path: &Path) -> Result<Artifact> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Artifact::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn carry(from: &Artifact, mut to: Artifact) -> Artifact {
    to.heuristic = from.heuristic;
    to.source = from.source;
    to
}

fn stamped(a: Artifact, e: &Engine) -> Artifact {
    a.with_source(e.source())
}

fn parse_window(s: &str) -> Result<TwoSidedWindow> {
    s.parse::<TwoSidedWindow>().map_err(|e| anyhow!("invalid window {s:?}: {e}"))
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("expected `a,b`, found {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn convert(a: Artifact, to: Kind, depth: usize, generations: usize) -> Result<Artifact> {
    let src = a.clone();
    let out = match (a.payload, to) {
        (Payload::Kneading { .. }, Kind::Kneading)
        | (Payload::Folding(_), Kind::Folding)
        | (Payload::Tree(_), Kind::Tree) => src.clone(),
        (Payload::Kneading { .. }, _) => {
            let k = src.clone().into_kneading()?;
            let fp = kneading_to_folding(&k, generations)?;
            match to {
                Kind::Folding => Artifact::folding(&fp),
                _ => Artifact::tree(&mark_tree(&folding_to_tree(&fp)?)),
            }
        }
        (Payload::Folding(fp), Kind::Kneading) => Artifact::kneading(&folding_to_kneading(&fp, depth)?),
        (Payload::Folding(fp), _) => Artifact::tree(&mark_tree(&folding_to_tree(&fp)?)),
        (Payload::Tree(_), _) => {
            let mt: MarkedTree = src.clone().into_tree()?;
            match to {
                Kind::Folding => Artifact::folding(&tree_to_folding(&mt.tree)?),
                _ => Artifact::kneading(&tree_to_kneading(&mt, depth)?),
            }
        }
    };
    Ok(carry(&src, out))
}

fn compare_artifacts(a: Artifact, b: Artifact, depth: usize) -> Result<serde_json::Value> {
    Ok(match (a.kind(), b.kind()) {
        ("kneading", "kneading") => {
            set_comparison_json(compare_kneading_sets(&a.into_kneading()?, &b.into_kneading()?, depth))
        }
        ("folding", "folding") => folding_comparison_json(compare_folding(&a.into_folding()?, &b.into_folding()?)),
        (x, y) => bail!("cannot compare a {x} file with a {y} file"),
    })
}

fn set_comparison_json(c: SetComparison) -> serde_json::Value {
    match c {
        SetComparison::EqualUpToDepth(d) => json!({"result": "equal", "equal_up_to": d}),
        SetComparison::Differ { index, kind } => json!({"result": "differ", "index": index, "kind": kind}),
    }
}

fn folding_comparison_json(c: FoldingComparison) -> serde_json::Value {
    match c {
        FoldingComparison::EqualUpTo(g) => json!({"result": "equal", "equal_up_to": g}),
        FoldingComparison::DifferAt { coordinate } => json!({"result": "differ", "coordinate": coordinate}),
    }
}

fn line(v: &serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string(v).expect("values serialize"))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Check(map) => {
            let e = map.engine()?;
            let (ok, report) = match &e {
                Engine::Lozi(p, _) => {
                    let ok = p.in_misiurewicz();
                    (ok, json!({"map": "lozi", "a": p.a, "b": p.b, "misiurewicz": ok}))
                }
                Engine::Henon(p, _) => match p.check() {
                    Ok(w) => (true, json!({"map": "henon", "a": p.a, "b": p.b, "ok": true, "warnings": w})),
                    Err(err) => {
                        (false, json!({"map": "henon", "a": p.a, "b": p.b, "ok": false, "error": err.to_string()}))
                    }
                },
            };
            print!("{}", line(&report));
            Ok(if ok { 0 } else { 2 })
        }
        Cmd::Kneading { map, count, depth, out } => {
            if count == 0 || depth == 0 {
                bail!("--count and --depth must be at least 1");
            }
            let e = map.engine()?;
            emit_artifact(&out, &stamped(Artifact::kneading(&e.kneading(count, depth)?), &e))?;
            Ok(0)
        }
        Cmd::Folding { map, generations, from, out } => {
            let a = match from {
                Some(path) => {
                    let src = read_artifact(&path)?;
                    convert(src, Kind::Folding, 0, generations)?
                }
                None => {
                    let e = map.engine()?;
                    stamped(Artifact::folding(&e.folding(generations)?), &e)
                }
            };
            emit_artifact(&out, &a)?;
            Ok(0)
        }
        Cmd::Tree { file, dot, out } => {
            let src = read_artifact(&file)?;
            let a = convert(src, Kind::Tree, 0, 0)?;
            if dot {
                emit(&out, &a.into_tree()?.tree.to_dot())?;
            } else {
                emit_artifact(&out, &a)?;
            }
            Ok(0)
        }
        Cmd::Convert { file, to, depth, generations, out } => {
            let a = convert(read_artifact(&file)?, to, depth, generations)?;
            emit_artifact(&out, &a)?;
            Ok(0)
        }
        Cmd::Admissible { window, kneading, depth, prelude } => {
            let w = parse_window(&window)?;
            let k = read_artifact(&kneading)?.into_kneading()?;
            let opts = AdmissibleOptions { prelude_len: prelude, ..Default::default() };
            match is_admissible(&w, &k, depth, opts) {
                Ok(Verdict::AdmissibleUpTo(r)) => {
                    print!("{}", line(&json!({"verdict": "admissible", "radius": r, "requested": depth})));
                    Ok(0)
                }
                Ok(Verdict::Rejected { index, position }) => {
                    print!("{}", line(&json!({"verdict": "rejected", "index": index, "position": position})));
                    Ok(3)
                }
                Err(KneadingError::SearchBudgetExceeded { budget }) => {
                    print!("{}", line(&json!({"verdict": "budget_exceeded", "budget": budget})));
                    Ok(4)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Compare { files, map, sweep, what, depth, generations, count, jobs } => {
            if !sweep.is_empty() {
                if !files.is_empty() {
                    bail!("give either two files or --sweep, not both");
                }
                let pairs = sweep.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
                let reference = map.engine()?;
                let one = |e: &Engine| -> Result<Artifact> {
                    Ok(match what {
                        Kind::Kneading => Artifact::kneading(&e.kneading(count, depth)?),
                        _ => Artifact::folding(&e.folding(generations)?),
                    })
                };
                let base = one(&reference)?;
                let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
                let results: Vec<Result<serde_json::Value>> = pool.install(|| {
                    pairs
                        .par_iter()
                        .map(|&(a, b)| {
                            let e = map.with_params(a, b).engine()?;
                            let mut v = compare_artifacts(base.clone(), one(&e)?, depth)?;
                            v["a"] = json!(a);
                            v["b"] = json!(b);
                            Ok(v)
                        })
                        .collect()
                });
                let mut code = 0;
                for r in results {
                    let v = r?;
                    if v["result"] == "differ" {
                        code = 1;
                    }
                    print!("{}", line(&v));
                }
                return Ok(code);
            }
            let [fa, fb] = files.as_slice() else { bail!("compare needs exactly two files") };
            let v = compare_artifacts(read_artifact(fa)?, read_artifact(fb)?, depth)?;
            print!("{}", line(&v));
            Ok(if v["result"] == "differ" { 1 } else { 0 })
        }
        Cmd::Region { window, map, out } => {
            let w = parse_window(&window)?;
            let Engine::Lozi(p, _) = map.engine()? else { bail!("regions are only available for the Lozi map") };
            require_misiurewicz(&p)?;
            if out.format == Format::Json {
                bail!("regions are written as CSV; pass --format csv");
            }
            emit(&out, &regions_csv(&lozi::itinerary_to_region(&p, &w)?))?;
            Ok(0)
        }
        Cmd::Manifold { map, arclength, candidates, out } => {
            if out.format == Format::Json {
                bail!("manifolds are written as CSV; pass --format csv");
            }
            match map.engine()? {
                Engine::Lozi(p, o) => {
                    if candidates {
                        bail!("--candidates applies to the Henon map");
                    }
                    require_misiurewicz(&p)?;
                    let poly = lozi::grow_wu(&p, arclength, &o)?;
                    let poly = if o.seg_tol.is_finite() {
                        poly.refined(o.seg_tol, o.max_vertices)
                            .ok_or_else(|| anyhow!("vertex budget of {} exceeded", o.max_vertices))?
                    } else {
                        poly
                    };
                    emit(&out, &poly.to_csv())?;
                }
                Engine::Henon(p, o) => {
                    let m = henon::build_model(&p, arclength, &o.grow, &o.detect, o.locus_eps)?;
                    if candidates {
                        emit(&out, &candidates_csv(&m.candidates))?;
                    } else {
                        emit(&out, &m.manifold.poly.to_csv())?;
                    }
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let causes: Vec<String> = e.chain().skip(1).map(|c| c.to_string()).collect();
            eprintln!("{}", json!({"error": e.to_string(), "causes": causes}));
            ExitCode::from(EXIT_ERROR)
        }
    }
}
