use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use relspine::formulas::{self, FactorSignature};
use relspine::free_group::{
    dihedral_generators, images_form_basis, vcd_generators, verify_abelian_witness, Automorphism,
    BasisSpec,
};
use relspine::graph_core::{
    agraph_from_json, agraph_to_json, canonical_form, enumerate_agraph_types, to_dot,
    validate_agraph, validate_pre_agraph, AGraph, EnumerationConfig, DEFAULT_EDGE_GUARD,
};
use relspine::metric_maps::{
    max_stretch_subgraph, minset_check, turn_analysis, GraphMap, MINSET_GUARD,
};
use relspine::registry::{homology_engine, lipschitz_engine};
use relspine::spine_complex::{
    collapse_poset, collapsible, link_complexes, small_spine, spine_ball, BallConfig, Marking,
    SimplicialComplex, TypePoset,
};
use relspine::Error;

/// Worker count for parallel sections.
const THREADS_ENV: &str = "RELSPINE_THREADS";

#[derive(Parser)]
#[command(name = "relspine", version, about = "Relative outer space spines: enumeration, complexes and checks")]
struct Cli {
    /// Output format where a command supports several.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Args, Clone)]
struct Signature {
    /// Rank of the free group.
    #[arg(long)]
    n: usize,
    /// Factor ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<usize>,
}

impl Signature {
    fn basis(&self) -> Result<BasisSpec, Error> {
        BasisSpec::new(self.n, &self.s)
    }
}

#[derive(Args, Clone)]
struct Enumeration {
    #[command(flatten)]
    sig: Signature,
    /// Skip graphs with separating edges.
    #[arg(long)]
    reduced: bool,
    /// Ignore the edge guard.
    #[arg(long)]
    force: bool,
    /// Largest edge bound enumerated without --force.
    #[arg(long, default_value_t = DEFAULT_EDGE_GUARD)]
    guard: usize,
}

impl Enumeration {
    fn config(&self) -> EnumerationConfig {
        EnumerationConfig { reduced: self.reduced, force: self.force, guard: self.guard }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph file against the definition.
    Validate {
        file: PathBuf,
        /// Allow wedge cycles to overlap in trees.
        #[arg(long)]
        pre: bool,
    },
    /// List the graph types of a signature.
    Enumerate {
        #[command(flatten)]
        e: Enumeration,
        /// Also write all types as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Collapse poset of graph types and its dimension.
    Spine {
        #[command(flatten)]
        e: Enumeration,
    },
    /// The same restricted to graphs with pairwise disjoint wedge cycles.
    Smallspine {
        #[command(flatten)]
        e: Enumeration,
    },
    /// Homology of a complex file.
    Homology {
        file: PathBuf,
        #[arg(long, default_value = "snf")]
        engine: String,
    },
    /// Vertex links of a graph file, or of every enumerated type.
    Links {
        #[arg(long, conflicts_with = "n")]
        graph: Option<PathBuf>,
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<usize>,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        force: bool,
    },
    /// Lipschitz constant, stretched subgraph, turns and optimality of a map file.
    Lipschitz {
        file: PathBuf,
        #[arg(long, default_value = "candidates")]
        engine: String,
        /// Also run the brute-force engine and require agreement.
        #[arg(long)]
        compare: bool,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Lexicographic minimality of the unit rose of one factor.
    MinsetCheck {
        #[command(flatten)]
        sig: Signature,
        /// Factor index, from 1.
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Competitor word length.
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Closed formulas for one signature, or a table.
    Formulas {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<usize>,
        /// Table of all signatures up to these sizes.
        #[arg(long, requires = "s_max")]
        n_max: Option<usize>,
        #[arg(long, requires = "n_max")]
        s_max: Option<usize>,
    },
    /// Commuting generators certifying the dimension lower bound.
    VcdWitness {
        #[command(flatten)]
        sig: Signature,
        /// Exponent range for the independence check.
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Finite ball of the marked spine around the identity-marked rose.
    Ball {
        #[command(flatten)]
        sig: Signature,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Leave out the blow-ups and collapses of orbit points.
        #[arg(long)]
        no_stars: bool,
    },
    /// Whether an automorphism file describes an invertible map.
    CheckInvertible { file: PathBuf },
}

enum Failure {
    Input(String),
    /// A failed check, with the report that shows it.
    Verify(String, Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<Value, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(format!("parse error at {}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

/// Writes next to the target and renames, so readers never see a partial file.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("partial");
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn type_json(g: &AGraph) -> Value {
    json!({"key": canonical_form(g).to_string(), "graph": agraph_to_json(g)})
}

fn poset_json(tp: &TypePoset, expected: i64) -> Value {
    let dim = tp.dimension().ok();
    json!({
        "types": tp.types.iter().map(type_json).collect::<Vec<_>>(),
        "relations": tp.poset.relations(),
        "dimension": dim,
        "expected_dimension": expected,
        "complex": tp.poset.order_complex().to_json(),
    })
}

fn check_dimension(v: Value) -> Outcome {
    if v["dimension"].as_i64() == v["expected_dimension"].as_i64() {
        Ok(v)
    } else {
        let m = format!(
            "dimension {} differs from the formula {}",
            v["dimension"], v["expected_dimension"]
        );
        Err(Failure::Verify(m, v))
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let format = cli.format;
    let unsupported = || Failure::Input("format not supported by this command".into());
    let value = match &cli.command {
        Command::Validate { file, pre } => {
            let g = agraph_from_json(&read_json(file)?)?;
            let violations = if *pre { validate_pre_agraph(&g) } else { validate_agraph(&g) };
            let v = json!({
                "valid": violations.is_empty(),
                "violations": violations,
                "key": canonical_form(&g).to_string(),
            });
            if violations.is_empty() {
                v
            } else {
                return Err(Failure::Verify("check failed".into(), v));
            }
        }
        Command::Enumerate { e, dot } => {
            let types = enumerate_agraph_types(&e.sig.basis()?, e.config())?;
            let dots: String = types
                .iter()
                .enumerate()
                .map(|(i, g)| to_dot(g, &format!("type{i}")))
                .collect::<Vec<_>>()
                .join("\n");
            if let Some(p) = dot {
                write_atomic(p, &dots)?;
            }
            match format {
                Format::Dot => return Ok(dots),
                Format::Csv => {
                    let mut out = String::from("index,key,vertices,edges\n");
                    for (i, g) in types.iter().enumerate() {
                        out.push_str(&format!(
                            "{i},\"{}\",{},{}\n",
                            canonical_form(g),
                            g.graph.num_vertices(),
                            g.graph.num_edges()
                        ));
                    }
                    return Ok(out);
                }
                Format::Json => json!({
                    "count": types.len(),
                    "types": types.iter().map(type_json).collect::<Vec<_>>(),
                }),
            }
        }
        Command::Spine { e } | Command::Smallspine { e } => {
            let small = matches!(cli.command, Command::Smallspine { .. });
            let sig = FactorSignature::new(e.sig.n, &e.sig.s)?;
            let mut tp = collapse_poset(&e.sig.basis()?, e.config())?;
            let expected = if small {
                tp = small_spine(&tp);
                formulas::dim_small_spine(&sig)?
            } else {
                formulas::dim_relative_spine(&sig)?
            };
            match format {
                Format::Dot => return Ok(tp.poset.to_dot(if small { "smallspine" } else { "spine" })),
                Format::Csv => return Err(unsupported()),
                Format::Json => check_dimension(poset_json(&tp, expected))?,
            }
        }
        Command::Homology { file, engine } => {
            let c = SimplicialComplex::from_json(&read_json(file)?)?;
            let h = homology_engine(engine)?.homology(&c)?;
            let mut v = h.to_json();
            v["engine"] = json!(engine);
            v["collapse"] = serde_json::to_value(collapsible(&c)).expect("serializable");
            v
        }
        Command::Links { graph, n, s, reduced, force } => {
            let graphs = match (graph, n) {
                (Some(p), _) => vec![agraph_from_json(&read_json(p)?)?],
                (None, Some(n)) => {
                    let config = EnumerationConfig { reduced: *reduced, force: *force, ..Default::default() };
                    enumerate_agraph_types(&BasisSpec::new(*n, s)?, config)?
                }
                (None, None) => return Err(Failure::Input("give --graph or --n/--s".into())),
            };
            let mut rows = Vec::new();
            let mut failed = false;
            for (i, g) in graphs.iter().enumerate() {
                for v in 0..g.graph.num_vertices() {
                    let wedges = g.wedges_at(v).len();
                    let (b, l) = link_complexes(g, v);
                    let report = collapsible(&l);
                    let checked = wedges >= 2;
                    failed |= checked && !report.collapsible;
                    rows.push(json!({
                        "type": i,
                        "vertex": v,
                        "valence": g.graph.valence(v),
                        "wedges": wedges,
                        "ideal_edges": b.vertices().len(),
                        "legal_ideal_edges": l.vertices().len(),
                        "link_dimension": l.dimension().ok(),
                        "collapsible": report.collapsible,
                    }));
                }
            }
            let v = json!({"links": rows, "all_collapsible": !failed});
            if failed {
                return Err(Failure::Verify("check failed".into(), v));
            }
            v
        }
        Command::Lipschitz { file, engine, compare, tolerance } => {
            if !(*tolerance > 0.0 && *tolerance <= 1e-3) {
                return Err(Failure::Input("tolerance must lie in (0, 1e-3]".into()));
            }
            let f = GraphMap::from_json(&read_json(file)?)?;
            let report = lipschitz_engine(engine)?.lipschitz(&f)?;
            let turns = turn_analysis(&f).ok();
            let mut v = json!({
                "lipschitz": report,
                "max_edge_stretch": f.max_edge_stretch(),
                "gamma_f": max_stretch_subgraph(&f),
                "optimality": f.is_optimal(),
                "turns": turns,
            });
            if *compare {
                let other = if engine == "brute-force" { "candidates" } else { "brute-force" };
                let r2 = lipschitz_engine(other)?.lipschitz(&f)?;
                let agree = (r2.constant - report.constant).abs() <= *tolerance;
                v["comparison"] = json!({"engine": other, "constant": r2.constant, "agree": agree});
                if !agree {
                    return Err(Failure::Verify("check failed".into(), v));
                }
            }
            v
        }
        Command::MinsetCheck { sig, j, bound } => {
            if *bound > MINSET_GUARD {
                return Err(Failure::Input(format!("bound {bound} exceeds {MINSET_GUARD}")));
            }
            let r = minset_check(&sig.basis()?, *j, *bound)?;
            let v = serde_json::to_value(&r).expect("serializable");
            if !r.passed {
                return Err(Failure::Verify("check failed".into(), v));
            }
            v
        }
        Command::Formulas { n, s, n_max, s_max } => match (n, n_max, s_max) {
            (_, Some(nm), Some(sm)) => {
                if format == Format::Csv {
                    return Ok(formulas::table_csv(*nm, *sm));
                }
                let rows: Vec<Value> = formulas::signature_grid(*nm, *sm)
                    .iter()
                    .filter_map(|sig| formulas::row(sig).ok())
                    .map(|r| serde_json::to_value(r).expect("serializable"))
                    .collect();
                json!(rows)
            }
            (Some(n), _, _) => {
                let r = formulas::row(&FactorSignature::new(*n, s)?)?;
                serde_json::to_value(r).expect("serializable")
            }
            _ => return Err(Failure::Input("give --n/--s or --n-max/--s-max".into())),
        },
        Command::VcdWitness { sig, bound } => {
            let basis = sig.basis()?;
            let gens = vcd_generators(&basis)?;
            let report = verify_abelian_witness(&gens, *bound)?;
            let expected = formulas::vcd(&FactorSignature::new(sig.n, &sig.s)?)?;
            let mut v = serde_json::to_value(&report).expect("serializable");
            // a rank-one first factor makes one product of generators inner
            let rank = report.generator_count - usize::from(report.relation.is_some());
            v["rank_mod_inner"] = json!(rank);
            v["expected_rank"] = json!(expected);
            v["generators"] = gens
                .iter()
                .map(|g| json!({"name": g.name, "images": g.forward.to_json()}))
                .collect();
            if !report.passed() || rank as i64 != expected {
                return Err(Failure::Verify("check failed".into(), v));
            }
            v
        }
        Command::Ball { sig, radius, no_stars } => {
            let basis = sig.basis()?;
            let gens = match dihedral_generators(&basis) {
                Ok(g) => g,
                Err(_) => vcd_generators(&basis)?,
            };
            let centre = Marking::identity_rose(&basis);
            let config = BallConfig { radius: *radius, with_stars: !no_stars };
            let ball = spine_ball(&centre, &gens, config)?;
            if format == Format::Dot {
                return Ok(ball.poset.to_dot("ball"));
            }
            let c = ball.complex();
            let r = ball.reduced_complex();
            let counts = |c: &SimplicialComplex| {
                let d = c.dimension().unwrap_or(0);
                (0..=d).map(|k| c.faces(k).len()).collect::<Vec<_>>()
            };
            json!({
                "generators": gens.iter().map(|g| g.name.clone()).collect::<Vec<_>>(),
                "orbit": ball.orbit.len(),
                "markings": ball.markings.iter().map(Marking::to_json).collect::<Vec<_>>(),
                "face_counts": counts(&c),
                "reduced_face_counts": counts(&r),
                "complex": c.to_json(),
                "reduced_complex": r.to_json(),
            })
        }
        Command::CheckInvertible { file } => {
            let f = Automorphism::from_json(&read_json(file)?)?;
            let ok = images_form_basis(&f);
            let v = json!({"invertible": ok, "relative": f.is_relative().is_some()});
            if !ok {
                return Err(Failure::Verify("check failed".into(), v));
            }
            v
        }
    };
    if format != Format::Json {
        return Err(unsupported());
    }
    Ok(pretty(&value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let emit = |text: &str| -> Result<(), Failure> {
        match &cli.out {
            Some(p) => write_atomic(p, text),
            None => {
                // a closed pipe is not an error worth reporting
                let _ = writeln!(std::io::stdout(), "{text}");
                Ok(())
            }
        }
    };
    let (text, code) = match run(&cli) {
        Ok(text) => (text, ExitCode::SUCCESS),
        Err(Failure::Verify(m, report)) => {
            eprintln!("verification failed: {m}");
            (pretty(&report), ExitCode::from(1))
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    match emit(&text) {
        Ok(()) => code,
        Err(Failure::Input(m) | Failure::Verify(m, _)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
