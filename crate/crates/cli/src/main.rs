//! `symthompson`: element algebra, property campaigns and Stein–Farley
//! computations from the command line.
//!
//! Exit codes: 0 success, 1 property failure, 2 input error, 3 resource bound
//! exceeded.

mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use symthompson::campaign::{generate_check, run_axioms, AxiomsConfig};
use symthompson::element::{ElementError, ElementHeader, DEFAULT_BALL_LIMIT};
use symthompson::homology::reduced_homology;
use symthompson::steinfarley::{
    dlk_report, interval, orbit_census, vertex_stabilizer_order, PosetVertex, SteinError, DEFAULT_GAP_BOUND,
    DEFAULT_HEIGHT_BOUND, DEFAULT_LEAF_BOUND, DEFAULT_STABILIZER_LIMIT,
};
use symthompson::{CantorPoint, CompleteTree, GroupError, LeafAddress, SimplicialComplex, SymTreePair, TreeError};

use load::{LoadedElement, Loader};

#[derive(Parser)]
#[command(name = "symthompson", version, about = "Symmetric Higman-Thompson groups with local groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Group file; used when an element file has no `group` line, and by the
    /// campaign commands.
    #[arg(long, global = true, value_name = "FILE")]
    group: Option<PathBuf>,
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Maximum leaf depth of any tree.
    #[arg(long, global = true, value_name = "N")]
    depth_limit: Option<usize>,
    /// Maximum number of elements in a word ball or stabilizer enumeration.
    #[arg(long, global = true, value_name = "N")]
    ball_limit: Option<usize>,
    /// Maximum number of leaves for a descending link.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_LEAF_BOUND)]
    leaf_bound: usize,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Built-in group when no group file is given: d2-trivial, d2-z2,
    /// d2-sym3, d3-trivial, d3-z2 or d3-sym3.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Arity of the trivial local group used when neither --group nor
    /// --preset is given.
    #[arg(long, global = true, default_value_t = 2)]
    arity: usize,
}

#[derive(Args)]
struct TreeSpec {
    /// Tree as a list of leaf addresses, e.g. "0 10 11".
    #[arg(long, conflicts_with = "leaves")]
    tree: Option<String>,
    /// Use a comb tree with this many leaves.
    #[arg(long)]
    leaves: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print `a ∘ b` (apply b first).
    Compose { a: PathBuf, b: PathBuf },
    Invert { element: PathBuf },
    Reduce { element: PathBuf },
    /// Print "equal" or "not equal".
    Equals { a: PathBuf, b: PathBuf },
    /// Image of an eventually periodic point written "prefix(period)".
    Act { element: PathBuf, point: String },
    /// Image in V_d(q(H)); the output names the image group.
    Pi { element: PathBuf },
    /// Lift an element over the image group back along the section.
    Section { element: PathBuf },
    /// Label on the leftmost domain leaf.
    Retract { element: PathBuf },
    /// Seeded property campaign over the element calculus.
    Axioms {
        #[arg(long, default_value_t = 1000)]
        triples: usize,
        /// Sample count for the other sampled properties (default: built-in
        /// per-property counts).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Check that iota(generators) and the unlabeled generating set reach all
    /// small labeled elements.
    GenerateCheck {
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        target_carets: usize,
    },
    /// Descending link of [T, id] with complete-join check and homology.
    Dlk {
        #[command(flatten)]
        tree: TreeSpec,
    },
    /// Interval between [T, id] and [T + carets, id].
    Interval {
        #[command(flatten)]
        tree: TreeSpec,
        /// Leaves of T to expand for the upper vertex.
        #[arg(long, value_delimiter = ',')]
        expand: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_GAP_BOUND)]
        max_gap: usize,
    },
    /// Enumerate the stabilizer of [T, id].
    Stabilizer {
        #[command(flatten)]
        tree: TreeSpec,
    },
    /// Count vertex orbits at each height up to --max-height.
    Orbits {
        #[arg(long, default_value_t = 3)]
        max_height: usize,
        /// Random translates sampled per height.
        #[arg(long, default_value_t = 8)]
        frames: usize,
    },
    /// Reduced integral homology of a complex given by maximal simplices.
    Homology { complex: PathBuf },
}

/// An error with its exit code.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn context(mut self, prefix: &str) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }

    fn bound(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn is_bound(e: &ElementError) -> bool {
    matches!(
        e,
        ElementError::BallLimit { .. }
            | ElementError::Tree(TreeError::DepthLimit { .. })
            | ElementError::Group(GroupError::SizeLimit { .. })
    )
}

impl From<ElementError> for Failure {
    fn from(e: ElementError) -> Self {
        if is_bound(&e) {
            Failure::bound(e.to_string())
        } else {
            Failure::input(e.to_string())
        }
    }
}

impl From<SteinError> for Failure {
    fn from(e: SteinError) -> Self {
        match &e {
            SteinError::Element(inner) if is_bound(inner) => Failure::bound(e.to_string()),
            SteinError::GapBound { .. }
            | SteinError::LeafBound { .. }
            | SteinError::HeightBound { .. }
            | SteinError::SizeLimit { .. } => Failure::bound(e.to_string()),
            SteinError::Inconsistent(_) | SteinError::Homology(_) => Failure {
                code: 1,
                message: e.to_string(),
            },
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        Failure::from(ElementError::from(e))
    }
}

struct Output {
    text: String,
    /// Property verdict: false turns into exit code 1.
    passed: bool,
}

fn text(s: String) -> Output {
    Output { text: s, passed: true }
}

fn report<T: Serialize>(r: &T, passed: bool) -> Result<Output, Failure> {
    let mut s = serde_json::to_string_pretty(r).map_err(|e| Failure::input(e.to_string()))?;
    s.push('\n');
    Ok(Output { text: s, passed })
}

fn element_text(e: &SymTreePair, header: &Option<ElementHeader>) -> Output {
    text(e.to_text(header.as_ref()))
}

fn tree_of(spec: &TreeSpec, d: usize) -> Result<CompleteTree, Failure> {
    match (&spec.tree, spec.leaves) {
        (Some(t), _) => CompleteTree::parse(d, t).map_err(|e| Failure::input(format!("--tree: {e}"))),
        (None, Some(n)) => {
            if n == 0 || (n - 1) % (d - 1) != 0 {
                return Err(Failure::input(format!("no complete {d}-ary tree has {n} leaves")));
            }
            let mut t = CompleteTree::trivial(d).map_err(|e| Failure::input(e.to_string()))?;
            while t.leaf_count() < n {
                let last = t.leaves()[t.leaf_count() - 1].clone();
                t = t.expand_leaf(&last).map_err(|e| Failure::from(ElementError::from(e)))?;
            }
            Ok(t)
        }
        (None, None) => Err(Failure::input("give --tree or --leaves")),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    let mut loader = Loader::new(g.clone());
    match &cli.command {
        Command::Compose { a, b } => {
            let x = loader.element(a)?;
            let y = loader.element(b)?;
            Ok(element_text(&x.element.compose(&y.element)?, &x.header))
        }
        Command::Invert { element } => {
            let x = loader.element(element)?;
            Ok(element_text(&x.element.inverse(), &x.header))
        }
        Command::Reduce { element } => {
            let x = loader.element(element)?;
            Ok(element_text(&x.element.reduce(), &x.header))
        }
        Command::Equals { a, b } => {
            let x = loader.element(a)?;
            let y = loader.element(b)?;
            let eq = x.element.equals(&y.element)?;
            Ok(text(if eq { "equal\n" } else { "not equal\n" }.into()))
        }
        Command::Act { element, point } => {
            let x = loader.element(element)?;
            let c = CantorPoint::parse(point).map_err(|m| Failure::input(format!("point: {m}")))?;
            Ok(text(format!("{}\n", x.element.act(&c)?)))
        }
        Command::Pi { element } => {
            let LoadedElement { element, header } = loader.element(element)?;
            let header = match header {
                Some(ElementHeader::Group(p)) => Some(ElementHeader::Image(p)),
                Some(ElementHeader::Image(_)) => {
                    return Err(Failure::input("element is already over an image group"))
                }
                None => None,
            };
            Ok(element_text(&element.pi(), &header))
        }
        Command::Section { element } => {
            let (v, group, header) = loader.image_element(element)?;
            Ok(element_text(&SymTreePair::pi_section(&v, &group)?, &header))
        }
        Command::Retract { element } => {
            let x = loader.element(element)?;
            Ok(text(format!("{}\n", x.element.retract())))
        }
        Command::Axioms { triples, samples } => {
            let (name, group) = loader.standalone_group()?;
            let mut cfg = AxiomsConfig {
                triples: *triples,
                ..AxiomsConfig::default()
            };
            if let Some(s) = *samples {
                cfg.confluence_trials = s;
                cfg.faithfulness_pairs = s;
                cfg.action_pairs = s;
                cfg.pi_pairs = s;
                cfg.section_round_trips = s;
                cfg.retraction_samples = s;
            }
            let r = run_axioms(&group, &name, &cfg, g.seed)?;
            report(&r, r.all_passed)
        }
        Command::GenerateCheck { radius, target_carets } => {
            let (_, group) = loader.standalone_group()?;
            let r = generate_check(&group, *target_carets, *radius, g.ball_limit.unwrap_or(DEFAULT_BALL_LIMIT))?;
            if r.ball_limit_hit && !r.all_reached {
                let out = report(&r, false)?;
                write_output(g, &out.text)?;
                return Err(Failure::bound(format!(
                    "ball size limit hit after radius {}",
                    r.radius_completed
                )));
            }
            report(&r, r.all_reached)
        }
        Command::Dlk { tree } => {
            let (_, group) = loader.standalone_group()?;
            let t = tree_of(tree, group.arity())?;
            let r = dlk_report(&t, &group, g.leaf_bound)?;
            report(&r, r.passed())
        }
        Command::Interval { tree, expand, max_gap } => {
            let (_, group) = loader.standalone_group()?;
            let t = tree_of(tree, group.arity())?;
            let mut top = t.clone();
            for leaf in expand.iter().flat_map(|s| s.split_whitespace()) {
                let l = LeafAddress::parse(leaf).map_err(|m| Failure::input(format!("--expand: {m}")))?;
                if !t.contains_leaf(&l) {
                    return Err(Failure::input(format!("--expand: {l} is not a leaf of the tree")));
                }
                top = top.expand_leaf(&l).map_err(|e| Failure::from(ElementError::from(e)))?;
            }
            let lower = PosetVertex::base(t, &group)?;
            let upper = PosetVertex::base(top, &group)?;
            let i = interval(&lower, &upper, *max_gap)?;
            let r = json!({
                "gap": i.gap,
                "vertex_count": i.vertices.len(),
                "boolean": i.is_boolean(),
                "size_is_power_of_two": i.size_is_power_of_two,
                "matches_subset_lattice": i.matches_subset_lattice,
                "is_distributive_lattice": i.is_distributive_lattice,
                "trees": i.vertices.iter().map(|v| v.tree().to_string()).collect::<Vec<_>>(),
            });
            report(&r, i.is_boolean())
        }
        Command::Stabilizer { tree } => {
            let (_, group) = loader.standalone_group()?;
            let t = tree_of(tree, group.arity())?;
            let limit = g.ball_limit.map_or(DEFAULT_STABILIZER_LIMIT, |b| b as u128);
            let r = vertex_stabilizer_order(&PosetVertex::base(t, &group)?, limit)?;
            report(&r, r.passed())
        }
        Command::Orbits { max_height, frames } => {
            let (_, group) = loader.standalone_group()?;
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let mut heights = Vec::new();
            for h in 0..=*max_height {
                heights.push(orbit_census(&group, h, DEFAULT_HEIGHT_BOUND, *frames, &mut rng)?);
            }
            let ok = heights.iter().all(|c| c.orbits == 1);
            report(&json!({ "heights": heights, "one_orbit_per_height": ok }), ok)
        }
        Command::Homology { complex } => {
            let src = std::fs::read_to_string(complex)
                .map_err(|e| Failure::input(format!("{}: {e}", complex.display())))?;
            let k = SimplicialComplex::parse(&src).map_err(|e| Failure::input(format!("{}:{e}", complex.display())))?;
            let h = reduced_homology(&k).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            report(&h, true)
        }
    }
}

fn write_output(g: &Global, s: &str) -> Result<(), Failure> {
    match &g.out {
        Some(p) => std::fs::write(p, s).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        write_output(&cli.global, &out.text)?;
        Ok(out.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("property check failed");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
