//! Command-line front end: every analysis as a subcommand with stable,
//! scriptable output.
//!
//! Exit codes: 0 success, 1 no finding (detection found no differing
//! level, or a verify check failed), 2 input/domain error, 3 resource
//! guard. Machine output goes to stdout or `--out`; diagnostics go to
//! stderr.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use itertools::Itertools;

use npflow::chain::{check_consistency, TransitionMatrix};
use npflow::constraint::{
    characteristics_from_distribution, verify_paper_basis_m3, ConstraintMode, ConstraintSystem,
    DofTable,
};
use npflow::dist::MapDistribution;
use npflow::error::Error;
use npflow::flip::{example_distribution, verify_example};
use npflow::invariant::{
    check_projection_invariance, detect_bifurcation_level, seeded_invariant_measure,
};
use npflow::ratio::{format_ratio, parse_ratio, Ratio};
use npflow::sim::simulate_flow;
use npflow::space::{FiniteSpace, PointTuple};

#[derive(Parser)]
#[command(
    name = "npflow",
    version,
    about = "Exact analysis of n-point motions of stochastic flows of maps on {1..m}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the built-in pair-flip example distribution for (m, epsilon).
    Example {
        /// Even number of states.
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Perturbation strength in [0, 1], as "p/q" or an integer.
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the n-point transition matrix of a distribution file.
    Lift {
        dist: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect the bifurcation level between two flows from a seed tuple.
    Detect {
        dist_a: PathBuf,
        dist_b: PathBuf,
        /// Comma-separated 1-based seed tuple, e.g. "1,2,3,4,5,6".
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded invariant measure and its full projection cascade.
    Invariant {
        dist: PathBuf,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degrees-of-freedom table; with a distribution, exact rank and
    /// null space of the constraint system.
    Dof {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: Option<usize>,
        /// "all-maps" or "permutations".
        #[arg(long, default_value = "all-maps")]
        mode: String,
        /// Distribution supplying the prescribed characteristics.
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Print the null-space basis vectors.
        #[arg(long)]
        nullspace: bool,
        /// Override the size guard on large all-maps systems.
        #[arg(long)]
        force: bool,
        /// Write the constraint system in dof-system-v1 format.
        #[arg(long)]
        system_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the Poisson-subordinated composition walk.
    Simulate {
        dist: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        prng_seed: u64,
        /// Attach the 0/1 linear embedding of each composed map.
        #[arg(long)]
        embed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a doubly stochastic matrix into permutation atoms.
    Birkhoff {
        /// m x m matrix in npoint-sparse-v1 format (n = 1).
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validation reports (exit 1 when a check fails).
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
}

#[derive(Subcommand)]
enum VerifyCheck {
    /// P A Q = A' for every coordinate deletion of a lifted matrix.
    Consistency {
        dist: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Marginals of the seeded invariant measure stay stationary.
    Projection {
        dist: PathBuf,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The built-in example's epsilon-invariance and support split.
    Example {
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Comma-separated epsilon grid, e.g. "1/4,1/2,3/4,1".
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The printed m=3 null-space basis families.
    PaperBasis {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complementarity identity for a flow of bijections.
    Complementarity {
        dist: PathBuf,
        /// Comma-separated source set, e.g. "1,2".
        #[arg(long)]
        u: String,
        /// Comma-separated target set of the same size.
        #[arg(long)]
        v: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Column sums of the 1-point matrix are all 1.
    Bistochastic {
        dist: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("npflow: {err}");
            match err {
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> npflow::Result<u8> {
    match command {
        Command::Example { m, epsilon, out } => {
            let eps = parse_ratio(&epsilon)?;
            let nu = example_distribution(m, &eps)?;
            emit(&out, &nu.to_json_string())?;
            Ok(0)
        }
        Command::Lift { dist, level, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let a = TransitionMatrix::lift(&nu, level)?;
            emit(&out, &a.to_sparse_text())?;
            Ok(0)
        }
        Command::Detect { dist_a, dist_b, seed, out } => {
            let nu1 = MapDistribution::read_file(&dist_a)?;
            let nu2 = MapDistribution::read_file(&dist_b)?;
            let seed = parse_tuple(nu1.m(), &seed)?;
            let report = detect_bifurcation_level(&nu1, &nu2, &seed)?;
            let found = report.detected_level.is_some();
            emit(&out, &report.to_json_string())?;
            Ok(if found { 0 } else { 1 })
        }
        Command::Invariant { dist, seed, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let seed = parse_tuple(nu.m(), &seed)?;
            let measure = seeded_invariant_measure(&nu, &seed)?;
            let cascade = measure.cascade()?;
            let file = render::cascade_file(nu.m(), seed.entries(), &cascade);
            emit(&out, &render::to_pretty_json(&file))?;
            Ok(0)
        }
        Command::Dof { m, k, mode, dist, nullspace, force, system_out, out } => {
            cmd_dof(m, k, &mode, dist.as_deref(), nullspace, force, system_out.as_deref(), &out)
        }
        Command::Simulate { dist, rate, horizon, prng_seed, embed, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let sample = simulate_flow(&nu, rate, horizon, prng_seed, embed)?;
            emit(&out, &sample.to_jsonl())?;
            Ok(0)
        }
        Command::Birkhoff { matrix, out } => {
            let text = std::fs::read_to_string(&matrix)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", matrix.display())))?;
            let a = TransitionMatrix::from_sparse_text(&text)?;
            if a.level() != 1 {
                return Err(Error::Input(format!(
                    "birkhoff expects an m x m matrix (n=1), got n={}",
                    a.level()
                )));
            }
            let m = a.m();
            let dense: Vec<Vec<Ratio>> =
                (0..m).map(|i| (0..m).map(|j| a.get(i, j)).collect()).collect();
            let atoms = npflow::birkhoff::birkhoff_decompose(&dense)?;
            emit(&out, &render::to_pretty_json(&render::birkhoff_file(m, &atoms)))?;
            Ok(0)
        }
        Command::Verify { check } => run_verify(check),
    }
}

fn run_verify(check: VerifyCheck) -> npflow::Result<u8> {
    match check {
        VerifyCheck::Consistency { dist, level, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let report = check_consistency(&nu, level)?;
            let pass = report.passed();
            emit(&out, &render::to_pretty_json(&render::consistency_file(&report)))?;
            Ok(if pass { 0 } else { 1 })
        }
        VerifyCheck::Projection { dist, seed, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let seed = parse_tuple(nu.m(), &seed)?;
            let measure = seeded_invariant_measure(&nu, &seed)?;
            let per_coordinate: Vec<render::CoordinateVerdict> = (1..=measure.level())
                .map(|r| {
                    check_projection_invariance(&measure, &nu, r)
                        .map(|pass| render::CoordinateVerdict { r, pass })
                })
                .collect::<npflow::Result<_>>()?;
            let pass = per_coordinate.iter().all(|c| c.pass);
            let file = render::ProjectionInvarianceFile {
                check: "projection-invariance",
                m: nu.m(),
                seed: seed.entries().to_vec(),
                level: measure.level(),
                pass,
                per_coordinate,
            };
            emit(&out, &render::to_pretty_json(&file))?;
            Ok(if pass { 0 } else { 1 })
        }
        VerifyCheck::Example { m, grid, out } => {
            let grid: Vec<Ratio> =
                grid.split(',').map(parse_ratio).collect::<npflow::Result<_>>()?;
            let report = verify_example(m, &grid)?;
            let pass = report.passed();
            emit(&out, &render::to_pretty_json(&render::example_file(&report)))?;
            Ok(if pass { 0 } else { 1 })
        }
        VerifyCheck::PaperBasis { out } => {
            let report = verify_paper_basis_m3()?;
            let pass = report.passed();
            emit(&out, &render::to_pretty_json(&render::paper_basis_file(&report)))?;
            Ok(if pass { 0 } else { 1 })
        }
        VerifyCheck::Complementarity { dist, u, v, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let u = parse_state_list(&u)?;
            let v = parse_state_list(&v)?;
            let pass = npflow::constraint::verify_complementarity(&nu, &u, &v)?;
            let file = render::SimpleCheckFile { check: "complementarity", pass };
            emit(&out, &render::to_pretty_json(&file))?;
            Ok(if pass { 0 } else { 1 })
        }
        VerifyCheck::Bistochastic { dist, out } => {
            let nu = MapDistribution::read_file(&dist)?;
            let pass = npflow::constraint::onepoint_bistochastic_check(&nu)?;
            let file = render::SimpleCheckFile { check: "bistochastic", pass };
            emit(&out, &render::to_pretty_json(&file))?;
            Ok(if pass { 0 } else { 1 })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dof(
    m: usize,
    k: Option<usize>,
    mode: &str,
    dist: Option<&Path>,
    nullspace: bool,
    force: bool,
    system_out: Option<&Path>,
    out: &Option<PathBuf>,
) -> npflow::Result<u8> {
    let mode = ConstraintMode::parse(mode)?;
    let table = DofTable::new(m)?;
    let mut text = format!("# dof m={m} mode={}\n", mode.as_str());
    for (n, row) in table.rows().iter().enumerate() {
        text.push_str(&format!("R[{n}] = {}\n", row.iter().join(" ")));
    }

    if let Some(dist_path) = dist {
        let k = k.ok_or_else(|| {
            Error::Input("--k is required when a distribution file is given".into())
        })?;
        let nu = MapDistribution::read_file(dist_path)?;
        if nu.m() != m {
            return Err(Error::Input(format!(
                "distribution is over m={}, requested m={m}",
                nu.m()
            )));
        }
        let chars = characteristics_from_distribution(&nu);
        let sys = if force {
            ConstraintSystem::build_unguarded(m, k, mode, &chars)?
        } else {
            ConstraintSystem::build(m, k, mode, &chars)?
        };
        let rank = sys.exact_rank();
        text.push_str(&format!(
            "k={k} unknowns={} rows={}\nrank = {rank}\nnullspace_dim = {}\n",
            sys.unknown_count(),
            sys.rows().len(),
            sys.unknown_count() - rank
        ));
        if nullspace {
            use num_traits::Zero;
            let basis = sys.nullspace_basis();
            text.push_str(&format!("# nullspace dim={}\n", basis.len()));
            for vector in &basis {
                let line = vector
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| format!("{}:{}", sys.unknown_map_index(i), format_ratio(x)))
                    .join(" ");
                text.push_str(&line);
                text.push('\n');
            }
        }
        if let Some(path) = system_out {
            std::fs::write(path, sys.to_text())
                .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
        }
    } else if let Some(path) = system_out {
        let _ = path;
        return Err(Error::Input(
            "--system-out needs a distribution file for the right-hand sides".into(),
        ));
    }

    emit(out, &text)?;
    Ok(0)
}

fn parse_tuple(m: usize, s: &str) -> npflow::Result<PointTuple> {
    let entries = parse_state_list(s)?;
    PointTuple::new(FiniteSpace::new(m)?, entries)
}

fn parse_state_list(s: &str) -> npflow::Result<Vec<usize>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Input(format!("invalid state list entry {part:?}")))
        })
        .collect()
}

fn emit(out: &Option<PathBuf>, content: &str) -> npflow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
