use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use posegraph_cli::bench::{self, BenchParams, ExperimentCell};
use posegraph_cli::g2o::{fmt_g, read_g2o, write_g2o};
use posegraph_core::fem1d::{
    apply_dirichlet, assemble_chain, slam_equivalence_check, symmetrize_dirichlet, BarChain,
};
use posegraph_core::graph::{assemble_gauss_newton, fix_gauge, EdgeKind};
use posegraph_core::linalg::{dense_cholesky_solve, DenseMatrix};
use posegraph_core::schwarz::loop_partition_with_overlap;
use posegraph_core::solver::{solve, GnConfig, PreconditionerKind};
use posegraph_core::synth::{drift_norm, generate, ClosureTarget, SynthConfig};
use posegraph_core::PoseGraph;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "posegraph",
    about = "2D pose-graph optimization with Schwarz-preconditioned conjugate gradients",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecondArg {
    None,
    Schwarz,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosureTargetArg {
    Origin,
    Previous,
}

impl From<ClosureTargetArg> for ClosureTarget {
    fn from(v: ClosureTargetArg) -> Self {
        match v {
            ClosureTargetArg::Origin => ClosureTarget::Origin,
            ClosureTargetArg::Previous => ClosureTarget::PreviousLap,
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Translational odometry noise standard deviation
    #[arg(long, default_value_t = 0.01)]
    sigma_trans: f64,
    /// Rotational odometry noise standard deviation, radians
    #[arg(long, default_value_t = 0.005)]
    sigma_rot: f64,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Which pose each lap's closure edge connects back to
    #[arg(long, value_enum, default_value = "origin")]
    closure_target: ClosureTargetArg,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic square-trajectory benchmark as a g2o file
    Generate {
        /// Number of laps around the unit square
        #[arg(long, default_value_t = 4)]
        loops: usize,
        /// Odometry points per square side
        #[arg(long, default_value_t = 4)]
        points_per_side: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Output g2o path
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV with the ground-truth path (index,x,y,theta)
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
    /// Read a g2o file, optimize it, and write the optimized graph
    Solve {
        /// Input g2o file
        input: PathBuf,
        #[arg(long, value_enum, default_value = "schwarz")]
        precond: PrecondArg,
        /// Subdomain overlap width in poses (schwarz only)
        #[arg(long, default_value_t = 1)]
        overlap: usize,
        /// Relative CG tolerance
        #[arg(long, default_value_t = 1e-8)]
        cg_tol: f64,
        /// Absolute Gauss-Newton gradient tolerance
        #[arg(long, default_value_t = 1e-6)]
        gn_tol: f64,
        /// Loop count for partitioning; inferred from closure edges if absent
        #[arg(long)]
        loops: Option<usize>,
        /// Points per side for partitioning; inferred if absent
        #[arg(long)]
        points_per_side: Option<usize>,
        /// Output g2o path for the optimized graph
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the gauged system's block sparsity as "i j" pairs
        #[arg(long)]
        sparsity_out: Option<PathBuf>,
        /// CSV with initial and optimized paths per pose index
        #[arg(long)]
        paths_out: Option<PathBuf>,
    },
    /// Run a grid of benchmark experiments and write a CSV table
    Bench {
        /// Grid preset: 1 = loops x points comparison, 2 = weak scaling
        #[arg(long, default_value_t = 1)]
        table: u8,
        /// Override the loop counts, comma separated
        #[arg(long, value_delimiter = ',')]
        loops: Option<Vec<usize>>,
        /// Override the points per side, comma separated
        #[arg(long, value_delimiter = ',')]
        points_per_side: Option<Vec<usize>>,
        /// Preconditioners to run, comma separated
        #[arg(long, value_enum, value_delimiter = ',')]
        precond: Option<Vec<PrecondArg>>,
        /// Subdomain overlap width in poses
        #[arg(long, default_value_t = 1)]
        overlap: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 1e-8)]
        cg_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        gn_tol: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the 1D bar-chain system and its solution
    Fem1d {
        #[arg(long, default_value_t = 10)]
        n_bars: usize,
        #[arg(long, default_value_t = 0.9)]
        rest_length: f64,
        #[arg(long, default_value_t = 0.0)]
        left: f64,
        #[arg(long, default_value_t = 10.0)]
        right: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            loops,
            points_per_side,
            noise,
            out,
            truth_out,
        } => {
            let mut cfg = SynthConfig::new(loops, points_per_side, noise.seed);
            cfg.sigma_trans = noise.sigma_trans;
            cfg.sigma_rot = noise.sigma_rot;
            cfg.closure_target = noise.closure_target.into();
            let synth = generate(&cfg);
            write_g2o(&synth.graph, &out)
                .map_err(|e| anyhow!("{e}"))
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = truth_out {
                let mut text = String::from("index,x,y,theta\n");
                for (i, p) in synth.ground_truth.iter().enumerate() {
                    text.push_str(&format!(
                        "{i},{},{},{}\n",
                        fmt_g(p.x, 9),
                        fmt_g(p.y, 9),
                        fmt_g(p.theta, 9)
                    ));
                }
                fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "generated {} poses, {} edges, odometry drift {:.6}",
                synth.graph.poses.len(),
                synth.graph.edges.len(),
                drift_norm(&synth)
            );
            Ok(())
        }
        Command::Solve {
            input,
            precond,
            overlap,
            cg_tol,
            gn_tol,
            loops,
            points_per_side,
            out,
            sparsity_out,
            paths_out,
        } => {
            let graph = read_g2o(&input)
                .map_err(|e| anyhow!("{e}"))
                .with_context(|| format!("reading {}", input.display()))?;
            let (cfg, partition) = match precond {
                PrecondArg::None => (
                    GnConfig {
                        gn_abs_tol: gn_tol,
                        cg_rel_tol: cg_tol,
                        ..GnConfig::default()
                    },
                    None,
                ),
                PrecondArg::Schwarz => {
                    let (loops, pps) = infer_layout(&graph, loops, points_per_side)?;
                    let partition = loop_partition_with_overlap(&graph, loops, pps, overlap)
                        .map_err(|e| anyhow!("{e}"))?;
                    (
                        GnConfig {
                            gn_abs_tol: gn_tol,
                            cg_rel_tol: cg_tol,
                            preconditioner: PreconditionerKind::AdditiveSchwarz { overlap },
                            ..GnConfig::default()
                        },
                        Some(partition),
                    )
                }
            };
            let (solved, report) =
                solve(&graph, &cfg, partition.as_ref()).map_err(|e| anyhow!("{e}"))?;
            let cg_max = report
                .cg_reports
                .iter()
                .map(|r| r.iterations)
                .max()
                .unwrap_or(0);
            let cg_total: usize = report.cg_reports.iter().map(|r| r.iterations).sum();
            let lambdas = report
                .cg_reports
                .iter()
                .rev()
                .find_map(|r| r.lambda_min.zip(r.lambda_max));
            println!(
                "converged={} gn_iters={} cg_iters_max={cg_max} cg_iters_total={cg_total} \
                 final_objective={:.9e} final_gradient_norm={:.3e}",
                report.converged,
                report.gn_iterations,
                report.final_objective,
                report.final_gradient_norm
            );
            if let Some((lo, hi)) = lambdas {
                println!("lambda_min={lo:.6} lambda_max={hi:.6} ratio={:.6}", hi / lo);
            }
            if let Some(path) = out {
                write_g2o(&solved, &path).map_err(|e| anyhow!("{e}"))?;
            }
            if let Some(path) = sparsity_out {
                let (h, b) = assemble_gauss_newton(&solved);
                let (h_red, _) = fix_gauge(&h, &b, solved.fixed).map_err(|e| anyhow!("{e}"))?;
                let mut text = String::new();
                for (i, j, _) in h_red.entries() {
                    text.push_str(&format!("{i} {j}\n"));
                }
                fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = paths_out {
                let mut text =
                    String::from("index,x_odom,y_odom,theta_odom,x_opt,y_opt,theta_opt\n");
                for (i, (p0, p1)) in graph.poses.iter().zip(&solved.poses).enumerate() {
                    text.push_str(&format!(
                        "{i},{},{},{},{},{},{}\n",
                        fmt_g(p0.x, 9),
                        fmt_g(p0.y, 9),
                        fmt_g(p0.theta, 9),
                        fmt_g(p1.x, 9),
                        fmt_g(p1.y, 9),
                        fmt_g(p1.theta, 9)
                    ));
                }
                fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !report.converged {
                bail!("Gauss-Newton did not converge within the iteration cap");
            }
            Ok(())
        }
        Command::Bench {
            table,
            loops,
            points_per_side,
            precond,
            overlap,
            noise,
            cg_tol,
            gn_tol,
            out,
        } => {
            let mut cells = match table {
                1 => bench::table1_cells(overlap),
                2 => bench::table2_cells(overlap),
                other => bail!("unknown table preset {other}; use 1 or 2"),
            };
            if loops.is_some() || points_per_side.is_some() || precond.is_some() {
                let loop_list = loops.unwrap_or_else(|| vec![4, 8, 16, 32]);
                let pps_list = points_per_side.unwrap_or_else(|| vec![4, 8, 16, 32, 64, 128]);
                let precond_list =
                    precond.unwrap_or_else(|| vec![PrecondArg::None, PrecondArg::Schwarz]);
                cells = Vec::new();
                for &l in &loop_list {
                    for &p in &pps_list {
                        for pc in &precond_list {
                            cells.push(ExperimentCell {
                                loops: l,
                                points_per_side: p,
                                preconditioner: match pc {
                                    PrecondArg::None => PreconditionerKind::None,
                                    PrecondArg::Schwarz => {
                                        PreconditionerKind::AdditiveSchwarz { overlap }
                                    }
                                },
                            });
                        }
                    }
                }
            }
            let params = BenchParams {
                seed: noise.seed,
                sigma_trans: noise.sigma_trans,
                sigma_rot: noise.sigma_rot,
                closure_target: noise.closure_target.into(),
                cg_rel_tol: cg_tol,
                gn_abs_tol: gn_tol,
            };
            let records = bench::run_table(&cells, &params, &out, |r| {
                println!("{}", r.to_csv_row());
            })?;
            let failures = records.iter().filter(|r| r.status != "ok").count();
            eprintln!(
                "wrote {} rows to {} ({failures} failures)",
                records.len(),
                out.display()
            );
            Ok(())
        }
        Command::Fem1d {
            n_bars,
            rest_length,
            left,
            right,
        } => {
            let chain = BarChain {
                n_bars,
                rest_length,
                left_value: left,
                right_value: right,
            };
            let k = assemble_chain(&chain);
            let (kt, bt) = apply_dirichlet(&k, &chain);
            let (kh, bh) = symmetrize_dirichlet(&kt, &bt);
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            print_matrix(&mut w, "stiffness matrix", &k)?;
            print_matrix(&mut w, "constrained matrix (non-symmetric)", &kt)?;
            print_vector(&mut w, "constrained right-hand side", &bt)?;
            print_matrix(&mut w, "symmetrized matrix", &kh)?;
            print_vector(&mut w, "symmetrized right-hand side", &bh)?;
            let x = dense_cholesky_solve(&kh, &bh).map_err(|e| anyhow!("{e}"))?;
            print_vector(&mut w, "solution", &x)?;
            slam_equivalence_check(&chain).map_err(|e| anyhow!("{e}"))?;
            writeln!(w, "least-squares equivalence check passed")?;
            Ok(())
        }
    }
}

/// Loop/points layout for partitioning, inferred from the closure edges
/// unless given explicitly.
fn infer_layout(
    graph: &PoseGraph,
    loops: Option<usize>,
    points_per_side: Option<usize>,
) -> Result<(usize, usize)> {
    let loops = match loops {
        Some(l) => l,
        None => {
            let closure_count = graph
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::LoopClosure)
                .count();
            if closure_count == 0 {
                bail!("cannot infer the subdomain layout: no loop closures; pass --loops");
            }
            closure_count
        }
    };
    let pps = match points_per_side {
        Some(p) => p,
        None => {
            let steps = graph.poses.len() - 1;
            if !steps.is_multiple_of(4 * loops) {
                bail!(
                    "cannot infer points per side from {} poses and {loops} loops; \
                     pass --points-per-side",
                    graph.poses.len()
                );
            }
            steps / (4 * loops)
        }
    };
    Ok((loops, pps))
}

fn print_matrix(w: &mut impl Write, title: &str, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "{title} ({0} x {0}):", m.n())?;
    for i in 0..m.n() {
        let row: Vec<String> = (0..m.n())
            .map(|j| format!("{:>4}", fmt_g(m.get(i, j), 9)))
            .collect();
        writeln!(w, "  {}", row.join(" "))?;
    }
    Ok(())
}

fn print_vector(w: &mut impl Write, title: &str, v: &[f64]) -> Result<()> {
    let row: Vec<String> = v.iter().map(|&x| fmt_g(x, 9)).collect();
    writeln!(w, "{title}: [{}]", row.join(", "))?;
    Ok(())
}
