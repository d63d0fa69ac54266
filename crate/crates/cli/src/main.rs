//! `cdpp`: counting and sampling for constrained DPPs, regular-matroid bases
//! and mixed characteristic polynomials. Every command prints one JSON
//! document; failures print `{"error": code, "message": …}` and exit 1.

mod input;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cdpp_core::counting::{
    BudgetConstraint, CountConfig, Family, LinearConstraint, LinearFamily, Allowed, Mass, MassValue,
};
use cdpp_core::dpp::{dpp_count, dpp_sample, validate_psd, ConstrainedDpp};
use cdpp_core::field::format_rational;
use cdpp_core::interp::DEFAULT_GRID_BUDGET;
use cdpp_core::matroid::{basis_sampler, count_bases_budgeted, count_pm_via_reduction, graphic_representation, pm_to_st_instance};
use cdpp_core::mixed::{
    mixed_char_bruteforce, mixed_char_top_coeffs, mixed_disc_via_ecount, mixed_discriminant_bruteforce,
};
use cdpp_core::{Backend, MatrixTuple};
use input::KernelInput;
use serde_json::{json, Map, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Parse(String),
    Domain(cdpp_core::Error),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage_error",
            CliError::Io(_) => "io_error",
            CliError::Parse(_) => "parse_error",
            CliError::Domain(e) => e.code(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Parse(m) => m.clone(),
            CliError::Domain(e) => e.to_string(),
        }
    }
}

impl From<cdpp_core::Error> for CliError {
    fn from(e: cdpp_core::Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "cdpp", version, about = "Constrained DPP and regular-matroid counting and sampling")]
struct Cli {
    /// Arithmetic backend; defaults to $CDPP_BACKEND, then `float`.
    #[arg(long, global = true, value_parser = ["float", "exact"])]
    backend: Option<String>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest interpolation grid allowed.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_BUDGET)]
    grid_budget: u128,
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Total mass of the family under the DPP.
    Count {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
    },
    /// Exact draws from the DPP restricted to the family.
    Sample {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spanning trees of a graph (bases of its graphic matroid).
    #[command(subcommand)]
    Matroid(MatroidCommand),
    /// Mixed discriminants and mixed characteristic polynomials.
    #[command(subcommand)]
    Mixed(MixedCommand),
    /// Checks that a kernel is symmetric positive semidefinite.
    Validate {
        #[arg(long)]
        kernel: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum MatroidCommand {
    /// Number of spanning trees with cost at most the budget.
    Count {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Uniform spanning trees with cost at most the budget.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Perfect matchings through the spanning-tree reduction.
    Pm {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum MixedCommand {
    /// Coefficients of the mixed characteristic polynomial, leading first.
    Coeffs {
        #[arg(long)]
        matrices: PathBuf,
        /// Number of coefficients after the leading one; defaults to d.
        #[arg(long)]
        k_max: Option<usize>,
        /// Interpolate the full polynomial instead of counting.
        #[arg(long)]
        bruteforce: bool,
    },
    /// Normalized mixed discriminant of d matrices of size d×d.
    Disc {
        #[arg(long)]
        matrices: PathBuf,
        /// Use polarization instead of the counting route.
        #[arg(long)]
        bruteforce: bool,
    },
}

#[derive(Args, Debug, Default)]
struct ConstraintArgs {
    /// Budget costs, comma-separated.
    #[arg(long, requires = "budget")]
    budget_cost: Option<String>,
    #[arg(long, requires = "budget_cost", allow_hyphen_values = true)]
    budget: Option<i64>,
    /// Equality costs, comma-separated.
    #[arg(long, requires = "target")]
    equality_cost: Option<String>,
    #[arg(long, requires = "equality_cost", allow_hyphen_values = true)]
    target: Option<i64>,
    /// Blocks of 1-indexed elements, e.g. "1,2|3,4".
    #[arg(long, requires = "quotas")]
    partition: Option<String>,
    #[arg(long, requires = "partition")]
    quotas: Option<String>,
    /// JSON file of general linear constraints.
    #[arg(long)]
    linear: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list, one `u v [cost]` line per edge.
    #[arg(long)]
    graph: PathBuf,
    /// Edge costs, comma-separated; overrides costs in the graph file.
    #[arg(long, allow_hyphen_values = true)]
    cost: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    budget: Option<i64>,
}

impl ConstraintArgs {
    fn family(&self, m: usize) -> CliResult<Family> {
        let mut constraints = Vec::new();
        let mut partition = None;
        if let (Some(c), Some(b)) = (&self.budget_cost, self.budget) {
            constraints.push(LinearConstraint::new(input::int_list(c)?, Allowed::at_most(b)));
        }
        if let (Some(c), Some(t)) = (&self.equality_cost, self.target) {
            constraints.push(LinearConstraint::new(input::int_list(c)?, Allowed::exactly(t)));
        }
        if let (Some(p), Some(q)) = (&self.partition, &self.quotas) {
            partition = Some(input::partition(p, q, m)?);
        }
        if let Some(path) = &self.linear {
            constraints.extend(input::linear(path)?);
        }
        for c in &constraints {
            if c.costs.len() != m {
                return Err(CliError::Domain(cdpp_core::Error::DimensionMismatch(format!(
                    "cost vector of length {} for m = {m}",
                    c.costs.len()
                ))));
            }
        }
        Ok(match (partition, constraints.len()) {
            (None, 0) => Family::Unconstrained(m),
            (Some(p), 0) => Family::Partition(p),
            (None, 1) if self.budget.is_some() => Family::Budget(BudgetConstraint {
                costs: constraints.remove(0).costs,
                budget: self.budget.unwrap(),
            }),
            (p, _) => {
                if let Some(p) = p {
                    constraints.extend(p.to_linear().constraints().iter().cloned());
                }
                Family::Linear(LinearFamily::new(m, constraints)?)
            }
        })
    }
}

impl GraphArgs {
    /// Graph, costs (zero when absent) and budget (unbounded when absent).
    fn load(&self) -> CliResult<(cdpp_core::Graph, Vec<i64>, i64)> {
        let g = input::graph(&self.graph)?;
        let costs = match (&self.cost, g.costs()) {
            (Some(text), _) => input::int_list(text)?,
            (None, Some(c)) => c.to_vec(),
            (None, None) => vec![0; g.m()],
        };
        if costs.len() != g.m() {
            return Err(CliError::Domain(cdpp_core::Error::DimensionMismatch(format!(
                "{} costs for {} edges",
                costs.len(),
                g.m()
            ))));
        }
        let budget = self.budget.unwrap_or_else(|| costs.iter().filter(|c| **c > 0).sum());
        Ok((g, costs, budget))
    }
}

fn backend(flag: &Option<String>) -> CliResult<Backend> {
    let text = match flag {
        Some(b) => b.clone(),
        None => match std::env::var("CDPP_BACKEND") {
            Ok(v) if !v.trim().is_empty() => v,
            _ => return Ok(Backend::Float),
        },
    };
    Ok(text.parse()?)
}

/// Float counts keep twelve significant digits so that round-off in the last
/// places does not leak into the output.
fn format_float(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let size = rounded.abs();
    if rounded == 0.0 {
        "0".into()
    } else if !(1e-4..1e16).contains(&size) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn mass_string(mass: &Mass) -> String {
    match &mass.value {
        MassValue::Exact(q) => format_rational(q),
        MassValue::Float(v) => format_float(*v),
    }
}

fn one_indexed(subset: &[usize]) -> Value {
    Value::from(subset.iter().map(|&i| i as u64 + 1).collect::<Vec<_>>())
}

fn kernel_dpp(kernel: KernelInput, family: Family) -> CliResult<ConstrainedDpp> {
    Ok(match kernel {
        KernelInput::Kernel(k) => ConstrainedDpp::from_kernel(k, family)?,
        KernelInput::Factor(v) => ConstrainedDpp::from_factor(v, family)?,
    })
}

fn tuple(path: &PathBuf) -> CliResult<MatrixTuple> {
    let (d, mats) = input::matrices(path)?;
    Ok(MatrixTuple::new(d, mats)?)
}

fn run(cli: &Cli) -> CliResult<Map<String, Value>> {
    let backend = backend(&cli.backend)?;
    let cfg = CountConfig {
        backend,
        grid_budget: cli.grid_budget,
    };
    let mut out = Map::new();
    match &cli.command {
        Command::Count { kernel, constraints } => {
            let k = input::kernel(kernel)?;
            let family = constraints.family(k.m())?;
            let mass = dpp_count(&kernel_dpp(k, family)?, &cfg)?;
            out.insert("count".into(), mass_string(&mass).into());
            if let Some(bound) = mass.error_bound {
                out.insert("error_bound".into(), format_float(bound).into());
            }
        }
        Command::Sample {
            kernel,
            constraints,
            n,
            seed,
        } => {
            let k = input::kernel(kernel)?;
            let family = constraints.family(k.m())?;
            let draws = dpp_sample(&kernel_dpp(k, family)?, *seed, *n, &cfg)?;
            let samples: Vec<Value> = draws.iter().map(|d| one_indexed(&d.subset)).collect();
            out.insert("samples".into(), samples.into());
            out.insert("seed".into(), (*seed).into());
        }
        Command::Matroid(MatroidCommand::Count { graph }) => {
            let (g, costs, budget) = graph.load()?;
            let a = graphic_representation(&g)?;
            let count = count_bases_budgeted(&a, &costs, budget, &cfg)?;
            out.insert("count".into(), count.to_string().into());
            out.insert("budget".into(), budget.into());
        }
        Command::Matroid(MatroidCommand::Sample { graph, n, seed }) => {
            let (g, costs, budget) = graph.load()?;
            let sampler = basis_sampler(&graphic_representation(&g)?, &costs, budget, &cfg)?;
            let draws = sampler.sample_many(*seed, *n)?;
            let samples: Vec<Value> = draws.iter().map(|d| one_indexed(&d.subset)).collect();
            out.insert("samples".into(), samples.into());
            out.insert("seed".into(), (*seed).into());
        }
        Command::Matroid(MatroidCommand::Pm { graph }) => {
            let g = input::graph(graph)?;
            let count = count_pm_via_reduction(&g, &cfg)?;
            let inst = pm_to_st_instance(&g)?;
            out.insert("count".into(), count.to_string().into());
            out.insert("alpha_inv".into(), format_rational(&inst.alpha_inv).into());
            out.insert("target".into(), inst.target.to_string().into());
        }
        Command::Mixed(MixedCommand::Coeffs {
            matrices,
            k_max,
            bruteforce,
        }) => {
            let t = tuple(matrices)?;
            let coeffs = if *bruteforce {
                mixed_char_bruteforce(&t)?
            } else {
                mixed_char_top_coeffs(&t, k_max.unwrap_or(t.d()), &cfg)?
            };
            let list: Vec<Value> = coeffs.coeffs.iter().map(|&c| format_float(c).into()).collect();
            out.insert("d".into(), t.d().into());
            out.insert("coefficients".into(), list.into());
        }
        Command::Mixed(MixedCommand::Disc { matrices, bruteforce }) => {
            let t = tuple(matrices)?;
            let value = if *bruteforce {
                mixed_discriminant_bruteforce(&t)?
            } else {
                mixed_disc_via_ecount(&t, &cfg)?
            };
            out.insert("mixed_discriminant".into(), format_float(value).into());
        }
        Command::Validate { kernel } => {
            let k = match input::kernel(kernel)? {
                KernelInput::Kernel(k) => k.values().clone(),
                KernelInput::Factor(v) => v.values() * v.values().transpose(),
            };
            let report = validate_psd(&k)?;
            out.insert("valid".into(), true.into());
            out.insert("m".into(), k.nrows().into());
            out.insert("min_eigenvalue".into(), report.min_eigenvalue.into());
            out.insert("symmetry_defect".into(), report.symmetry_defect.into());
            out.insert("tolerance".into(), report.tolerance.into());
        }
    }
    out.insert("backend".into(), backend.as_str().into());
    Ok(out)
}

fn deterministic() -> bool {
    std::env::var("CDPP_DETERMINISTIC").is_ok_and(|v| v == "1")
}

fn emit(doc: &Value, output: Option<&PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string(doc).expect("JSON values serialize");
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn fail(err: &CliError) -> ExitCode {
    println!("{}", json!({"error": err.code(), "message": err.message()}));
    ExitCode::from(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(7.0), "7");
        assert_eq!(format_float(6.999999999999999), "7");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(5.684341886080802e-14), "5.68434188608e-14");
        assert_eq!(format_float(9.110923e40), "9.110923e40");
        assert_eq!(format_float(-0.0), "0");
    }

    #[test]
    fn family_selection() {
        let args = ConstraintArgs {
            budget_cost: Some("1,1".into()),
            budget: Some(1),
            ..ConstraintArgs::default()
        };
        assert!(matches!(args.family(2).unwrap(), Family::Budget(_)));
        let args = ConstraintArgs {
            partition: Some("1|2".into()),
            quotas: Some("1,0".into()),
            ..ConstraintArgs::default()
        };
        assert!(matches!(args.family(2).unwrap(), Family::Partition(_)));
        let args = ConstraintArgs {
            budget_cost: Some("1,1".into()),
            budget: Some(1),
            partition: Some("1|2".into()),
            quotas: Some("1,0".into()),
            ..ConstraintArgs::default()
        };
        match args.family(2).unwrap() {
            Family::Linear(f) => assert_eq!(f.constraints().len(), 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(ConstraintArgs::default().family(3).unwrap(), Family::Unconstrained(3)));
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim().to_string())),
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global() {
            return fail(&CliError::Usage(e.to_string()));
        }
    }
    let start = Instant::now();
    let mut doc = match run(&cli) {
        Ok(doc) => doc,
        Err(e) => return fail(&e),
    };
    let ms = if deterministic() { 0 } else { start.elapsed().as_millis() as u64 };
    doc.insert("wall_time_ms".into(), ms.into());
    match emit(&Value::Object(doc), cli.output.as_ref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
