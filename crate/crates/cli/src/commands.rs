use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;

use robust_dnn::dgp::{self, DgpSpec, InnovationLaw, RegressionFn};
use robust_dnn::harness::{self, ExperimentConfig};
use robust_dnn::losses::LossSpec;
use robust_dnn::mlp::{NetworkArchitecture, NetworkParams};
use robust_dnn::par::{self, Execution};
use robust_dnn::theory::{self, ConstantsVariant, PsiKind, Theorem, TheoryInputs};
use robust_dnn::trainer::{self, TrainConfig};
use robust_dnn::CSV_VERSION_LINE;

use crate::args::*;

pub fn dispatch(cli: Cli) -> Result<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train(a, verbose),
        Command::Eval(a) => eval(a),
        Command::Plan(a) => plan(a),
        Command::Bound(a) => bound(a),
        Command::Experiment(ExperimentCommand::Run(a)) => experiment_run(a, verbose),
        Command::CheckAssumptions(a) => check_assumptions(a),
    }
}

/// Opens `path` for writing, or stdout when absent.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Reads a TOML file, or JSON when the extension is `.json`.
fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

fn read_trajectory(path: &Path) -> Result<Vec<f64>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(dgp::read_trajectory_csv(BufReader::new(f))?)
}

fn dgp_spec(dgp: &RegressionFn, error: InnovationLaw, seed: u64, burn_in: usize) -> Result<DgpSpec> {
    let mut spec = DgpSpec::named(dgp.clone(), error, seed)?;
    spec.burn_in = burn_in;
    Ok(spec)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let spec = dgp_spec(&a.dgp, a.error, a.seed, a.burn_in)?;
    let traj = dgp::simulate(&spec, a.n)?;
    let mut w = output(a.out.as_deref())?;
    dgp::write_trajectory_csv(&traj.values, &mut w)?;
    w.flush()?;
    Ok(())
}

fn train(a: TrainArgs, verbose: u8) -> Result<()> {
    let order = match (&a.dgp, a.order) {
        (Some(d), _) => DgpSpec::named(d.clone(), InnovationLaw::Zero, 0)?.order,
        (None, Some(p)) => p,
        (None, None) => bail!("either --dgp or --order is required to embed the trajectory"),
    };
    let loss = a.loss;
    let mut cfg: TrainConfig = match &a.config {
        Some(p) => read_config(p)?,
        None => TrainConfig::default(),
    };
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    let pairs = dgp::embed(&read_trajectory(&a.data)?, order)?;
    let arch = NetworkArchitecture::with_hidden(order, &a.hidden)?;
    let report = trainer::fit(&pairs, &arch, &loss, &cfg)?;
    if verbose > 0 {
        eprintln!("trained {} epochs, best empirical risk {}", report.epochs_run, report.best_risk);
    }
    let f = File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    serde_json::to_writer(BufWriter::new(f), &report.params)?;
    if let Some(h) = &a.history {
        let mut w = output(Some(h))?;
        report.write_history_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let f = File::open(&a.model).with_context(|| format!("cannot open {}", a.model.display()))?;
    let params: NetworkParams =
        serde_json::from_reader(BufReader::new(f)).with_context(|| format!("invalid model {}", a.model.display()))?;
    let test = dgp::embed(&read_trajectory(&a.data)?, params.arch().input_dim())?;
    let mape = harness::mape(&params, &test)?;
    let rmspe = harness::rmspe(&params, &test)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{CSV_VERSION_LINE}")?;
    match (&a.dgp, &a.error) {
        (Some(d), Some(e)) => {
            let spec = dgp_spec(d, *e, a.seed, a.burn_in)?;
            if spec.order != params.arch().input_dim() {
                bail!("model takes {} lags but {} has order {}", params.arch().input_dim(), d.tag(), spec.order);
            }
            let eval_pairs = dgp::simulate(&spec, a.m)?.embed()?;
            let losses = [LossSpec::L1, LossSpec::huber(a.huber_delta)?, LossSpec::L2];
            let ex = harness::excess_risks_on(&params, &spec, &eval_pairs, &losses)?;
            writeln!(out, "mape,rmspe,excess_l1,excess_huber,excess_l2")?;
            writeln!(out, "{mape},{rmspe},{},{},{}", ex[0], ex[1], ex[2])?;
        }
        _ => {
            writeln!(out, "mape,rmspe")?;
            writeln!(out, "{mape},{rmspe}")?;
        }
    }
    Ok(())
}

fn theory_inputs(a: &TheoryArgs) -> Result<TheoryInputs> {
    let mut t: TheoryInputs = match &a.inputs {
        Some(p) => read_config(p)?,
        None => TheoryInputs::default(),
    };
    macro_rules! set {
        ($($field:ident <- $flag:ident),* $(,)?) => {
            $(if let Some(v) = a.$flag { t.$field = v; })*
        };
    }
    set!(s <- s, d <- d, r <- r, c <- c, gamma <- gamma, alpha_bar <- alpha_bar, l1 <- l1, l2 <- l2,
         mu <- mu, m <- moment_bound, nu <- nu, l0 <- l0, n0 <- n0, s0 <- s0, b0 <- b0, c_sigma <- c_sigma);
    if let Some(l) = &a.loss {
        t.lipschitz = l.lipschitz_constant();
    }
    if let Some(k) = a.lipschitz {
        t.lipschitz = Some(k);
    }
    if let Some(k) = a.holder_bound {
        t.holder_bound = Some(k);
    }
    if let Some(f) = a.output_bound {
        t.output_bound = Some(f);
    }
    if let Some(p) = a.psi {
        t.psi = match p {
            Psi::Theta => PsiKind::Theta,
            Psi::Eta => PsiKind::Eta,
            Psi::Kappa => PsiKind::Kappa,
            Psi::Lambda => PsiKind::Lambda,
        };
    }
    if let Some(c) = a.constants {
        t.constants = match c {
            Constants::Proof => ConstantsVariant::Proof,
            Constants::Statement => ConstantsVariant::Statement,
        };
    }
    Ok(t)
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn plan(a: PlanArgs) -> Result<()> {
    let inputs = theory_inputs(&a.theory)?;
    let theorem = Theorem::from_index(a.theorem)?;
    let sched = theory::schedule(&inputs, a.n, theorem)?;
    let n_alpha = theory::n_alpha(a.n, inputs.c, inputs.gamma).ok();
    let mut out = io::stdout().lock();
    writeln!(out, "{CSV_VERSION_LINE}")?;
    writeln!(out, "theorem,n,n_alpha,m,L,N,S,B,F,L_int,N_int,S_int")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        a.theorem,
        a.n,
        opt(n_alpha),
        sched.m,
        sched.depth,
        sched.width,
        sched.sparsity,
        sched.sup_norm,
        opt(sched.output_bound),
        sched.depth_cap,
        sched.width_cap,
        sched.sparsity_cap
    )?;
    Ok(())
}

fn bound(a: BoundArgs) -> Result<()> {
    let inputs = theory_inputs(&a.theory)?;
    let theorem = Theorem::from_index(a.theorem)?;
    let grid = if a.n.is_empty() {
        theory::log_grid(a.n_min, a.n_max, a.per_decade)
    } else {
        a.n.clone()
    };
    if grid.is_empty() {
        bail!("empty sample size grid");
    }
    let rows: Vec<_> = grid.iter().map(|&n| theory::bound_row(&inputs, n, theorem)).collect();
    let mut w = output(a.out.as_deref())?;
    theory::write_bound_csv(&rows, &mut w)?;
    w.flush()?;
    for b in [theory::bound_thm1(&inputs, grid[0]), theory::bound_thm2(&inputs, grid[0])] {
        if let Ok(b) = b {
            for warning in b.warnings {
                eprintln!("warning: {warning}");
            }
        }
    }
    Ok(())
}

fn check_assumptions(a: CheckArgs) -> Result<()> {
    let inputs = theory_inputs(&a.theory)?;
    print!("{}", theory::check_assumptions(&inputs));
    Ok(())
}

fn experiment_run(a: RunArgs, verbose: u8) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&a.config).with_context(|| format!("invalid config {}", a.config.display()))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if a.record_timing {
        cfg.record_timing = true;
    }
    cfg.validate()?;
    if verbose > 0 {
        eprintln!(
            "running {} fits ({} losses x {} sample sizes x {} replications)",
            cfg.losses.len() * cfg.sample_sizes.len() * cfg.replications,
            cfg.losses.len(),
            cfg.sample_sizes.len(),
            cfg.replications
        );
    }
    let records = par::with_threads(a.threads, || harness::run_experiment_with(&cfg, Execution::Parallel))??;
    harness::write_outputs(&records, &a.out)?;
    let diverged = records.iter().filter(|r| r.diverged).count();
    if verbose > 0 || diverged > 0 {
        eprintln!("{} records written to {} ({diverged} diverged)", records.len(), a.out.display());
    }
    Ok(())
}
