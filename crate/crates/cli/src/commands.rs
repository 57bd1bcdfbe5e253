use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use shuffle_sgd::io::{self, fmt_f64};
use shuffle_sgd::verify::{
    default_k_grid, default_lower_grid, log_spaced, lower_bound_check, par_map,
    reproduce_fig_gap_comparison, reproduce_fig_trajectory, schedule_params, upper_bound_check,
    BoundCheckReport, EtaRow, GapComparisonSpec, SweepSpec, TrajectorySpec, TrajectoryStart,
    UpperParams, REPORT_SCHEMA,
};
use shuffle_sgd::{
    build, herding_at_opt_strategy, recommended_step_size, run, ConstructionBundle,
    ConstructionSpec, FiniteSumProblem, RunConfig, ShuffleStrategy, TheoremId,
};

use crate::args::{
    BuildArgs, FigureCommand, Format, InstanceArgs, ProblemArgs, RunArgs, Start, StrategyArgs,
    SweepArgs, VerifyArgs,
};

/// Whether every bound check that ran held.
pub enum Outcome {
    Pass,
    CheckFailed(Vec<String>),
}

fn theorem(id: &str) -> Result<TheoremId> {
    Ok(id.parse::<TheoremId>()?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl InstanceArgs {
    /// Every construction needs n, kappa and K; the check runs before any work.
    fn spec(&self, theorem: TheoremId) -> Result<ConstructionSpec> {
        let n = self
            .n
            .ok_or_else(|| anyhow!("missing --n (number of components)"))?;
        let kappa = self
            .kappa
            .ok_or_else(|| anyhow!("missing --kappa (condition number L/mu)"))?;
        let k = self
            .k
            .ok_or_else(|| anyhow!("missing --K (number of epochs)"))?;
        let mut spec = ConstructionSpec::new(theorem, n, kappa, k, self.g, self.mu);
        if let Some(d) = self.d {
            spec = spec.with_d(d);
        }
        Ok(spec)
    }
}

struct Instance {
    problem: FiniteSumProblem,
    x0: Vec<f64>,
    epochs: usize,
    bundle: Option<ConstructionBundle>,
}

impl ProblemArgs {
    fn load(&self) -> Result<Instance> {
        if let Some(path) = &self.problem {
            let epochs = self
                .instance
                .k
                .ok_or_else(|| anyhow!("missing --K (number of epochs)"))?;
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let problem = io::problem_from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let x0 = self.x0.clone().unwrap_or_else(|| vec![0.0; problem.dim()]);
            problem.check_dim(&x0).context("--x0")?;
            return Ok(Instance {
                problem,
                x0,
                epochs,
                bundle: None,
            });
        }
        let id = match &self.construction {
            Some(c) => theorem(c)?,
            None => bail!("give --construction <id> or --problem <file>"),
        };
        let spec = self.instance.spec(id)?;
        let bundle = build(&spec)?;
        let (problem, x0) = match self.block {
            None => (bundle.problem.clone(), bundle.x0.clone()),
            Some(i) => {
                let b = bundle.per_dimension.get(i).ok_or_else(|| {
                    anyhow!(
                        "--block {i} out of range: {} has {} blocks",
                        spec.theorem,
                        bundle.per_dimension.len()
                    )
                })?;
                (b.problem.clone(), b.x0.clone())
            }
        };
        Ok(Instance {
            problem,
            x0,
            epochs: spec.epochs,
            bundle: Some(bundle),
        })
    }
}

impl StrategyArgs {
    fn resolve(&self, problem: &FiniteSumProblem) -> Result<ShuffleStrategy> {
        let seed = self.seed;
        let strategy = match self.strategy.as_str() {
            "igd" => ShuffleStrategy::Igd,
            "rr" => ShuffleStrategy::RandomReshuffle { seed },
            "ss" => ShuffleStrategy::SingleShuffle { seed },
            "with-replacement" => ShuffleStrategy::WithReplacement { seed },
            "herding-at-opt" => herding_at_opt_strategy(problem, None)?.0,
            other => match other.strip_prefix("fixed:") {
                Some(list) => {
                    let sigma = list
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .with_context(|| format!("--strategy {other}: bad index list"))?;
                    ShuffleStrategy::FixedPermutation { sigma }
                }
                None => bail!(
                    "unknown --strategy `{other}` (igd, rr, ss, with-replacement, herding-at-opt, fixed:i,j,...)"
                ),
            },
        };
        strategy.validate(problem.n())?;
        Ok(strategy)
    }
}

fn resolve_eta(text: &str, inst: &Instance, strategy: &ShuffleStrategy) -> Result<f64> {
    let eta = match text.strip_prefix("auto:") {
        Some(id) => {
            let t = theorem(id)?;
            let p = schedule_params(t, &inst.problem, strategy, inst.epochs, &inst.x0)?;
            recommended_step_size(t, &p)?
        }
        None => text
            .parse::<f64>()
            .with_context(|| format!("--eta `{text}` is neither a number nor auto:<theorem>"))?,
    };
    if !(eta > 0.0) || !eta.is_finite() {
        bail!("--eta must be positive and finite, got {eta}");
    }
    Ok(eta)
}

pub fn build_cmd(args: &BuildArgs) -> Result<Outcome> {
    let t = theorem(&args.theorem)?;
    let spec = args.instance.spec(t)?;
    let bundle = build(&spec)?;
    fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let bundle_path = args.output.join("bundle.json");
    let problem_path = args.output.join("problem.json");
    write_out(Some(&bundle_path), &io::bundle_to_json(&bundle)?)?;
    write_out(Some(&problem_path), &io::problem_to_json(&bundle.problem)?)?;
    println!(
        "analytic_lower_bound {}",
        fmt_f64(bundle.analytic_lower_bound)
    );
    println!("d {} n {}", bundle.problem.dim(), bundle.problem.n());
    println!("wrote {} {}", bundle_path.display(), problem_path.display());
    Ok(Outcome::Pass)
}

pub fn run_cmd(args: &RunArgs) -> Result<Outcome> {
    if args.trace && args.out.format == Format::Csv {
        bail!("--trace needs --format json");
    }
    let inst = args.source.load()?;
    let strategy = args.strategy.resolve(&inst.problem)?;
    let eta = resolve_eta(&args.eta, &inst, &strategy)?;
    let mut cfg = RunConfig::new(eta, inst.epochs, inst.x0.clone());
    if args.trace {
        cfg = cfg.with_trace();
    }
    let record = run(&inst.problem, &strategy, &cfg)?;
    let text = match args.out.format {
        Format::Csv => io::run_record_to_csv(&record),
        Format::Json => io::to_json(&json!({
            "schema": REPORT_SCHEMA,
            "kind": "run",
            "strategy": strategy,
            "eta": eta,
            "K": inst.epochs,
            "record": record,
        }))?,
    };
    write_out(args.out.output.as_deref(), &text)?;
    if args.out.output.is_some() {
        println!(
            "eta {} final_gap {}{}",
            fmt_f64(eta),
            fmt_f64(record.final_gap()),
            if record.diverged.is_some() {
                " diverged"
            } else {
                ""
            }
        );
    }
    Ok(Outcome::Pass)
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<Outcome> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    let inst = args.source.load()?;
    let strategy = args.strategy.resolve(&inst.problem)?;
    let grid = match (args.eta_min, args.eta_max, &inst.bundle) {
        (Some(lo), Some(hi), _) => {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                bail!("need 0 < --eta-min < --eta-max, got {lo} and {hi}");
            }
            log_spaced(lo, hi, args.points)
        }
        (_, _, Some(bundle)) if args.source.block.is_none() => {
            default_lower_grid(bundle, args.points)
        }
        _ => bail!("--eta-min and --eta-max are required without a full construction"),
    };
    SweepSpec::new(grid.clone())?;
    let seeded = |k: u64| match &strategy {
        ShuffleStrategy::RandomReshuffle { seed } => {
            ShuffleStrategy::RandomReshuffle { seed: seed + k }
        }
        ShuffleStrategy::SingleShuffle { seed } => {
            ShuffleStrategy::SingleShuffle { seed: seed + k }
        }
        ShuffleStrategy::WithReplacement { seed } => {
            ShuffleStrategy::WithReplacement { seed: seed + k }
        }
        other => other.clone(),
    };
    let repeats = match strategy {
        ShuffleStrategy::RandomReshuffle { .. }
        | ShuffleStrategy::SingleShuffle { .. }
        | ShuffleStrategy::WithReplacement { .. } => args.repeats,
        _ => 1,
    };
    let rows: Vec<Result<EtaRow>> = par_map(&grid, |&eta| {
        let mut total = 0.0;
        let mut diverged = false;
        for r in 0..repeats {
            let rec = run(
                &inst.problem,
                &seeded(r as u64),
                &RunConfig::new(eta, inst.epochs, inst.x0.clone()),
            )?;
            total += rec.final_gap();
            diverged |= rec.diverged.is_some();
        }
        let regime = inst
            .bundle
            .as_ref()
            .filter(|_| args.source.block.is_none())
            .and_then(|b| b.regime_for(eta))
            .map(|r| r.label.clone());
        Ok(EtaRow {
            eta,
            gap: total / repeats as f64,
            diverged,
            regime,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let text = match args.out.format {
        Format::Csv => eta_rows_csv(&rows),
        Format::Json => io::to_json(&json!({
            "schema": REPORT_SCHEMA,
            "kind": "sweep",
            "strategy": strategy,
            "K": inst.epochs,
            "repeats": repeats,
            "rows": rows,
        }))?,
    };
    write_out(args.out.output.as_deref(), &text)?;
    Ok(Outcome::Pass)
}

fn eta_rows_csv(rows: &[EtaRow]) -> String {
    let mut out = String::from("eta,gap,diverged,regime\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(r.eta),
            fmt_f64(r.gap),
            r.diverged,
            r.regime.as_deref().unwrap_or("")
        ));
    }
    out
}

fn summary_line(r: &BoundCheckReport) -> String {
    format!(
        "{} {} {} measured {} bound {} margin {}",
        r.theorem_id,
        if r.pass { "PASS" } else { "FAIL" },
        r.metric,
        fmt_f64(r.measured_inf_gap),
        fmt_f64(r.analytic_bound),
        fmt_f64(r.margin)
    )
}

fn check(
    t: TheoremId,
    source: &ProblemArgs,
    strategy: &StrategyArgs,
    eta: Option<f64>,
    points: usize,
) -> Result<BoundCheckReport> {
    if t.is_lower_bound() {
        if source.problem.is_some() || source.construction.is_some() {
            bail!("{t} checks its own construction; drop --problem/--construction");
        }
        if eta.is_some() {
            bail!("--eta applies to upper bounds; {t} sweeps its own grid");
        }
        if strategy.strategy != "igd" {
            bail!("{t} is checked under igd only");
        }
        let spec = source.instance.spec(t)?;
        let bundle = build(&spec)?;
        let sweep = SweepSpec::new(default_lower_grid(&bundle, points))?;
        return Ok(lower_bound_check(t, &spec, &sweep)?);
    }
    let inst = source.load()?;
    let strat = strategy.resolve(&inst.problem)?;
    let mut params = UpperParams::new(inst.epochs, inst.x0);
    params.eta = eta;
    Ok(upper_bound_check(t, &inst.problem, &strat, &params)?)
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<Outcome> {
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    if args.all {
        return verify_all(args);
    }
    let id = args
        .theorem
        .as_deref()
        .expect("clap requires --theorem without --all");
    let t = theorem(id)?;
    let report = check(t, &args.source, &args.strategy, args.eta, args.points)?;
    let text = match args.out.format {
        Format::Json => io::to_json(&report)?,
        Format::Csv => eta_rows_csv(&report.per_eta_table),
    };
    write_out(args.out.output.as_deref(), &text)?;
    if args.out.output.is_some() {
        println!("{}", summary_line(&report));
    }
    Ok(if report.pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed(vec![summary_line(&report)])
    })
}

/// One in-range parameter point per theorem: (theorem, construction, n, kappa, K, block, herding).
const ALL_POINTS: &[(TheoremId, TheoremId, usize, f64, usize, Option<usize>, bool)] = &[
    (
        TheoremId::SmallLbIdhess,
        TheoremId::SmallLbIdhess,
        8,
        40.0,
        10,
        None,
        false,
    ),
    (
        TheoremId::SmallLbSc,
        TheoremId::SmallLbSc,
        100,
        1e4,
        20,
        None,
        false,
    ),
    (
        TheoremId::SmallLbConcave,
        TheoremId::SmallLbConcave,
        20,
        400.0,
        10,
        None,
        false,
    ),
    (
        TheoremId::LargeLbIdhess,
        TheoremId::LargeLbIdhess,
        20,
        100.0,
        100,
        None,
        false,
    ),
    (
        TheoremId::LargeLbConcave,
        TheoremId::LargeLbConcave,
        8,
        16.0,
        64,
        None,
        false,
    ),
    (
        TheoremId::SmallUbIdhess,
        TheoremId::SmallLbIdhess,
        8,
        40.0,
        10,
        Some(1),
        false,
    ),
    (
        TheoremId::SmallUbScvx,
        TheoremId::SmallLbSc,
        400,
        101.0,
        2,
        None,
        false,
    ),
    (
        TheoremId::HerdingAtOpt,
        TheoremId::SmallLbIdhess,
        100,
        20.0,
        5,
        None,
        true,
    ),
    (
        TheoremId::LargeUbGeneralizedGrad,
        TheoremId::LargeLbConcave,
        4,
        4.0,
        100,
        None,
        false,
    ),
];

fn verify_all(args: &VerifyArgs) -> Result<Outcome> {
    let points = if args.quick { 20 } else { 50 };
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &(t, construction, n, kappa, k, block, herding) in ALL_POINTS {
        let instance = InstanceArgs {
            n: Some(n),
            kappa: Some(kappa),
            k: Some(k),
            g: 1.0,
            mu: 1.0,
            d: (construction == TheoremId::SmallLbConcave).then_some(1.0),
        };
        let source = ProblemArgs {
            construction: (!t.is_lower_bound()).then(|| construction.to_string()),
            problem: None,
            x0: None,
            block,
            instance,
        };
        let strategy = StrategyArgs {
            strategy: if herding { "herding-at-opt" } else { "igd" }.into(),
            seed: 0,
        };
        let report = check(t, &source, &strategy, None, points)
            .with_context(|| format!("verify --all: {t}"))?;
        let line = summary_line(&report);
        println!("{line}");
        if !report.pass {
            failures.push(line);
        }
        reports.push(report);
    }
    let avg = TheoremId::LargeUbAvg;
    println!("{avg} SKIPPED the bound is stated only up to unspecified constants");
    println!("elapsed {:.2}s", start.elapsed().as_secs_f64());
    if let Some(path) = &args.out.output {
        let text = match args.out.format {
            Format::Json => io::to_json(&reports)?,
            Format::Csv => {
                let mut out = String::from("theorem,pass,metric,measured,bound,margin\n");
                for r in &reports {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.theorem_id,
                        r.pass,
                        r.metric,
                        fmt_f64(r.measured_inf_gap),
                        fmt_f64(r.analytic_bound),
                        fmt_f64(r.margin)
                    ));
                }
                out
            }
        };
        write_out(Some(path), &text)?;
    }
    Ok(if failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::CheckFailed(failures)
    })
}

pub fn figure_cmd(cmd: &FigureCommand) -> Result<Outcome> {
    match cmd {
        FigureCommand::Trajectory {
            k,
            n,
            kappa,
            mu,
            g,
            start,
            format,
            output,
        } => {
            let spec = TrajectorySpec {
                mu: *mu,
                ell: kappa * mu,
                g: *g,
                n: *n,
                epochs: *k,
                start: match start {
                    Start::Origin => TrajectoryStart::Origin,
                    Start::Polygon => TrajectoryStart::Polygon,
                },
            };
            let fig = reproduce_fig_trajectory(&spec)?;
            let text = match format {
                Format::Csv => io::trajectory_to_csv(&fig),
                Format::Json => io::to_json(&fig)?,
            };
            write_out(output.as_deref(), &text)?;
            if output.is_some() {
                println!(
                    "final_radius {} drifts_outward {}",
                    fmt_f64(fig.final_radius),
                    fig.drifts_outward
                );
            }
        }
        FigureCommand::GapComparison {
            seeds,
            seed,
            n,
            kappa,
            mu,
            g,
            k_list,
            k_points,
            format,
            output,
        } => {
            let spec = GapComparisonSpec {
                mu: *mu,
                ell: kappa * mu,
                g: *g,
                n: *n,
                k_list: k_list
                    .clone()
                    .unwrap_or_else(|| default_k_grid(*kappa, *n, *k_points)),
                seeds: *seeds,
                seed: *seed,
            };
            let fig = reproduce_fig_gap_comparison(&spec)?;
            let text = match format {
                Format::Csv => io::gap_comparison_to_csv(&fig),
                Format::Json => io::to_json(&fig)?,
            };
            write_out(output.as_deref(), &text)?;
            if output.is_some() {
                println!(
                    "igd_over_rr_at_smallest_K {} rr_wr_within_iqr {} herding_below_rr {}",
                    fmt_f64(fig.igd_over_rr_at_smallest_k),
                    fig.rr_wr_within_iqr,
                    fig.herding_below_rr
                );
            }
        }
    }
    Ok(Outcome::Pass)
}
