//! Subcommand implementations.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use anyhow::Context;
use bellgarch::baselines::{fit_nb_ingarch, fit_poisson_ingarch, NbFit};
use bellgarch::diagnostics::{
    acf, cumulative_periodogram, default_max_lag, mean_and_sd, pacf, pearson_residuals,
};
use bellgarch::estimation::{fit_cml, FitOptions, FitResult};
use bellgarch::model::{simulate as simulate_path, IngarchSpec, Link};
use bellgarch::montecarlo::{
    closed_form_comparison, mix_seed, preset, run_study, McConfig, McReport, Scenario,
    DEFAULT_INIT_JITTER, DEFAULT_REPLICATIONS, DEFAULT_SAMPLE_SIZES,
};
use bellgarch::{CountSeries, Error};
use serde::Deserialize;

use crate::args::{
    CompareArgs, FitArgs, LinkKind, McStudyArgs, MeanFormulaArgs, ModelKind, SimulateArgs,
};
use crate::error::{Classify, CliError, CliResult};
use crate::input::{read_series, sha256_hex};
use crate::manifest::RunManifest;
use crate::output::{opt, write_csv, KeyValueDoc};

pub const FIT_REPORT: &str = "fit.txt";
pub const COMPARE_TABLE: &str = "compare.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const LAMBDA_FILE: &str = "lambda.csv";
pub const MC_REPORT: &str = "mc_report.csv";
pub const MC_FAILURES: &str = "mc_failures.csv";
pub const MEAN_FORMULA_TABLE: &str = "mean_formula.csv";
pub const MEAN_FORMULA_DOC: &str = "mean_formula.md";

const PARAM_COLUMNS: [&str; 4] = ["alpha0", "alpha1", "beta1", "gamma"];

fn prepare_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .or_input()
}

fn dataset_label(path: &Path, name: &Option<String>) -> String {
    name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into())
    })
}

fn parse_init(text: &str, link: LinkKind) -> CliResult<IngarchSpec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::input(format!("--init: {e}")))?;
    let spec = match (link, values.as_slice()) {
        (LinkKind::Linear, &[a0, a1, b1]) => IngarchSpec::linear(a0, a1, b1),
        (LinkKind::Nonlinear, &[a0, a1, b1, g]) => IngarchSpec::nonlinear(a0, a1, b1, g),
        (LinkKind::Linear, _) => return Err(CliError::input("--init needs alpha0,alpha1,beta1")),
        (LinkKind::Nonlinear, _) => {
            return Err(CliError::input("--init needs alpha0,alpha1,beta1,gamma"))
        }
    };
    let spec = spec.or_input()?;
    spec.check_stationary().or_input()?;
    Ok(spec)
}

fn to_link(link: LinkKind) -> Link<f64> {
    match link {
        LinkKind::Linear => Link::Linear,
        LinkKind::Nonlinear => Link::Nonlinear { gamma: 1.0 },
    }
}

/// A fitted model of any kind.
pub enum Fitted {
    Direct(FitResult<f64>),
    Nb(NbFit<f64>),
}

impl Fitted {
    pub fn mean_fit(&self) -> &FitResult<f64> {
        match self {
            Fitted::Direct(f) => f,
            Fitted::Nb(nb) => &nb.mean_fit,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Fitted::Direct(f) => f.k,
            Fitted::Nb(nb) => nb.k,
        }
    }

    pub fn loglik(&self) -> f64 {
        self.mean_fit().loglik
    }

    pub fn aic(&self) -> f64 {
        match self {
            Fitted::Direct(f) => f.aic,
            Fitted::Nb(nb) => nb.aic,
        }
    }

    pub fn bic(&self) -> f64 {
        match self {
            Fitted::Direct(f) => f.bic,
            Fitted::Nb(nb) => nb.bic,
        }
    }

    pub fn converged(&self) -> bool {
        self.mean_fit().converged
    }

    /// Pearson residuals under the model's own variance function.
    pub fn residuals(&self, series: &CountSeries) -> bellgarch::Result<Vec<f64>> {
        match self {
            Fitted::Direct(f) => pearson_residuals(f, series),
            Fitted::Nb(nb) => {
                let start = nb.mean_fit.first_term();
                Ok(nb.mean_fit.lambda_path.lambdas()[start..]
                    .iter()
                    .zip(&series.values()[start..])
                    .map(|(&l, &x)| (x as f64 - l) / (l * (1.0 + l / nb.v1)).sqrt())
                    .collect())
            }
        }
    }
}

pub fn fit_model(
    model: ModelKind,
    series: &CountSeries,
    link: LinkKind,
    opts: &FitOptions<f64>,
) -> bellgarch::Result<Fitted> {
    match model {
        ModelKind::Bell => fit_cml(series, to_link(link), opts).map(Fitted::Direct),
        ModelKind::Poisson => fit_poisson_ingarch(series, None, opts).map(Fitted::Direct),
        ModelKind::Nb => fit_nb_ingarch(series, None, opts).map(Fitted::Nb),
    }
}

fn fit_summary(doc: &mut KeyValueDoc, fitted: &Fitted) {
    let f = fitted.mean_fit();
    doc.push("converged", f.converged)
        .push("stop_reason", f.stop_reason.as_str())
        .push("iterations", f.iterations)
        .push("n_eff", f.n_eff)
        .push("k", fitted.k());
    for ((name, value), se) in f
        .param_names()
        .iter()
        .zip(f.spec_hat.to_vec())
        .zip(&f.std_errors)
    {
        doc.push(name.as_str(), value)
            .push(format!("{name}.se"), opt(*se));
    }
    if let Fitted::Nb(nb) = fitted {
        doc.push("v1", nb.v1).push("v2", nb.v2);
    }
    doc.push("loglik", fitted.loglik())
        .push("aic", fitted.aic())
        .push("bic", fitted.bic())
        .push("score_max_abs", f.score_max_abs);
    for (i, w) in f.warnings.iter().enumerate() {
        doc.push(format!("warning.{i}"), w);
    }
}

/// Writes the plot-data files and adds residual summaries to `doc`.
fn write_bundle(
    dir: &Path,
    series: &CountSeries,
    fitted: &Fitted,
    max_lag: Option<usize>,
    doc: &mut KeyValueDoc,
) -> CliResult<()> {
    let f = fitted.mean_fit();
    let residuals = fitted.residuals(series).or_numerical()?;
    let (mean, sd) = mean_and_sd(&residuals);
    let lag = max_lag
        .unwrap_or_else(|| default_max_lag(residuals.len()))
        .min(residuals.len().saturating_sub(1));
    let r_acf = acf(&residuals, lag).or_numerical()?;
    let r_pacf = pacf(&residuals, lag).or_numerical()?;
    let cp = cumulative_periodogram(&residuals).or_numerical()?;
    doc.push("residual_mean", mean)
        .push("residual_sd", sd)
        .push("max_lag", lag)
        .push("cpgram_band", cp.band)
        .push("cpgram_inside", cp.inside);

    let start = f.first_term();
    let rows = series
        .values()
        .iter()
        .zip(f.lambda_path.lambdas())
        .zip(f.lambda_path.cond_means())
        .enumerate()
        .map(|(t, ((&x, &l), &y))| {
            let e = t.checked_sub(start).map(|i| residuals[i]);
            vec![
                (t + 1).to_string(),
                x.to_string(),
                y.to_string(),
                l.to_string(),
                opt(e),
            ]
        });
    write_csv(
        &dir.join("fitted.csv"),
        &["t", "observed", "predicted", "lambda", "residual"],
        rows,
    )
    .or_input()?;

    let rows = r_acf
        .iter()
        .zip(&r_pacf)
        .enumerate()
        .map(|(k, (a, p))| vec![(k + 1).to_string(), a.to_string(), p.to_string()]);
    write_csv(&dir.join("acf.csv"), &["lag", "acf", "pacf"], rows).or_input()?;

    let m = cp.ordinates.len() as f64;
    let rows = cp
        .frequencies
        .iter()
        .zip(&cp.ordinates)
        .enumerate()
        .map(|(j, (w, c))| {
            let line = (j + 1) as f64 / m;
            vec![
                w.to_string(),
                c.to_string(),
                line.to_string(),
                (line - cp.band).to_string(),
                (line + cp.band).to_string(),
            ]
        });
    write_csv(
        &dir.join("cpgram.csv"),
        &["frequency", "ordinate", "expected", "lower", "upper"],
        rows,
    )
    .or_input()?;

    let mut counts = vec![0usize; series.max() as usize + 1];
    for &x in series.values() {
        counts[x as usize] += 1;
    }
    let n = series.len() as f64;
    let rows = counts
        .iter()
        .enumerate()
        .map(|(v, &c)| vec![v.to_string(), c.to_string(), (c as f64 / n).to_string()]);
    write_csv(
        &dir.join("histogram.csv"),
        &["count", "frequency", "relative_frequency"],
        rows,
    )
    .or_input()?;
    Ok(())
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let (series, digest) = read_series(&args.data).or_input()?;
    if args.model != ModelKind::Bell && args.link == LinkKind::Nonlinear {
        return Err(CliError::input(format!(
            "--link nonlinear is only available for --model bell, not {}",
            args.model.as_str()
        )));
    }
    let init = args
        .init
        .as_deref()
        .map(|s| parse_init(s, args.link))
        .transpose()?;
    let seed = args.seed.unwrap_or(0);
    let name = dataset_label(&args.data, &args.name);
    prepare_out_dir(&args.out_dir)?;

    let mut manifest = RunManifest::new("fit", seed)
        .input(&args.data, digest)
        .option("model", args.model.as_str())
        .option("link", args.link.as_str())
        .option("name", &name)
        .option_if("init", args.init.as_ref())
        .option_if("lambda0", args.lambda0)
        .option_if("max-lag", args.max_lag);
    if args.multi_start {
        manifest = manifest.option("multi-start", true);
    }
    manifest.write(&args.out_dir).or_input()?;

    let opts = FitOptions {
        init,
        multi_start: args.multi_start,
        seed,
        lambda0: args.lambda0,
        ..FitOptions::default()
    };
    let mut doc = KeyValueDoc::new();
    doc.push("name", &name)
        .push("model", args.model.as_str())
        .push("link", args.link.as_str())
        .push("n", series.len());
    let report_path = args.out_dir.join(FIT_REPORT);
    let fitted = match fit_model(args.model, &series, args.link, &opts) {
        Ok(f) => f,
        Err(e) => {
            doc.push("status", "failed").push("error", &e);
            doc.write(&report_path).or_input()?;
            return Err(CliError::Numerical(
                anyhow::Error::new(e).context("fit failed"),
            ));
        }
    };
    let status = if fitted.converged() {
        "ok"
    } else {
        "not_converged"
    };
    doc.push("status", status);
    fit_summary(&mut doc, &fitted);
    let bundle = write_bundle(&args.out_dir, &series, &fitted, args.max_lag, &mut doc);
    if let Err(e) = &bundle {
        doc.push("diagnostics_error", e);
    }
    doc.write(&report_path).or_input()?;
    bundle?;

    let f = fitted.mean_fit();
    println!(
        "{name}: {} {} loglik={:.4} aic={:.4} bic={:.4} [{}]",
        args.model.as_str(),
        f.param_names()
            .iter()
            .zip(f.spec_hat.to_vec())
            .map(|(n, v)| format!("{n}={v:.4}"))
            .collect::<Vec<_>>()
            .join(" "),
        fitted.loglik(),
        fitted.aic(),
        fitted.bic(),
        status
    );
    if !fitted.converged() {
        return Err(CliError::numerical(format!(
            "optimizer did not converge ({}); report written with status=not_converged",
            f.stop_reason.as_str()
        )));
    }
    Ok(())
}

pub fn compare(args: &CompareArgs) -> CliResult<()> {
    let (series, digest) = read_series(&args.data).or_input()?;
    let mut seen = HashSet::new();
    if let Some(m) = args.models.iter().find(|m| !seen.insert(**m)) {
        return Err(CliError::input(format!(
            "model {} listed twice",
            m.as_str()
        )));
    }
    let seed = args.seed.unwrap_or(0);
    let name = dataset_label(&args.data, &args.name);
    prepare_out_dir(&args.out_dir)?;
    let models: Vec<&str> = args.models.iter().map(|m| m.as_str()).collect();
    let mut manifest = RunManifest::new("compare", seed)
        .input(&args.data, digest)
        .option("models", models.join(","))
        .option("name", &name)
        .option_if("lambda0", args.lambda0);
    if args.multi_start {
        manifest = manifest.option("multi-start", true);
    }
    manifest.write(&args.out_dir).or_input()?;

    let opts = FitOptions {
        multi_start: args.multi_start,
        seed,
        lambda0: args.lambda0,
        ..FitOptions::default()
    };
    let results: Vec<(ModelKind, bellgarch::Result<Fitted>)> = args
        .models
        .iter()
        .map(|&m| (m, fit_model(m, &series, LinkKind::Linear, &opts)))
        .collect();
    let mut ok: Vec<(ModelKind, &Fitted)> = results
        .iter()
        .filter_map(|(m, r)| r.as_ref().ok().map(|f| (*m, f)))
        .collect();
    ok.sort_by(|a, b| a.1.aic().total_cmp(&b.1.aic()));

    let mut rows = Vec::new();
    for (rank, (m, f)) in ok.iter().enumerate() {
        let status = if f.converged() { "ok" } else { "not_converged" };
        rows.push(vec![
            (rank + 1).to_string(),
            m.as_str().to_string(),
            f.k().to_string(),
            f.mean_fit().n_eff.to_string(),
            f.loglik().to_string(),
            f.aic().to_string(),
            f.bic().to_string(),
            status.to_string(),
            String::new(),
        ]);
        println!(
            "{}. {:<8} k={} loglik={:.4} aic={:.4} bic={:.4}",
            rank + 1,
            m.as_str(),
            f.k(),
            f.loglik(),
            f.aic(),
            f.bic()
        );
    }
    for (m, r) in &results {
        if let Err(e) = r {
            let mut row = vec![String::new(); 9];
            row[1] = m.as_str().to_string();
            row[7] = "failed".into();
            row[8] = e.to_string();
            rows.push(row);
            println!("-. {:<8} failed: {e}", m.as_str());
        }
    }
    write_csv(
        &args.out_dir.join(COMPARE_TABLE),
        &[
            "rank", "model", "k", "n_eff", "loglik", "aic", "bic", "status", "error",
        ],
        rows,
    )
    .or_input()?;
    if ok.is_empty() {
        return Err(CliError::numerical("every model failed to fit"));
    }
    Ok(())
}

pub fn simulation_spec(args: &SimulateArgs) -> CliResult<IngarchSpec<f64>> {
    let spec = match (args.link, args.gamma) {
        (LinkKind::Linear, None) => IngarchSpec::linear(args.alpha0, args.alpha1, args.beta1),
        (LinkKind::Nonlinear, Some(g)) => {
            IngarchSpec::nonlinear(args.alpha0, args.alpha1, args.beta1, g)
        }
        (LinkKind::Linear, Some(_)) => {
            return Err(CliError::input("--gamma requires --link nonlinear"))
        }
        (LinkKind::Nonlinear, None) => {
            return Err(CliError::input("--link nonlinear requires --gamma"))
        }
    }
    .or_input()?;
    spec.check_stationary().or_input()?;
    Ok(spec)
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec = simulation_spec(args)?;
    if args.n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    let seed = args.seed.unwrap_or(0);
    prepare_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new("simulate", seed)
        .option("link", args.link.as_str())
        .option("alpha0", args.alpha0)
        .option("alpha1", args.alpha1)
        .option("beta1", args.beta1)
        .option_if("gamma", args.gamma)
        .option("n", args.n)
        .option("burn-in", args.burn_in);
    if args.lambda_path {
        manifest = manifest.option("lambda-path", true);
    }
    manifest.write(&args.out_dir).or_input()?;

    let (series, path) = simulate_path(&spec, args.n, args.burn_in, seed).or_numerical()?;
    write_csv(
        &args.out_dir.join(SERIES_FILE),
        &["count"],
        series.values().iter().map(|x| vec![x.to_string()]),
    )
    .or_input()?;
    if args.lambda_path {
        let rows = path
            .lambdas()
            .iter()
            .zip(path.cond_means())
            .enumerate()
            .map(|(t, (l, m))| vec![(t + 1).to_string(), l.to_string(), m.to_string()]);
        write_csv(
            &args.out_dir.join(LAMBDA_FILE),
            &["t", "lambda", "mean"],
            rows,
        )
        .or_input()?;
    }
    let mean: f64 = series.mean();
    println!(
        "simulated n={} mean={mean:.4} max={}",
        series.len(),
        series.max()
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomScenario {
    name: String,
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
    gamma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyConfig {
    #[serde(default)]
    scenarios: Vec<String>,
    #[serde(default)]
    custom: Vec<CustomScenario>,
    sample_sizes: Option<Vec<usize>>,
    replications: Option<usize>,
    seed: Option<u64>,
    init_jitter: Option<f64>,
    burn_in: Option<usize>,
}

fn study_scenarios(config: &StudyConfig) -> CliResult<Vec<Scenario<f64>>> {
    let mut out = Vec::new();
    for name in &config.scenarios {
        out.push(
            preset(name)
                .ok_or_else(|| CliError::input(format!("unknown scenario preset {name:?}")))?,
        );
    }
    for c in &config.custom {
        let spec = match c.gamma {
            None => IngarchSpec::linear(c.alpha0, c.alpha1, c.beta1),
            Some(g) => IngarchSpec::nonlinear(c.alpha0, c.alpha1, c.beta1, g),
        }
        .map_err(|e| CliError::input(format!("scenario {}: {e}", c.name)))?;
        out.push(Scenario {
            name: c.name.clone(),
            spec,
        });
    }
    if out.is_empty() {
        return Err(CliError::input("config lists no scenarios"));
    }
    let mut names = HashSet::new();
    if let Some(s) = out
        .iter()
        .find(|s| !names.insert(s.name.to_ascii_uppercase()))
    {
        return Err(CliError::input(format!(
            "scenario {} appears twice",
            s.name
        )));
    }
    Ok(out)
}

fn report_rows(report: &McReport<f64>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for row in &report.rows {
        for stat in ["mean", "made", "mse"] {
            let mut r = vec![report.scenario.clone(), row.n.to_string(), stat.to_string()];
            for i in 0..PARAM_COLUMNS.len() {
                r.push(opt(row.stats.get(i).map(|s| match stat {
                    "mean" => s.mean,
                    "made" => s.made,
                    _ => s.mse,
                })));
            }
            rows.push(r);
        }
    }
    rows
}

pub fn mc_study(args: &McStudyArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))
        .or_input()?;
    let config: StudyConfig = toml::from_str(&text)
        .with_context(|| format!("invalid study config {}", args.config.display()))
        .or_input()?;
    let scenarios = study_scenarios(&config)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let configs: Vec<McConfig<f64>> = scenarios
        .into_iter()
        .map(|sc| {
            let mut c = McConfig::new(sc, seed);
            c.sample_sizes = config
                .sample_sizes
                .clone()
                .unwrap_or_else(|| DEFAULT_SAMPLE_SIZES.to_vec());
            c.replications = config.replications.unwrap_or(DEFAULT_REPLICATIONS);
            c.init_jitter = config.init_jitter.unwrap_or(DEFAULT_INIT_JITTER);
            c.burn_in = config.burn_in.unwrap_or(bellgarch::DEFAULT_BURN_IN);
            c
        })
        .collect();
    for c in &configs {
        c.validate()
            .map_err(|e| CliError::input(format!("scenario {}: {e}", c.scenario.name)))?;
    }
    prepare_out_dir(&args.out_dir)?;
    RunManifest::new("mc-study", seed)
        .input(&args.config, sha256_hex(text.as_bytes()))
        .write(&args.out_dir)
        .or_input()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for c in &configs {
        match run_study(c) {
            Ok(report) => {
                rows.extend(report_rows(&report));
                for row in &report.rows {
                    failures.push(vec![
                        report.scenario.clone(),
                        row.n.to_string(),
                        c.replications.to_string(),
                        row.converged.to_string(),
                        row.failed.to_string(),
                    ]);
                }
                println!(
                    "{}: {} of {} cells with non-increasing MADE and MSE",
                    report.scenario,
                    report.nonincreasing_cells(),
                    report.truth.len()
                );
            }
            Err(Error::AllReplicationsFailed { replications }) => {
                log::warn!("scenario {}: all replications failed", c.scenario.name);
                failures.push(vec![
                    c.scenario.name.clone(),
                    String::new(),
                    replications.to_string(),
                    "0".into(),
                    replications.to_string(),
                ]);
            }
            Err(e) => return Err(CliError::Numerical(e.into())),
        }
    }
    let mut header = vec!["scenario", "n", "statistic"];
    header.extend(PARAM_COLUMNS);
    write_csv(&args.out_dir.join(MC_REPORT), &header, rows).or_input()?;
    write_csv(
        &args.out_dir.join(MC_FAILURES),
        &["scenario", "n", "replications", "converged", "failed"],
        failures,
    )
    .or_input()?;
    Ok(())
}

pub fn mean_formula(args: &MeanFormulaArgs) -> CliResult<()> {
    if args.n < 2 {
        return Err(CliError::input("--n must be at least 2"));
    }
    let seed = args.seed.unwrap_or(0);
    prepare_out_dir(&args.out_dir)?;
    RunManifest::new("mean-formula", seed)
        .option("n", args.n)
        .write(&args.out_dir)
        .or_input()?;
    let mut rows = Vec::new();
    let mut doc = String::from(
        "# Closed-form mean versus simulation\n\n\
         The stationary-mean expression `mu = A exp(A)` with\n\
         `A = [(1 - sum beta) ln alpha0 + sum alpha (alpha0 - ln alpha0)] / sum alpha`\n\
         is evaluated exactly as printed and set against the sample mean of one long\n\
         simulated path per scenario. The expression is not an identity for\n\
         `E[lambda exp(lambda)]`; it turns negative whenever `A < 0`, which holds for\n\
         every linear preset. The comparison is a diagnostic, not a check.\n\n",
    );
    doc.push_str(&format!(
        "Path length {} after a burn-in of {}, seed {seed}. The standard error treats\n\
         the path as independent and therefore understates the uncertainty.\n\n",
        args.n,
        bellgarch::DEFAULT_BURN_IN
    ));
    doc.push_str("| scenario | alpha0 | alpha1 | beta1 | formula | simulated mean | se |\n");
    doc.push_str("|---|---|---|---|---|---|---|\n");
    for (i, name) in ["A1", "A2", "A3", "A4"].iter().enumerate() {
        let sc = preset::<f64>(name).expect("preset exists");
        let c = closed_form_comparison(&sc, args.n, mix_seed(seed, i as u64, 0)).or_numerical()?;
        let v = sc.spec.to_vec();
        rows.push(vec![
            sc.name.clone(),
            v[0].to_string(),
            v[1].to_string(),
            v[2].to_string(),
            opt(c.formula),
            c.simulated_mean.to_string(),
            c.simulated_se.to_string(),
        ]);
        doc.push_str(&format!(
            "| {} | {} | {} | {} | {} | {:.6} | {:.6} |\n",
            sc.name,
            v[0],
            v[1],
            v[2],
            c.formula.map_or("undefined".into(), |f| format!("{f:.6}")),
            c.simulated_mean,
            c.simulated_se
        ));
    }
    write_csv(
        &args.out_dir.join(MEAN_FORMULA_TABLE),
        &[
            "scenario",
            "alpha0",
            "alpha1",
            "beta1",
            "formula",
            "simulated_mean",
            "simulated_se",
        ],
        rows,
    )
    .or_input()?;
    fs::write(args.out_dir.join(MEAN_FORMULA_DOC), doc)
        .context("cannot write the mean-formula document")
        .or_input()?;
    print!(
        "{}",
        fs::read_to_string(args.out_dir.join(MEAN_FORMULA_DOC)).unwrap_or_default()
    );
    Ok(())
}
