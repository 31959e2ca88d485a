//! Subcommand arguments and handlers.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use dlmscale::allocate::{
    allocation_from_frontier, closed_form_allocation, contour_grid, emit_allocation_table, joint_optimum,
    max_epochs, AllocationSource, ComputeAllocation, EpochCriterion, DEFAULT_E_BOUNDS, DEFAULT_N_BOUNDS,
};
use dlmscale::builtin::{builtin_coefficients, Builtin, NAMES};
use dlmscale::diffusion::{
    elbo_loss, forward_corrupt, maskgit_loss, uniform_kernel_loss, CleanAveraging, CopyPredictor, ExactPosterior,
    Kernel, McOptions, NgramPredictor, NoiseLevel, Predictor, Schedule, Source, UniformPredictor,
};
use dlmscale::fit::{fit_law, FitOptions};
use dlmscale::ingest::{estimate_params, gaussian_smooth, ArchSpec, LossTarget, MlpKind, RunRecord};
use dlmscale::isoflop::analyze;
use dlmscale::laws::LawKind;
use dlmscale::oracle::{synth_runs, DataGrid, LogGrid, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::coeffs;
use crate::io::{self, RunsFormat};
use crate::output::{emit_json, emit_table, num, sink, Cell, Table};
use crate::{NotConverged, OutArgs};

fn read_runs(path: &Path, format: Option<RunsFormat>) -> Result<Vec<RunRecord>> {
    let fmt = format.unwrap_or_else(|| RunsFormat::from_path(path));
    io::parse_runs(io::open(path)?, fmt).with_context(|| path.display().to_string())
}

fn pair(v: &[f64], name: &str) -> Result<(f64, f64)> {
    ensure!(v.len() == 2, "--{name} takes two values: lo,hi");
    Ok((v[0], v[1]))
}

/// `lo,hi,count` triple for a log grid.
fn log_grid(v: &[f64], name: &str) -> Result<LogGrid> {
    ensure!(v.len() == 3 && v[2] >= 1.0 && v[2].fract() == 0.0, "--{name} takes lo,hi,count");
    Ok(LogGrid::new(v[0], v[1], v[2] as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Train,
    #[value(alias = "validation")]
    Val,
}

impl From<Target> for LossTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::Train => LossTarget::Train,
            Target::Val => LossTarget::Validation,
        }
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    runs: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    input_format: Option<RunsFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RunsFormat::Csv)]
    format: RunsFormat,
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let runs = read_runs(&a.runs, a.input_format)?;
    let mut w = sink(a.out.as_deref())?;
    io::write_runs(&mut w, &runs, a.format)?;
    w.flush()?;
    eprintln!("{} records", runs.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct SmoothArgs {
    /// Loss-series CSV with columns run_id, step, loss.
    #[arg(long)]
    series: PathBuf,
    /// Odd window length in steps.
    #[arg(long, default_value_t = 301)]
    window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn smooth(a: SmoothArgs) -> Result<()> {
    let series = io::parse_loss_series(io::open(&a.series)?).with_context(|| a.series.display().to_string())?;
    let smoothed = series.iter().map(|s| gaussian_smooth(s, a.window)).collect::<Result<Vec<_>, _>>()?;
    let mut w = sink(a.out.as_deref())?;
    io::write_loss_series(&mut w, &smoothed)?;
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[arg(long)]
    d_model: u64,
    #[arg(long)]
    ffw: u64,
    #[arg(long)]
    kv: u64,
    #[arg(long)]
    heads: u64,
    #[arg(long)]
    layers: u64,
    #[arg(long, default_value_t = ArchSpec::DEFAULT_VOCAB)]
    vocab: u64,
    #[arg(long, value_enum, default_value_t = Mlp::Dense)]
    mlp: Mlp,
    /// Count the input embedding matrix.
    #[arg(long)]
    embeddings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mlp {
    Dense,
    Gated,
}

pub fn params(a: ParamsArgs) -> Result<()> {
    let mut arch = ArchSpec::new(a.d_model, a.ffw, a.kv, a.heads, a.layers).with_mlp(match a.mlp {
        Mlp::Dense => MlpKind::Dense,
        Mlp::Gated => MlpKind::Gated,
    });
    arch.vocab_size = a.vocab;
    arch.validate()?;
    println!("{}", estimate_params(&arch, a.embeddings));
    Ok(())
}

#[derive(Args, Debug)]
pub struct IsoflopArgs {
    #[arg(long)]
    runs: PathBuf,
    /// Comma-separated FLOP budgets.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<f64>,
    /// Relative tolerance for matching a run's FLOPs to a budget.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Target::Train)]
    target: Target,
    /// Keep vertices that fall outside the sampled model sizes.
    #[arg(long)]
    include_extrapolated: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn isoflop(a: IsoflopArgs) -> Result<()> {
    let runs = read_runs(&a.runs, None)?;
    let r = analyze(&runs, &a.budgets, a.tol, a.target.into(), a.include_extrapolated)?;
    for d in &r.grouping.dropped {
        eprintln!("dropped budget {}: {}", num(d.budget_flops), d.reason);
    }
    for (c, e) in &r.failed {
        eprintln!("budget {}: {e}", num(*c));
    }
    if !r.grouping.unassigned.is_empty() {
        eprintln!("{} runs matched no budget", r.grouping.unassigned.len());
    }
    let doc = json!({
        "frontier": r.frontier,
        "vertices": r.parabolas,
        "dropped": r.grouping.dropped,
        "failed": r.failed.iter().map(|(c, e)| json!({"budget_flops": c, "reason": e.to_string()})).collect::<Vec<_>>(),
        "unassigned": r.grouping.unassigned,
    });
    emit_json(&doc, a.out.as_ref())
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    runs: PathBuf,
    #[arg(long, value_parser = parse_law)]
    law: LawKind,
    /// Huber threshold on log-loss residuals.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Target::Train)]
    target: Target,
    /// L-BFGS descents from the best-scoring starts; 0 descends from every start.
    #[arg(long, default_value_t = 32)]
    descents: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_law(s: &str) -> Result<LawKind, String> {
    s.parse().map_err(|e: dlmscale::Error| e.to_string())
}

pub fn fit(a: FitArgs) -> Result<()> {
    let runs = read_runs(&a.runs, None)?;
    let opts = FitOptions {
        delta: a.delta,
        target: a.target.into(),
        descents: (a.descents > 0).then_some(a.descents),
        ..FitOptions::default()
    };
    let report = fit_law(&runs, a.law, &opts)?;
    emit_json(&report, a.out.as_ref())?;
    if !report.converged {
        return Err(NotConverged(format!(
            "best descent stopped without converging after {} iterations (objective {})",
            report.iterations, report.objective_value
        ))
        .into());
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct AllocComputeArgs {
    /// Comma-separated FLOP budgets.
    #[arg(long, value_delimiter = ',', required = true)]
    flops: Vec<f64>,
    /// Built-in set name or JSON file (law or frontier).
    #[arg(long, default_value = "paper-compute")]
    coeffs: String,
    #[command(flatten)]
    out: OutArgs,
}

pub fn alloc_compute(a: AllocComputeArgs) -> Result<()> {
    let src = coeffs::load(&a.coeffs, LawKind::Compute)?;
    let mut t = Table::new(&["flops", "n_params", "tokens", "predicted_loss", "g_const", "a_exp", "b_exp"]);
    for &c in &a.flops {
        let r: ComputeAllocation = match &src {
            Builtin::Frontier(f) => allocation_from_frontier(f, c)?,
            law => closed_form_allocation(&coeffs::compute_law(law).expect("law"), c)?,
        };
        t.push(vec![
            Cell::Num(c),
            Cell::Num(r.n_opt),
            Cell::Num(r.d_opt),
            r.predicted_loss.map(Cell::Num).unwrap_or(Cell::Text(String::new())),
            Cell::Num(r.g_const),
            Cell::Num(r.a_exp),
            Cell::Num(r.b_exp),
        ]);
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    InteriorPeak,
    GlobalMinimum,
}

impl From<Criterion> for EpochCriterion {
    fn from(c: Criterion) -> Self {
        match c {
            Criterion::InteriorPeak => EpochCriterion::InteriorPeak,
            Criterion::GlobalMinimum => EpochCriterion::GlobalMinimum,
        }
    }
}

#[derive(Args, Debug)]
pub struct AllocEpochsArgs {
    /// Comma-separated model sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<f64>,
    /// Comma-separated unique-token counts.
    #[arg(long, value_delimiter = ',', required = true)]
    unique: Vec<f64>,
    #[arg(long, default_value = "paper-data")]
    coeffs: String,
    #[arg(long, value_enum, default_value_t = Criterion::InteriorPeak)]
    criterion: Criterion,
    /// Epoch search range lo,hi.
    #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_E_BOUNDS.0, DEFAULT_E_BOUNDS.1])]
    e_range: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn alloc_epochs(a: AllocEpochsArgs) -> Result<()> {
    let c = coeffs::data_law(&a.coeffs)?;
    let bounds = pair(&a.e_range, "e-range")?;
    let mut t =
        Table::new(&["n_params", "unique_tokens", "epochs", "e_opt", "predicted_loss", "flops", "boundary"]);
    for &n in &a.n {
        for &u in &a.unique {
            let r = max_epochs(&c, n, u, bounds, a.criterion.into())?;
            t.push(vec![
                Cell::Num(n),
                Cell::Num(u),
                Cell::Int(r.whole_epochs()),
                Cell::Num(r.e_opt),
                Cell::Num(r.predicted_loss),
                Cell::Num(r.flops_at_opt),
                Cell::Bool(r.boundary),
            ]);
        }
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Args, Debug)]
pub struct AllocJointArgs {
    /// Comma-separated unique-token counts.
    #[arg(long, value_delimiter = ',', required = true)]
    unique: Vec<f64>,
    #[arg(long, default_value = "paper-data")]
    coeffs: String,
    #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_N_BOUNDS.0, DEFAULT_N_BOUNDS.1])]
    n_range: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_E_BOUNDS.0, DEFAULT_E_BOUNDS.1])]
    e_range: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn alloc_joint(a: AllocJointArgs) -> Result<()> {
    let c = coeffs::data_law(&a.coeffs)?;
    let (nb, eb) = (pair(&a.n_range, "n-range")?, pair(&a.e_range, "e-range")?);
    let mut t = Table::new(&["unique_tokens", "parameters", "epochs", "tokens", "flops", "predicted_loss", "boundary"]);
    for &u in &a.unique {
        let r = joint_optimum(&c, u, nb, eb)?;
        if r.boundary {
            eprintln!("U = {}: optimum on the search box edge; widen --n-range/--e-range", num(u));
        }
        t.push(vec![
            Cell::Num(u),
            Cell::Num(r.n_opt),
            Cell::Num(r.e_opt),
            Cell::Num(u * r.e_opt),
            Cell::Num(r.flops_at_opt),
            Cell::Num(r.predicted_loss),
            Cell::Bool(r.boundary),
        ]);
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Args, Debug)]
pub struct AllocTableArgs {
    /// Comma-separated model sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    params: Vec<f64>,
    /// Law (closed form) or frontier.
    #[arg(long, default_value = "paper-compute")]
    coeffs: String,
    #[command(flatten)]
    out: OutArgs,
}

pub fn alloc_table(a: AllocTableArgs) -> Result<()> {
    let src = match coeffs::load(&a.coeffs, LawKind::Compute)? {
        Builtin::Frontier(f) => AllocationSource::Frontier(f),
        law => AllocationSource::Law(coeffs::compute_law(&law).expect("law")),
    };
    let mut t = Table::new(&["parameters", "flops", "tokens"]);
    for r in emit_allocation_table(&src, &a.params)? {
        t.push(vec![Cell::Num(r.parameters), Cell::Num(r.flops), Cell::Num(r.tokens)]);
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Args, Debug)]
pub struct AllocContourArgs {
    #[arg(long)]
    unique: f64,
    #[arg(long, default_value = "paper-data")]
    coeffs: String,
    #[arg(long, value_delimiter = ',', default_values_t = [1e7, 1e12])]
    n_range: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e4])]
    e_range: Vec<f64>,
    /// Grid points per axis: N then epochs.
    #[arg(long, value_delimiter = ',', default_values_t = [64, 64])]
    resolution: Vec<usize>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn alloc_contour(a: AllocContourArgs) -> Result<()> {
    let c = coeffs::data_law(&a.coeffs)?;
    ensure!(a.resolution.len() == 2, "--resolution takes two counts");
    let g = contour_grid(&c, a.unique, pair(&a.n_range, "n-range")?, pair(&a.e_range, "e-range")?, (a.resolution[0], a.resolution[1]))?;
    if let Some(o) = &g.optimum {
        eprintln!("optimum: N = {}, epochs = {}, loss = {}", num(o.n_opt), num(o.e_opt), num(o.predicted_loss));
    }
    let mut t = Table::new(&["n_params", "epochs", "predicted_loss"]);
    for p in &g.points {
        t.push(vec![Cell::Num(p.n_params), Cell::Num(p.epochs), Cell::Num(p.predicted_loss)]);
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Args, Debug)]
pub struct CorruptArgs {
    #[arg(long)]
    vocab: u32,
    /// Length of generated sequences (ignored with --corpus).
    #[arg(long, default_value_t = 8)]
    len: usize,
    /// Number of generated sequences (ignored with --corpus).
    #[arg(long, default_value_t = 1)]
    batch: usize,
    /// Corrupt these sequences instead of random ones.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value = "masked")]
    kernel: Kernel,
    #[arg(long, default_value = "linear")]
    schedule: Schedule,
    /// Mask token id; defaults to the vocabulary size.
    #[arg(long)]
    mask_id: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn diffuse_corrupt(a: CorruptArgs) -> Result<()> {
    ensure!(a.vocab >= 1, "--vocab must be at least 1");
    let batch = match &a.corpus {
        Some(p) => io::parse_corpus(io::open(p)?).with_context(|| p.display().to_string())?,
        None => {
            // Clean tokens come from a stream separate from the corruption streams.
            let mut rng = ChaCha8Rng::seed_from_u64(dlmscale::derive_seed(a.seed, u64::MAX));
            (0..a.batch).map(|_| (0..a.len).map(|_| rng.random_range(0..a.vocab)).collect()).collect()
        }
    };
    let mask_id = a.mask_id.unwrap_or(a.vocab);
    let b = forward_corrupt(&batch, &NoiseLevel::Shared(a.t), &a.schedule, a.kernel, a.vocab, mask_id, a.seed)?;
    emit_json(&b, a.out.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictorKind {
    Uniform,
    Copy,
    Ngram,
    /// Exact posterior under the corpus's empirical distribution (equal-length sequences).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Elbo,
    Maskgit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Averaging {
    PerPosition,
    PerSequence,
}

#[derive(Args, Debug)]
pub struct DiffLossArgs {
    /// Corpus CSV: one token-id sequence per row.
    #[arg(long)]
    source: PathBuf,
    #[arg(long, value_enum, default_value_t = PredictorKind::Ngram)]
    predictor: PredictorKind,
    #[arg(long, default_value = "linear")]
    schedule: Schedule,
    #[arg(long, default_value = "masked")]
    kernel: Kernel,
    /// Masked-kernel objective.
    #[arg(long, value_enum, default_value_t = Objective::Elbo)]
    objective: Objective,
    /// Vocabulary size; defaults to one more than the largest token id.
    #[arg(long)]
    vocab: Option<usize>,
    /// Add-k smoothing for the n-gram predictor.
    #[arg(long, default_value_t = 0.5)]
    add_k: f64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 10_000)]
    mc: usize,
    /// Evaluate at this noise level instead of sampling it.
    #[arg(long)]
    t: Option<f64>,
    /// Pooling of clean-position losses under the uniform kernel.
    #[arg(long, value_enum, default_value_t = Averaging::PerPosition)]
    clean_averaging: Averaging,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn empirical_source(corpus: &[Vec<u32>], vocab: usize) -> Result<Source> {
    let mut seqs = corpus.to_vec();
    seqs.sort();
    let mut uniq: Vec<Vec<u32>> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    for s in seqs {
        if uniq.last() == Some(&s) {
            *probs.last_mut().expect("nonempty") += 1.0;
        } else {
            uniq.push(s);
            probs.push(1.0);
        }
    }
    let total = corpus.len() as f64;
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Source::new(uniq, probs, vocab)?)
}

pub fn diffuse_loss(a: DiffLossArgs) -> Result<()> {
    let corpus = io::parse_corpus(io::open(&a.source)?).with_context(|| a.source.display().to_string())?;
    ensure!(!corpus.is_empty(), "{}: empty corpus", a.source.display());
    let max_tok = corpus.iter().flatten().copied().max().unwrap_or(0) as usize;
    let vocab = a.vocab.unwrap_or(max_tok + 1);
    ensure!(max_tok < vocab, "token {max_tok} outside vocabulary of {vocab}");
    let predictor: Box<dyn Predictor> = match a.predictor {
        PredictorKind::Uniform => Box::new(UniformPredictor { vocab_size: vocab }),
        PredictorKind::Copy => Box::new(CopyPredictor { vocab_size: vocab }),
        PredictorKind::Ngram => Box::new(NgramPredictor::train(&corpus, vocab, a.add_k)?),
        PredictorKind::Exact => Box::new(ExactPosterior { source: empirical_source(&corpus, vocab)? }),
    };
    let mut opts = McOptions::new(a.mc, a.seed);
    if let Some(t) = a.t {
        opts = opts.at(t);
    }
    opts.clean_averaging = match a.clean_averaging {
        Averaging::PerPosition => CleanAveraging::PerPosition,
        Averaging::PerSequence => CleanAveraging::PerSequence,
    };
    let doc = match (a.kernel, a.objective) {
        (Kernel::Masked, Objective::Elbo) => json!({"kernel": "masked", "objective": "elbo", "loss": elbo_loss(&corpus, &*predictor, &a.schedule, &opts)?}),
        (Kernel::Masked, Objective::Maskgit) => json!({"kernel": "masked", "objective": "maskgit", "loss": maskgit_loss(&corpus, &*predictor, &a.schedule, &opts)?}),
        (Kernel::Uniform, Objective::Elbo) => json!({"kernel": "uniform", "loss": uniform_kernel_loss(&corpus, &*predictor, &a.schedule, &opts)?}),
        (Kernel::Uniform, Objective::Maskgit) => bail!("the maskgit objective applies to the masked kernel only"),
    };
    emit_json(&doc, a.out.as_ref())
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[arg(long, default_value = "linear")]
    kind: Schedule,
    /// Number of points; t runs over (0, 1] in equal steps.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

pub fn diffuse_schedule(a: ScheduleArgs) -> Result<()> {
    ensure!(a.grid >= 1, "--grid must be at least 1");
    let mut t = Table::new(&["t", "alpha", "weight"]);
    for i in 1..=a.grid {
        // The weight is singular at t = 0.
        let ti = i as f64 / a.grid as f64;
        t.push(vec![Cell::Num(ti), Cell::Num(a.kind.alpha(ti)?), Cell::Num(a.kind.weight(ti)?)]);
    }
    emit_table(&t, a.out.out.as_ref(), a.out.format)
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_law)]
    law: LawKind,
    /// Built-in set name or JSON file; `paper` picks the published set for --law.
    #[arg(long, default_value = "paper")]
    coeffs: String,
    /// Log-normal noise scale.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model sizes lo,hi,count.
    #[arg(long, value_delimiter = ',', default_values_t = [1e7, 1e10, 10.0])]
    n_grid: Vec<f64>,
    /// Single-epoch token counts lo,hi,count (compute law).
    #[arg(long, value_delimiter = ',', default_values_t = [1e9, 1e12, 20.0])]
    tokens: Vec<f64>,
    /// Unique-token counts lo,hi,count (repeated-data laws).
    #[arg(long, value_delimiter = ',', default_values_t = [1e8, 1e11, 10.0])]
    unique: Vec<f64>,
    /// Epoch counts lo,hi,count (repeated-data laws).
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e4, 20.0])]
    epochs: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RunsFormat::Csv)]
    format: RunsFormat,
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let c = coeffs::law(&a.coeffs, a.law)?;
    let data = match a.law {
        LawKind::Compute => DataGrid::Tokens(log_grid(&a.tokens, "tokens")?),
        _ => DataGrid::Repeated { unique: log_grid(&a.unique, "unique")?, epochs: log_grid(&a.epochs, "epochs")? },
    };
    let spec = SynthSpec { coefficients: c, n_grid: log_grid(&a.n_grid, "n-grid")?, data, sigma: a.sigma, seed: a.seed };
    let runs = synth_runs(&spec)?;
    let mut w = sink(a.out.as_deref())?;
    io::write_runs(&mut w, &runs, a.format)?;
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// Set to print; lists the available names when omitted.
    name: Option<String>,
}

pub fn coeffs(a: CoeffsArgs) -> Result<()> {
    match a.name {
        None => {
            for n in NAMES.split(", ") {
                println!("{n}");
            }
            Ok(())
        }
        Some(n) => match builtin_coefficients(&n)? {
            Builtin::Law(c) => emit_json(&json!({"law": c.kind(), "coefficients": c}), None),
            Builtin::Frontier(f) => emit_json(&f, None),
        },
    }
}
