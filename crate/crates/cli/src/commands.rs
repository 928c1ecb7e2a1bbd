//! Subcommand implementations. Each stage reads its inputs from the output
//! directory (or explicit paths), writes fixed-name artifacts there, and
//! records itself in the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};
use wdaug_core::augment::bt::{BtAugmenter, RemoteTranslator};
use wdaug_core::augment::eda::{EdaAugmenter, EdaParams, SynonymLexicon};
use wdaug_core::augment::llm::{HttpChatClient, LlmAugmenter, PromptTemplate, API_KEY_ENV};
use wdaug_core::augment::Augmenter;
use wdaug_core::balance::{apply_plan, ApplyError, BalancePlan};
use wdaug_core::classify::tables::{class_deltas, render_class_table, render_summary_table, Average, ValidationSpec};
use wdaug_core::classify::{evaluate, import_external_predictions, metrics, ClassifyError, EvalRun};
use wdaug_core::corpus::{load_corpus, stratified_split, write_corpus, LabeledCorpus};
use wdaug_core::limiter::InFlightLimiter;
use wdaug_core::remote::JsonClient;
use wdaug_core::similarity::report::{pairs_from_corpus, GroupSummary, ReportError};
use wdaug_core::similarity::{similarity_report, BuiltinEmbedder, EmbeddingProvider, RemoteEmbedder, RuleTagger};
use wdaug_core::Label;

use crate::config::{Method, RunConfig};
use crate::manifest::{write_atomic, RunManifest, StageRecord};
use crate::CliError;

pub const PLAN: &str = "plan.json";
pub const TRAIN: &str = "train.jsonl";
pub const TEST: &str = "test.jsonl";
pub const BALANCED: &str = "train_balanced.jsonl";
pub const SIMILARITY: &str = "similarity.csv";
pub const SIMILARITY_SUMMARY: &str = "similarity_summary.json";
pub const ROUGE_SERIES: &str = "similarity_rouge_series.csv";
pub const SEMANTIC_SERIES: &str = "similarity_semantic_series.csv";
pub const EVAL: &str = "eval.json";
pub const REPORT: &str = "report.txt";

/// Effective configuration plus the output directory for one invocation.
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    started_at: String,
}

impl Ctx {
    pub fn new(cfg: RunConfig, out: PathBuf) -> Result<Ctx, CliError> {
        cfg.validate().map_err(CliError::usage)?;
        std::fs::create_dir_all(&out).map_err(|e| CliError::usage(format!("{}: {e}", out.display())))?;
        Ok(Ctx { cfg, out, started_at: now() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finish(&self, stage: &str, counts: BTreeMap<String, usize>, calls: BTreeMap<String, u64>) -> Result<(), CliError> {
        let mut m = RunManifest::load_or_new(&self.out);
        m.record(
            stage,
            StageRecord {
                seed: self.cfg.split.seed,
                started_at: self.started_at.clone(),
                finished_at: now(),
                config: serde_json::to_value(&self.cfg).expect("config serializes"),
                counts,
                provider_calls: calls,
            },
        );
        m.write(&self.out).map_err(|e| CliError::usage(format!("{}: {e}", self.out.display())))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn load(path: &Path) -> Result<LabeledCorpus, CliError> {
    load_corpus(path).map_err(|e| CliError::usage(e.to_string()))
}

fn require(path: &Path, hint: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{}: not found; {hint}", path.display())))
    }
}

fn input_corpus(ctx: &Ctx) -> Result<LabeledCorpus, CliError> {
    let path = ctx
        .cfg
        .paths
        .input
        .as_deref()
        .ok_or_else(|| CliError::usage("no input corpus; set paths.input or pass --input"))?;
    load(path)
}

fn make_plan(ctx: &Ctx, corpus: &LabeledCorpus) -> Result<BalancePlan, CliError> {
    let alpha = corpus.class_counts();
    let plan = match ctx.cfg.split.per_class_test {
        Some(k) => BalancePlan::with_test_size(&alpha, k),
        None => wdaug_core::balance::compute_plan(&alpha),
    };
    plan.map_err(|e| CliError::plan(format!("cannot balance counts {alpha:?}: {e}")))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    write_atomic(path, &bytes).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn label_codes() -> Vec<&'static str> {
    Label::ALL.iter().map(|l| l.code()).collect()
}

pub fn plan(ctx: &Ctx) -> Result<(), CliError> {
    let corpus = input_corpus(ctx)?;
    let plan = make_plan(ctx, &corpus)?;
    print!("{}", plan.render_table(&label_codes()));
    write_json(&ctx.path(PLAN), &plan)?;
    ctx.finish(
        "plan",
        counts(&[
            ("input", corpus.len()),
            ("test", plan.test_total()),
            ("train", plan.train_total() - plan.generated_total()),
            ("balanced", plan.train_total()),
        ]),
        BTreeMap::new(),
    )
}

pub fn split(ctx: &Ctx) -> Result<(), CliError> {
    let corpus = input_corpus(ctx)?;
    let plan = make_plan(ctx, &corpus)?;
    let (train, test) =
        stratified_split(&corpus, plan.test_per_class, ctx.cfg.split.seed).map_err(|e| CliError::usage(e.to_string()))?;
    debug_assert_eq!(train.len() + test.len(), corpus.len());
    for (name, c) in [(TRAIN, &train), (TEST, &test)] {
        write_corpus(c, ctx.path(name)).map_err(|e| CliError::usage(e.to_string()))?;
    }
    write_json(&ctx.path(PLAN), &plan)?;
    println!("train {} records, test {} records ({} per class)", train.len(), test.len(), plan.test_per_class);
    ctx.finish("split", counts(&[("input", corpus.len()), ("train", train.len()), ("test", test.len())]), BTreeMap::new())
}

/// Remote clients share one in-flight cap.
struct Remotes {
    limiter: Arc<InFlightLimiter>,
    client: JsonClient,
}

impl Remotes {
    fn new(cfg: &RunConfig) -> Result<Remotes, CliError> {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        let client = JsonClient::new(Duration::from_secs(cfg.llm.timeout_secs), key)
            .map_err(|e| CliError::usage(format!("http client: {e}")))?;
        Ok(Remotes { limiter: InFlightLimiter::new(cfg.llm.concurrency), client })
    }
}

type CallCounter = Box<dyn Fn() -> BTreeMap<String, u64>>;

fn build_augmenter(ctx: &Ctx) -> Result<(Box<dyn Augmenter>, CallCounter), CliError> {
    let cfg = &ctx.cfg;
    match cfg.augment.method {
        Method::Eda => {
            let params = EdaParams { alpha: cfg.augment.eda_alpha, compose: cfg.augment.eda_compose, ..EdaParams::default() };
            params.validate().map_err(CliError::usage)?;
            let lexicon = match &cfg.paths.lexicon {
                Some(p) => SynonymLexicon::from_path(p).map_err(|e| CliError::usage(e.to_string()))?,
                None => SynonymLexicon::starter(),
            };
            Ok((Box::new(EdaAugmenter::new(params, lexicon)), Box::new(BTreeMap::new)))
        }
        Method::Bt => {
            let endpoint = cfg.bt.endpoint.clone().ok_or_else(|| CliError::usage("bt.endpoint is required for --method bt"))?;
            let r = Remotes::new(cfg)?;
            let t = Arc::new(RemoteTranslator::new(endpoint, r.client, r.limiter));
            let aug = BtAugmenter::new(Box::new(t.clone()), cfg.bt.pivot.clone());
            Ok((Box::new(aug), Box::new(move || BTreeMap::from([("translation".to_string(), t.calls())]))))
        }
        Method::Llm => {
            let params = cfg.llm.gen_params();
            params.validate().map_err(|e| CliError::usage(e.to_string()))?;
            let template = match &cfg.paths.exemplars {
                Some(p) => PromptTemplate::explanation_from_path(p).map_err(|e| CliError::usage(e.to_string()))?,
                None => PromptTemplate::sample_explanation(),
            };
            let r = Remotes::new(cfg)?;
            let http = Arc::new(HttpChatClient::new(cfg.llm.base_url.clone(), None, r.client, r.limiter));
            let aug = LlmAugmenter::new(Box::new(http.clone()), params, template);
            Ok((Box::new(aug), Box::new(move || BTreeMap::from([("llm".to_string(), http.calls())]))))
        }
    }
}

pub fn augment(ctx: &Ctx, force: bool) -> Result<(), CliError> {
    let plan_path = ctx.path(PLAN);
    let train_path = ctx.path(TRAIN);
    require(&plan_path, "run `wdaug split` first")?;
    require(&train_path, "run `wdaug split` first")?;
    let out_path = ctx.path(BALANCED);
    if out_path.exists() && !force {
        return Err(CliError::usage(format!("{} exists; pass --force to overwrite", out_path.display())));
    }
    let raw = std::fs::read_to_string(&plan_path).map_err(|e| CliError::usage(format!("{}: {e}", plan_path.display())))?;
    let plan: BalancePlan =
        serde_json::from_str(&raw).map_err(|e| CliError::plan(format!("{}: {e}", plan_path.display())))?;
    let train = load(&train_path)?;
    let (augmenter, calls) = build_augmenter(ctx)?;

    let balanced = apply_plan(&train, &plan, augmenter.as_ref(), ctx.cfg.split.seed).map_err(|e| match e {
        ApplyError::Augment { .. } => CliError::provider(e.to_string()),
        ApplyError::PlanShape(_) => CliError::plan(e.to_string()),
        _ => CliError::usage(e.to_string()),
    })?;
    let generated = balanced.len() - train.len();

    let tmp = out_path.with_extension("jsonl.tmp");
    if let Err(e) = write_corpus(&balanced, &tmp).and_then(|_| {
        std::fs::rename(&tmp, &out_path).map_err(|source| wdaug_core::corpus::CorpusError::Io { path: out_path.clone(), source })
    }) {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::usage(e.to_string()));
    }
    println!(
        "{}: {} original + {} generated = {} records ({} per class)",
        out_path.display(),
        train.len(),
        generated,
        balanced.len(),
        plan.target_per_class
    );
    ctx.finish(
        "augment",
        counts(&[("train", train.len()), ("generated", generated), ("balanced", balanced.len())]),
        calls(),
    )
}

/// `name=path` pairs from the command line.
pub fn parse_named(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((n, p)) if !n.is_empty() && !p.is_empty() => Ok((n.to_string(), PathBuf::from(p))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

pub fn similarity(ctx: &Ctx, inputs: &[(String, PathBuf)]) -> Result<(), CliError> {
    let named = !inputs.is_empty();
    let inputs: Vec<(String, PathBuf)> = if named { inputs.to_vec() } else { vec![(String::new(), ctx.path(BALANCED))] };
    let corpora = inputs.iter().map(|(_, p)| load(p)).collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::new();
    for ((name, _), corpus) in inputs.iter().zip(&corpora) {
        let group = named.then_some(name.as_str());
        pairs.extend(pairs_from_corpus(corpus, group).map_err(|e| CliError::usage(e.to_string()))?);
    }

    let mut remote = Vec::new();
    if let Some(base) = &ctx.cfg.embed.base_url {
        let r = Remotes::new(&ctx.cfg)?;
        for model in &ctx.cfg.embed.models {
            remote.push(RemoteEmbedder::new(base.clone(), model.clone(), r.client.clone(), r.limiter.clone()));
        }
    }
    let mut providers: Vec<&dyn EmbeddingProvider> = vec![&BuiltinEmbedder];
    providers.extend(remote.iter().map(|p| p as &dyn EmbeddingProvider));

    let report = similarity_report(&pairs, &providers, &RuleTagger).map_err(|e| match e {
        ReportError::Empty => CliError::usage(e.to_string()),
        other => CliError::usage(other.to_string()),
    })?;
    report.write_csv(&ctx.path(SIMILARITY)).map_err(|e| CliError::usage(e.to_string()))?;
    report.write_summary_json(&ctx.path(SIMILARITY_SUMMARY)).map_err(|e| CliError::usage(e.to_string()))?;
    write_text(&ctx.path(ROUGE_SERIES), &report.rouge_series_csv())?;
    write_text(&ctx.path(SEMANTIC_SERIES), &report.similarity_series_csv())?;
    print!("{}", render_similarity(&report.providers, &report.summaries));
    let text_pairs = report.rows.iter().filter(|r| r.field.as_str() == "text").count();
    ctx.finish("similarity", counts(&[("pairs", text_pairs), ("rows", report.rows.len())]), BTreeMap::new())
}

fn render_similarity(providers: &[String], summaries: &[GroupSummary]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<12} {:<11} {:>5} {:>7} {:>7} {:>7}", "Method", "Field", "N", "R-1", "R-2", "R-L");
    for p in providers {
        let _ = write!(out, " {:>16}", format!("cos:{p}"));
    }
    let _ = writeln!(out, " {:>7}", "POS");
    for s in summaries {
        let _ = write!(
            out,
            "{:<12} {:<11} {:>5} {:>7.4} {:>7.4} {:>7.4}",
            s.group,
            s.field.as_str(),
            s.count,
            s.rouge1,
            s.rouge2,
            s.rouge_l
        );
        for p in providers {
            match s.semantic.get(p).copied().flatten() {
                Some(v) => {
                    let _ = write!(out, " {v:>16.4}");
                }
                None => {
                    let _ = write!(out, " {:>16}", "-");
                }
            }
        }
        let _ = writeln!(out, " {:>7.4}", s.syntactic);
    }
    out
}

pub struct EvaluateArgs {
    pub train: Vec<(String, PathBuf)>,
    pub external: Vec<(String, PathBuf)>,
    pub test: Option<PathBuf>,
}

fn external_run(name: &str, path: &Path, test: &LabeledCorpus) -> Result<EvalRun, ClassifyError> {
    let cm = import_external_predictions(path, test)?;
    Ok(EvalRun {
        name: name.to_string(),
        train_size: 0,
        fit_size: 0,
        validation_mode: None,
        validation_size: 0,
        validation_accuracy: None,
        test_size: test.len(),
        report: metrics(&cm)?,
    })
}

pub fn evaluate_cmd(ctx: &Ctx, args: &EvaluateArgs) -> Result<(), CliError> {
    let test_path = args.test.clone().unwrap_or_else(|| ctx.path(TEST));
    require(&test_path, "run `wdaug split` first or pass --test")?;
    let test = load(&test_path)?;

    let mut trains = args.train.clone();
    if trains.is_empty() && args.external.is_empty() {
        let original = ctx.path(TRAIN);
        require(&original, "run `wdaug split` first or pass --train NAME=PATH")?;
        trains.push(("Original".into(), original));
        if ctx.path(BALANCED).is_file() {
            trains.push(("Balanced".into(), ctx.path(BALANCED)));
        }
    }

    let split = &ctx.cfg.split;
    let validation = (split.validation_fraction > 0.0).then_some(ValidationSpec {
        fraction: split.validation_fraction,
        mode: split.validation_mode,
        seed: split.seed,
    });
    let mut runs = Vec::new();
    for (name, path) in &trains {
        let corpus = load(path)?;
        let run = evaluate(name, &corpus, &test, ctx.cfg.report.smoothing, validation)
            .map_err(|e| CliError::usage(format!("{name}: {e}")))?;
        runs.push(run);
    }
    for (name, path) in &args.external {
        runs.push(external_run(name, path, &test).map_err(|e| CliError::usage(format!("{name}: {e}")))?);
    }

    let average: Average = ctx.cfg.report.average.into();
    print!("{}", render_summary_table(&runs, average));
    let mut comparisons = Vec::new();
    if let Some((base, others)) = runs.split_first() {
        for other in others {
            println!();
            print!("{}", render_class_table(base, other));
            comparisons.push(json!({
                "base": base.name,
                "other": other.name,
                "classes": class_deltas(&base.report, &other.report),
            }));
        }
    }
    write_json(
        &ctx.path(EVAL),
        &json!({ "average_shown": average.as_str(), "runs": runs, "class_comparisons": comparisons }),
    )?;
    ctx.finish("evaluate", counts(&[("test", test.len()), ("runs", runs.len())]), BTreeMap::new())
}

fn read_json(path: &Path) -> Result<Option<Value>, CliError> {
    match std::fs::read_to_string(path) {
        Ok(raw) => serde_json::from_str(&raw).map(Some).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        Err(_) => Ok(None),
    }
}

/// Merge earlier stage outputs into one plain-text report.
pub fn report(ctx: &Ctx) -> Result<(), CliError> {
    let plan = read_json(&ctx.path(PLAN))?;
    let eval = read_json(&ctx.path(EVAL))?;
    let sim = read_json(&ctx.path(SIMILARITY_SUMMARY))?;
    if plan.is_none() && eval.is_none() && sim.is_none() {
        return Err(CliError::usage(format!("{}: no stage outputs to report on", ctx.out.display())));
    }
    let mut out = String::new();
    let mut sections = 0;

    if let Some(plan) = plan {
        let plan: BalancePlan = serde_json::from_value(plan).map_err(|e| CliError::usage(format!("{PLAN}: {e}")))?;
        let _ = writeln!(out, "== Balance plan ==\n{}", plan.render_table(&label_codes()));
        sections += 1;
    }
    if let Some(eval) = eval {
        let runs: Vec<EvalRun> =
            serde_json::from_value(eval["runs"].clone()).map_err(|e| CliError::usage(format!("{EVAL}: {e}")))?;
        let average: Average = ctx.cfg.report.average.into();
        let _ = writeln!(out, "== Classifier comparison ==\n{}", render_summary_table(&runs, average));
        if let Some((base, others)) = runs.split_first() {
            for other in others {
                let _ = writeln!(out, "== Class-wise: {} vs {} ==\n{}", base.name, other.name, render_class_table(base, other));
            }
        }
        sections += 1;
    }
    if let Some(sim) = sim {
        let providers: Vec<String> = serde_json::from_value(sim["providers"].clone()).unwrap_or_default();
        let summaries: Vec<GroupSummary> = serde_json::from_value(sim["methods"].clone())
            .map_err(|e| CliError::usage(format!("{SIMILARITY_SUMMARY}: {e}")))?;
        let _ = writeln!(
            out,
            "== Similarity to parent records ==\n{}\nseries: {ROUGE_SERIES}, {SEMANTIC_SERIES}\n",
            render_similarity(&providers, &summaries)
        );
        sections += 1;
    }
    write_text(&ctx.path(REPORT), &out)?;
    print!("{out}");
    ctx.finish("report", counts(&[("sections", sections)]), BTreeMap::new())
}
