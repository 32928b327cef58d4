use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use entity_profile::classify::{
    build_training_set, select_model, train, ClassifierKind, ClassifierModel, Hyperparameters,
    MaxFeatures, SelectionOptions,
};
use entity_profile::corrupt::{
    corrupt, make_queries, synthetic_benchmark, CorruptionPlan, SyntheticConfig,
};
use entity_profile::eval::compare_runs;
use entity_profile::model::{
    load_dataset, load_queries, load_truth, validate, write_queries, write_records, write_truth,
    Dataset, Schema,
};
use entity_profile::pipeline::{self, EvaluationReport, RatingMode, RunConfig};
use entity_profile::profile::{
    traces_json, trust_per_source, write_profiles, FilledSlotPolicy, OracleResolver, Profiler,
    Resolver,
};
use entity_profile::similarity::{EditDistance, EmbeddingStore, SimilarityModel, TextSimilarity};
use entity_profile::sources::{
    build_source_similarity_matrix, trustworthiness_scores, SourceSimilarityMatrix,
};
use entity_profile::{Error, Result};

#[derive(Parser)]
#[command(name = "entity-profile", version, about = "Complete partial entity profiles from multi-source records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check input files against the schema
    Validate(DataArgs),
    /// Build the source-similarity matrix
    Simmatrix(MatrixArgs),
    /// Compute source trustworthiness and ratings
    Rate(RateArgs),
    /// Train a resolution classifier
    Train(TrainArgs),
    /// Compare all classifier kinds and keep the best
    SelectModel(TrainArgs),
    /// Complete profiles for the queries
    Profile(ProfileArgs),
    /// Run the full pipeline and write a report
    Evaluate(EvaluateArgs),
    /// Inject errors and ambiguities into a dataset
    Corrupt(CorruptArgs),
    /// Paired t-test between two evaluation reports
    Ttest(TtestArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Word vectors for text similarity; edit distance when absent
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RatingArgs {
    #[arg(long, conflicts_with = "uniform_ratings", requires = "bias_value")]
    biased_source: Option<String>,
    #[arg(long, requires = "biased_source")]
    bias_value: Option<f64>,
    #[arg(long)]
    uniform_ratings: bool,
}

impl RatingArgs {
    fn mode(&self) -> Result<RatingMode> {
        match (&self.biased_source, self.bias_value, self.uniform_ratings) {
            (Some(source), Some(value), false) => Ok(RatingMode::Biased {
                source: source.clone(),
                value,
            }),
            (None, None, true) => Ok(RatingMode::Uniform),
            _ => Err(Error::InvalidArgument(
                "pass either --biased-source and --bias-value, or --uniform-ratings".into(),
            )),
        }
    }
}

#[derive(Args)]
struct RateArgs {
    /// Precomputed matrix CSV; built from --schema/--records otherwise
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, requires = "records")]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    records: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    ratings: RatingArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, default_value = "forest")]
    classifier: ClassifierKind,
    #[arg(long, default_value_t = 10)]
    trees: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
}

impl ClassifierArgs {
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            n_trees: self.trees,
            k: self.k,
            max_features: MaxFeatures::Sqrt,
            ..Hyperparameters::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long, default_value_t = 0.8)]
    classifier_split: f64,
    #[arg(long, default_value_t = 0.7)]
    query_split: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Trained model JSON
    #[arg(long, required_unless_present = "oracle")]
    model: Option<PathBuf>,
    /// Resolve by entity_id annotations instead of a model
    #[arg(long, conflicts_with = "model")]
    oracle: bool,
    #[command(flatten)]
    ratings: RatingArgs,
    /// Reselect attributes the query already fills
    #[arg(long)]
    reselect_filled: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[command(flatten)]
    ratings: RatingArgs,
    #[arg(long, default_value_t = 0.8)]
    classifier_split: f64,
    #[arg(long, default_value_t = 0.7)]
    query_split: f64,
    #[arg(long)]
    reselect_filled: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long, requires = "records")]
    schema: Option<PathBuf>,
    /// Clean records to corrupt
    #[arg(long, conflicts_with = "synthetic")]
    records: Option<PathBuf>,
    /// Generate this many synthetic entities instead of reading records
    #[arg(long)]
    synthetic: Option<usize>,
    /// Source count for --synthetic
    #[arg(long, default_value_t = 4)]
    sources: usize,
    #[arg(long, default_value_t = 0.0)]
    error_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    ambiguity_rate: f64,
    /// Also write one query per entity with this many attributes filled
    #[arg(long)]
    filled: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TtestArgs {
    /// First report
    a: PathBuf,
    /// Second report
    b: PathBuf,
    /// Optional JSON output file
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Inputs {
    schema: Schema,
    dataset: Dataset,
    text: Box<dyn TextSimilarity>,
}

impl Inputs {
    fn load(args: &DataArgs) -> Result<Inputs> {
        let schema = Schema::load(&args.schema)?;
        let mut dataset = load_dataset(&args.records, &schema)?;
        if let Some(q) = &args.queries {
            dataset = dataset.with_queries(load_queries(q, &schema)?);
        }
        if let Some(t) = &args.truth {
            dataset = dataset.with_truth(load_truth(t, &schema)?);
        }
        Ok(Inputs {
            schema,
            dataset,
            text: text_backend(args.embeddings.as_deref())?,
        })
    }

    fn similarity(&self) -> SimilarityModel<'_> {
        SimilarityModel::new(&self.schema, self.text.as_ref())
    }

    fn require_queries(&self) -> Result<()> {
        if self.dataset.queries.is_empty() {
            return Err(Error::InvalidArgument("--queries is required and must not be empty".into()));
        }
        Ok(())
    }

    fn matrix(&self, path: Option<&Path>) -> Result<SourceSimilarityMatrix> {
        match path {
            Some(p) => SourceSimilarityMatrix::load(p),
            None => build_source_similarity_matrix(&self.dataset, &self.similarity()),
        }
    }
}

fn text_backend(path: Option<&Path>) -> Result<Box<dyn TextSimilarity>> {
    Ok(match path {
        Some(p) => Box::new(EmbeddingStore::load(p)?),
        None => Box::new(EditDistance),
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Io { path, source: e })?;
    Ok(BufWriter::new(file))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::Io {
            path: dir.join(name),
            source: e,
        })
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    write_text(dir, name, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn cmd_validate(args: &DataArgs) -> Result<bool> {
    let inputs = Inputs::load(args)?;
    let violations = validate(&inputs.dataset);
    for v in &violations {
        eprintln!("{v}");
    }
    let ds = &inputs.dataset;
    println!(
        "{} records, {} sources, {} queries, {} truth rows, {} violations",
        ds.records.len(),
        ds.sources.len(),
        ds.queries.len(),
        ds.truth.len(),
        violations.len()
    );
    Ok(violations.is_empty())
}

fn cmd_simmatrix(args: &MatrixArgs) -> Result<()> {
    let inputs = Inputs::load(&args.data)?;
    let matrix = inputs.matrix(None)?;
    matrix.write_csv(create(&args.out, "matrix.csv")?)?;
    println!("wrote {}", args.out.join("matrix.csv").display());
    Ok(())
}

#[derive(Serialize)]
struct RatingsFile<'a> {
    trust: &'a entity_profile::sources::TrustReport,
    ratings: &'a entity_profile::sources::SourceRatings,
}

fn cmd_rate(args: &RateArgs) -> Result<()> {
    let matrix = match (&args.matrix, &args.schema, &args.records) {
        (Some(m), _, _) => SourceSimilarityMatrix::load(m)?,
        (None, Some(schema), Some(records)) => {
            let inputs = Inputs::load(&DataArgs {
                schema: schema.clone(),
                records: records.clone(),
                queries: None,
                truth: None,
                embeddings: args.embeddings.clone(),
            })?;
            inputs.matrix(None)?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "pass --matrix, or --schema and --records".into(),
            ))
        }
    };
    let trust = trustworthiness_scores(&matrix)?;
    let ratings = args.ratings.mode()?.ratings(&matrix)?;
    write_json(&args.out, "ratings.json", &RatingsFile { trust: &trust, ratings: &ratings })?;
    println!("most trustworthy source: {}", trust.most_trustworthy());
    for (i, s) in matrix.source_order.iter().enumerate() {
        println!("{s}\ttrust {:.4}\trating {:.4}", trust.trust[i], ratings.ratings[i]);
    }
    Ok(())
}

fn training_examples(
    inputs: &Inputs,
    args: &TrainArgs,
) -> Result<Vec<entity_profile::classify::LabeledExample>> {
    inputs.require_queries()?;
    let matrix = inputs.matrix(args.matrix.as_deref())?;
    let trust = trustworthiness_scores(&matrix)?;
    let trust = trust_per_source(&inputs.dataset, &trust)?;
    let set = build_training_set(&inputs.dataset, &inputs.similarity(), &trust, args.query_split, args.seed)?;
    Ok(set.train)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let inputs = Inputs::load(&args.data)?;
    let examples = training_examples(&inputs, args)?;
    let hp = args.classifier.hyperparameters();
    let options = SelectionOptions {
        train_fraction: args.classifier_split,
        cv_folds: None,
    };
    let table = select_model(&examples, &[args.classifier.classifier], hp, args.seed, options)?;
    let model = train(args.classifier.classifier, &examples, hp, args.seed)?;
    write_text(&args.out, "model.json", &model.to_json()?)?;
    write_json(&args.out, "metrics.json", &table.rows)?;
    print_rows(&table.rows);
    Ok(())
}

fn print_rows(rows: &[entity_profile::classify::MetricRow]) {
    println!("classifier\tf1\tcv_error\troc_auc\tmcc");
    for r in rows {
        let cv = r.cv_error.map_or("-".to_string(), |e| format!("{e:.4}"));
        println!("{}\t{:.4}\t{cv}\t{:.4}\t{:.4}", r.kind, r.f1, r.roc_auc, r.mcc);
    }
}

fn cmd_select_model(args: &TrainArgs) -> Result<()> {
    let inputs = Inputs::load(&args.data)?;
    let examples = training_examples(&inputs, args)?;
    let hp = args.classifier.hyperparameters();
    let options = SelectionOptions {
        train_fraction: args.classifier_split,
        cv_folds: Some(10.min(examples.len())),
    };
    let selection = select_model(&examples, &ClassifierKind::ALL, hp, args.seed, options)?;
    let model = train(selection.best, &examples, hp, args.seed)?;
    write_text(&args.out, "model.json", &model.to_json()?)?;
    write_json(&args.out, "selection.json", &selection)?;
    print_rows(&selection.rows);
    println!("best: {}", selection.best);
    Ok(())
}

fn cmd_profile(args: &ProfileArgs) -> Result<()> {
    let inputs = Inputs::load(&args.data)?;
    inputs.require_queries()?;
    let matrix = inputs.matrix(args.matrix.as_deref())?;
    let trust = trustworthiness_scores(&matrix)?;
    let ratings = args.ratings.mode()?.ratings(&matrix)?;
    let policy = if args.reselect_filled {
        FilledSlotPolicy::Reselect
    } else {
        FilledSlotPolicy::Keep
    };
    let profiler = Profiler::new(&inputs.dataset, inputs.similarity(), &matrix, &trust, &ratings)?
        .with_policy(policy);
    let model;
    let resolver: &dyn Resolver = match &args.model {
        Some(path) => {
            model = ClassifierModel::load(path)?;
            &model
        }
        None => &OracleResolver,
    };
    let queries: Vec<_> = inputs.dataset.queries.iter().collect();
    let profiles = profiler.complete_all(&queries, resolver)?;
    write_profiles(create(&args.out, "profiles.csv")?, &inputs.schema, &profiles)?;
    write_text(&args.out, "traces.json", &traces_json(&profiles)?)?;
    println!("wrote {} profiles to {}", profiles.len(), args.out.join("profiles.csv").display());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let inputs = Inputs::load(&args.data)?;
    inputs.require_queries()?;
    if inputs.dataset.truth.is_empty() {
        return Err(Error::InvalidArgument("--truth is required for evaluate".into()));
    }
    let matrix = match &args.matrix {
        Some(p) => Some(SourceSimilarityMatrix::load(p)?),
        None => None,
    };
    let config = RunConfig {
        seed: args.seed,
        classifier: args.classifier.classifier,
        hyperparameters: args.classifier.hyperparameters(),
        classifier_split: args.classifier_split,
        query_split: args.query_split,
        ratings: args.ratings.mode()?,
        policy: if args.reselect_filled {
            FilledSlotPolicy::Reselect
        } else {
            FilledSlotPolicy::Keep
        },
    };
    let outcome = pipeline::run(&inputs.dataset, &inputs.similarity(), &config, matrix)?;
    write_text(&args.out, "report.json", &outcome.report.to_json()?)?;
    write_profiles(create(&args.out, "profiles.csv")?, &inputs.schema, &outcome.profiles)?;
    let m = &outcome.report.metrics;
    println!(
        "{} test queries: precision {:.4} recall {:.4} accuracy {:.4}",
        m.queries, m.precision, m.recall, m.accuracy
    );
    if let Some(ab) = &outcome.report.ablation {
        println!("uniform ratings accuracy {:.4}", ab.uniform.accuracy);
    }
    Ok(())
}

fn cmd_corrupt(args: &CorruptArgs) -> Result<()> {
    let plan = CorruptionPlan::new(args.error_rate, args.ambiguity_rate, args.seed)?;
    let (clean, entities) = match (&args.synthetic, &args.schema, &args.records) {
        (Some(n), _, _) => {
            let mut config = SyntheticConfig::uniform(*n, args.sources, 0.0, 0.0, args.seed);
            if let Some(f) = args.filled {
                config.filled = f;
            }
            let bench = synthetic_benchmark(&config)?;
            (bench.dataset, bench.entities)
        }
        (None, Some(schema), Some(records)) => {
            let schema = Schema::load(schema)?;
            let ds = load_dataset(records, &schema)?;
            let mut entities = std::collections::BTreeMap::new();
            for r in &ds.records {
                if let Some(e) = &r.entity_id {
                    entities.entry(e.clone()).or_insert_with(|| r.values.clone());
                }
            }
            (ds, entities)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "pass --schema and --records, or --synthetic N".into(),
            ))
        }
    };
    let noisy = corrupt(&clean, &plan)?;
    write_records(create(&args.out, "records.csv")?, &noisy)?;
    write_text(&args.out, "schema.txt", &noisy.schema.to_schema_text())?;
    if let Some(filled) = args.filled {
        let qs = make_queries(&entities, noisy.schema.len(), filled, args.seed)?;
        write_queries(create(&args.out, "queries.csv")?, &noisy.schema, &qs.queries)?;
        write_truth(create(&args.out, "truth.csv")?, &noisy.schema, &qs.truth)?;
    }
    println!("wrote {} records to {}", noisy.records.len(), args.out.display());
    Ok(())
}

fn cmd_ttest(args: &TtestArgs) -> Result<()> {
    let a = EvaluationReport::load(&args.a)?;
    let b = EvaluationReport::load(&args.b)?;
    let rows = compare_runs(&a.per_query, &b.per_query)?;
    println!("metric\tmean_a\tmean_b\tt\tp\teffect");
    for r in &rows {
        match &r.test {
            Some(t) => println!(
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.5}\t{:.4}",
                r.metric, r.mean_a, r.mean_b, t.t_value, t.p_value, t.effect_size
            ),
            None => println!("{}\t{:.4}\t{:.4}\t-\t-\t-", r.metric, r.mean_a, r.mean_b),
        }
    }
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&rows)? + "\n";
        fs::write(out, text).map_err(|e| Error::Io {
            path: out.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Simmatrix(a) => cmd_simmatrix(a).map(|_| true),
        Command::Rate(a) => cmd_rate(a).map(|_| true),
        Command::Train(a) => cmd_train(a).map(|_| true),
        Command::SelectModel(a) => cmd_select_model(a).map(|_| true),
        Command::Profile(a) => cmd_profile(a).map(|_| true),
        Command::Evaluate(a) => cmd_evaluate(a).map(|_| true),
        Command::Corrupt(a) => cmd_corrupt(a).map(|_| true),
        Command::Ttest(a) => cmd_ttest(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Parse { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
