//! Command line front end for the storygraph pipeline.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 I/O error.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::exit;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};

use storygraph::embedding::{self, EmbeddingModel, LossVariant, TrainConfig};
use storygraph::graph_ops::{self, underlying_graph};
use storygraph::kg::{Mode, Pattern};
use storygraph::linkpred;
use storygraph::topics::{coverage_stats, fit_topics, generate_corpus};
use storygraph::tsne::{tsne_project, TsneConfig};
use storygraph::{EntityId, Fact, KnowledgeGraph, Ontology, RelationId};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "storygraph",
    version,
    about = "Build and mine narrative knowledge graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a fact CSV and ontology into a graph archive; print stats.
    Ingest(IngestArgs),
    /// List facts matching a triple pattern.
    Query(QueryArgs),
    /// Emit the DOT subgraph of one character.
    Subgraph(SubgraphArgs),
    /// Export the graph as DOT or N-Triples.
    Export(ExportArgs),
    /// Reify facts into statement entities with annotations.
    Reify(ReifyArgs),
    /// Train translational embeddings and write the model CSV.
    Embed(EmbedArgs),
    /// Project an embedding to 2D with t-SNE.
    Project(ProjectArgs),
    /// Random-walk corpus, TF-IDF and NMF topics.
    Topics(TopicsArgs),
    /// Score one triple and rank it among all candidate tails.
    Predict(PredictArgs),
    /// Split, train and report link-prediction metrics.
    Eval(EvalArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Fact CSV (header: subject,predicate,object,episode,timestamp,revealed_by).
    #[arg(long)]
    facts: PathBuf,
    /// Ontology file; omit for an empty ontology.
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Reject relations the ontology does not declare.
    #[arg(long)]
    strict: bool,
    /// Materialize symmetric/inverse closure before saving.
    #[arg(long)]
    closure: bool,
    /// Archive file to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long)]
    subject: Option<String>,
    #[arg(long)]
    predicate: Option<String>,
    #[arg(long)]
    object: Option<String>,
    /// Hide closure-derived facts.
    #[arg(long)]
    asserted_only: bool,
}

#[derive(Args)]
struct SubgraphArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Entity whose facts to keep.
    #[arg(long)]
    character: String,
    /// Also keep facts with the character in object position.
    #[arg(long)]
    include_object_facts: bool,
    /// Omit occurs_at facts and their time tokens.
    #[arg(long)]
    suppress_temporal: bool,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("format").required(true).args(["dot", "ntriples"])))]
struct ExportArgs {
    #[arg(long)]
    archive: PathBuf,
    /// DOT output.
    #[arg(long)]
    dot: bool,
    /// N-Triples output.
    #[arg(long)]
    ntriples: bool,
    /// Omit occurs_at facts and their time tokens (DOT only).
    #[arg(long)]
    suppress_temporal: bool,
    /// Base IRI for N-Triples terms.
    #[arg(long, default_value = "http://example.org/kg")]
    base_iri: String,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["subject", "annotated"])))]
struct ReifyArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Subject of the fact to reify (with --predicate and --object).
    #[arg(long, requires = "predicate", requires = "object")]
    subject: Option<String>,
    #[arg(long)]
    predicate: Option<String>,
    #[arg(long)]
    object: Option<String>,
    /// Time token to attach, e.g. E06.
    #[arg(long)]
    occurs_at: Option<String>,
    /// Entity that revealed the fact.
    #[arg(long)]
    revealed_by: Option<String>,
    /// Reify every fact carrying episode or revealed_by annotations;
    /// episodes become `E<nn>` time tokens.
    #[arg(long)]
    annotated: bool,
    /// Archive file to write.
    #[arg(long, short)]
    out: PathBuf,
}

/// Training settings. Precedence: built-in defaults, then `--config`
/// key=value entries, then explicit flags.
#[derive(Args)]
struct TrainArgs {
    /// Embedding dimension [default: 200].
    #[arg(long)]
    dim: Option<usize>,
    /// Training epochs [default: 200].
    #[arg(long)]
    epochs: Option<usize>,
    /// SGD step size [default: 0.01].
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Margin of the hinge loss [default: 1].
    #[arg(long)]
    margin: Option<f64>,
    /// Positives per mini batch [default: 32].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Corrupted triples per positive [default: 4].
    #[arg(long)]
    negatives: Option<usize>,
    /// Pair loss: hinge or raw (unclamped difference) [default: hinge].
    #[arg(long)]
    loss: Option<String>,
    /// Train on closure-derived facts too.
    #[arg(long)]
    include_derived: bool,
    /// RNG seed [default: 7].
    #[arg(long)]
    seed: Option<u64>,
    /// key=value file supplying any of the settings above.
    #[arg(long)]
    config: Option<PathBuf>,
}

struct ResolvedTrain {
    dim: usize,
    config: TrainConfig,
}

impl ResolvedTrain {
    fn header_params(&self) -> String {
        let c = &self.config;
        format!(
            "dim={} epochs={} learning_rate={} margin={} batch_size={} negatives={} loss={} include_derived={} seed={}",
            self.dim,
            c.epochs,
            c.learning_rate,
            c.margin,
            c.batch_size,
            c.negatives_per_positive,
            c.loss.name(),
            c.include_derived,
            c.seed
        )
    }
}

impl TrainArgs {
    fn resolve(&self) -> Result<ResolvedTrain> {
        let mut dim = 200usize;
        let mut config = TrainConfig::default();

        if let Some(path) = &self.config {
            let text = read_file(path)?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').with_context(|| {
                    format!("{}:{}: expected key=value", path.display(), idx + 1)
                })?;
                let (key, value) = (key.trim(), value.trim());
                let context = || format!("{}:{}: bad value for `{key}`", path.display(), idx + 1);
                match key {
                    "dim" => dim = value.parse().with_context(context)?,
                    "epochs" => config.epochs = value.parse().with_context(context)?,
                    "learning_rate" => {
                        config.learning_rate = value.parse().with_context(context)?
                    }
                    "margin" => config.margin = value.parse().with_context(context)?,
                    "batch_size" => config.batch_size = value.parse().with_context(context)?,
                    "negatives" => {
                        config.negatives_per_positive = value.parse().with_context(context)?
                    }
                    "loss" => config.loss = LossVariant::parse(value)?,
                    "include_derived" => {
                        config.include_derived = value.parse().with_context(context)?
                    }
                    "seed" => config.seed = value.parse().with_context(context)?,
                    other => bail!(
                        "{}:{}: unknown config key `{other}`",
                        path.display(),
                        idx + 1
                    ),
                }
            }
        }

        if let Some(v) = self.dim {
            dim = v;
        }
        if let Some(v) = self.epochs {
            config.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            config.learning_rate = v;
        }
        if let Some(v) = self.margin {
            config.margin = v;
        }
        if let Some(v) = self.batch_size {
            config.batch_size = v;
        }
        if let Some(v) = self.negatives {
            config.negatives_per_positive = v;
        }
        if let Some(v) = &self.loss {
            config.loss = LossVariant::parse(v)?;
        }
        if self.include_derived {
            config.include_derived = true;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        Ok(ResolvedTrain { dim, config })
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    archive: PathBuf,
    #[command(flatten)]
    train: TrainArgs,
    /// Model CSV to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    /// Model CSV written by `embed`.
    #[arg(long)]
    model: PathBuf,
    /// Target perplexity (default: 30, clamped to (n-1)/3).
    #[arg(long)]
    perplexity: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 200.0)]
    tsne_learning_rate: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Project relation vectors alongside entities.
    #[arg(long)]
    include_relations: bool,
    /// Projection CSV to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct TopicsArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Number of walk documents.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Steps per walk.
    #[arg(long, default_value_t = 50)]
    len: usize,
    /// Number of topics (NMF rank).
    #[arg(long, short = 'r', alias = "r", default_value_t = 25)]
    topics: usize,
    /// NMF iteration cap.
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Tokens listed per topic.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Walk over closure-derived facts too.
    #[arg(long)]
    include_derived: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Topics CSV to write.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the walk corpus, one document per line.
    #[arg(long)]
    corpus_out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Model CSV written by `embed`.
    #[arg(long)]
    model: PathBuf,
    /// Triple to score, comma separated: subject,predicate,object.
    #[arg(long)]
    triple: String,
    /// Plausibility threshold (default: median score of known facts).
    #[arg(long)]
    tau: Option<f64>,
    /// Rank without filtering known competitors.
    #[arg(long)]
    raw: bool,
    /// Restrict candidates to entities compatible with the relation's
    /// declared range.
    #[arg(long)]
    typed_candidates: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Train fraction of the asserted facts.
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    #[command(flatten)]
    train: TrainArgs,
    /// Evaluate without filtering known competitors.
    #[arg(long)]
    raw: bool,
    /// Also write the report as CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            exit(1);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        exit(exit_code(&e));
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if let Some(storygraph::Error::Io(_)) = cause.downcast_ref::<storygraph::Error>() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Query(args) => cmd_query(args),
        Command::Subgraph(args) => cmd_subgraph(args),
        Command::Export(args) => cmd_export(args),
        Command::Reify(args) => cmd_reify(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Project(args) => cmd_project(args),
        Command::Topics(args) => cmd_topics(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn write_or_print(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    let text = read_file(path)?;
    KnowledgeGraph::load_archive(&text)
        .with_context(|| format!("loading archive {}", path.display()))
}

fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let text = read_file(path)?;
    EmbeddingModel::from_csv(&text).with_context(|| format!("loading model {}", path.display()))
}

fn header(command: &str, params: &str) -> String {
    format!("# storygraph v{VERSION}\n# command: {command}\n# params: {params}\n")
}

fn print_stats(kg: &KnowledgeGraph) {
    let stats = kg.stats();
    println!("entities: {}", stats.entity_count);
    println!("relations: {}", stats.relation_count);
    println!("asserted facts: {}", stats.asserted_fact_count);
    println!("derived facts: {}", stats.derived_fact_count);
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let ontology = match &args.ontology {
        Some(path) => {
            let text = read_file(path)?;
            Ontology::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Ontology::new(),
    };
    let facts_text = read_file(&args.facts)?;
    let mode = if args.strict {
        Mode::Strict
    } else {
        Mode::Permissive
    };
    let mut kg = KnowledgeGraph::ingest_csv(&facts_text, ontology, mode)
        .with_context(|| format!("ingesting {}", args.facts.display()))?;
    if args.closure {
        kg.apply_ontology_closure();
    }
    for warning in kg.warnings() {
        eprintln!("warning: {warning}");
    }
    write_file(&args.out, &kg.save_archive())?;
    print_stats(&kg);
    Ok(())
}

fn format_fact(sf: &storygraph::StoredFact) -> String {
    let f = &sf.fact;
    let mut line = format!("{} {} {}", f.subject, f.predicate, f.object);
    if let Some(ep) = f.episode {
        line.push_str(&format!(" episode={ep}"));
    }
    if let Some(ts) = f.timestamp {
        line.push_str(&format!(" timestamp={ts}"));
    }
    if let Some(by) = &f.revealed_by {
        line.push_str(&format!(" revealed_by={by}"));
    }
    if sf.derived {
        line.push_str(" derived");
    }
    line
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let pattern = Pattern {
        subject: args.subject.as_deref().map(EntityId::new).transpose()?,
        predicate: args.predicate.as_deref().map(RelationId::new).transpose()?,
        object: args.object.as_deref().map(EntityId::new).transpose()?,
    };
    for sf in kg.query(&pattern) {
        if args.asserted_only && sf.derived {
            continue;
        }
        println!("{}", format_fact(sf));
    }
    Ok(())
}

fn cmd_subgraph(args: SubgraphArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let who = EntityId::new(&args.character)?;
    let sub = graph_ops::character_subgraph(&kg, &who, !args.include_object_facts)?;
    let dot = graph_ops::export_dot(&sub, args.suppress_temporal);
    write_or_print(args.out.as_ref(), &dot)
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let text = if args.dot {
        graph_ops::export_dot(&kg, args.suppress_temporal)
    } else {
        kg.export_ntriples(&args.base_iri)
    };
    write_or_print(args.out.as_ref(), &text)
}

fn cmd_reify(args: ReifyArgs) -> Result<()> {
    let mut kg = load_graph(&args.archive)?;
    let mut count = 0usize;
    if args.annotated {
        let annotated: Vec<Fact> = kg
            .facts()
            .iter()
            .filter(|sf| sf.fact.episode.is_some() || sf.fact.revealed_by.is_some())
            .map(|sf| sf.fact.clone())
            .collect();
        for fact in annotated {
            let occurs_at = fact
                .episode
                .map(|ep| EntityId::new(&format!("E{ep:02}")))
                .transpose()?;
            kg.reify(&fact.key(), occurs_at, fact.revealed_by.clone())?;
            count += 1;
        }
    } else {
        let fact = Fact::from_labels(
            args.subject.as_deref().unwrap(),
            args.predicate.as_deref().unwrap(),
            args.object.as_deref().unwrap(),
        )?;
        let occurs_at = args.occurs_at.as_deref().map(EntityId::new).transpose()?;
        let revealed_by = args.revealed_by.as_deref().map(EntityId::new).transpose()?;
        kg.reify(&fact.key(), occurs_at, revealed_by)?;
        count += 1;
    }
    write_file(&args.out, &kg.save_archive())?;
    println!("reified {count} statement(s)");
    print_stats(&kg);
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let resolved = args.train.resolve()?;
    let config = resolved.config.clone();
    let mut model = embedding::init_model(&kg, resolved.dim, config.seed)?;
    let initial = embedding::mean_positive_score(&model, &kg, config.include_derived)?;
    let history = embedding::train(&mut model, &kg, &config)?;
    let trained = embedding::mean_positive_score(&model, &kg, config.include_derived)?;

    let mut content = header("embed", &resolved.header_params());
    content.push_str(&model.to_csv());
    write_file(&args.out, &content)?;

    println!(
        "trained {} entities + {} relations for {} epochs (seed {})",
        model.entity_count(),
        model.relations().len(),
        config.epochs,
        config.seed
    );
    println!(
        "mean positive score: {initial:.6} -> {trained:.6}; final epoch loss {:.6}",
        history.last().copied().unwrap_or(0.0)
    );
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let mut rows: Vec<(String, &str)> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for (label, vec) in model.entities() {
        rows.push((label.to_string(), "entity"));
        vectors.push(vec.clone());
    }
    if args.include_relations {
        for (label, vec) in model.relations() {
            rows.push((label.to_string(), "relation"));
            vectors.push(vec.clone());
        }
    }
    let n = vectors.len();
    let perplexity = match args.perplexity {
        Some(p) => p,
        None => 30.0_f64.min((n.saturating_sub(1)) as f64 / 3.0),
    };
    let config = TsneConfig {
        perplexity,
        iterations: args.iterations,
        learning_rate: args.tsne_learning_rate,
        seed: args.seed,
    };
    let result = tsne_project(&vectors, &config)?;

    let params = format!(
        "perplexity={perplexity} iterations={} learning_rate={} include_relations={} seed={}",
        args.iterations, args.tsne_learning_rate, args.include_relations, args.seed
    );
    let mut content = header("project", &params);
    content.push_str(&embedding::projection_csv(&rows, &result.points));
    write_file(&args.out, &content)?;

    println!(
        "projected {n} points in {} iterations (final KL {:.6}, seed {})",
        args.iterations,
        result.kl_history.last().copied().unwrap_or(f64::NAN),
        args.seed
    );
    Ok(())
}

fn cmd_topics(args: TopicsArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let g = underlying_graph(&kg, args.include_derived);
    let corpus = generate_corpus(&g, args.n, args.len, args.seed)?;
    let coverage = coverage_stats(&corpus, &g);
    let model = fit_topics(&corpus, args.topics, args.iterations, args.seed)?;

    let params = format!(
        "n={} len={} topics={} iterations={} top={} include_derived={} seed={}",
        args.n, args.len, args.topics, args.iterations, args.top, args.include_derived, args.seed
    );
    let mut content = header("topics", &params);
    content.push_str(&model.to_csv(args.top.min(model.vocabulary.len()))?);
    write_file(&args.out, &content)?;
    if let Some(corpus_path) = &args.corpus_out {
        write_file(corpus_path, &corpus.to_text())?;
    }

    println!(
        "{} documents of {} steps over {} vertices (seed {})",
        args.n,
        args.len,
        g.vertex_count(),
        args.seed
    );
    println!(
        "coverage: {:.4}; mean repetition: {:.4}",
        coverage.coverage, coverage.mean_repetition
    );
    println!(
        "NMF rank {}: residual {:.6} after {} iterations",
        args.topics,
        model.residuals.last().copied().unwrap_or(0.0),
        model.residuals.len()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let model = load_model(&args.model)?;
    let parts: Vec<&str> = args.triple.split(',').collect();
    if parts.len() != 3 {
        bail!("--triple must be subject,predicate,object");
    }
    let subject = EntityId::new(parts[0])?;
    let predicate = RelationId::new(parts[1])?;
    let object = EntityId::new(parts[2])?;

    let known_facts: Vec<Fact> = kg
        .facts()
        .iter()
        .filter(|sf| !sf.derived)
        .map(|sf| sf.fact.clone())
        .collect();
    let prediction = linkpred::predict_flag(
        &model,
        &subject,
        &predicate,
        &object,
        args.tau,
        &known_facts,
    )?;

    let mut candidates: Vec<EntityId> = if args.typed_candidates {
        linkpred::typed_candidates(&kg, &predicate, true)
    } else {
        model.entities().map(|(e, _)| e.clone()).collect()
    };
    // The target itself always competes, whatever its declared type.
    if !candidates.contains(&object) {
        candidates.push(object.clone());
    }
    let known = linkpred::known_triples(known_facts.iter());
    let filter = (!args.raw).then_some(linkpred::KnownFilter {
        known: &known,
        target: &object,
    });
    let ranking = linkpred::rank_tails(&model, &subject, &predicate, &candidates, filter)?;
    let rank = ranking
        .rank_of(&object)
        .expect("target is always kept by the filter");

    println!("triple: ({subject}, {predicate}, {object})");
    println!("score: {:.6}", prediction.score);
    println!(
        "rank: {rank}/{} ({})",
        ranking.ranked.len(),
        if args.raw { "raw" } else { "filtered" }
    );
    println!(
        "threshold: {:.6}{}",
        prediction.threshold,
        if args.tau.is_none() {
            format!(" (median of {} known facts)", known_facts.len())
        } else {
            String::new()
        }
    );
    println!("plausible: {}", prediction.plausible);
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let kg = load_graph(&args.archive)?;
    let resolved = args.train.resolve()?;
    let config = resolved.config.clone();
    let (train_facts, test_facts) = linkpred::split(&kg, args.split, config.seed)?;

    let train_kg = KnowledgeGraph::from_parts(kg.ontology().clone(), train_facts.clone())?;
    let mut model = embedding::init_model(&train_kg, resolved.dim, config.seed)?;
    embedding::train(&mut model, &train_kg, &config)?;

    let all_known: HashSet<_> = linkpred::known_triples(
        kg.facts()
            .iter()
            .filter(|sf| !sf.derived)
            .map(|sf| &sf.fact),
    );
    let report = linkpred::evaluate(&model, &test_facts, &all_known, !args.raw)?;

    println!(
        "link prediction report (split {}, seed {}, {})",
        args.split,
        config.seed,
        if report.filtered { "filtered" } else { "raw" }
    );
    println!("  train facts: {}", train_facts.len());
    println!("  test facts:  {}", report.test_size);
    for (k, v) in &report.hits_at {
        println!("  hits@{k}: {v:.4}");
    }
    println!("  MRR:     {:.4}", report.mrr);

    if let Some(out) = &args.out {
        let params = format!("split={} {}", args.split, resolved.header_params());
        let mut content = header("eval", &params);
        content.push_str("metric,value\n");
        for (k, v) in &report.hits_at {
            content.push_str(&format!("hits@{k},{v}\n"));
        }
        content.push_str(&format!("mrr,{}\n", report.mrr));
        content.push_str(&format!("test_size,{}\n", report.test_size));
        content.push_str(&format!("filtered,{}\n", report.filtered));
        write_file(out, &content)?;
    }
    Ok(())
}
