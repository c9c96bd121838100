use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "classicml", version, about = "Fit, apply and evaluate classic machine-learning models on CSV data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it to a model file.
    Fit(FitArgs),
    /// Predict labels, values or clusters for each input row.
    Predict(PredictArgs),
    /// Print metrics of a model on a labeled file.
    Evaluate(EvaluateArgs),
    /// Project rows with a pca, lda-proj or kpca model.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Knn,
    Ols,
    Ridge,
    Lasso,
    Elasticnet,
    Logistic,
    Svc,
    Svr,
    Krr,
    Multinomial,
    Ovr,
    Ovo,
    Ecoc,
    Gnb,
    Lda,
    Qda,
    Tree,
    Forest,
    Extratrees,
    Kmeans,
    Gmm,
    Pca,
    LdaProj,
    Kpca,
}

impl ModelKind {
    pub fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        ModelKind::from_str(s, false).ok()
    }

    pub fn all() -> &'static [ModelKind] {
        ModelKind::value_variants()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Uniform,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexArg {
    Brute,
    KdTree,
    BallTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    None,
    L2,
    L1,
    Elasticnet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Polynomial,
    Sigmoid,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Logistic,
    Svc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarianceArg {
    PerClass,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Gini,
    Entropy,
    Misclassification,
    Mse,
    Mae,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VotingArg {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Lloyd,
    Elkan,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale features to zero mean and unit variance using training statistics.
    #[arg(long)]
    pub standardize: bool,
    /// For knn, tree, forest and extratrees.
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    #[command(flatten)]
    pub hyper: Hyper,
}

/// Per-model hyperparameters; each model reads the ones it uses.
#[derive(Debug, Clone, Args)]
pub struct Hyper {
    /// Neighbors for knn, clusters for kmeans, components for gmm.
    #[arg(long)]
    pub k: Option<usize>,
    /// Radius neighborhood for knn (strictly closer points).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub weighting: WeightingArg,
    #[arg(long, value_enum, default_value = "kd-tree")]
    pub index: IndexArg,
    #[arg(long, default_value_t = 30)]
    pub leaf_size: usize,

    #[arg(long)]
    pub lambda: Option<f64>,
    /// Elastic-net mix between ℓ1 (1) and ℓ2 (0).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub no_intercept: bool,
    #[arg(long, value_enum)]
    pub penalty: Option<PenaltyArg>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Subgradient iterations for svc/svr.
    #[arg(long, default_value_t = 5000)]
    pub iterations: usize,

    /// Binary learner for ovr, ovo and ecoc.
    #[arg(long, value_enum, default_value = "svc")]
    pub learner: LearnerArg,
    /// ECOC code length; defaults to ⌈10·log₂ q⌉.
    #[arg(long)]
    pub code_length: Option<usize>,
    /// Naive Bayes variance model.
    #[arg(long, value_enum, default_value = "per-class")]
    pub variance: VarianceArg,

    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub min_samples_split: usize,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long)]
    pub max_leaf_nodes: Option<usize>,
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub min_impurity_decrease: f64,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    /// Bootstrap rows per tree; defaults to true for forest, false for extratrees.
    #[arg(long)]
    pub bootstrap: Option<bool>,
    #[arg(long, value_enum, default_value = "soft")]
    pub voting: VotingArg,

    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "lloyd")]
    pub algorithm: AlgorithmArg,

    /// Output dimension for pca, lda-proj and kpca.
    #[arg(long)]
    pub components: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add one proba_<label> column per class.
    #[arg(long)]
    pub proba: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to the label column used at fit time.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
