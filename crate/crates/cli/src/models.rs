//! Fitting dispatch from command-line settings, and a uniform predict/transform surface.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use classicml::clustering::{gmm_fit_em, kmeans_fit, GmmConfig, GmmModel, KMeansAlgorithm, KMeansConfig, KMeansModel};
use classicml::decomposition::{lda_fit, pca_fit, LdaProjection, PcaModel};
use classicml::gaussian_models::{fit_gaussian, GaussianClassifier, GaussianKind};
use classicml::kernel_methods::{fit_kernel_ridge, kernel_pca_fit, kernel_pca_transform, KernelPcaModel, KernelRidgeModel, KernelSpec};
use classicml::linear_models::{fit_elastic_net, fit_lasso, fit_logistic, fit_ols, fit_ridge, LinearModel, LogisticConfig, LogisticModel, Penalty};
use classicml::multiclass::{ecoc_fit, fit_multinomial, ovo_fit, ovr_fit, BinaryLearner, EcocModel, MultinomialModel, OvoModel, OvrModel};
use classicml::neighbors::{IndexKind, KnnClassifier, KnnRegressor, Neighborhood, Weighting};
use classicml::svm::{fit_svc, fit_svr, SvmConfig, SvmModel};
use classicml::trees::{fit_extra_trees, fit_forest, fit_tree, Criterion, DecisionTree, Forest, ForestConfig, TreeConfig, TreeTarget, Voting};
use classicml::{Labels, Matrix};

use crate::args::*;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fitted {
    KnnClassifier(KnnClassifier),
    KnnRegressor(KnnRegressor),
    Linear(LinearModel),
    Logistic(LogisticModel),
    Svc(SvmModel),
    Svr(SvmModel),
    KernelRidge(KernelRidgeModel),
    Multinomial(MultinomialModel),
    Ovr(OvrModel),
    Ovo(OvoModel),
    Ecoc(EcocModel),
    Gaussian(GaussianClassifier),
    TreeClassifier(DecisionTree),
    TreeRegressor(DecisionTree),
    ForestClassifier(Forest),
    ForestRegressor(Forest),
    KMeans(KMeansModel),
    Gmm(GmmModel),
    Pca(PcaModel),
    LdaProjection(LdaProjection),
    KernelPca(KernelPcaModel),
}

/// Output of `predict`.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// Class indices into the model's label names.
    Classes(Vec<usize>),
    Values(Vec<f64>),
    Clusters(Vec<usize>),
}

pub struct FitOutcome {
    pub model: Fitted,
    pub hyperparameters: BTreeMap<String, Value>,
    /// Class names, for classifiers.
    pub labels: Option<Vec<String>>,
}

fn resolve_task(kind: ModelKind, task: Option<Task>) -> CliResult<Option<Task>> {
    use ModelKind::*;
    let fixed = match kind {
        Knn | Tree | Forest | Extratrees => return Ok(Some(task.unwrap_or(Task::Classification))),
        Ols | Ridge | Lasso | Elasticnet | Svr | Krr => Some(Task::Regression),
        Logistic | Svc | Multinomial | Ovr | Ovo | Ecoc | Gnb | Lda | Qda | LdaProj => Some(Task::Classification),
        Kmeans | Gmm | Pca | Kpca => None,
    };
    match (fixed, task) {
        (f, Some(t)) if f != Some(t) => Err(CliError::config(format!("--task {t:?} does not apply to {}", kind.name()).to_lowercase())),
        _ => Ok(fixed),
    }
}

pub fn kernel_spec(h: &Hyper) -> KernelSpec {
    match h.kernel {
        KernelArg::Linear => KernelSpec::Linear,
        KernelArg::Polynomial => KernelSpec::Polynomial { gamma: h.gamma, c0: h.c0, degree: h.degree },
        KernelArg::Sigmoid => KernelSpec::Sigmoid { gamma: h.gamma, c0: h.c0 },
        KernelArg::Rbf => KernelSpec::Rbf { gamma: h.gamma },
    }
}

fn kernel_hp(hp: &mut BTreeMap<String, Value>, spec: &KernelSpec) {
    match *spec {
        KernelSpec::Linear => {
            hp.insert("kernel".into(), json!("linear"));
        }
        KernelSpec::Polynomial { gamma, c0, degree } => {
            hp.insert("kernel".into(), json!("polynomial"));
            hp.insert("gamma".into(), json!(gamma));
            hp.insert("c0".into(), json!(c0));
            hp.insert("degree".into(), json!(degree));
        }
        KernelSpec::Sigmoid { gamma, c0 } => {
            hp.insert("kernel".into(), json!("sigmoid"));
            hp.insert("gamma".into(), json!(gamma));
            hp.insert("c0".into(), json!(c0));
        }
        KernelSpec::Rbf { gamma } => {
            hp.insert("kernel".into(), json!("rbf"));
            hp.insert("gamma".into(), json!(gamma));
        }
    }
}

fn logistic_config(h: &Hyper) -> LogisticConfig {
    let d = LogisticConfig::default();
    LogisticConfig {
        penalty: match h.penalty {
            None => d.penalty,
            Some(PenaltyArg::None) => Penalty::None,
            Some(PenaltyArg::L2) => Penalty::L2,
            Some(PenaltyArg::L1) => Penalty::L1,
            Some(PenaltyArg::Elasticnet) => Penalty::ElasticNet,
        },
        lambda: h.lambda.unwrap_or(d.lambda),
        alpha: h.alpha,
        fit_intercept: !h.no_intercept,
        max_iter: h.max_iter.unwrap_or(d.max_iter),
        tol: h.tol.unwrap_or(d.tol),
    }
}

fn svm_config(h: &Hyper) -> SvmConfig {
    SvmConfig {
        kernel: kernel_spec(h),
        c: h.c,
        epsilon: h.epsilon,
        iterations: h.iterations,
    }
}

fn learner(h: &Hyper, hp: &mut BTreeMap<String, Value>) -> BinaryLearner {
    match h.learner {
        LearnerArg::Logistic => {
            let c = logistic_config(h);
            hp.insert("learner".into(), json!("logistic"));
            hp.insert("penalty".into(), serde_json::to_value(c.penalty).unwrap());
            hp.insert("lambda".into(), json!(c.lambda));
            BinaryLearner::Logistic(c)
        }
        LearnerArg::Svc => {
            let c = svm_config(h);
            hp.insert("learner".into(), json!("svc"));
            hp.insert("c".into(), json!(c.c));
            hp.insert("iterations".into(), json!(c.iterations));
            kernel_hp(hp, &c.kernel);
            BinaryLearner::Svc(c)
        }
    }
}

fn tree_config(h: &Hyper, task: Task, seed: u64) -> TreeConfig {
    let criterion = match h.criterion {
        Some(CriterionArg::Gini) => Criterion::Gini,
        Some(CriterionArg::Entropy) => Criterion::Entropy,
        Some(CriterionArg::Misclassification) => Criterion::Misclassification,
        Some(CriterionArg::Mse) => Criterion::Mse,
        Some(CriterionArg::Mae) => Criterion::Mae,
        None if task == Task::Classification => Criterion::Gini,
        None => Criterion::Mse,
    };
    TreeConfig {
        criterion,
        max_depth: h.max_depth,
        min_samples_split: h.min_samples_split,
        min_samples_leaf: h.min_samples_leaf,
        max_leaf_nodes: h.max_leaf_nodes,
        max_features: h.max_features,
        min_impurity_decrease: h.min_impurity_decrease,
        seed,
    }
}

fn tree_hp(hp: &mut BTreeMap<String, Value>, c: &TreeConfig) {
    hp.insert("criterion".into(), serde_json::to_value(c.criterion).unwrap());
    hp.insert("max_depth".into(), json!(c.max_depth));
    hp.insert("min_samples_split".into(), json!(c.min_samples_split));
    hp.insert("min_samples_leaf".into(), json!(c.min_samples_leaf));
    hp.insert("max_leaf_nodes".into(), json!(c.max_leaf_nodes));
    hp.insert("max_features".into(), json!(c.max_features));
    hp.insert("min_impurity_decrease".into(), json!(c.min_impurity_decrease));
}

fn require_binary(kind: ModelKind, labels: &Labels) -> CliResult<()> {
    if labels.n_classes() != 2 {
        return Err(CliError::config(format!(
            "{} is a binary classifier but the label column has {} classes; use ovr, ovo or ecoc{}",
            kind.name(),
            labels.n_classes(),
            if kind == ModelKind::Logistic { " (or multinomial)" } else { "" }
        )));
    }
    Ok(())
}

/// Fits `kind` on already-preprocessed features.
pub fn fit(kind: ModelKind, task: Option<Task>, h: &Hyper, seed: u64, x: &Matrix, raw_labels: Option<&[String]>) -> CliResult<FitOutcome> {
    use ModelKind::*;
    let task = resolve_task(kind, task)?;
    let mut hp = BTreeMap::new();
    let need = || raw_labels.ok_or_else(|| CliError::config(format!("{} needs a label column (--label)", kind.name())));
    let classes = || -> CliResult<Labels> { Ok(Labels::encode(need()?)?) };
    let targets = || -> CliResult<Vec<f64>> {
        need()?
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::data(format!("row {}: target '{s}' is not a finite number", i + 1)))
            })
            .collect()
    };
    let lambda = h.lambda.unwrap_or(1.0);
    let intercept = !h.no_intercept;
    let mut labels_out = None;

    let model = match kind {
        Knn => {
            let hood = match (h.radius, h.k) {
                (Some(_), Some(_)) => return Err(CliError::config("give either --k or --radius for knn, not both")),
                (Some(r), None) => Neighborhood::Radius(r),
                (None, k) => Neighborhood::K(k.unwrap_or(5)),
            };
            let index = match h.index {
                IndexArg::Brute => IndexKind::Brute,
                IndexArg::KdTree => IndexKind::KdTree,
                IndexArg::BallTree => IndexKind::BallTree,
            };
            let weighting = match h.weighting {
                WeightingArg::Uniform => Weighting::Uniform,
                WeightingArg::Inverse => Weighting::Inverse,
            };
            hp.insert("neighborhood".into(), serde_json::to_value(hood).unwrap());
            hp.insert("index".into(), serde_json::to_value(index).unwrap());
            hp.insert("weighting".into(), serde_json::to_value(weighting).unwrap());
            hp.insert("leaf_size".into(), json!(h.leaf_size));
            if task == Some(Task::Regression) {
                Fitted::KnnRegressor(KnnRegressor::fit(x, &targets()?, index, h.leaf_size, hood, weighting)?)
            } else {
                let l = classes()?;
                labels_out = Some(l.names().to_vec());
                Fitted::KnnClassifier(KnnClassifier::fit(x, &l, index, h.leaf_size, hood, weighting)?)
            }
        }
        Ols | Ridge | Lasso | Elasticnet => {
            let y = targets()?;
            hp.insert("fit_intercept".into(), json!(intercept));
            if kind != Ols {
                hp.insert("lambda".into(), json!(lambda));
            }
            Fitted::Linear(match kind {
                Ols => fit_ols(x, &y, intercept)?,
                Ridge => fit_ridge(x, &y, lambda, intercept)?,
                Lasso => fit_lasso(x, &y, lambda, intercept)?,
                _ => {
                    hp.insert("alpha".into(), json!(h.alpha));
                    fit_elastic_net(x, &y, lambda, h.alpha, intercept)?
                }
            })
        }
        Logistic => {
            let l = classes()?;
            require_binary(kind, &l)?;
            let c = logistic_config(h);
            hp.insert("penalty".into(), serde_json::to_value(c.penalty).unwrap());
            hp.insert("lambda".into(), json!(c.lambda));
            hp.insert("alpha".into(), json!(c.alpha));
            hp.insert("fit_intercept".into(), json!(c.fit_intercept));
            hp.insert("max_iter".into(), json!(c.max_iter));
            hp.insert("tol".into(), json!(c.tol));
            labels_out = Some(l.names().to_vec());
            Fitted::Logistic(fit_logistic(x, &l, c)?)
        }
        Svc => {
            let l = classes()?;
            require_binary(kind, &l)?;
            let c = svm_config(h);
            hp.insert("c".into(), json!(c.c));
            hp.insert("iterations".into(), json!(c.iterations));
            kernel_hp(&mut hp, &c.kernel);
            labels_out = Some(l.names().to_vec());
            Fitted::Svc(fit_svc(x, &l, c)?)
        }
        Svr => {
            let c = svm_config(h);
            hp.insert("c".into(), json!(c.c));
            hp.insert("epsilon".into(), json!(c.epsilon));
            hp.insert("iterations".into(), json!(c.iterations));
            kernel_hp(&mut hp, &c.kernel);
            Fitted::Svr(fit_svr(x, &targets()?, c)?)
        }
        Krr => {
            let spec = kernel_spec(h);
            hp.insert("lambda".into(), json!(lambda));
            kernel_hp(&mut hp, &spec);
            Fitted::KernelRidge(fit_kernel_ridge(x, &targets()?, spec, lambda)?)
        }
        Multinomial => {
            let l = classes()?;
            hp.insert("lambda".into(), json!(lambda));
            labels_out = Some(l.names().to_vec());
            Fitted::Multinomial(fit_multinomial(x, &l, lambda)?)
        }
        Ovr | Ovo | Ecoc => {
            let l = classes()?;
            let b = learner(h, &mut hp);
            labels_out = Some(l.names().to_vec());
            match kind {
                Ovr => Fitted::Ovr(ovr_fit(x, &l, &b)?),
                Ovo => Fitted::Ovo(ovo_fit(x, &l, &b)?),
                _ => {
                    let q = l.n_classes() as f64;
                    let m = h.code_length.unwrap_or((10.0 * q.log2()).ceil().max(1.0) as usize);
                    hp.insert("code_length".into(), json!(m));
                    hp.insert("seed".into(), json!(seed));
                    Fitted::Ecoc(ecoc_fit(x, &l, &b, m, seed)?)
                }
            }
        }
        Gnb | Lda | Qda => {
            let l = classes()?;
            let g = match (kind, h.variance) {
                (Gnb, VarianceArg::PerClass) => GaussianKind::NbPerClassVar,
                (Gnb, VarianceArg::Shared) => GaussianKind::NbSharedVar,
                (Lda, _) => GaussianKind::Lda,
                _ => GaussianKind::Qda,
            };
            hp.insert("gaussian_kind".into(), serde_json::to_value(g).unwrap());
            labels_out = Some(l.names().to_vec());
            Fitted::Gaussian(fit_gaussian(x, &l, g)?)
        }
        Tree | Forest | Extratrees => {
            let task = task.unwrap();
            let tc = tree_config(h, task, seed);
            tree_hp(&mut hp, &tc);
            let l;
            let y;
            let target = if task == Task::Classification {
                l = classes()?;
                labels_out = Some(l.names().to_vec());
                TreeTarget::Classes(&l)
            } else {
                y = targets()?;
                TreeTarget::Values(&y)
            };
            let regression = task == Task::Regression;
            if kind == Tree {
                let t = fit_tree(x, target, tc)?;
                if regression { Fitted::TreeRegressor(t) } else { Fitted::TreeClassifier(t) }
            } else {
                let base = if kind == Forest { ForestConfig::random_forest() } else { ForestConfig::extra_trees() };
                let fc = ForestConfig {
                    n_trees: h.n_trees,
                    bootstrap: h.bootstrap.unwrap_or(base.bootstrap),
                    max_features: h.max_features,
                    voting: match h.voting {
                        VotingArg::Hard => Voting::Hard,
                        VotingArg::Soft => Voting::Soft,
                    },
                    tree: tc,
                    seed,
                };
                hp.insert("n_trees".into(), json!(fc.n_trees));
                hp.insert("bootstrap".into(), json!(fc.bootstrap));
                hp.insert("voting".into(), serde_json::to_value(fc.voting).unwrap());
                hp.insert("seed".into(), json!(seed));
                let f = if kind == Forest { fit_forest(x, target, fc)? } else { fit_extra_trees(x, target, fc)? };
                if regression { Fitted::ForestRegressor(f) } else { Fitted::ForestClassifier(f) }
            }
        }
        Kmeans => {
            let k = h.k.ok_or_else(|| CliError::config("kmeans needs --k"))?;
            let c = KMeansConfig {
                k,
                restarts: h.restarts,
                max_iter: h.max_iter.unwrap_or(300),
                algorithm: match h.algorithm {
                    AlgorithmArg::Lloyd => KMeansAlgorithm::Lloyd,
                    AlgorithmArg::Elkan => KMeansAlgorithm::Elkan,
                },
                seed,
            };
            hp.insert("k".into(), json!(c.k));
            hp.insert("restarts".into(), json!(c.restarts));
            hp.insert("max_iter".into(), json!(c.max_iter));
            hp.insert("algorithm".into(), serde_json::to_value(c.algorithm).unwrap());
            hp.insert("seed".into(), json!(seed));
            Fitted::KMeans(kmeans_fit(x, &c)?)
        }
        Gmm => {
            let k = h.k.ok_or_else(|| CliError::config("gmm needs --k"))?;
            let c = GmmConfig {
                k,
                max_iter: h.max_iter.unwrap_or(200),
                tol: h.tol.unwrap_or(1e-6),
                seed,
            };
            hp.insert("k".into(), json!(c.k));
            hp.insert("max_iter".into(), json!(c.max_iter));
            hp.insert("tol".into(), json!(c.tol));
            hp.insert("seed".into(), json!(seed));
            Fitted::Gmm(gmm_fit_em(x, &c)?)
        }
        Pca => {
            let l = h.components.unwrap_or(x.cols());
            hp.insert("components".into(), json!(l));
            Fitted::Pca(pca_fit(x, l)?)
        }
        LdaProj => {
            let l = classes()?;
            let comps = h.components.unwrap_or((l.n_classes().saturating_sub(1)).min(x.cols()).max(1));
            hp.insert("components".into(), json!(comps));
            labels_out = Some(l.names().to_vec());
            Fitted::LdaProjection(lda_fit(x, &l, comps)?)
        }
        Kpca => {
            let spec = kernel_spec(h);
            let l = h.components.unwrap_or(2);
            hp.insert("components".into(), json!(l));
            kernel_hp(&mut hp, &spec);
            Fitted::KernelPca(kernel_pca_fit(x, spec, l)?)
        }
    };
    Ok(FitOutcome {
        model,
        hyperparameters: hp,
        labels: labels_out,
    })
}

fn not_for(what: &str, model: &str) -> CliError {
    CliError::config(format!("{what} is not available for {model} models"))
}

impl Fitted {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Fitted::KnnClassifier(_) => "knn classifier",
            Fitted::KnnRegressor(_) => "knn regressor",
            Fitted::Linear(_) => "linear regression",
            Fitted::Logistic(_) => "logistic",
            Fitted::Svc(_) => "svc",
            Fitted::Svr(_) => "svr",
            Fitted::KernelRidge(_) => "kernel ridge",
            Fitted::Multinomial(_) => "multinomial",
            Fitted::Ovr(_) => "one-vs-rest",
            Fitted::Ovo(_) => "one-vs-one",
            Fitted::Ecoc(_) => "ecoc",
            Fitted::Gaussian(_) => "gaussian classifier",
            Fitted::TreeClassifier(_) | Fitted::TreeRegressor(_) => "tree",
            Fitted::ForestClassifier(_) | Fitted::ForestRegressor(_) => "forest",
            Fitted::KMeans(_) => "kmeans",
            Fitted::Gmm(_) => "gmm",
            Fitted::Pca(_) => "pca",
            Fitted::LdaProjection(_) => "lda projection",
            Fitted::KernelPca(_) => "kernel pca",
        }
    }

    pub fn predict(&self, x: &Matrix) -> CliResult<Prediction> {
        use Prediction::*;
        Ok(match self {
            Fitted::KnnClassifier(m) => Classes(m.predict(x)?),
            Fitted::KnnRegressor(m) => Values(m.predict(x)?),
            Fitted::Linear(m) => Values(m.predict(x)?),
            Fitted::Logistic(m) => Classes(m.predict(x)?),
            Fitted::Svc(m) => Classes(m.predict_class(x)?),
            Fitted::Svr(m) => Values(m.predict(x)?),
            Fitted::KernelRidge(m) => Values(m.predict(x)?),
            Fitted::Multinomial(m) => Classes(m.predict(x)?),
            Fitted::Ovr(m) => Classes(m.predict(x)?),
            Fitted::Ovo(m) => Classes(m.predict(x)?),
            Fitted::Ecoc(m) => Classes(m.predict(x)?),
            Fitted::Gaussian(m) => Classes(m.predict(x)?),
            Fitted::TreeClassifier(m) => Classes(m.predict_class(x)?),
            Fitted::TreeRegressor(m) => Values(m.predict_values(x)?),
            Fitted::ForestClassifier(m) => Classes(m.predict_class(x)?),
            Fitted::ForestRegressor(m) => Values(m.predict_values(x)?),
            Fitted::KMeans(m) => Clusters(m.predict(x)?),
            Fitted::Gmm(m) => Clusters(m.predict(x)?),
            Fitted::Pca(_) | Fitted::LdaProjection(_) | Fitted::KernelPca(_) => {
                return Err(CliError::config(format!("{} models project data; use transform", self.kind_name())))
            }
        })
    }

    /// Per-row class (or component) probabilities.
    pub fn predict_proba(&self, x: &Matrix) -> CliResult<Vec<Vec<f64>>> {
        Ok(match self {
            Fitted::KnnClassifier(m) => m.predict_proba(x)?,
            Fitted::Logistic(m) => m.predict_proba(x)?.into_iter().map(|p| vec![1.0 - p, p]).collect(),
            Fitted::Multinomial(m) => m.predict_proba(x)?,
            Fitted::Gaussian(m) => m.predict_proba(x)?,
            Fitted::TreeClassifier(m) => m.predict_proba(x)?,
            Fitted::ForestClassifier(m) => m.predict_proba(x)?,
            Fitted::Gmm(m) => m.responsibilities(x)?.iter_rows().map(|r| r.to_vec()).collect(),
            other => return Err(not_for("--proba", other.kind_name())),
        })
    }

    pub fn transform(&self, x: &Matrix) -> CliResult<Matrix> {
        Ok(match self {
            Fitted::Pca(m) => m.transform(x)?,
            Fitted::LdaProjection(m) => m.transform(x)?,
            Fitted::KernelPca(m) => kernel_pca_transform(m, x)?,
            other => return Err(not_for("transform", other.kind_name())),
        })
    }
}
