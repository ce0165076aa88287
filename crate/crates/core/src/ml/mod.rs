//! Random forests and second-order gradient boosting over named feature
//! tables, with splits, metrics and importances.

mod ensemble;
mod metrics;
mod preprocess;
mod protocol;
mod split;
mod table;
mod tree;

pub use ensemble::{
    feature_importance, train, train_gradient_boosting, train_random_forest, GradientBoostingParams,
    ModelKind, ModelParams, RandomForestParams, TrainedEnsemble, MODEL_VERSION,
};
pub use metrics::{confusion_matrix, evaluate, report_from_confusion, roc_auc, ClassMetrics, EvalReport};
pub use preprocess::{MedianImputer, RobustScaler};
pub use protocol::holdout;
pub use split::{split, split_indices, SplitIndices, SplitMode};
pub use table::FeatureTable;
pub use tree::{Node, Tree};
