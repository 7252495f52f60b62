"""Cost-sensitive decision tree ensembles: sampling, bagging, boosting and decision rules."""
from .boosting import BoostModel, boost_train, make_variant
from .calibration import LeafEstimator, fit_score_calibrator, isotonic_fit, logistic_correction, platt_fit
from .data import CostModel, DataError, Dataset, load_csv, stratified_split
from .decision import DecisionPolicy, InvalidCombination, mec_vote, mta, t_cs, thresholding_fit
from .ensemble import EnsembleModel, bagging_train
from .metrics import MetricsReport, auc, evaluate
from .persist import ModelFormatError, load_model, save_model
from .pipeline import MethodSpec, TrainedModel, train_pipeline
from .presets import PRESETS, preset
from .sampling import SamplerSpec, cpr_sample, resample
from .synthetic import make_imbalanced
from .tree import Tree, TreeConfig, fit_tree

__version__ = "0.1.0"

__all__ = [
    "BoostModel", "CostModel", "DataError", "Dataset", "DecisionPolicy", "EnsembleModel",
    "InvalidCombination", "LeafEstimator", "MethodSpec", "MetricsReport", "ModelFormatError",
    "PRESETS", "SamplerSpec", "TrainedModel", "Tree", "TreeConfig", "auc", "bagging_train",
    "boost_train", "cpr_sample", "evaluate", "fit_score_calibrator", "fit_tree", "isotonic_fit",
    "load_csv", "load_model", "logistic_correction", "make_imbalanced", "make_variant", "mec_vote",
    "mta", "platt_fit", "preset", "resample", "save_model", "stratified_split", "t_cs",
    "thresholding_fit", "train_pipeline",
]
