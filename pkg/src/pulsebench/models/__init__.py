"""Trainable predictors: median baselines, numpy MLP, exact GPR, MiniRocket
features with linear heads, and the external-prediction plug-in path."""

from .dataset import Dataset, compute_feature_medians, impute_with
from .baseline import BaselinePrediction, baseline_fit_predict
from .mlp import (
    MlpConfig,
    MlpModel,
    gnll_loss,
    mlp_fit,
    mlp_loss_and_grads,
    mlp_predict,
    mlp_predict_components,
    mlp_predict_mc_dropout,
)
from .gpr import GprConfig, GprModel, gpr_fit, gpr_predict
from .minirocket import MiniRocketConfig, MiniRocketFitted, enumerate_kernels, minirocket_fit, minirocket_transform
from .linear import LogisticModel, RidgeModel, logistic_fit, ridge_fit
from .external import load_external_predictions, predict_external
from .serialize import load_model, save_model

__all__ = [
    "Dataset", "compute_feature_medians", "impute_with",
    "BaselinePrediction", "baseline_fit_predict",
    "MlpConfig", "MlpModel", "gnll_loss", "mlp_fit", "mlp_loss_and_grads",
    "mlp_predict", "mlp_predict_components", "mlp_predict_mc_dropout",
    "GprConfig", "GprModel", "gpr_fit", "gpr_predict",
    "MiniRocketConfig", "MiniRocketFitted", "enumerate_kernels", "minirocket_fit", "minirocket_transform",
    "LogisticModel", "RidgeModel", "logistic_fit", "ridge_fit",
    "load_external_predictions", "predict_external",
    "load_model", "save_model",
]
