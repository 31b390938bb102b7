from .gbt import GBTClassifier, GbtModel, GbtParams, gbt_fit, gbt_predict
from .svm import SVC, KernelSpec, SvmModel, gamma_scale, kernel_eval, kernel_matrix, svm_fit, svm_predict

__all__ = [
    "GBTClassifier", "GbtModel", "GbtParams", "gbt_fit", "gbt_predict",
    "SVC", "KernelSpec", "SvmModel", "gamma_scale", "kernel_eval", "kernel_matrix",
    "svm_fit", "svm_predict",
]
