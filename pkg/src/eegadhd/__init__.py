"""EEG band-power / spectral-entropy features and ADHD-vs-control classification.

Pipeline: Butterworth clean-up and five-band split, averaged-periodogram PSD per
epoch, band power and band entropy per channel (190 features), z-scoring, then a
kernel SVM (SMO) or Newton-boosted trees under stratified k-fold CV.
"""

from ._accel import JIT_ENABLED
from .errors import ConvergenceError, EEGError, ValidationError

__version__ = "0.1.0"
__all__ = ["JIT_ENABLED", "ConvergenceError", "EEGError", "ValidationError", "__version__"]
