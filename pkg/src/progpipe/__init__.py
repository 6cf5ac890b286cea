"""progpipe: deterministic prognosis-modelling pipeline.

Tabular datasets with explicit missingness, fold-safe preprocessing (KNN
imputation, centring/scaling, dummy coding), six classifiers implemented
from first principles, leave-3-rows-out nested cross-validation with inner
grid search, repeated-run stability summaries, and ROC/Youden-point
statistics, all reproducible from a single master seed.
"""

__version__ = "0.1.0"
