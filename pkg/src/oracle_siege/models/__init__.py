from .base import Classifier, TrainConfig, TrainingError
from .forest import RandomForest, Tree
from .mlp import ShallowNet
from .svm import LinearSVM
from .training import (
    ARCHITECTURES, NO, OUTLIER, TARGET, YES, ConstantClassifier, DegenerateSeedWarning,
    accuracy, dump_model, predict, train_multiclass, train_substitute, train_target_vs_outlier,
)
