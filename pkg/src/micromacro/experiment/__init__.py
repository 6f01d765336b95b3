from .coarse import coarse_grained_distinguishability
from .hom import HomInputs, hom_inputs_from_sources, hom_visibility
from .pipeline import (
    AnalyzerSetting,
    ExperimentParams,
    LossStage,
    SweepResult,
    TomographyRecord,
    concurrence_lower_bound,
    factor_out_loss,
    run_pipeline,
    sweep_alpha,
)
from .source import SourceParams, g2_zero, heralded_source_state

__all__ = [
    "AnalyzerSetting",
    "ExperimentParams",
    "HomInputs",
    "LossStage",
    "SourceParams",
    "SweepResult",
    "TomographyRecord",
    "coarse_grained_distinguishability",
    "concurrence_lower_bound",
    "factor_out_loss",
    "g2_zero",
    "heralded_source_state",
    "hom_inputs_from_sources",
    "hom_visibility",
    "run_pipeline",
    "sweep_alpha",
]
