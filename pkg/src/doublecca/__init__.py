"""Zero-shot classifier head fusion via twice-applied regularized CCA.

The package fits a regularized canonical correlation analysis between two
families of text embeddings (a vision-language text encoder and a separate
sentence encoder), builds one linear classifier head per family, merges the
two heads into a single weight matrix, and evaluates the result with
group-robustness metrics (average, per-group, worst-group accuracy, gap).
"""

__version__ = "0.1.0"

from .cca import CcaConfig, CcaTransform, canonical_correlations, fit_cca, project
from .errors import DccaError
from .pipeline import FusedHead, PipelineConfig, StageOneResult, run_doublecca
from .prompts import PromptSet, build_prompt_set

__all__ = [
    "CcaConfig",
    "CcaTransform",
    "DccaError",
    "FusedHead",
    "PipelineConfig",
    "PromptSet",
    "StageOneResult",
    "build_prompt_set",
    "canonical_correlations",
    "fit_cca",
    "project",
    "run_doublecca",
    "__version__",
]
