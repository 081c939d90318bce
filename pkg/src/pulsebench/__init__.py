"""pulsebench: benchmarking toolkit for PPG machine-learning pipelines.

Submodules cover the full pipeline: preprocessing filters, pulse detection,
morphology and rhythm-irregularity features, time-frequency transforms,
trainable models, the evaluation protocol, dataset storage, and a CLI that
ties them together into reproducible benchmark runs.
"""

__version__ = "0.1.0"

from .preprocessing import Segment  # noqa: F401
