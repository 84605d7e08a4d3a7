"""Autonomous visualization of unknown volumetric scalar fields.

The pipeline profiles a volume with x-ray probes, asks a multimodal
model what the object is, forages for domain context, designs a
transfer function isovalue-by-isovalue, fine-tunes empirical isovalues
against rendered evidence, and picks a camera trajectory over a view
sphere.  Every model exchange goes through one provider boundary so
the whole loop replays offline from recorded fixtures.
"""

from .config import RunConfig, load_run_config
from .errors import AutovisError
from .mllm import FAILED, MockProvider, ProviderConfig, make_provider
from .pipeline import RunArtifacts, run
from .render import Camera, Image
from .volume import Volume, VolumeMeta

__version__ = "0.1.0"

__all__ = [
    "AutovisError",
    "Camera",
    "FAILED",
    "Image",
    "MockProvider",
    "ProviderConfig",
    "RunArtifacts",
    "RunConfig",
    "Volume",
    "VolumeMeta",
    "load_run_config",
    "make_provider",
    "run",
    "__version__",
]
