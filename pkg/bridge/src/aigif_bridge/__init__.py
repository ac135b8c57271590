"""aigif-bridge: drive a real text-to-image pipeline from a manifest JSON."""

from .plan import BridgeError, PipelinePlan, plan_from_manifest
from .recreate import RecordingStub, recreate

__version__ = "0.1.0"
