"""Run (or stub) the generation described by a PipelinePlan and write a PNG."""

import os

from .plan import BridgeError


class RecordingStub:
    """Test double: records each plan it is called with, returns a tiny image."""

    def __init__(self, fill=(127, 127, 127)):
        self.calls = []
        self.fill = fill

    def __call__(self, plan):
        from PIL import Image
        self.calls.append(plan)
        p = plan.call_parameters
        return Image.new("RGB", (p["width"], p["height"]), self.fill)


def recreate(plan, out_path, stub=None):
    """Generate the image for ``plan`` and write it to ``out_path`` as PNG.

    With ``stub`` set, the stub is invoked instead of the real pipeline
    and receives the plan verbatim.
    """
    image = stub(plan) if stub is not None else _run_pipeline(plan)
    tmp = out_path + ".tmp"
    try:
        image.save(tmp, format="PNG")
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return out_path


def _run_pipeline(plan):
    try:
        import diffusers
        import torch
    except ImportError as exc:
        raise BridgeError(
            "diffusers/torch not installed; install aigif-bridge[diffusion] "
            "or pass a stub (plan: %r)" % (plan,)) from exc

    try:
        dtype = torch.float16 if plan.precision == "float16" else torch.float32
        pipe = diffusers.DiffusionPipeline.from_pretrained(
            plan.pipeline_id, torch_dtype=dtype)
        scheduler_cls = getattr(diffusers, plan.scheduler_class)
        pipe.scheduler = scheduler_cls.from_config(pipe.scheduler.config)
        device = "cuda" if torch.cuda.is_available() else "cpu"
        pipe = pipe.to(device)

        params = dict(plan.call_parameters)
        generator = torch.Generator(device=device).manual_seed(params.pop("seed"))
        result = pipe(generator=generator, **params)
        return result.images[0]
    except BridgeError:
        raise
    except Exception as exc:
        raise BridgeError("pipeline run failed: %s (plan: %r)" % (exc, plan)) from exc
