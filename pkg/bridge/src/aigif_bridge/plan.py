"""Turn a manifest JSON document into a concrete pipeline invocation plan.

The bridge consumes only the JSON interchange file written by
``aigif unpack``; it never parses AIGIF binary. Every plan value is
sourced from the manifest — the only injected defaults are the
pipeline repository ids and scheduler class names tabulated below.
"""

from dataclasses import dataclass, field


class BridgeError(Exception):
    pass


# manifest model name -> pipeline repository and capabilities
KNOWN_MODELS = {
    "stable-diffusion-v1-5": {
        "pipeline": "runwayml/stable-diffusion-v1-5",
        "supports_negative_prompt": True,
    },
    "stable-diffusion-v2-1": {
        "pipeline": "stabilityai/stable-diffusion-2-1",
        "supports_negative_prompt": True,
    },
    "sdxl": {
        "pipeline": "stabilityai/stable-diffusion-xl-base-1.0",
        "supports_negative_prompt": True,
    },
}

# manifest scheduler name -> diffusers scheduler class
KNOWN_SCHEDULERS = {
    "DDIM": "DDIMScheduler",
    "DPM++ 2M": "DPMSolverMultistepScheduler",
}

PRECISIONS = ("float32", "float16")


@dataclass(frozen=True)
class PipelinePlan:
    model_name: str
    pipeline_id: str
    scheduler_name: str
    scheduler_class: str
    precision: str
    call_parameters: dict = field(hash=False)


def _get(doc, *path):
    node = doc
    for key in path:
        if not isinstance(node, dict) or key not in node:
            raise BridgeError("manifest JSON missing %r" % ".".join(path))
        node = node[key]
    return node


def plan_from_manifest(doc):
    """Pure mapping from the manifest JSON document to a PipelinePlan."""
    if _get(doc, "format") != "aigif-manifest":
        raise BridgeError("not an aigif manifest document")

    model_name = _get(doc, "model", "id")
    entry = KNOWN_MODELS.get(model_name)
    if entry is None:
        raise BridgeError("no pipeline mapping for model %r; known models: %s"
                          % (model_name, ", ".join(sorted(KNOWN_MODELS))))

    scheduler_name = _get(doc, "model", "fields", "scheduler")
    scheduler_class = KNOWN_SCHEDULERS.get(scheduler_name)
    if scheduler_class is None:
        raise BridgeError("no scheduler mapping for %r; known schedulers: %s"
                          % (scheduler_name, ", ".join(sorted(KNOWN_SCHEDULERS))))

    precision = _get(doc, "model", "data_type")
    if precision not in PRECISIONS:
        raise BridgeError("unsupported precision %r" % precision)

    negative_prompt = _get(doc, "data", "negative_prompt")
    if negative_prompt and not entry["supports_negative_prompt"]:
        raise BridgeError("model %r does not support negative prompts; refusing "
                          "to drop %r" % (model_name, negative_prompt))

    call_parameters = {
        "prompt": _get(doc, "data", "prompt"),
        "negative_prompt": negative_prompt,
        "height": int(_get(doc, "data", "height")),
        "width": int(_get(doc, "data", "width")),
        "num_inference_steps": int(_get(doc, "data", "fields", "diffusion_steps")),
        "guidance_scale": float(_get(doc, "data", "fields", "guidance_scale")),
        "seed": int(_get(doc, "data", "seed")),
    }
    return PipelinePlan(model_name, entry["pipeline"], scheduler_name,
                        scheduler_class, precision, call_parameters)
