"""CLI: aigif-bridge recreate <manifest.json> -o out.png [--stub]"""

import argparse
import json
import sys

from .plan import BridgeError, plan_from_manifest
from .recreate import RecordingStub, recreate


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="aigif-bridge",
        description="Recreate an image from an unpacked aigif manifest JSON.")
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("recreate", help="run the pipeline described by a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--out", required=True, help="output PNG path")
    p.add_argument("--stub", action="store_true",
                   help="use the recording test double instead of a real pipeline")
    args = parser.parse_args(argv)

    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        plan = plan_from_manifest(doc)
        recreate(plan, args.out, stub=RecordingStub() if args.stub else None)
    except (BridgeError, OSError, json.JSONDecodeError) as exc:
        print("aigif-bridge: error: %s" % exc, file=sys.stderr)
        return 1
    print("wrote %s (model %s, scheduler %s)" % (args.out, plan.model_name,
                                                 plan.scheduler_name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
