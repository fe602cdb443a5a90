"""Command line entry points: run / validate / report / snapshot-measure."""

import argparse
import json
import os
import sys

from . import harness, measure


def main(argv=None):
    parser = argparse.ArgumentParser(prog="lorenzlab")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's master seed")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "validate", "snapshot-measure"):
        p = sub.add_parser(name)
        p.add_argument("config")
    p = sub.add_parser("report")
    p.add_argument("directory")
    args = parser.parse_args(argv)

    try:
        if args.command == "report":
            _resummarize(args.directory)
            return 0
        config = harness.load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.command == "validate":
            print("config OK")
            return 0
        if args.command == "snapshot-measure":
            m = harness.get_measure(config)
            os.makedirs(config.output_dir, exist_ok=True)
            path = os.path.join(config.output_dir,
                                f"measure-{config.system}-seed{config.seed}.npz")
            m.save(path)
            print(path)
            return 0
        report = harness.run(config)
        print(json.dumps(report.summary, sort_keys=True, default=harness._jsonify))
        return 0
    except (harness.ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _resummarize(directory):
    for name in sorted(os.listdir(directory)):
        if name.endswith(".json"):
            with open(os.path.join(directory, name)) as f:
                payload = json.load(f)
            print(name)
            print(json.dumps(payload.get("summary", {}), sort_keys=True, indent=2))


if __name__ == "__main__":
    sys.exit(main())
