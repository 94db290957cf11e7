#!/usr/bin/env python3
"""
RedunFlow Fixed Distribution Adapter

Model adapter that answers every prediction with the same class
distribution. Misbehaviour modes exercise the client's protocol checks.

    python tools/fixed_distribution_adapter.py --d 3 --probs 0.25,0.75
"""

import argparse
import json
import sys


def parse_args():
    parser = argparse.ArgumentParser(description="Fixed-distribution model adapter")
    parser.add_argument("--d", type=int, default=2, help="Input dimension reported by meta")
    parser.add_argument("--probs", default="0.25,0.75", help="Comma separated class distribution")
    parser.add_argument(
        "--mode",
        choices=["ok", "error", "garbage", "exit", "meta-error"],
        default="ok",
        help="Reply to predict requests normally, with an error, with non-JSON, or by exiting; "
        "meta-error fails the meta handshake",
    )
    return parser.parse_args()


def reply(payload):
    sys.stdout.write(json.dumps(payload) + "\n")
    sys.stdout.flush()


def main():
    args = parse_args()
    probs = [float(p) for p in args.probs.split(",")]

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            reply({"error": "request is not JSON"})
            continue

        cmd = request.get("cmd")
        if cmd == "meta" and args.mode == "meta-error":
            reply({"error": "model failed to load"})
        elif cmd == "meta":
            reply({"d": args.d, "classes": len(probs)})
        elif cmd == "predict":
            if args.mode == "error":
                reply({"error": "model unavailable"})
            elif args.mode == "garbage":
                sys.stdout.write("not json\n")
                sys.stdout.flush()
            elif args.mode == "exit":
                return 1
            else:
                reply({"probs": [probs for _ in request.get("instances", [])]})
        else:
            reply({"error": f"unknown cmd {cmd!r}"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
