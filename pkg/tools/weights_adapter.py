#!/usr/bin/env python3
"""
RedunFlow Weights Adapter

Serves a model saved by ``redunflow train`` over the adapter protocol,
evaluating the stored layers with numpy (tanh between hidden layers,
softmax on the output).

    python tools/weights_adapter.py out/model.json
"""

import argparse
import json
import sys

import numpy as np


def load_layers(path):
    with open(path, "r") as f:
        payload = json.load(f)
    layers = [
        (np.asarray(layer["weight"], dtype=np.float64), np.asarray(layer["bias"], dtype=np.float64))
        for layer in payload["layers"]
    ]
    return int(payload["d"]), int(payload["class_count"]), layers


def forward(layers, X):
    h = X
    for k, (weight, bias) in enumerate(layers):
        h = h @ weight.T + bias
        if k < len(layers) - 1:
            h = np.tanh(h)
    h = h - h.max(axis=1, keepdims=True)
    e = np.exp(h)
    return e / e.sum(axis=1, keepdims=True)


def main():
    parser = argparse.ArgumentParser(description="Serve saved RedunFlow weights")
    parser.add_argument("model", help="model.json written by redunflow train")
    args = parser.parse_args()

    d, classes, layers = load_layers(args.model)

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if request.get("cmd") == "meta":
                response = {"d": d, "classes": classes}
            elif request.get("cmd") == "predict":
                X = np.asarray(request["instances"], dtype=np.float64).reshape(-1, d)
                response = {"probs": forward(layers, X).tolist()}
            else:
                response = {"error": f"unknown cmd {request.get('cmd')!r}"}
        except (ValueError, KeyError, TypeError) as e:
            response = {"error": str(e)}
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
