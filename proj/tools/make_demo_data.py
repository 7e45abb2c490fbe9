#!/usr/bin/env python3
"""Writes the invalid-split demo dataset used in the README walkthrough.

Train has labels a (600) and e (200); test has a (50) and b, c, d (150 each),
so the label distributions barely overlap and three test labels are unseen.
"""
import json
import random
import sys
from pathlib import Path

out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures/invalid-split")
out.mkdir(parents=True, exist_ok=True)
rng = random.Random(17)
sites = ["north", "south", "east"]
next_id = 0


def row(label):
    global next_id
    r = [str(next_id), f"{0.5 + 0.1 * rng.gauss(0, 1):.6f}", f"{1.0 + 0.2 * rng.gauss(0, 1):.6f}",
         rng.choice(sites), label]
    next_id += 1
    return r


def write(name, rows):
    with open(out / name, "w") as f:
        f.write("sample_id,brightness,contrast,site,label\n")
        for r in rows:
            f.write(",".join(r) + "\n")


write("train.csv", [row("a") for _ in range(600)] + [row("e") for _ in range(200)])
write("test.csv", [row("a") for _ in range(50)] + [row(l) for l in "bcd" for _ in range(150)])
schema = {
    "columns": [{"name": "sample_id", "kind": "identifier"}, {"name": "brightness", "kind": "numeric"},
                {"name": "contrast", "kind": "numeric"}, {"name": "site", "kind": "categorical"},
                {"name": "label", "kind": "categorical"}],
    "task": "classification",
    "label_column": "label",
    "index_column": "sample_id",
}
(out / "schema.json").write_text(json.dumps(schema, indent=2) + "\n")
checkpoint = {
    "architecture": "resnet18",
    "parameter_count": 11181642,
    "num_classes": 5,
    "training_config": {"learning_rate": 0.001, "epochs": 30, "optimizer": "adam"},
    "docstring": "Image quality classifier fine-tuned on the site scans.",
}
(out / "checkpoint.json").write_text(json.dumps(checkpoint, indent=2) + "\n")
