"""Trainer CLI: train / infer, driven by a JSON config file.

Train config keys: images (list of paths), masks (list of paths,
aligned), out (directory), plus any TrainConfig field (learning_rate,
epochs, crop, sigma, loss, ...). Infer config keys: checkpoint, image,
out (AFF8 path), edge_probs_out (optional EDG1 path).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

import torch

from .export import export_affinity
from .formats import load_image, load_mask
from .model import DalModel
from .train import Sample, TrainConfig, train


def _load_config(path) -> dict:
    with open(path) as f:
        return json.load(f)


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    images = cfg.pop("images")
    masks = cfg.pop("masks")
    out = cfg.pop("out")
    seed = cfg.pop("seed", None)
    if len(images) != len(masks):
        print("error: images and masks lists differ in length", file=sys.stderr)
        return 2
    known = {f.name for f in fields(TrainConfig)}
    config = TrainConfig(**{k: v for k, v in cfg.items() if k in known})

    samples = [
        Sample.from_arrays(load_image(img), load_mask(msk), config.sigma)
        for img, msk in zip(images, masks)
    ]
    model = DalModel()
    if seed is not None:
        torch.manual_seed(seed)
    history = train(model, samples, config, out_dir=out, seed=seed)
    print(f"trained {config.epochs} epochs, final loss {history[-1]:.6f}", file=sys.stderr)
    return 0


def cmd_infer(args) -> int:
    cfg = _load_config(args.config)
    model = DalModel()
    model.load_state_dict(torch.load(cfg["checkpoint"], map_location="cpu", weights_only=True))
    image = load_image(cfg["image"])
    export_affinity(model, image, cfg["out"], cfg.get("edge_probs_out"))
    print(f"wrote {cfg['out']}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dal-trainer", description="affinity network trainer")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("train", help="train from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("infer", help="export AFF8/EDG1 from a checkpoint")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_infer)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
