"""Command-line surface: segment, extract, eval, bench, serve.

Diagnostics go to stderr; stdout carries machine-readable CSV only.
Exit codes: 0 success, 2 argument errors, 3 io errors, 4 format
errors. Identical invocations produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from . import image_io
from .affinity import apply_edge_probs, auto_sigma, gaussian_affinity
from .errors import ArgumentError, FormatError
from .ers_baseline import lazy_greedy_segment
from .graph import build_graph
from .hers import MergeHierarchy, build_hierarchy, extract, extract_many
from .metrics import asa, boundary_recall, explained_variation
from .types import GaussianParams


@dataclass
class RunConfig:
    """Parsed segmentation inputs shared by segment and bench."""

    image: Optional[Path] = None
    affinity_source: str = "gaussian"  # gaussian | file
    affinity_file: Optional[Path] = None
    sigma: Optional[float] = None  # None means auto
    edge_probs: Optional[Path] = None
    epsilon: float = 1e-3
    ks: List[int] = field(default_factory=list)
    out_dir: Optional[Path] = None
    tolerance: int = 2
    channel_permutation: Optional[List[int]] = None
    label_format: str = "pgm"

    def validate(self) -> None:
        if not self.ks:
            raise ArgumentError("at least one k is required")
        for k in self.ks:
            if k < 1:
                raise ArgumentError(f"k must be >= 1, got {k}")
        if self.affinity_source == "gaussian" and self.image is None:
            raise ArgumentError("gaussian affinities need --image")
        if self.affinity_source == "file" and self.affinity_file is None:
            raise ArgumentError("--affinity file requires --affinity-file")
        if self.channel_permutation is not None and sorted(self.channel_permutation) != list(range(8)):
            raise ArgumentError("--channel-permutation must list each of 0..7 once")
        if not self.epsilon > 0:
            raise ArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if self.tolerance < 0:
            raise ArgumentError(f"tolerance must be >= 0, got {self.tolerance}")


def _parse_ks(text: str) -> List[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ArgumentError(f"bad k list {text!r}") from exc
    if not ks:
        raise ArgumentError("empty k list")
    return ks


def _parse_sigma(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError as exc:
        raise ArgumentError(f"bad sigma {text!r}") from exc
    if not value > 0:
        raise ArgumentError(f"sigma must be positive, got {value}")
    return value


def _parse_permutation(text: str) -> List[int]:
    try:
        perm = [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise ArgumentError(f"bad channel permutation {text!r}") from exc
    if sorted(perm) != list(range(8)):
        raise ArgumentError("--channel-permutation must list each of 0..7 once")
    return perm


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        image=Path(args.image) if args.image else None,
        affinity_source="file" if args.affinity_file else args.affinity,
        affinity_file=Path(args.affinity_file) if args.affinity_file else None,
        sigma=_parse_sigma(args.sigma),
        edge_probs=Path(args.edge_probs) if args.edge_probs else None,
        epsilon=args.epsilon,
        ks=_parse_ks(args.k),
        out_dir=Path(args.out) if getattr(args, "out", None) else None,
        channel_permutation=_parse_permutation(args.channel_permutation)
        if args.channel_permutation
        else None,
        label_format=getattr(args, "label_format", "pgm"),
    )
    cfg.validate()
    return cfg


def _load_inputs(cfg: RunConfig):
    """Resolve (image or None, affinity map, stem) from a config."""
    image = image_io.load_image(cfg.image) if cfg.image is not None else None
    if cfg.affinity_source == "file":
        amap = image_io.read_affinity(cfg.affinity_file, permutation=cfg.channel_permutation)
        if image is not None and (image.height, image.width) != (amap.height, amap.width):
            raise ArgumentError(
                f"image {image.height}x{image.width} does not match "
                f"affinity {amap.height}x{amap.width}"
            )
        stem = cfg.affinity_file.stem
    else:
        params = GaussianParams(cfg.sigma) if cfg.sigma is not None else auto_sigma(image)
        amap = gaussian_affinity(image, params)
        stem = cfg.image.stem
    if cfg.edge_probs is not None:
        amap = apply_edge_probs(amap, image_io.read_edge_probs(cfg.edge_probs), cfg.epsilon)
    return image, amap, stem


def _label_path(out_dir: Path, stem: str, k: int, label_format: str) -> Path:
    ext = "csv" if label_format == "csv" else "pgm"
    return out_dir / f"{stem}_k{k}.{ext}"


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    if cfg.out_dir is None:
        raise ArgumentError("--out directory is required")
    image, amap, stem = _load_inputs(cfg)
    graph = build_graph(amap)
    for k in cfg.ks:
        if k > graph.node_count:
            raise ArgumentError(f"k={k} exceeds pixel count {graph.node_count}")
    hierarchy = build_hierarchy(graph)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    image_io.write_hierarchy(hierarchy, cfg.out_dir / f"{stem}.hrs1")
    labelings = extract_many(hierarchy, sorted(set(cfg.ks)))
    by_k = dict(zip(sorted(set(cfg.ks)), labelings))
    if image is None:
        print("warning: no --image given, skipping boundary overlays", file=sys.stderr)
    for k in cfg.ks:
        labels = by_k[k]
        image_io.write_labels(labels, _label_path(cfg.out_dir, stem, k, cfg.label_format))
        if image is not None:
            image_io.write_boundary_overlay(
                image, labels, cfg.out_dir / f"{stem}_k{k}_overlay.png"
            )
    print(
        f"segmented {stem}: {graph.node_count} px, {hierarchy.round_count} rounds, "
        f"k = {sorted(set(cfg.ks))} -> {cfg.out_dir}",
        file=sys.stderr,
    )
    return 0


def infer_lattice_shape(hierarchy: MergeHierarchy) -> Tuple[int, int]:
    """Recover (H, W) of the source lattice from merge adjacency.

    Tries every width dividing node_count and keeps those under which
    all merges join 8-neighbours. Ambiguity (tiny or degenerate
    hierarchies) is an error; pass --size explicitly then.
    """
    n = hierarchy.node_count
    mu, mv = hierarchy.merge_u, hierarchy.merge_v
    candidates = []
    for w in range(1, n + 1):
        if n % w:
            continue
        ru, cu = mu // w, mu % w
        rv, cv = mv // w, mv % w
        if (abs(ru - rv) <= 1).all() and (abs(cu - cv) <= 1).all():
            candidates.append((n // w, w))
    if len(candidates) == 1:
        return candidates[0]
    raise ArgumentError(
        f"cannot infer lattice shape for {n} nodes "
        f"({len(candidates)} candidates); pass --size WxH"
    )


def _parse_size(text: str) -> Tuple[int, int]:
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError as exc:
        raise ArgumentError(f"bad --size {text!r}, want WxH") from exc
    if w < 1 or h < 1:
        raise ArgumentError(f"bad --size {text!r}")
    return h, w


def cmd_extract(args) -> int:
    ks = _parse_ks(args.k)
    for k in ks:
        if k < 1:
            raise ArgumentError(f"k must be >= 1, got {k}")
    hierarchy = image_io.read_hierarchy(args.hierarchy)
    if args.size:
        shape = _parse_size(args.size)
        if shape[0] * shape[1] != hierarchy.node_count:
            raise ArgumentError(
                f"--size {args.size} has {shape[0] * shape[1]} pixels, "
                f"hierarchy has {hierarchy.node_count}"
            )
        hierarchy.shape = shape
    else:
        hierarchy.shape = infer_lattice_shape(hierarchy)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.hierarchy).stem
    ordered = sorted(set(ks))
    labelings = dict(zip(ordered, extract_many(hierarchy, ordered)))
    for k in ks:
        image_io.write_labels(labelings[k], _label_path(out_dir, stem, k, args.label_format))
    print(f"extracted k = {ordered} from {args.hierarchy} -> {out_dir}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    if args.tolerance < 0:
        raise ArgumentError(f"tolerance must be >= 0, got {args.tolerance}")
    gt = image_io.read_labels(args.gt)
    seg = image_io.read_labels(args.seg)
    asa_v = asa(gt, seg)
    br_v = boundary_recall(gt, seg, args.tolerance)
    if args.image:
        ev_v = repr(explained_variation(image_io.load_image(args.image), seg))
    else:
        ev_v = ""
    row = f"{Path(args.seg).stem},{seg.k},{asa_v!r},{br_v!r},{ev_v},{args.tolerance}"
    print(row)
    if args.csv:
        with open(args.csv, "a") as f:
            f.write(row + "\n")
    return 0


def cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    _, amap, _ = _load_inputs(cfg)
    ks = sorted(set(cfg.ks))
    rows = []
    if args.solver == "hers":
        t0 = time.perf_counter()
        graph = build_graph(amap)
        hierarchy = build_hierarchy(graph)
        build_ms = (time.perf_counter() - t0) * 1000.0
        rows.append(("build", "", build_ms))
        for k in ks:
            if k > hierarchy.node_count:
                raise ArgumentError(f"k={k} exceeds pixel count {hierarchy.node_count}")
            t0 = time.perf_counter()
            extract(hierarchy, k)
            rows.append(("extract", str(k), (time.perf_counter() - t0) * 1000.0))
    else:
        for k in ks:
            t0 = time.perf_counter()
            graph = build_graph(amap)  # the sequential solver re-runs per k
            if k > graph.node_count:
                raise ArgumentError(f"k={k} exceeds pixel count {graph.node_count}")
            lazy_greedy_segment(graph, k)
            rows.append(("solve", str(k), (time.perf_counter() - t0) * 1000.0))

    print("phase,k,millis,cumulative_millis")
    cumulative = 0.0
    for phase, k, ms in rows:
        cumulative += ms
        print(f"{phase},{k},{ms:.3f},{cumulative:.3f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser, with_out: bool) -> None:
    p.add_argument("--image", help="input image (PNG or binary PPM)")
    p.add_argument(
        "--affinity",
        choices=["gaussian", "file"],
        default="gaussian",
        help="affinity source (default: gaussian similarity over RGB)",
    )
    p.add_argument("--affinity-file", help="AFF8 affinity map (implies --affinity file)")
    p.add_argument("--sigma", default="auto", help="Gaussian bandwidth or 'auto'")
    p.add_argument("--edge-probs", help="EDG1 boundary probabilities to divide weights by")
    p.add_argument("--epsilon", type=float, default=1e-3, help="divisor floor for --edge-probs")
    p.add_argument("--k", required=True, help="comma-separated superpixel counts")
    p.add_argument(
        "--channel-permutation",
        help="8 comma-separated source channel indices for foreign AFF8 files",
    )
    if with_out:
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--label-format", choices=["pgm", "csv"], default="pgm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entroseg",
        description="Hierarchical entropy-rate superpixel engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="build a hierarchy and write label maps")
    _add_pipeline_flags(p, with_out=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", help="replay a stored hierarchy at new k values")
    p.add_argument("--hierarchy", required=True, help="HRS1 file")
    p.add_argument("--k", required=True, help="comma-separated superpixel counts")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--size", help="lattice size WxH (inferred when omitted)")
    p.add_argument("--label-format", choices=["pgm", "csv"], default="pgm")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="score a segmentation against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth label map (PGM/CSV)")
    p.add_argument("--seg", required=True, help="segmentation label map (PGM/CSV)")
    p.add_argument("--image", help="image for explained variation")
    p.add_argument("--tolerance", type=int, default=2, help="boundary recall tolerance (px)")
    p.add_argument("--csv", help="append the row to this CSV file as well")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time hierarchy build/extraction or the greedy baseline")
    _add_pipeline_flags(p, with_out=False)
    p.add_argument("--solver", choices=["hers", "lazy"], default="hers")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"error[argument]: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error[format]: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
