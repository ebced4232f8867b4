"""Acceptance suite for the trainer component."""

import time

import numpy as np
import torch

import entroseg
from dal_trainer import DalModel, Sample, TrainConfig, train
from dal_trainer.export import predict_affinities
from dal_trainer.formats import in_frame_mask, write_aff8
from dal_trainer.losses import bce_loss, dal_loss
from dal_trainer.targets import BinaryNeighborMap, gaussian_affinities, mask_to_neighbors


def report(name, detail=""):
    print(f"[ACCEPTANCE] {name}: PASS {detail}".rstrip())


def test_loss_correctness():
    """Zero at target, BCE reduction at all-boundary, gradients match
    finite differences."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)

    # dal loss vanishes when t = 1 everywhere and a = g
    target = mask_to_neighbors(np.zeros((8, 8), dtype=int))
    image = rng.random((8, 8, 3)).astype(np.float32)
    gsim = gaussian_affinities(image, sigma=0.4)
    assert float(dal_loss(torch.from_numpy(gsim.copy()), target, torch.from_numpy(gsim))) == 0.0

    # with t = 0 everywhere it reduces to the BCE boundary term
    frame = in_frame_mask(8, 8)
    boundary_target = BinaryNeighborMap(data=np.zeros((8, 8, 8), dtype=np.float32), frame=frame)
    pred = torch.from_numpy(rng.random((8, 8, 8)))
    g = torch.from_numpy(rng.random((8, 8, 8)))
    assert float(dal_loss(pred, boundary_target, g)) == float(bce_loss(pred, boundary_target))

    # analytic gradient vs central differences on 8x8 inputs
    mask = rng.integers(0, 3, size=(8, 8))
    target = mask_to_neighbors(mask)
    gsim_t = torch.from_numpy(gaussian_affinities(rng.random((8, 8, 3)), sigma=0.3))
    base = torch.from_numpy(rng.random((8, 8, 8)) * 0.8 + 0.1)

    for loss_fn in (lambda p: dal_loss(p, target, gsim_t), lambda p: bce_loss(p, target)):
        pred = base.clone().requires_grad_(True)
        loss_fn(pred).backward()
        grad = pred.grad
        checked = 0
        h = 1e-6
        flat_frame = np.argwhere(target.frame)
        for c, r, col in flat_frame[rng.choice(len(flat_frame), size=20, replace=False)]:
            plus = base.clone()
            plus[c, r, col] += h
            minus = base.clone()
            minus[c, r, col] -= h
            fd = (float(loss_fn(plus)) - float(loss_fn(minus))) / (2 * h)
            an = float(grad[c, r, col])
            if abs(fd) < 1e-12 and abs(an) < 1e-12:
                continue
            assert abs(an - fd) / max(abs(fd), abs(an)) <= 1e-4
            checked += 1
        assert checked > 0

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report("loss_correctness", f"({elapsed:.1f}s)")


def test_toy_training_feeds_engine():
    """Overfit one two-region image in at most 500 steps; the exported
    affinities drive the engine to exact two-region recovery."""
    t_start = time.perf_counter()
    torch.manual_seed(0)

    size = 64
    img = np.zeros((size, size, 3), dtype=np.float32)
    img[:, size // 2 :, :] = 1.0
    mask = np.zeros((size, size), dtype=np.int64)
    mask[:, size // 2 :] = 1
    gt = entroseg.LabelMap.from_raw(mask)

    sample = Sample.from_arrays(img, mask, sigma=None)
    same = sample.neighbors.data.astype(bool)
    frame = sample.neighbors.frame
    cfg = TrainConfig(learning_rate=1e-3, epochs=25, crop=size, checkpoint_every=10**9)
    model = DalModel()

    steps = 0
    converged = False
    boundary_mean = interior_mean = None
    while steps < 500:
        train(model, [sample], cfg, seed=steps)
        steps += cfg.epochs
        affinities = predict_affinities(model, img)
        boundary_mean = float(affinities[frame & ~same].mean())
        interior_mean = float(affinities[frame & same].mean())
        if boundary_mean >= interior_mean:
            continue
        graph = entroseg.build_graph(entroseg.AffinityMap(affinities))
        seg = entroseg.extract(entroseg.build_hierarchy(graph), 2)
        if np.array_equal(seg.labels, gt.labels):
            converged = True
            break

    assert converged, (
        f"no exact recovery in {steps} steps "
        f"(boundary {boundary_mean:.3f} vs interior {interior_mean:.3f})"
    )
    assert boundary_mean < interior_mean

    # the file route: exported AFF8 read back by the engine, same result
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "toy.aff8"
        write_aff8(predict_affinities(model, img), path)
        amap = entroseg.read_affinity(path)
        seg = entroseg.extract(entroseg.build_hierarchy(entroseg.build_graph(amap)), 2)
    assert np.array_equal(seg.labels, gt.labels)

    elapsed = time.perf_counter() - t_start
    assert elapsed < 300.0
    report(
        "toy_training_feeds_engine",
        f"({steps} steps, boundary {boundary_mean:.3f} < interior {interior_mean:.3f}, "
        f"{elapsed:.0f}s)",
    )
