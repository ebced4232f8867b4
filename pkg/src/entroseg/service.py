"""HTTP service around the engine.

The service holds built hierarchies in memory, which is where the
engine pays off for multiple clients: one build, then any number of
near-instant extractions at arbitrary k. Request bodies reference
files on the server's filesystem; label maps come back either as
written files or as raw PGM bytes.
"""

from __future__ import annotations

import io
import threading
import time
import uuid
from pathlib import Path
from typing import List, Literal, Optional

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import image_io
from .affinity import apply_edge_probs, auto_sigma, gaussian_affinity
from .errors import ArgumentError, EngineError, FormatError
from .graph import build_graph
from .hers import build_hierarchy, extract, extract_many
from .metrics import asa, boundary_recall, explained_variation
from .types import GaussianParams


class BuildRequest(BaseModel):
    source: str = Field(description="path to an image (PNG/PPM) or an AFF8 file")
    kind: Literal["image", "affinity"] = "image"
    sigma: Optional[float] = Field(default=None, gt=0, description="None selects auto")
    edge_probs: Optional[str] = None
    epsilon: float = Field(default=1e-3, gt=0)
    channel_permutation: Optional[List[int]] = None


class BuildResponse(BaseModel):
    hierarchy_id: str
    node_count: int
    height: int
    width: int
    merge_count: int
    round_count: int
    build_millis: float


class HierarchyInfo(BaseModel):
    hierarchy_id: str
    node_count: int
    height: int
    width: int


class ExtractRequest(BaseModel):
    ks: List[int] = Field(min_length=1)
    out_dir: str
    label_format: Literal["pgm", "csv"] = "pgm"


class ExtractedFile(BaseModel):
    k: int
    path: str
    millis: float


class ExtractResponse(BaseModel):
    written: List[ExtractedFile]


class EvalRequest(BaseModel):
    gt: str
    seg: str
    image: Optional[str] = None
    tolerance: int = Field(default=2, ge=0)


class EvalResponse(BaseModel):
    image_id: str
    k: int
    asa: float
    br: float
    ev: Optional[float] = None
    tolerance: int


class _Store:
    def __init__(self):
        self._lock = threading.Lock()
        self._items = {}

    def put(self, hierarchy) -> str:
        hid = uuid.uuid4().hex[:12]
        with self._lock:
            self._items[hid] = hierarchy
        return hid

    def get(self, hid: str):
        with self._lock:
            item = self._items.get(hid)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no hierarchy {hid}")
        return item

    def drop(self, hid: str) -> None:
        with self._lock:
            if hid not in self._items:
                raise HTTPException(status_code=404, detail=f"no hierarchy {hid}")
            del self._items[hid]

    def ids(self) -> List[str]:
        with self._lock:
            return list(self._items)


app = FastAPI(title="entroseg", description="entropy-rate superpixel service")
store = _Store()


@app.exception_handler(EngineError)
def _engine_error(request, exc: EngineError):
    from fastapi.responses import JSONResponse

    status = 422 if isinstance(exc, (ArgumentError, FormatError)) else 500
    return JSONResponse(status_code=status, content={"detail": str(exc)})


@app.exception_handler(FileNotFoundError)
def _missing_file(request, exc: FileNotFoundError):
    from fastapi.responses import JSONResponse

    return JSONResponse(status_code=404, content={"detail": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok", "hierarchies": len(store.ids())}


@app.post("/hierarchies", response_model=BuildResponse)
def create_hierarchy(req: BuildRequest):
    t0 = time.perf_counter()
    if req.kind == "affinity":
        amap = image_io.read_affinity(req.source, permutation=req.channel_permutation)
    else:
        image = image_io.load_image(req.source)
        params = GaussianParams(req.sigma) if req.sigma is not None else auto_sigma(image)
        amap = gaussian_affinity(image, params)
    if req.edge_probs is not None:
        amap = apply_edge_probs(amap, image_io.read_edge_probs(req.edge_probs), req.epsilon)
    hierarchy = build_hierarchy(build_graph(amap))
    hid = store.put(hierarchy)
    h, w = hierarchy.label_shape()
    return BuildResponse(
        hierarchy_id=hid,
        node_count=hierarchy.node_count,
        height=h,
        width=w,
        merge_count=hierarchy.merge_count,
        round_count=hierarchy.round_count,
        build_millis=(time.perf_counter() - t0) * 1000.0,
    )


@app.get("/hierarchies", response_model=List[HierarchyInfo])
def list_hierarchies():
    infos = []
    for hid in store.ids():
        hierarchy = store.get(hid)
        h, w = hierarchy.label_shape()
        infos.append(
            HierarchyInfo(hierarchy_id=hid, node_count=hierarchy.node_count, height=h, width=w)
        )
    return infos


@app.get("/hierarchies/{hid}/labels")
def get_labels(hid: str, k: int):
    """One extraction, returned as 16-bit PGM bytes."""
    hierarchy = store.get(hid)
    labels = extract(hierarchy, k)
    buf = io.BytesIO()
    buf.write(b"P5\n%d %d\n65535\n" % (labels.width, labels.height))
    buf.write(labels.labels.astype(">u2").tobytes())
    return Response(content=buf.getvalue(), media_type="application/octet-stream")


@app.post("/hierarchies/{hid}/extract", response_model=ExtractResponse)
def extract_labels(hid: str, req: ExtractRequest):
    hierarchy = store.get(hid)
    ks = sorted(set(req.ks))
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    labelings = extract_many(hierarchy, ks)
    shared_ms = (time.perf_counter() - t0) * 1000.0 / len(ks)
    written = []
    ext = "csv" if req.label_format == "csv" else "pgm"
    for k, labels in zip(ks, labelings):
        path = out_dir / f"{hid}_k{k}.{ext}"
        image_io.write_labels(labels, path)
        written.append(ExtractedFile(k=k, path=str(path), millis=shared_ms))
    return ExtractResponse(written=written)


@app.delete("/hierarchies/{hid}")
def delete_hierarchy(hid: str):
    store.drop(hid)
    return {"deleted": hid}


@app.post("/eval", response_model=EvalResponse)
def evaluate(req: EvalRequest):
    gt = image_io.read_labels(req.gt)
    seg = image_io.read_labels(req.seg)
    ev = None
    if req.image is not None:
        ev = explained_variation(image_io.load_image(req.image), seg)
    return EvalResponse(
        image_id=Path(req.seg).stem,
        k=seg.k,
        asa=asa(gt, seg),
        br=boundary_recall(gt, seg, req.tolerance),
        ev=ev,
        tolerance=req.tolerance,
    )
