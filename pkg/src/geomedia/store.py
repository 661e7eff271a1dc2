"""Persistent collections ("layers") of geo-tagged media with a spatio-temporal index.

A store is a directory: manifest.json with collection metadata and content
checksums, one <cid>.ndjson of features, and one <cid>.ann.ndjson of
annotations per collection (UTF-8, LF). flush() stages every file and
renames data files first, the manifest last, so an interrupted flush is
always detected by checksum at load time instead of loading silently.

Concurrency: one writer at a time, readers any time; every public method
takes the store lock, so no partially applied mutation is ever observable.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import media
from .codec import document_to_obj, parse_document
from .errors import (
    BadAnnotationError,
    BadQueryError,
    CorruptStoreError,
    DuplicateIdError,
    KindMismatchError,
    NotFoundError,
    ParseError,
    StoreIoError,
)
from .media import Bbox, GeoMediaDocument
from .rtree import RTree
from .temporal import TimeInterval

_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
_MANIFEST = "manifest.json"
_FORMAT_VERSION = 1

ANNOTATION_KINDS = ("text", "icon", "polygon")


@dataclass(frozen=True)
class Collection:
    """A named layer of homogeneous geo-tagged media."""

    id: str
    title: str
    media_type: str
    created: int

    def __post_init__(self):
        if not _ID_RE.match(self.id):
            raise ValueError(f"collection id {self.id!r} must match [A-Za-z0-9_-]{{1,64}}")
        if self.media_type not in media.KINDS:
            raise ValueError(f"unknown media type {self.media_type!r}")


@dataclass(frozen=True)
class Annotation:
    """A text, icon, or image-space polygon annotation on one feature."""

    aid: str
    kind: str
    body: object
    time_range: TimeInterval | None = None

    def __post_init__(self):
        if not self.aid:
            raise BadAnnotationError("annotation id must be non-empty")
        if self.kind not in ANNOTATION_KINDS:
            raise BadAnnotationError(f"annotation kind {self.kind!r} unknown")
        if self.kind == "polygon":
            body = self.body
            ok = (
                isinstance(body, (list, tuple))
                and len(body) >= 3
                and all(
                    isinstance(v, (list, tuple))
                    and len(v) == 2
                    and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)
                    for v in body
                )
            )
            if not ok:
                raise BadAnnotationError("polygon body needs >= 3 [x, y] pixel vertices")
            object.__setattr__(self, "body", tuple((float(x), float(y)) for x, y in body))
        elif not isinstance(self.body, str) or not self.body:
            raise BadAnnotationError(f"{self.kind} body must be a non-empty string")


@dataclass(frozen=True)
class FeatureRecord:
    """A stored document plus its cached spatial bbox and temporal extent."""

    fid: str
    doc: GeoMediaDocument
    bbox: Bbox | None
    extent: TimeInterval


class _CollectionState:
    __slots__ = ("meta", "features", "annotations", "index")

    def __init__(self, meta: Collection):
        self.meta = meta
        self.features: dict[str, FeatureRecord] = {}
        self.annotations: dict[str, dict[str, Annotation]] = {}
        self.index = RTree()


def _now_ms() -> int:
    return int(time.time() * 1000)


class MediaStore:
    """Embedded feature store; stands in for a spatial DBMS layer."""

    def __init__(self, directory: str | Path | None = None):
        self._dir = Path(directory) if directory is not None else None
        self._collections: dict[str, _CollectionState] = {}
        self._lock = threading.RLock()

    @property
    def directory(self) -> Path | None:
        return self._dir

    # -- collections ------------------------------------------------------

    def create_collection(
        self, cid: str, title: str, media_type: str, created: int | None = None
    ) -> Collection:
        with self._lock:
            if cid in self._collections:
                raise DuplicateIdError(f"collection {cid!r} already exists")
            meta = Collection(cid, title, media_type, _now_ms() if created is None else created)
            self._collections[cid] = _CollectionState(meta)
            return meta

    def delete_collection(self, cid: str) -> None:
        with self._lock:
            if cid not in self._collections:
                raise NotFoundError(f"collection {cid!r} does not exist")
            del self._collections[cid]

    def get_collection(self, cid: str) -> Collection:
        with self._lock:
            return self._state(cid).meta

    def list_collections(self) -> list[Collection]:
        with self._lock:
            return [self._collections[cid].meta for cid in sorted(self._collections)]

    def _state(self, cid: str) -> _CollectionState:
        try:
            return self._collections[cid]
        except KeyError:
            raise NotFoundError(f"collection {cid!r} does not exist") from None

    # -- features ----------------------------------------------------------

    def put_feature(self, cid: str, fid: str, doc: GeoMediaDocument) -> FeatureRecord:
        """Insert or replace a feature; bbox/extent caches and index stay consistent.

        Replacing a feature keeps its annotations, minus any whose time range
        no longer fits the new temporal extent.
        """
        if not fid or "/" in fid:
            raise BadQueryError(f"feature id {fid!r} must be non-empty without '/'")
        with self._lock:
            state = self._state(cid)
            if doc.kind != state.meta.media_type:
                raise KindMismatchError(
                    f"document kind {doc.kind} does not match collection "
                    f"media type {state.meta.media_type}"
                )
            record = FeatureRecord(fid, doc, media.spatial_bbox(doc), media.time_extent(doc))
            old = state.features.get(fid)
            if old is not None and old.bbox is not None:
                state.index.delete(fid, old.bbox)
            state.features[fid] = record
            if record.bbox is not None:
                state.index.insert(fid, record.bbox)
            anns = state.annotations.get(fid)
            if anns:
                kept = {
                    aid: ann
                    for aid, ann in anns.items()
                    if ann.time_range is None
                    or (
                        record.extent.contains(ann.time_range.start)
                        and record.extent.contains(ann.time_range.end)
                    )
                }
                state.annotations[fid] = kept
            return record

    def get_feature(self, cid: str, fid: str) -> FeatureRecord:
        with self._lock:
            state = self._state(cid)
            try:
                return state.features[fid]
            except KeyError:
                raise NotFoundError(f"feature {fid!r} not in collection {cid!r}") from None

    def delete_feature(self, cid: str, fid: str) -> None:
        with self._lock:
            record = self.get_feature(cid, fid)
            state = self._collections[cid]
            if record.bbox is not None:
                state.index.delete(fid, record.bbox)
            del state.features[fid]
            state.annotations.pop(fid, None)

    def feature_count(self, cid: str) -> int:
        with self._lock:
            return len(self._state(cid).features)

    def list_features(self, cid: str) -> list[FeatureRecord]:
        with self._lock:
            state = self._state(cid)
            return [state.features[fid] for fid in sorted(state.features)]

    # -- spatio-temporal query ----------------------------------------------

    def st_query(
        self,
        cid: str,
        bbox: Bbox | None = None,
        interval: TimeInterval | tuple[int, int] | None = None,
        limit: int | None = None,
        offset: int = 0,
    ) -> list[FeatureRecord]:
        """Features intersecting bbox and overlapping interval, ordered by fid.

        Index candidates are re-checked against the exact predicates, so the
        result equals a linear scan.
        """
        bbox = _check_bbox(bbox)
        interval = _check_interval(interval)
        if limit is not None and limit < 1:
            raise BadQueryError(f"limit must be >= 1, got {limit}")
        if offset < 0:
            raise BadQueryError(f"offset must be >= 0, got {offset}")
        with self._lock:
            state = self._state(cid)
            if bbox is not None:
                fids = state.index.search(bbox)
            else:
                fids = list(state.features)
            out = []
            for fid in sorted(set(fids)):
                record = state.features[fid]
                if bbox is not None and not _bbox_intersects(record.bbox, bbox):
                    continue
                if interval is not None and not record.extent.overlaps(interval):
                    continue
                out.append(record)
            if limit is None:
                return out[offset:]
            return out[offset : offset + limit]

    def collection_bbox(self, cid: str) -> Bbox | None:
        with self._lock:
            boxes = [r.bbox for r in self._state(cid).features.values() if r.bbox]
            if not boxes:
                return None
            return (
                min(b[0] for b in boxes),
                min(b[1] for b in boxes),
                max(b[2] for b in boxes),
                max(b[3] for b in boxes),
            )

    def collection_extent(self, cid: str) -> TimeInterval | None:
        with self._lock:
            extents = [r.extent for r in self._state(cid).features.values()]
            if not extents:
                return None
            return TimeInterval(min(e.start for e in extents), max(e.end for e in extents))

    # -- annotations -----------------------------------------------------------

    def put_annotation(self, cid: str, fid: str, ann: Annotation) -> Annotation:
        with self._lock:
            record = self.get_feature(cid, fid)
            if ann.time_range is not None:
                if record.doc.kind != media.KIND_MOVING_VIDEO:
                    raise BadAnnotationError("time ranges apply to video annotations only")
                extent = record.extent
                if not (extent.contains(ann.time_range.start) and extent.contains(ann.time_range.end)):
                    raise BadAnnotationError(
                        f"time range [{ann.time_range.start}, {ann.time_range.end}] "
                        f"outside feature extent [{extent.start}, {extent.end}]"
                    )
            state = self._collections[cid]
            state.annotations.setdefault(fid, {})[ann.aid] = ann
            return ann

    def list_annotations(self, cid: str, fid: str) -> list[Annotation]:
        with self._lock:
            self.get_feature(cid, fid)
            anns = self._collections[cid].annotations.get(fid, {})
            return [anns[aid] for aid in sorted(anns)]

    def get_annotation(self, cid: str, fid: str, aid: str) -> Annotation:
        with self._lock:
            self.get_feature(cid, fid)
            anns = self._collections[cid].annotations.get(fid, {})
            try:
                return anns[aid]
            except KeyError:
                raise NotFoundError(f"annotation {aid!r} not on feature {fid!r}") from None

    def delete_annotation(self, cid: str, fid: str, aid: str) -> None:
        with self._lock:
            self.get_annotation(cid, fid, aid)
            del self._collections[cid].annotations[fid][aid]

    # -- durability ---------------------------------------------------------------

    def flush(self, directory: str | Path | None = None) -> Path:
        """Write the whole store; data files are renamed before the manifest.

        Any interruption leaves either the previous consistent state or a
        checksum mismatch that load() reports as CorruptStoreError.
        """
        with self._lock:
            target = Path(directory) if directory is not None else self._dir
            if target is None:
                raise StoreIoError("store has no directory; pass one to flush()")
            try:
                self._flush_locked(target)
            except OSError as exc:
                raise StoreIoError(f"flush failed: {exc}") from exc
            if self._dir is None:
                self._dir = target
            return target

    def _flush_locked(self, target: Path) -> None:
        target.mkdir(parents=True, exist_ok=True)
        staged: list[tuple[Path, Path]] = []
        entries = []
        for cid in sorted(self._collections):
            state = self._collections[cid]
            feature_lines = []
            for fid in sorted(state.features):
                doc = state.features[fid].doc
                line = json.dumps(
                    {"fid": fid, "document": document_to_obj(doc, "epoch")},
                    separators=(", ", ": "),
                )
                feature_lines.append(line + "\n")
            ann_lines = []
            for fid in sorted(state.annotations):
                for aid in sorted(state.annotations[fid]):
                    ann_lines.append(_annotation_line(fid, state.annotations[fid][aid]) + "\n")
            feature_bytes = "".join(feature_lines).encode("utf-8")
            ann_bytes = "".join(ann_lines).encode("utf-8")
            meta = state.meta
            entries.append(
                {
                    "id": meta.id,
                    "title": meta.title,
                    "mediaType": meta.media_type,
                    "created": meta.created,
                    "features": len(state.features),
                    "sha256": {
                        "features": hashlib.sha256(feature_bytes).hexdigest(),
                        "annotations": hashlib.sha256(ann_bytes).hexdigest(),
                    },
                }
            )
            staged.append(_stage(target / f"{cid}.ndjson", feature_bytes))
            staged.append(_stage(target / f"{cid}.ann.ndjson", ann_bytes))
        manifest = {"version": _FORMAT_VERSION, "collections": entries}
        manifest_bytes = (json.dumps(manifest, indent=2) + "\n").encode("utf-8")
        manifest_staged = _stage(target / _MANIFEST, manifest_bytes)
        for tmp, final in staged:
            tmp.replace(final)
        manifest_staged[0].replace(manifest_staged[1])
        keep = {final.name for _, final in staged} | {_MANIFEST}
        for stray in target.glob("*.ndjson"):
            if stray.name not in keep:
                stray.unlink()

    @classmethod
    def load(cls, directory: str | Path) -> "MediaStore":
        """Rebuild a store (including indexes) from a flushed directory."""
        target = Path(directory)
        manifest_path = target / _MANIFEST
        if not manifest_path.is_file():
            raise StoreIoError(f"no store manifest at {manifest_path}")
        try:
            manifest = json.loads(manifest_path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise CorruptStoreError(f"unreadable manifest: {exc}") from None
        if not isinstance(manifest, dict) or manifest.get("version") != _FORMAT_VERSION:
            raise CorruptStoreError(f"unsupported store version in {manifest_path}")
        store = cls(target)
        for entry in manifest.get("collections", []):
            store._load_collection(target, entry)
        return store

    def _load_collection(self, target: Path, entry: dict) -> None:
        try:
            cid = entry["id"]
            meta = Collection(cid, entry["title"], entry["mediaType"], entry["created"])
            want_features = entry["features"]
            shas = entry["sha256"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptStoreError(f"bad manifest entry: {exc}") from None
        feature_bytes = _read_file(target / f"{cid}.ndjson")
        ann_bytes = _read_file(target / f"{cid}.ann.ndjson")
        if hashlib.sha256(feature_bytes).hexdigest() != shas.get("features"):
            raise CorruptStoreError(f"checksum mismatch for {cid}.ndjson")
        if hashlib.sha256(ann_bytes).hexdigest() != shas.get("annotations"):
            raise CorruptStoreError(f"checksum mismatch for {cid}.ann.ndjson")
        state = _CollectionState(meta)
        self._collections[cid] = state
        for line_no, line in enumerate(feature_bytes.decode("utf-8").splitlines(), 1):
            try:
                wrapper = json.loads(line)
                fid = wrapper["fid"]
                doc = parse_document(json.dumps(wrapper["document"]))
            except (ValueError, KeyError, TypeError, ParseError) as exc:
                raise CorruptStoreError(f"{cid}.ndjson line {line_no}: {exc}") from None
            record = FeatureRecord(fid, doc, media.spatial_bbox(doc), media.time_extent(doc))
            state.features[fid] = record
            if record.bbox is not None:
                state.index.insert(fid, record.bbox)
        if len(state.features) != want_features:
            raise CorruptStoreError(
                f"{cid}: manifest says {want_features} features, file has {len(state.features)}"
            )
        for line_no, line in enumerate(ann_bytes.decode("utf-8").splitlines(), 1):
            try:
                obj = json.loads(line)
                ann = _annotation_from_obj(obj)
                fid = obj["fid"]
            except (ValueError, KeyError, TypeError, BadAnnotationError) as exc:
                raise CorruptStoreError(f"{cid}.ann.ndjson line {line_no}: {exc}") from None
            if fid not in state.features:
                raise CorruptStoreError(f"{cid}.ann.ndjson line {line_no}: unknown feature {fid!r}")
            state.annotations.setdefault(fid, {})[ann.aid] = ann


def _stage(final: Path, data: bytes) -> tuple[Path, Path]:
    tmp = final.with_name(final.name + ".tmp")
    tmp.write_bytes(data)
    return tmp, final


def _read_file(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise CorruptStoreError(f"missing store file: {exc}") from None


def _annotation_line(fid: str, ann: Annotation) -> str:
    body = [list(v) for v in ann.body] if ann.kind == "polygon" else ann.body
    obj = {
        "fid": fid,
        "aid": ann.aid,
        "kind": ann.kind,
        "body": body,
        "timeRange": None
        if ann.time_range is None
        else [ann.time_range.start, ann.time_range.end],
    }
    return json.dumps(obj, separators=(", ", ": "))


def _annotation_from_obj(obj: dict) -> Annotation:
    tr = obj.get("timeRange")
    time_range = None if tr is None else TimeInterval(tr[0], tr[1])
    return Annotation(obj["aid"], obj["kind"], obj["body"], time_range)


def _check_bbox(bbox) -> Bbox | None:
    if bbox is None:
        return None
    try:
        min_lon, min_lat, max_lon, max_lat = (float(v) for v in bbox)
    except (TypeError, ValueError):
        raise BadQueryError(f"bbox must be four numbers, got {bbox!r}") from None
    if min_lon > max_lon or min_lat > max_lat:
        raise BadQueryError(f"inverted bbox {bbox!r}")
    return (min_lon, min_lat, max_lon, max_lat)


def _check_interval(interval) -> TimeInterval | None:
    if interval is None or isinstance(interval, TimeInterval):
        return interval
    try:
        start, end = interval
        return TimeInterval(int(start), int(end))
    except (TypeError, ValueError) as exc:
        raise BadQueryError(f"bad interval {interval!r}: {exc}") from None


def _bbox_intersects(a: Bbox | None, b: Bbox) -> bool:
    if a is None:
        return False
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]
