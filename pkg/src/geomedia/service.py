"""HTTP query service in the style of the OGC WFS 3.0 draft.

GeoMediaApi is framework-agnostic: handle() maps (method, target, body) to
(status, JSON-serializable payload), which keeps every route testable
without sockets. serve() wraps it in a threading stdlib HTTP server.

Contract notes: unknown or repeated query parameters are rejected with 400
(fail-closed against filter typos); every mutation is flushed to disk
before its response; responses contain no wall-clock values, only stored
data, so they are deterministic given store state.
"""

from __future__ import annotations

import json
import logging
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, unquote, urlsplit

from . import media
from .codec import (
    document_to_obj,
    epoch_to_iso,
    geojson_point,
    geojson_polygon,
    parse_datetime,
    parse_document,
)
from .errors import (
    BadAnnotationError,
    BadDateTimeError,
    BadQueryError,
    CorruptStoreError,
    DuplicateIdError,
    GeoMediaError,
    KindMismatchError,
    NotFoundError,
    ParseError,
    StoreIoError,
    WrongKindError,
)
from .fov import fov_contains, fov_sector_polygon, resolve_direction
from .geo import GeoPoint
from .media import MovingVideo, STPhoto
from .query import QuerySpec, evaluate, fov_at, position_at, visible_intervals
from .store import Annotation, MediaStore
from .temporal import TimeInterval

LOGGER = logging.getLogger(__name__)

DEFAULT_LIMIT = 10

_STATUS_BY_CODE = {
    "NotFound": 404,
    "BadQuery": 400,
    "BadBody": 400,
    "KindMismatch": 422,
    "Conflict": 409,
    "Internal": 500,
}

_CANONICAL_MEDIA_TYPES = {kind.lower(): kind for kind in media.KINDS}


def _api_error(code: str, message: str, path: str) -> tuple[int, dict]:
    status = _STATUS_BY_CODE[code]
    return status, {"httpStatus": status, "code": code, "message": message, "path": path}


class GeoMediaApi:
    """Routes WFS-3-style requests onto a MediaStore."""

    def __init__(self, store: MediaStore):
        self.store = store

    def handle(self, method: str, target: str, body: bytes | None = None) -> tuple[int, object]:
        """Dispatch one request; returns (HTTP status, JSON payload or None)."""
        parts = urlsplit(target)
        path = parts.path
        try:
            params = _decode_params(parts.query)
            segments = [unquote(s) for s in path.split("/") if s]
            return self._route(method, segments, params, body, path)
        except BadQueryError as exc:
            return _api_error("BadQuery", str(exc), path)
        except (ParseError, BadAnnotationError) as exc:
            return _api_error("BadBody", str(exc), path)
        except NotFoundError as exc:
            return _api_error("NotFound", str(exc), path)
        except DuplicateIdError as exc:
            return _api_error("Conflict", str(exc), path)
        except (KindMismatchError, WrongKindError) as exc:
            return _api_error("KindMismatch", str(exc), path)
        except (StoreIoError, CorruptStoreError) as exc:
            LOGGER.error("store failure for %s %s: %s", method, target, exc)
            return _api_error("Internal", str(exc), path)
        except GeoMediaError as exc:
            return _api_error("BadQuery", str(exc), path)
        except Exception:  # pragma: no cover - last-resort guard
            LOGGER.exception("unhandled error for %s %s", method, target)
            return _api_error("Internal", "internal error", path)

    # -- routing -----------------------------------------------------------

    def _route(self, method, segments, params, body, path):
        if not segments:
            return self._root(method, params, path)
        if segments[0] != "collections":
            raise NotFoundError(f"no route for {path}")
        rest = segments[1:]
        if not rest:
            if method == "GET":
                _allow_params(params, set())
                return 200, {"collections": [self._collection_obj(c.id) for c in self.store.list_collections()]}
            if method == "POST":
                _allow_params(params, set())
                return self._create_collection(body)
            raise NotFoundError(f"no route for {method} {path}")
        cid = rest[0]
        if len(rest) == 1:
            return self._collection(method, cid, params, path)
        if rest[1] != "items":
            raise NotFoundError(f"no route for {path}")
        if len(rest) == 2:
            return self._items(method, cid, params, path)
        fid = rest[2]
        if len(rest) == 3:
            return self._item(method, cid, fid, params, body, path)
        tail = rest[3]
        if len(rest) == 4 and tail in ("position", "fov", "visible"):
            if method != "GET":
                raise NotFoundError(f"no route for {method} {path}")
            return getattr(self, f"_item_{tail}")(cid, fid, params)
        if tail == "annotations":
            return self._annotations(method, cid, fid, rest[4:], params, body, path)
        raise NotFoundError(f"no route for {path}")

    def _root(self, method, params, path):
        if method != "GET":
            raise NotFoundError(f"no route for {method} {path}")
        _allow_params(params, set())
        return 200, {
            "title": "geomedia",
            "description": "geo-tagged media collections with spatio-temporal queries",
            "links": [
                {"href": "/", "rel": "self", "type": "application/json"},
                {"href": "/collections", "rel": "data", "type": "application/json"},
            ],
        }

    # -- collections ---------------------------------------------------------

    def _collection_obj(self, cid: str) -> dict:
        meta = self.store.get_collection(cid)
        bbox = self.store.collection_bbox(cid)
        extent = self.store.collection_extent(cid)
        return {
            "id": meta.id,
            "title": meta.title,
            "mediaType": meta.media_type,
            "created": meta.created,
            "featureCount": self.store.feature_count(cid),
            "bbox": list(bbox) if bbox else None,
            "extent": interval_str(extent) if extent else None,
        }

    def _create_collection(self, body):
        obj = _decode_body(body)
        cid = obj.get("id")
        if not isinstance(cid, str):
            raise ParseError("'id' must be a string", "/id")
        title = obj.get("title", "")
        if not isinstance(title, str):
            raise ParseError("'title' must be a string", "/title")
        raw_type = obj.get("mediaType")
        media_type = _CANONICAL_MEDIA_TYPES.get(raw_type.lower()) if isinstance(raw_type, str) else None
        if media_type is None:
            raise ParseError(f"'mediaType' must be one of {list(media.KINDS)}", "/mediaType")
        try:
            self.store.create_collection(cid, title, media_type)
        except ValueError as exc:
            raise ParseError(str(exc), "/id") from None
        self._persist()
        return 201, self._collection_obj(cid)

    def _collection(self, method, cid, params, path):
        if method == "GET":
            _allow_params(params, set())
            return 200, self._collection_obj(cid)
        if method == "DELETE":
            _allow_params(params, set())
            self.store.delete_collection(cid)
            self._persist()
            return 204, None
        raise NotFoundError(f"no route for {method} {path}")

    # -- items ------------------------------------------------------------------

    def _items(self, method, cid, params, path):
        if method != "GET":
            raise NotFoundError(f"no route for {method} {path}")
        _allow_params(params, {"bbox", "datetime", "near", "visibleFrom", "limit", "offset"})
        spec = decode_query_spec(params)
        matched = evaluate(self.store, cid, QuerySpec(
            bbox=spec.bbox, interval=spec.interval, near=spec.near,
            visible_from=spec.visible_from,
        ))
        page = matched[spec.offset : spec.offset + (spec.limit or DEFAULT_LIMIT)]
        return 200, {
            "numberMatched": len(matched),
            "numberReturned": len(page),
            "query": _echo_query(params),
            "features": [
                {"fid": r.fid, "document": document_to_obj(r.doc, "epoch")} for r in page
            ],
        }

    def _item(self, method, cid, fid, params, body, path):
        if method == "GET":
            _allow_params(params, set())
            record = self.store.get_feature(cid, fid)
            return 200, document_to_obj(record.doc, "epoch")
        if method == "PUT":
            _allow_params(params, set())
            if body is None:
                raise ParseError("request body required")
            doc = parse_document(body)
            existed = _feature_exists(self.store, cid, fid)
            record = self.store.put_feature(cid, fid, doc)
            self._persist()
            return (200 if existed else 201), document_to_obj(record.doc, "epoch")
        if method == "DELETE":
            _allow_params(params, set())
            self.store.delete_feature(cid, fid)
            self._persist()
            return 204, None
        raise NotFoundError(f"no route for {method} {path}")

    def _item_position(self, cid, fid, params):
        _allow_params(params, {"at"}, required={"at"})
        t = parse_instant(params["at"])
        record = self.store.get_feature(cid, fid)
        return 200, geojson_point(position_at(record.doc, t))

    def _item_fov(self, cid, fid, params):
        _allow_params(params, {"at"})
        record = self.store.get_feature(cid, fid)
        payload = record.doc.payload
        if isinstance(payload, STPhoto):
            sector = fov_sector_polygon(
                payload.loc, resolve_direction(payload.fov), payload.fov
            )
        elif isinstance(payload, MovingVideo):
            if "at" not in params:
                raise BadQueryError("'at' is required for a moving video")
            state = fov_at(payload, parse_instant(params["at"]))
            sector = fov_sector_polygon(state.camera, state.direction, state.fov)
        else:
            raise WrongKindError(f"{record.doc.kind} has no field of view")
        return 200, geojson_polygon(sector)

    def _item_visible(self, cid, fid, params):
        _allow_params(params, {"point"}, required={"point"})
        p = parse_lonlat(params["point"], "point")
        record = self.store.get_feature(cid, fid)
        payload = record.doc.payload
        if isinstance(payload, STPhoto):
            visible = fov_contains(payload.loc, resolve_direction(payload.fov), payload.fov, p)
            intervals = [TimeInterval(payload.t, payload.t)] if visible else []
        elif isinstance(payload, MovingVideo):
            intervals = visible_intervals(payload, p)
        else:
            raise WrongKindError(f"{record.doc.kind} has no field of view")
        return 200, {"intervals": [interval_str(iv) for iv in intervals]}

    # -- annotations ---------------------------------------------------------------

    def _annotations(self, method, cid, fid, tail, params, body, path):
        _allow_params(params, set())
        if len(tail) > 1:
            raise NotFoundError(f"no route for {path}")
        aid = tail[0] if tail else None
        if aid is None and method == "GET":
            anns = self.store.list_annotations(cid, fid)
            return 200, {"annotations": [_annotation_obj(a) for a in anns]}
        if aid is None and method == "POST":
            ann = self._decode_annotation(body, cid, fid)
            self.store.put_annotation(cid, fid, ann)
            self._persist()
            return 201, _annotation_obj(ann)
        if aid is not None and method == "GET":
            return 200, _annotation_obj(self.store.get_annotation(cid, fid, aid))
        if aid is not None and method == "DELETE":
            self.store.delete_annotation(cid, fid, aid)
            self._persist()
            return 204, None
        raise NotFoundError(f"no route for {method} {path}")

    def _decode_annotation(self, body, cid, fid) -> Annotation:
        obj = _decode_body(body)
        aid = obj.get("aid")
        if aid is None:
            existing = {a.aid for a in self.store.list_annotations(cid, fid)}
            n = len(existing) + 1
            while f"a{n}" in existing:
                n += 1
            aid = f"a{n}"
        elif not isinstance(aid, str):
            raise ParseError("'aid' must be a string", "/aid")
        time_range = None
        if obj.get("timeRange") is not None:
            raw = obj["timeRange"]
            if not isinstance(raw, str) or "/" not in raw:
                raise ParseError("'timeRange' must be \"start/end\" ISO instants", "/timeRange")
            start, end = raw.split("/", 1)
            try:
                time_range = TimeInterval(parse_datetime(start), parse_datetime(end))
            except (BadDateTimeError, ValueError) as exc:
                raise ParseError(f"bad timeRange: {exc}", "/timeRange") from None
        return Annotation(aid, obj.get("kind"), obj.get("body"), time_range)

    def _persist(self) -> None:
        if self.store.directory is not None:
            self.store.flush()


# -- request decoding helpers -------------------------------------------------------


def _decode_params(query: str) -> dict[str, str]:
    pairs = parse_qsl(query, keep_blank_values=True)
    params: dict[str, str] = {}
    for key, value in pairs:
        if key in params:
            raise BadQueryError(f"repeated query parameter {key!r}")
        params[key] = value
    return params


def _allow_params(params: dict, allowed: set, required: set = frozenset()) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise BadQueryError(f"unknown query parameters: {sorted(unknown)}")
    missing = required - set(params)
    if missing:
        raise BadQueryError(f"missing query parameters: {sorted(missing)}")


def _decode_body(body: bytes | None) -> dict:
    if not body:
        raise ParseError("request body required")
    try:
        obj = json.loads(body.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed JSON body: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("body must be a JSON object")
    return obj


_INT_RE = re.compile(r"^-?\d+$")


def parse_instant(raw: str) -> int:
    if _INT_RE.match(raw.strip()):
        return int(raw.strip())
    try:
        return parse_datetime(raw)
    except BadDateTimeError as exc:
        raise BadQueryError(str(exc)) from None


def _parse_floats(raw: str, n: int, name: str) -> list[float]:
    parts = raw.split(",")
    if len(parts) != n:
        raise BadQueryError(f"{name} needs {n} comma-separated numbers, got {raw!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise BadQueryError(f"{name} needs numbers, got {raw!r}") from None


def parse_lonlat(raw: str, name: str) -> GeoPoint:
    lon, lat = _parse_floats(raw, 2, name)
    try:
        return GeoPoint(lon, lat)
    except ValueError as exc:
        raise BadQueryError(f"bad {name}: {exc}") from None


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise BadQueryError(f"{name} must be an integer, got {raw!r}") from None


def decode_query_spec(params: dict[str, str]) -> QuerySpec:
    bbox = None
    if "bbox" in params:
        b = _parse_floats(params["bbox"], 4, "bbox")
        if b[0] > b[2] or b[1] > b[3]:
            raise BadQueryError(f"inverted bbox {params['bbox']!r}")
        bbox = (b[0], b[1], b[2], b[3])
    interval = None
    if "datetime" in params:
        raw = params["datetime"]
        if "/" in raw:
            start, end = raw.split("/", 1)
            lo, hi = parse_instant(start), parse_instant(end)
        else:
            lo = hi = parse_instant(raw)
        if lo > hi:
            raise BadQueryError(f"inverted datetime interval {raw!r}")
        interval = TimeInterval(lo, hi)
    near = None
    if "near" in params:
        lon, lat, radius = _parse_floats(params["near"], 3, "near")
        if radius <= 0:
            raise BadQueryError(f"near radius must be > 0, got {radius}")
        try:
            near = (GeoPoint(lon, lat), radius)
        except ValueError as exc:
            raise BadQueryError(f"bad near point: {exc}") from None
    visible_from = None
    if "visibleFrom" in params:
        visible_from = parse_lonlat(params["visibleFrom"], "visibleFrom")
    limit = _parse_int(params["limit"], "limit") if "limit" in params else None
    if limit is not None and limit < 1:
        raise BadQueryError(f"limit must be >= 1, got {limit}")
    offset = _parse_int(params["offset"], "offset") if "offset" in params else 0
    if offset < 0:
        raise BadQueryError(f"offset must be >= 0, got {offset}")
    return QuerySpec(bbox=bbox, interval=interval, near=near,
                     visible_from=visible_from, limit=limit, offset=offset)


def _echo_query(params: dict[str, str]) -> dict:
    return {key: params[key] for key in sorted(params)}


def interval_str(iv: TimeInterval) -> str:
    return f"{epoch_to_iso(iv.start)}/{epoch_to_iso(iv.end)}"


def _annotation_obj(ann: Annotation) -> dict:
    body = [list(v) for v in ann.body] if ann.kind == "polygon" else ann.body
    return {
        "aid": ann.aid,
        "kind": ann.kind,
        "body": body,
        "timeRange": None if ann.time_range is None else interval_str(ann.time_range),
    }


def _feature_exists(store: MediaStore, cid: str, fid: str) -> bool:
    try:
        store.get_feature(cid, fid)
        return True
    except NotFoundError:
        store.get_collection(cid)  # 404 on missing collection, not missing feature
        return False


# -- stdlib HTTP adapter --------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    server_version = "geomedia/0.1"
    protocol_version = "HTTP/1.1"

    def _dispatch(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else None
        status, payload = self.server.api.handle(self.command, self.path, body)
        data = b"" if payload is None else json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if data:
            self.wfile.write(data)

    do_GET = _dispatch
    do_POST = _dispatch
    do_PUT = _dispatch
    do_DELETE = _dispatch

    def log_message(self, fmt, *args):
        LOGGER.debug("%s %s", self.address_string(), fmt % args)


class GeoMediaServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, store: MediaStore, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.api = GeoMediaApi(store)

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def serve(store: MediaStore, host: str, port: int) -> GeoMediaServer:
    """Bind and return a server; callers drive serve_forever()/shutdown()."""
    return GeoMediaServer(store, host, port)
