"""Command-line front door for geomedia stores.

Exit codes: 0 success, 1 operational error (missing store/collection, parse
failures), 2 usage errors and bad queries. The store directory defaults to
the GEOCMS_STORE environment variable, the serve address to GEOCMS_ADDR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codec import (
    geojson_feature,
    geojson_feature_collection,
    geojson_point,
    geojson_polygon,
    parse_document,
    serialize_document,
)
from .errors import (
    BadQueryError,
    GeoMediaError,
    KindMismatchError,
    ParseError,
    StoreIoError,
    WrongKindError,
)
from .fov import fov_sector_polygon, resolve_direction
from .media import KINDS, MovingVideo, STPhoto
from .query import QuerySpec, evaluate, fov_at, position_at, visible_intervals
from .service import (
    GeoMediaServer,
    decode_query_spec,
    interval_str,
    parse_instant,
    parse_lonlat,
)
from .store import MediaStore

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BadQueryError, WrongKindError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeoMediaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomedia",
        description="Manage and query collections of geo-tagged media.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty store directory")
    _store_flag(p)
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("ingest", help="insert GeoMedia JSON files into a collection")
    _store_flag(p)
    p.add_argument("--collection", required=True, metavar="CID")
    p.add_argument("--create", action="store_true", help="create the collection first")
    p.add_argument("--media-type", choices=KINDS, help="kind for --create")
    p.add_argument("files", nargs="+", metavar="[FID=]FILE",
                   help="documents to ingest; fid defaults to the file stem")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("query", help="run a spatio-temporal query")
    _store_flag(p)
    p.add_argument("--collection", required=True, metavar="CID")
    p.add_argument("--bbox", metavar="MINLON,MINLAT,MAXLON,MAXLAT")
    p.add_argument("--datetime", metavar="INSTANT|START/END")
    p.add_argument("--near", metavar="LON,LAT,RADIUS_M")
    p.add_argument("--visible-from", metavar="LON,LAT")
    p.add_argument("--limit", type=int)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--format", choices=("ids", "geojson", "geomedia"), default="ids")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("at", help="evaluate a track/video position at a time")
    _selector_flags(p)
    p.add_argument("--at", required=True, metavar="TIME", help="ISO instant or epoch ms")
    p.set_defaults(func=_cmd_at)

    p = sub.add_parser("fov", help="emit the FoV sector polygon as GeoJSON")
    _selector_flags(p)
    p.add_argument("--at", metavar="TIME", help="required for videos")
    p.add_argument("--arc-step", type=float, default=5.0, metavar="DEG")
    p.set_defaults(func=_cmd_fov)

    p = sub.add_parser("visible", help="times during which a point is visible")
    _selector_flags(p)
    p.add_argument("--point", required=True, metavar="LON,LAT")
    p.add_argument("--step-ms", type=int, default=100)
    p.set_defaults(func=_cmd_visible)

    p = sub.add_parser("convert", help="rewrite a document with iso or epoch times")
    p.add_argument("--to", choices=("iso", "epoch"), required=True)
    p.add_argument("file", metavar="FILE")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("serve", help="run the HTTP service")
    _store_flag(p)
    p.add_argument("--addr", default=os.environ.get("GEOCMS_ADDR", "127.0.0.1:8808"),
                   metavar="HOST:PORT")
    p.add_argument("--init", action="store_true",
                   help="create the store if the directory has none")
    p.set_defaults(func=_cmd_serve)

    return parser


def _store_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store", default=os.environ.get("GEOCMS_STORE"),
                   metavar="DIR", help="store directory (default: $GEOCMS_STORE)")


def _selector_flags(p: argparse.ArgumentParser) -> None:
    _store_flag(p)
    p.add_argument("--collection", metavar="CID")
    p.add_argument("--fid", metavar="FID")
    p.add_argument("--file", metavar="FILE", help="operate on a document file instead")


def _require_store(args) -> str:
    if not args.store:
        raise BadQueryError("--store (or GEOCMS_STORE) is required")
    return args.store


def _open_store(args) -> MediaStore:
    return MediaStore.load(_require_store(args))


def _select_document(args):
    if args.file:
        return parse_document(Path(args.file).read_bytes())
    if not (args.collection and args.fid):
        raise BadQueryError("give --file, or --collection and --fid")
    store = _open_store(args)
    return store.get_feature(args.collection, args.fid).doc


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2))


# -- commands ------------------------------------------------------------------


def _cmd_init(args) -> int:
    target = Path(_require_store(args))
    if (target / "manifest.json").exists():
        raise StoreIoError(f"{target} already holds a store")
    MediaStore(target).flush()
    print(f"initialized empty store at {target}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    store = _open_store(args)
    if args.create:
        if not args.media_type:
            raise BadQueryError("--create requires --media-type")
        store.create_collection(args.collection, args.collection, args.media_type)
    failures = 0
    ingested = 0
    for spec in args.files:
        fid, sep, path = spec.partition("=")
        if not sep:
            fid, path = Path(spec).stem, spec
        try:
            doc = parse_document(Path(path).read_bytes())
            store.put_feature(args.collection, fid, doc)
            ingested += 1
        except OSError as exc:
            failures += 1
            print(f"{path}: {exc}", file=sys.stderr)
        except (ParseError, KindMismatchError, BadQueryError) as exc:
            failures += 1
            print(f"{path}: {exc}", file=sys.stderr)
    store.flush()
    print(f"{ingested} feature(s) ingested")
    return EXIT_ERROR if failures else EXIT_OK


def _cmd_query(args) -> int:
    store = _open_store(args)
    params = {}
    if args.bbox:
        params["bbox"] = args.bbox
    if args.datetime:
        params["datetime"] = args.datetime
    if args.near:
        params["near"] = args.near
    if args.visible_from:
        params["visibleFrom"] = args.visible_from
    spec = decode_query_spec(params)
    spec = QuerySpec(bbox=spec.bbox, interval=spec.interval, near=spec.near,
                     visible_from=spec.visible_from, limit=args.limit, offset=args.offset)
    records = evaluate(store, args.collection, spec)
    if args.format == "ids":
        for record in records:
            print(record.fid)
    elif args.format == "geomedia":
        for record in records:
            print(serialize_document(record.doc, "epoch").decode("utf-8"))
    else:
        features = []
        for record in records:
            geometry = None
            if record.bbox is not None:
                center = [(record.bbox[0] + record.bbox[2]) / 2,
                          (record.bbox[1] + record.bbox[3]) / 2]
                geometry = {"type": "Point", "coordinates": center}
            features.append(geojson_feature(geometry, {"fid": record.fid}))
        _print_json(geojson_feature_collection(features))
    return EXIT_OK


def _cmd_at(args) -> int:
    doc = _select_document(args)
    t = parse_instant(args.at)
    _print_json(geojson_point(position_at(doc, t)))
    return EXIT_OK


def _cmd_fov(args) -> int:
    doc = _select_document(args)
    payload = doc.payload
    if isinstance(payload, STPhoto):
        sector = fov_sector_polygon(payload.loc, resolve_direction(payload.fov),
                                    payload.fov, args.arc_step)
    elif isinstance(payload, MovingVideo):
        if not args.at:
            raise BadQueryError("--at is required for a moving video")
        state = fov_at(payload, parse_instant(args.at))
        sector = fov_sector_polygon(state.camera, state.direction, state.fov, args.arc_step)
    else:
        raise WrongKindError(f"{doc.kind} has no field of view")
    _print_json(geojson_polygon(sector))
    return EXIT_OK


def _cmd_visible(args) -> int:
    doc = _select_document(args)
    p = parse_lonlat(args.point, "point")
    intervals = visible_intervals(doc, p, args.step_ms)
    _print_json({"intervals": [interval_str(iv) for iv in intervals]})
    return EXIT_OK


def _cmd_convert(args) -> int:
    doc = parse_document(Path(args.file).read_bytes())
    print(serialize_document(doc, args.to).decode("utf-8"))
    return EXIT_OK


def _cmd_serve(args) -> int:
    target = Path(_require_store(args))
    if not (target / "manifest.json").is_file():
        if args.init:
            MediaStore(target).flush()
        else:
            print(f"error: no store at {target} (use --init to create one)", file=sys.stderr)
            return EXIT_ERROR
    store = MediaStore.load(target)
    host, _, port = args.addr.rpartition(":")
    try:
        server = GeoMediaServer(store, host or "127.0.0.1", int(port))
    except (OSError, ValueError) as exc:
        print(f"error: cannot bind {args.addr}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"serving {target} on http://{server.address}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
