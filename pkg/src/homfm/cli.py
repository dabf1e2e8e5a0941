"""Command-line entry point: ``homfm data | train | sample | eval``.

Exit codes: 0 ok, 2 bad flags/config/schema, 3 I/O, 4 diverged training,
5 corrupt or incompatible checkpoint.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from . import flowmatch, metrics, net
from .datagen import PRNG_ID, CheckerboardSpec, sample_checkerboard
from .errors import CheckpointError, DivergedTraining, HomFMError
from .homspace import get_space, stereo

log = logging.getLogger("homfm")

EXIT_USAGE, EXIT_IO, EXIT_DIVERGED, EXIT_CHECKPOINT = 2, 3, 4, 5
COLUMNS = {"H2": ["x", "y"], "S2": ["x", "y", "z", "u", "v"]}
META_PREFIX = "# homfm "
CONFIG_OUTPUT_KEYS = ("out", "loss_csv")


class UsageError(HomFMError):
    pass


# CSV artifacts


def write_points(path, points, space, meta) -> None:
    space = get_space(space).name
    points = np.asarray(points, dtype=np.float64)
    if space == "S2":
        rows = np.concatenate([points, stereo(points)], axis=1) if len(points) else np.zeros((0, 5))
    else:
        rows = points
    with open(path, "w", newline="") as f:
        f.write(META_PREFIX + json.dumps({"space": space, **meta}, sort_keys=True) + "\n")
        w = csv.writer(f)
        w.writerow(COLUMNS[space])
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def read_points(path):
    """Return ``(points, space, meta)``; S2 files yield the ``x, y, z`` columns."""
    meta = {}
    with open(path, newline="") as f:
        lines = [ln for ln in f]
    body = []
    for ln in lines:
        if ln.startswith(META_PREFIX):
            meta = json.loads(ln[len(META_PREFIX):])
        elif not ln.startswith("#"):
            body.append(ln)
    rows = list(csv.reader(body))
    if not rows:
        raise UsageError(f"{path}: missing header row")
    header = rows[0]
    space = next((s for s, cols in COLUMNS.items() if cols == header), None)
    if space is None:
        raise UsageError(f"{path}: unrecognised header {header}")
    data = rows[1:]
    if any(len(r) != len(header) for r in data):
        raise UsageError(f"{path}: wrong column count")
    try:
        arr = np.array(data, dtype=np.float64).reshape(len(data), len(header))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return arr[:, : get_space(space).point_dim], space, meta


def write_loss_curve(path, losses, meta) -> None:
    with open(path, "w", newline="") as f:
        f.write(META_PREFIX + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(f)
        w.writerow(["step", "loss"])
        for i, v in enumerate(losses, 1):
            w.writerow([i, repr(float(v))])


# commands


def _load_json(path):
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from exc


def cmd_data(args) -> int:
    space = get_space(args.space).name
    if args.spec in (None, "defaults"):
        spec = CheckerboardSpec.default(space)
    else:
        spec = CheckerboardSpec.from_dict({"space": space, **_load_json(args.spec)})
        if spec.space != space:
            raise UsageError("spec space differs from --space")
    pts = sample_checkerboard(spec, args.n, args.seed)
    meta = {"kind": "checkerboard", "n": args.n, "seed": args.seed, "prng_id": PRNG_ID,
            "checkerboard": spec.to_dict()}
    write_points(args.out, pts, space, meta)
    return 0


def resolve_train_config(args):
    raw = _load_json(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    outputs = {k: raw.pop(k) for k in CONFIG_OUTPUT_KEYS if k in raw}
    if args.space:
        raw["space"] = args.space
    if args.variant:
        raw["variant"] = args.variant
    cfg = flowmatch.TrainConfig.from_dict(raw)
    out = args.out or outputs.get("out")
    if not out:
        raise UsageError("no checkpoint path: pass --out or set 'out' in the config")
    loss_csv = args.loss_csv or outputs.get("loss_csv") or _sibling(out, ".loss.csv")
    return cfg, out, loss_csv


def _sibling(path, suffix):
    p = str(path)
    return (p[:-5] if p.endswith(".json") else p) + suffix


def cmd_train(args) -> int:
    cfg, out, loss_csv = resolve_train_config(args)
    t0 = time.perf_counter()
    ckpt = flowmatch.train(cfg, progress_every=args.log_every)
    elapsed = time.perf_counter() - t0
    net.save_checkpoint(ckpt, out)
    write_loss_curve(loss_csv, ckpt.loss_curve, {"kind": "loss_curve", "config": cfg.to_dict(),
                                                 "prng_id": PRNG_ID})
    final = ckpt.loss_curve[-1] if ckpt.loss_curve else None
    print(json.dumps({"final_loss": final, "elapsed_s": round(elapsed, 3), "steps": cfg.total_steps,
                      "checkpoint": str(out), "loss_csv": str(loss_csv)}))
    return 0


def cmd_sample(args) -> int:
    ckpt = net.load_checkpoint(args.ckpt)
    try:
        cfg = flowmatch.config_of(ckpt)
    except HomFMError as exc:
        raise net.CorruptCheckpoint(f"checkpoint config is invalid: {exc}") from exc
    res = flowmatch.sample(ckpt, args.n, args.steps, args.seed, raw=args.raw)
    meta = {"kind": "generated", "n_requested": args.n, "n": len(res.points), "rejected": res.rejected,
            "steps": args.steps, "seed": args.seed, "raw": args.raw, "prng_id": PRNG_ID,
            "config": cfg.to_dict()}
    write_points(args.out, res.points, cfg.space, meta)
    if cfg.variant == "ambient":
        with open(args.out, "a") as f:
            f.write("# " + json.dumps({"rejected": res.rejected}) + "\n")
    print(json.dumps({"variant": cfg.variant, "n_written": len(res.points), "rejected": res.rejected}))
    return 0


def cmd_eval(args) -> int:
    a, sa, _ = read_points(args.generated)
    b, sb, _ = read_points(args.target)
    if sa != sb:
        raise UsageError(f"generated samples are on {sa} but target is on {sb}")
    if len(a) == 0 or len(b) == 0:
        raise UsageError("empty sample file")
    report = metrics.evaluate(a, b, args.metric, args.mode, args.seed, n_proj=args.n_proj)
    print(json.dumps(report.to_dict()))
    return 0


def _positive(v):
    try:
        n = int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {v!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _seed(v):
    n = int(v)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homfm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("data", help="sample a checkerboard target")
    p.add_argument("--space", required=True, type=str.upper, choices=["H2", "S2"])
    p.add_argument("--n", required=True, type=_positive)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--spec", default="defaults", help="JSON checkerboard spec or 'defaults'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_data)

    p = sub.add_parser("train", help="train a flow-matching model")
    p.add_argument("--config", help="JSON run config (TrainConfig fields plus out / loss_csv)")
    p.add_argument("--space", type=str.upper, choices=["H2", "S2"])
    p.add_argument("--variant", choices=["ambient", "algmatrix", "coords"])
    p.add_argument("--out")
    p.add_argument("--loss-csv")
    p.add_argument("--log-every", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="integrate a trained field from noise")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--n", required=True, type=_positive)
    p.add_argument("--steps", type=_positive, default=100)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--raw", action="store_true", help="ambient only: skip group projection")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="compare generated and target samples")
    p.add_argument("--generated", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--metric", choices=["energy", "swd"], default="energy")
    p.add_argument("--mode", choices=["intrinsic", "chart"], default="intrinsic")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--n-proj", type=_positive, default=256)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose or getattr(args, "log_every", 0) else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CheckpointError as exc:
        print(f"homfm: corrupt checkpoint: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except DivergedTraining as exc:
        print(f"homfm: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"homfm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (HomFMError, ValueError, TypeError) as exc:
        print(f"homfm: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
