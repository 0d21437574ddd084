"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data or format
error, 3 I/O error. Output files are written atomically, and configuration
is fully validated before any output path is touched.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import build_backends, load_config
from .core import BlockProbs, CharProbSeq
from .errors import ConfigError, DataError, FormatError
from .fileio import atomic_write_text
from .imaging import pnm_dims
from .manifest import (
    ground_truth_from_manifest,
    load_ground_truth,
    load_manifest,
    load_predictions,
    save_predictions,
)
from .metrics import evaluate
from .recognize import recognize_manifest, save_recorded
from .report import format_report, render_figures, write_structured
from .router import route_table_row
from .synthgen import augment_dataset, generate_dataset, load_lexicon


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="YAML pipeline configuration")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config entry (dotted keys)")
    sub.add_argument("--seed", type=int, help="override the config seed everywhere")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strkit",
        description="Synthetic word-image pipeline: generate, degrade, route, "
                    "recognize, and score.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_synth)

    p = subs.add_parser("augment", help="write degraded copies of a dataset")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_augment)

    p = subs.add_parser("route", help="print the routing decision per sample")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="also write the table to this file")
    p.set_defaults(func=_cmd_route)

    p = subs.add_parser("recognize", help="run the recognition pipeline")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="prediction TSV path")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_recognize)

    p = subs.add_parser("eval", help="score predictions against ground truth")
    _add_common(p)
    p.add_argument("--preds", required=True)
    gts = p.add_mutually_exclusive_group(required=True)
    gts.add_argument("--gts", help="two-column id/text TSV")
    gts.add_argument("--gts-manifest", help="three-column manifest with transcriptions")
    p.add_argument("--train-lex", required=True, help="training lexicon word list")
    p.add_argument("--style", choices=("ablation", "final"), default="final")
    p.add_argument("--out", help="directory for report.txt, report.json, and figures")
    p.set_defaults(func=_cmd_eval)

    p = subs.add_parser("record-fixture", help="write a recorded-probabilities file")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--sample", action="append", required=True, metavar="ID=TEXT[@CONF]",
                   help="emit TEXT for ID with per-step confidence CONF (default 1.0)")
    p.add_argument("--blocks", type=int, default=1, help="number of identical blocks")
    p.add_argument("--steps", type=int, help="pad every entry to this step count")
    p.set_defaults(func=_cmd_record_fixture)

    return parser


def _cmd_synth(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    if cfg.synth is None:
        raise ConfigError("config has no synth section")
    samples = generate_dataset(cfg.synth, args.out, cfg.normalizer, cfg.alphabet,
                               jobs=args.jobs)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def _cmd_augment(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    samples = augment_dataset(args.manifest, args.out, cfg.augment, cfg.seed,
                              jobs=args.jobs)
    print(f"wrote {len(samples)} augmented samples to {args.out}")
    return 0


def _cmd_route(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    rows = []
    for sample in load_manifest(args.manifest):
        w, h, _ = pnm_dims(sample.image_path)
        rows.append(route_table_row(sample.id, w, h, cfg.router))
    table = "\n".join(rows) + "\n" if rows else ""
    sys.stdout.write(table)
    if args.out:
        atomic_write_text(args.out, table)
    return 0


def _cmd_recognize(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    backends = build_backends(cfg)
    results = recognize_manifest(args.manifest, backends, cfg.router,
                                 cfg.alphabet, jobs=args.jobs)
    save_predictions(
        ((sid, rec.text, rec.mean_confidence) for sid, rec in results), args.out)
    print(f"wrote {len(results)} predictions to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    preds = {sid: text for sid, (text, _) in load_predictions(args.preds).items()}
    if args.gts:
        gts = load_ground_truth(args.gts)
    else:
        gts = ground_truth_from_manifest(args.gts_manifest)
    train_lex, _ = load_lexicon(args.train_lex, cfg.normalizer, cfg.alphabet)
    report = evaluate(preds, gts, train_lex, cfg.normalizer)
    text = format_report(report, args.style)
    sys.stdout.write(text)
    if args.out:
        out_dir = args.out
        atomic_write_text(f"{out_dir}/report.txt", text)
        write_structured(report, f"{out_dir}/report.json", args.style)
        render_figures(report, out_dir)
    return 0


def _parse_fixture_sample(spec: str) -> tuple[str, str, float]:
    if "=" not in spec:
        raise ConfigError(f"--sample must look like ID=TEXT[@CONF], got {spec!r}")
    sid, rest = spec.split("=", 1)
    if not sid:
        raise ConfigError(f"--sample has an empty id: {spec!r}")
    text, conf = rest, 1.0
    if "@" in rest:
        candidate, conf_s = rest.rsplit("@", 1)
        try:
            conf = float(conf_s)
        except ValueError:
            conf = 1.0
        else:
            text = candidate
    if not 0.0 < conf <= 1.0:
        raise ConfigError(f"--sample confidence must be in (0, 1], got {conf}")
    return sid, text, conf


def _fixture_probs(text: str, conf: float, alphabet, blocks: int,
                   steps: int | None) -> BlockProbs:
    a = alphabet.size
    t_text = len(text) + 1
    t_total = max(steps or 0, t_text)
    rows = np.zeros((t_total, a), dtype=np.float64)
    rest = (1.0 - conf) / (a - 1)
    for step, ch in enumerate(text):
        try:
            idx = alphabet.index_of(ch)
        except ValueError:
            raise DataError(f"character {ch!r} is outside the alphabet") from None
        rows[step, :] = rest
        rows[step, idx] = conf
    rows[len(text), :] = rest
    rows[len(text), alphabet.eos_index] = conf
    rows[t_text:, alphabet.eos_index] = 1.0
    seq = CharProbSeq(rows)
    return BlockProbs(tuple([seq] * blocks))


def _cmd_record_fixture(args) -> int:
    cfg = load_config(args.config, args.overrides, args.seed)
    if args.blocks < 1:
        raise ConfigError("--blocks must be >= 1")
    entries = []
    seen = set()
    for spec in args.sample:
        sid, text, conf = _parse_fixture_sample(spec)
        if sid in seen:
            raise DataError(f"duplicate sample id {sid!r}")
        seen.add(sid)
        entries.append((sid, _fixture_probs(text, conf, cfg.alphabet,
                                            args.blocks, args.steps)))
    save_recorded(entries, args.out)
    print(f"wrote {len(entries)} fixture entries to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
