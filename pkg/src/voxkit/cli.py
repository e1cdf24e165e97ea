"""Batch command-line front end.

Every pipeline stage and metric is exposed as a subcommand emitting a JSON
run report (stdout or ``--out``).  Any input flag also accepts a ``.list``
manifest naming one file per line; items are processed by a worker pool
(``--jobs``) but reported in input order, so reports are reproducible.

Exit codes: 0 success, 2 usage error, 3 file/format error, 4 numeric or
domain error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import align, emg, fileio, metrics, pitch, psola
from .core import SynthSpec, synthesize
from .errors import DomainError, FormatError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_DOMAIN = 4


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _section(cfg: dict, prefix: str) -> dict:
    out = {}
    for key, value in cfg.items():
        if key.startswith(prefix + "."):
            out[key[len(prefix) + 1 :]] = value
    return out


def pitch_config_from_mapping(cfg: dict) -> pitch.PitchConfig:
    fields = _section(cfg, "pitch")
    known = set(pitch.PitchConfig.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown pitch config keys: {', '.join(sorted(unknown))}")
    return pitch.PitchConfig(**fields)


def emg_config_from_mapping(cfg: dict) -> emg.EmgPreprocessConfig:
    fields = _section(cfg, "emg")
    known = set(emg.EmgPreprocessConfig.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown emg config keys: {', '.join(sorted(unknown))}")
    return emg.EmgPreprocessConfig(**fields)


def flatten_target_from_mapping(cfg: dict, args) -> psola.FlattenTarget:
    fields = _section(cfg, "flatten")
    unknown = set(fields) - {"mode", "value_hz"}
    if unknown:
        raise ValueError(f"unknown flatten config keys: {', '.join(sorted(unknown))}")
    mode = getattr(args, "target_mode", None) or fields.get("mode", "speaker_mean")
    value = getattr(args, "target_hz", None)
    if value is None:
        value = fields.get("value_hz")
    return psola.FlattenTarget(mode=mode, value=value)


# ---------------------------------------------------------------------------
# corpus expansion and reporting
# ---------------------------------------------------------------------------

def expand_inputs(path_str: str) -> list[Path]:
    """A ``.list`` file expands to its (non-comment) lines; anything else is
    a single item."""
    path = Path(path_str)
    if path.suffix != ".list":
        return [path]
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read manifest {path}: {exc}") from exc
    items = []
    for ln in lines:
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            p = Path(ln)
            items.append(p if p.is_absolute() else path.parent / p)
    if not items:
        raise FormatError(f"manifest {path} lists no items")
    return items


def expand_pairs(a: str, b: str) -> list[tuple[Path, Path]]:
    left, right = expand_inputs(a), expand_inputs(b)
    if len(left) != len(right):
        raise FormatError(
            f"manifests list different item counts: {len(left)} vs {len(right)}"
        )
    return list(zip(left, right))


def run_pool(worker, items, jobs: int) -> list[dict]:
    if jobs <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


def aggregate(items: list[dict], metric: str, extra_rms: bool = False) -> dict:
    values = [it[metric] for it in items if it.get(metric) is not None]
    agg: dict = {"metric": metric, "count": len(values)}
    if values:
        arr = np.asarray(values, dtype=np.float64)
        agg["mean"] = float(arr.mean())
        agg["std"] = float(arr.std())
        if extra_rms:
            agg["rms"] = float(np.sqrt(np.mean(arr**2)))
    else:
        agg["mean"] = None
        agg["std"] = None
        if extra_rms:
            agg["rms"] = None
    return agg


def emit_report(args, command: str, inputs, config: dict, items: list[dict], agg: dict) -> None:
    report = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "inputs": [str(p) for p in inputs],
        "items": items,
        "aggregate": agg,
    }
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _load_file_config(args) -> dict:
    return fileio.load_config(args.config) if args.config else {}


def _derive_output(input_path: Path, output: str | None, many: bool, suffix: str) -> Path | None:
    if output is None:
        return None
    out = Path(output)
    if many:
        out.mkdir(parents=True, exist_ok=True)
        return out / (input_path.stem + suffix)
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def cmd_pitch_track(args) -> None:
    cfg = _load_file_config(args)
    pc = pitch_config_from_mapping(cfg)
    inputs = expand_inputs(args.input)
    many = len(inputs) > 1

    def worker(path: Path) -> dict:
        audio = fileio.read_wav(path, channel=args.channel)
        contour = pitch.track_pitch(audio, pc)
        item = {
            "input": str(path),
            "n_frames": len(contour),
            "n_voiced": contour.n_voiced,
            "mean_f0_hz": float(contour.voiced_f0().mean()) if contour.n_voiced else None,
        }
        out_path = _derive_output(path, args.output, many, ".f0.csv")
        if out_path is not None:
            fileio.write_contour(out_path, contour)
            item["output"] = str(out_path)
        return item

    items = run_pool(worker, inputs, args.jobs)
    emit_report(args, "pitch track", inputs, asdict(pc), items, aggregate(items, "mean_f0_hz"))


def cmd_pitch_global(args) -> None:
    cfg = _load_file_config(args)
    inputs = expand_inputs(args.input)

    def worker(path: Path) -> dict:
        contour = fileio.read_contour(path)
        return {
            "input": str(path),
            "n_voiced": contour.n_voiced,
            "mean_f0_hz": float(contour.voiced_f0().mean()) if contour.n_voiced else None,
        }

    items = run_pool(worker, inputs, args.jobs)
    contours = [fileio.read_contour(p) for p in inputs]
    gp = pitch.global_pitch(contours, speaker_id=args.speaker)
    agg = aggregate(items, "mean_f0_hz")
    agg["global_f0_hz"] = gp.value
    agg["n_voiced_frames"] = gp.n_voiced_frames
    emit_report(args, "pitch global", inputs, dict(cfg), items, agg)


def cmd_flatten(args) -> None:
    cfg = _load_file_config(args)
    pc = pitch_config_from_mapping(cfg)
    target = flatten_target_from_mapping(cfg, args)
    inputs = expand_inputs(args.input)
    many = len(inputs) > 1

    def worker(path: Path) -> dict:
        audio = fileio.read_wav(path, channel=args.channel)
        contour = pitch.track_pitch(audio, pc)
        resolved = target.resolve(contour)
        flat = psola.flatten_pitch(audio, contour, target)
        item = {
            "input": str(path),
            "target_hz": resolved,
            "n_clipped": flat.clipped,
        }
        out_path = _derive_output(path, args.output, many, ".flat.wav")
        if out_path is not None:
            fileio.write_wav(out_path, flat, encoding=args.encoding)
            item["output"] = str(out_path)
        return item

    items = run_pool(worker, inputs, args.jobs)
    config = {"target_mode": target.mode, "target_value": target.value, **asdict(pc)}
    emit_report(args, "flatten", inputs, config, items, aggregate(items, "target_hz"))


def cmd_align_dtw(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.ref, args.src)

    def worker(pair) -> dict:
        ref_path, src_path = pair
        result = align.dtw(
            fileio.read_features(ref_path),
            fileio.read_features(src_path),
            metric=args.metric,
        )
        return {
            "ref": str(ref_path),
            "src": str(src_path),
            "cost": result.cost,
            "normalized_cost": result.normalized_cost,
            "path_len": int(result.path.shape[0]),
        }

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    emit_report(
        args, "align dtw", inputs, {"metric": args.metric, **cfg},
        items, aggregate(items, "normalized_cost"),
    )


def cmd_align_loss(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.ref, args.src)

    def worker(pair) -> dict:
        ref_path, src_path = pair
        loss = align.content_loss(
            fileio.read_features(ref_path), fileio.read_features(src_path)
        )
        return {"ref": str(ref_path), "src": str(src_path), "loss": loss}

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    emit_report(args, "align loss", inputs, dict(cfg), items, aggregate(items, "loss"))


def cmd_eval_f0_local(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.pred, args.gt)

    def worker(pair) -> dict:
        pred_path, gt_path = pair
        report = metrics.local_f0_deviation(
            fileio.read_contour(pred_path),
            fileio.read_contour(gt_path),
            frames=args.frames,
        )
        return {
            "pred": str(pred_path),
            "gt": str(gt_path),
            "local_dev_hz": report.local_dev,
            "n_eval_frames": report.n_eval_frames,
            "pred_mean_hz": report.pred_mean,
            "gt_mean_hz": report.gt_mean,
        }

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    emit_report(
        args, "eval f0-local", inputs, {"frames": args.frames, **cfg},
        items, aggregate(items, "local_dev_hz"),
    )


def cmd_eval_f0_global(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.pred, args.gt)

    def worker(pair) -> dict:
        pred_path, gt_path = pair
        pred = pitch.global_pitch([fileio.read_contour(pred_path)])
        gt = pitch.global_pitch([fileio.read_contour(gt_path)])
        return {
            "pred": str(pred_path),
            "gt": str(gt_path),
            "pred_hz": pred.value,
            "gt_hz": gt.value,
            "abs_error_hz": metrics.global_f0_error(pred, gt),
        }

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    # the corpus aggregate reports both mean and RMS of the absolute errors
    emit_report(
        args, "eval f0-global", inputs, dict(cfg),
        items, aggregate(items, "abs_error_hz", extra_rms=True),
    )


def cmd_eval_consistency(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.a, args.b)

    def worker(pair) -> dict:
        a_path, b_path = pair
        a = metrics.SpeakerEmbedding(fileio.read_embedding(a_path), a_path.stem)
        b = metrics.SpeakerEmbedding(fileio.read_embedding(b_path), b_path.stem)
        return {
            "a": str(a_path),
            "b": str(b_path),
            "cosine": metrics.speaker_consistency(a, b),
        }

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    emit_report(args, "eval consistency", inputs, dict(cfg), items, aggregate(items, "cosine"))


def cmd_eval_asr(args) -> None:
    cfg = _load_file_config(args)
    pairs = expand_pairs(args.ref, args.hyp)

    def worker(pair) -> dict:
        ref_path, hyp_path = pair
        try:
            ref_text = ref_path.read_text()
            hyp_text = hyp_path.read_text()
        except OSError as exc:
            raise FormatError(f"cannot read transcript: {exc}") from exc
        report = metrics.error_rate(ref_text, hyp_text, unit=args.unit)
        return {
            "ref": str(ref_path),
            "hyp": str(hyp_path),
            "rate": report.rate,
            "substitutions": report.substitutions,
            "insertions": report.insertions,
            "deletions": report.deletions,
            "ref_len": report.ref_len,
        }

    items = run_pool(worker, pairs, args.jobs)
    inputs = [p for pair in pairs for p in pair]
    emit_report(
        args, "eval asr", inputs, {"unit": args.unit, **cfg},
        items, aggregate(items, "rate"),
    )


def cmd_emg_preprocess(args) -> None:
    cfg = _load_file_config(args)
    ec = emg_config_from_mapping(cfg)
    inputs = expand_inputs(args.input)
    many = len(inputs) > 1

    def worker(path: Path) -> dict:
        rec = emg.load_session(path)
        feats = emg.preprocess(rec, ec)
        item = {
            "input": str(path),
            "session_id": rec.session_id,
            "mode": rec.mode,
            "n_channels": rec.n_channels,
            "n_frames": int(feats.frames.shape[0]),
            "frame_rate": feats.frame_rate,
        }
        out_path = _derive_output(path, args.output, many, ".features.ftrx")
        if out_path is not None:
            fileio.write_features(out_path, feats.frames)
            item["output"] = str(out_path)
        return item

    items = run_pool(worker, inputs, args.jobs)
    emit_report(args, "emg preprocess", inputs, asdict(ec), items, aggregate(items, "n_frames"))


def cmd_emg_shift(args) -> None:
    cfg = _load_file_config(args)
    ec = emg_config_from_mapping(cfg)
    lead_ms = args.lead_ms if args.lead_ms is not None else ec.lead_shift_ms
    inputs = expand_inputs(args.input)
    many = len(inputs) > 1

    def worker(path: Path) -> dict:
        rec = emg.load_session(path)
        shifted = emg.apply_lead_shift(rec, lead_ms)
        item = {
            "input": str(path),
            "session_id": rec.session_id,
            "shift_samples": int(round(lead_ms * rec.sample_rate / 1000.0)),
        }
        out_path = _derive_output(path, args.output, many, ".shifted.json")
        if out_path is not None:
            emg.save_session(shifted, out_path)
            item["output"] = str(out_path)
        return item

    items = run_pool(worker, inputs, args.jobs)
    emit_report(
        args, "emg shift", inputs, {"lead_ms": lead_ms},
        items, aggregate(items, "shift_samples"),
    )


def cmd_testkit_synth(args) -> None:
    spec = SynthSpec(
        kind=args.kind,
        duration=args.duration,
        amplitude=args.amplitude,
        base=args.f0,
        depth=args.depth,
        rate=args.rate,
        start=args.f0_start,
        end=args.f0_end,
    )
    audio, contour = synthesize(spec, args.sample_rate)
    if args.noise > 0:
        rng = np.random.default_rng(args.seed)
        noisy = audio.samples + rng.normal(0.0, args.noise, size=len(audio))
        from .core import AudioBuffer, clip_samples

        samples, n_clipped = clip_samples(noisy)
        audio = AudioBuffer(samples, audio.sample_rate, clipped=n_clipped)
    fileio.write_wav(args.output, audio, encoding=args.encoding)
    item = {
        "output": str(args.output),
        "n_samples": len(audio),
        "n_frames": len(contour),
        "mean_f0_hz": float(contour.voiced_f0().mean()) if contour.n_voiced else None,
    }
    if args.contour:
        fileio.write_contour(Path(args.contour), contour)
        item["contour"] = str(args.contour)
    config = {
        "kind": args.kind,
        "duration": args.duration,
        "amplitude": args.amplitude,
        "sample_rate": args.sample_rate,
        "noise": args.noise,
        "seed": args.seed,
    }
    emit_report(args, "testkit synth", [Path(args.output)], config, [item],
                aggregate([item], "mean_f0_hz"))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_shared(p: argparse.ArgumentParser, seed: bool = False) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxkit",
        description="Speech and biosignal toolkit: pitch, PSOLA flattening, "
        "DTW alignment, EMG preprocessing, and evaluation metrics.",
    )
    top = parser.add_subparsers(dest="group", required=True)

    g_pitch = top.add_parser("pitch", help="pitch analysis").add_subparsers(
        dest="command", required=True
    )
    p = g_pitch.add_parser("track", help="track f0 of WAV input(s)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="contour CSV path (or directory for corpora)")
    p.add_argument("--channel", type=int, default=None)
    _add_shared(p)
    p.set_defaults(func=cmd_pitch_track)

    p = g_pitch.add_parser("global", help="pooled global pitch of contour file(s)")
    p.add_argument("--input", required=True)
    p.add_argument("--speaker", default="")
    _add_shared(p)
    p.set_defaults(func=cmd_pitch_global)

    p = top.add_parser("flatten", help="PSOLA pitch flattening of WAV input(s)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="flattened WAV path (or directory for corpora)")
    p.add_argument("--channel", type=int, default=None)
    p.add_argument("--target-mode", choices=psola.FlattenTarget.MODES, default=None)
    p.add_argument("--target-hz", type=float, default=None)
    p.add_argument("--encoding", choices=("pcm16", "float32"), default="float32")
    _add_shared(p)
    p.set_defaults(func=cmd_flatten)

    g_align = top.add_parser("align", help="sequence alignment").add_subparsers(
        dest="command", required=True
    )
    p = g_align.add_parser("dtw", help="align two FTRX feature files")
    p.add_argument("--ref", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--metric", choices=align.METRICS, default="euclidean")
    _add_shared(p)
    p.set_defaults(func=cmd_align_dtw)

    p = g_align.add_parser("loss", help="DTW content loss between feature files")
    p.add_argument("--ref", required=True)
    p.add_argument("--src", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_align_loss)

    g_eval = top.add_parser("eval", help="evaluation metrics").add_subparsers(
        dest="command", required=True
    )
    p = g_eval.add_parser("f0-local", help="local f0 deviation between contours")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--frames", choices=("joint", "all"), default="joint")
    _add_shared(p)
    p.set_defaults(func=cmd_eval_f0_local)

    p = g_eval.add_parser("f0-global", help="absolute global pitch error")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_eval_f0_global)

    p = g_eval.add_parser("consistency", help="speaker embedding cosine similarity")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_eval_consistency)

    p = g_eval.add_parser("asr", help="word/character error rate from transcripts")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--unit", choices=("word", "char"), default="word")
    _add_shared(p)
    p.set_defaults(func=cmd_eval_asr)

    g_emg = top.add_parser("emg", help="EMG preprocessing").add_subparsers(
        dest="command", required=True
    )
    p = g_emg.add_parser("preprocess", help="filter, normalize and frame a session")
    p.add_argument("--input", required=True, help="session manifest JSON")
    p.add_argument("--output", help="FTRX feature path (or directory for corpora)")
    _add_shared(p)
    p.set_defaults(func=cmd_emg_preprocess)

    p = g_emg.add_parser("shift", help="apply the articulatory lead shift")
    p.add_argument("--input", required=True, help="session manifest JSON")
    p.add_argument("--output", help="shifted session manifest path (or directory)")
    p.add_argument("--lead-ms", type=float, default=None)
    _add_shared(p)
    p.set_defaults(func=cmd_emg_shift)

    g_testkit = top.add_parser("testkit", help="oracle utilities").add_subparsers(
        dest="command", required=True
    )
    p = g_testkit.add_parser("synth", help="generate a synthetic test signal")
    p.add_argument("--kind", choices=SynthSpec.KINDS, required=True)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--f0", type=float, default=None, help="base frequency")
    p.add_argument("--depth", type=float, default=None, help="vibrato depth")
    p.add_argument("--rate", type=float, default=None, help="vibrato rate")
    p.add_argument("--f0-start", type=float, default=None, help="glide start")
    p.add_argument("--f0-end", type=float, default=None, help="glide end")
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--noise", type=float, default=0.0, help="additive noise std")
    p.add_argument("--output", required=True, help="WAV output path")
    p.add_argument("--contour", help="also write the generation contour CSV")
    p.add_argument("--encoding", choices=("pcm16", "float32"), default="float32")
    _add_shared(p, seed=True)
    p.set_defaults(func=cmd_testkit_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())
