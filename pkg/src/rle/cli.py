"""Command-line driver: explain inputs, render figures, run removal benchmarks.

Every library error maps to a stable nonzero exit code (see --help); stdout
stays clean of diagnostics so JSON outputs can be piped.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path

from . import eval as evaluation
from .decompose import (
    partition_image,
    read_image,
    tokenize_text,
    write_png,
    write_ppm,
)
from . import errors
from .explain import (
    RelationalLocalExplainer,
    explanation_from_json,
    explanation_to_json,
    to_local,
)
from .models import SyntheticModel, SyntheticSpec, spawn_bridge
from .render import render_image_explanation, render_text_explanation

EXIT_CODES = [
    (errors.DimensionNotDivisible, 10),
    (errors.TooSmall, 11),
    (errors.TooFewTokens, 12),
    (errors.IncompletePlacement, 13),
    (errors.AsymmetricInput, 14),
    (errors.Degenerate, 15),
    (errors.NonFinite, 16),
    (errors.DimensionMismatch, 17),
    (errors.ModelUnavailable, 20),
    (errors.ProtocolError, 21),
    (errors.ScoreNotFinite, 22),
    (errors.SpawnFailed, 23),
    (errors.HandshakeTimeout, 24),
    (errors.InsufficientPermutations, 30),
    (errors.KOutOfRange, 31),
    (errors.ModalityMismatch, 32),
    (errors.TooManySegments, 40),
    (errors.ZeroOriginalScore, 41),
]

_EPILOG = "error exit codes:\n" + "\n".join(
    f"  {code:3d}  {cls.__name__}" for cls, code in EXIT_CODES
) + "\n    2  usage error\n    1  other failure"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rle",
        description="Pairwise relational attribution for black-box models.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True,
                       help="builtin:<spec> or bridge:<command line>")
        p.add_argument("--perms", default="auto",
                       help="permutation count, or auto (5000 image / 2000 text)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--lambda", dest="lam", type=float, default=0.01)
        p.add_argument("--penalty", choices=["l1", "l2"], default="l1")
        p.add_argument("--permute-mode", choices=["replacement", "shuffle"],
                       default="replacement")
        p.add_argument("--class", dest="target_class", type=int, default=0)
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--out", required=True, help="output JSON path")

    p = sub.add_parser("explain-image", help="explain one image")
    common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--grid", type=int, default=7, help="patch grid side")
    p.add_argument("--figure-format", choices=["png", "ppm"], default="png")

    p = sub.add_parser("explain-text", help="explain one sentence")
    common(p)
    p.add_argument("--text", required=True)

    p = sub.add_parser("eval-irof", help="segment-removal benchmark")
    common(p)
    p.add_argument("--image", action="append", default=[],
                   help="image path (repeatable)")
    p.add_argument("--corpus", help="directory of images")
    p.add_argument("--grid", type=int, default=7)
    p.add_argument("--methods", default="rle,random",
                   help="comma-separated subset of {rle, random}")
    p.add_argument("--slic-k", type=int, default=100)
    p.add_argument("--slic-compactness", type=float, default=10.0)

    p = sub.add_parser("render", help="re-render figures from explanation JSON")
    p.add_argument("--explanation", required=True)
    p.add_argument("--image", help="original image (image explanations)")
    p.add_argument("--text", help="original sentence (text explanations)")
    p.add_argument("--grid", type=int, default=7)
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--figure-format", choices=["png", "ppm"], default="png")
    return parser


def _make_model(spec: str, batch_size: int):
    if spec.startswith("builtin:"):
        model = SyntheticModel(SyntheticSpec.parse(spec[len("builtin:"):]),
                               batch_size=batch_size)
        return model
    if spec.startswith("bridge:"):
        return spawn_bridge(shlex.split(spec[len("bridge:"):]),
                            batch_size=batch_size)
    raise ValueError(f"model spec must start with builtin: or bridge:, "
                     f"got {spec!r}")


def _make_explainer(args) -> RelationalLocalExplainer:
    perms = args.perms if args.perms == "auto" else int(args.perms)
    return RelationalLocalExplainer(
        permutations=perms,
        seed=args.seed,
        permute_mode=args.permute_mode,
        lam=args.lam,
        penalty=args.penalty,
        batch_size=args.batch_size,
    )


def _write_image(image, path: Path, fmt: str):
    if fmt == "png":
        write_png(image, path.parent / (path.name + ".png"))
    else:
        write_ppm(image, path.parent / (path.name + ".ppm"))


def _cmd_explain_image(args) -> int:
    image = read_image(args.image)
    decomp = partition_image(image, args.grid)
    with _make_model(args.model, args.batch_size) as model:
        rel = _make_explainer(args).explain(model, decomp, args.target_class)
    out = Path(args.out)
    out.write_text(explanation_to_json(rel))
    overlay, heatmap = render_image_explanation(rel, decomp)
    _write_image(overlay, out.with_name(out.stem + ".overlay"),
                 args.figure_format)
    _write_image(heatmap, out.with_name(out.stem + ".heatmap"),
                 args.figure_format)
    return 0


def _cmd_explain_text(args) -> int:
    decomp = tokenize_text(args.text)
    with _make_model(args.model, args.batch_size) as model:
        rel = _make_explainer(args).explain(model, decomp, args.target_class)
    out = Path(args.out)
    out.write_text(explanation_to_json(rel))
    html, ansi = render_text_explanation(rel, decomp)
    out.with_name(out.stem + ".html").write_text(html + "\n")
    out.with_name(out.stem + ".ansi.txt").write_text(ansi + "\n")
    return 0


def _cmd_eval_irof(args) -> int:
    paths = [Path(p) for p in args.image]
    if args.corpus:
        paths.extend(sorted(
            p for p in Path(args.corpus).iterdir()
            if p.suffix.lower() in (".png", ".ppm")
        ))
    if not paths:
        raise ValueError("no input images; pass --image or --corpus")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("rle", "random"):
            raise ValueError(f"unknown method {m!r}")

    lines = []
    rows = []
    with _make_model(args.model, args.batch_size) as model:
        explainer = _make_explainer(args)
        for path in paths:
            image = read_image(path)
            decomp = partition_image(image, args.grid)
            segmentation = evaluation.slic_segment(
                image, args.slic_k, compactness=args.slic_compactness
            )
            for method in methods:
                if method == "rle":
                    rel = explainer.explain(model, decomp, args.target_class)
                    local = to_local(rel)
                else:
                    local = evaluation.random_attribution(decomp.n, args.seed)
                pix = evaluation.attribution_to_pixels(decomp, local)
                report = evaluation.irof(model, image, pix, segmentation,
                                         args.target_class)
                line = evaluation.report_to_json(report, path.name, method,
                                                 args.seed)
                lines.append(line)
                rows.append({"method": method, "irof": report.irof})
    import json as _json

    for summary in evaluation.summarize(rows):
        lines.append(_json.dumps(summary, sort_keys=True,
                                 separators=(",", ":")))
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _cmd_render(args) -> int:
    rel = explanation_from_json(Path(args.explanation).read_text())
    out = Path(args.out)
    if rel.modality == "image":
        if not args.image:
            raise ValueError("--image is required for image explanations")
        decomp = partition_image(read_image(args.image), args.grid)
        overlay, heatmap = render_image_explanation(rel, decomp)
        _write_image(overlay, out.with_name(out.name + ".overlay"),
                     args.figure_format)
        _write_image(heatmap, out.with_name(out.name + ".heatmap"),
                     args.figure_format)
    else:
        if not args.text:
            raise ValueError("--text is required for text explanations")
        decomp = tokenize_text(args.text)
        html, ansi = render_text_explanation(rel, decomp)
        out.with_name(out.name + ".html").write_text(html + "\n")
        out.with_name(out.name + ".ansi.txt").write_text(ansi + "\n")
    return 0


_COMMANDS = {
    "explain-image": _cmd_explain_image,
    "explain-text": _cmd_explain_text,
    "eval-irof": _cmd_eval_irof,
    "render": _cmd_render,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except errors.RleError as exc:
        print(f"rle: {type(exc).__name__}: {exc}", file=sys.stderr)
        for cls, code in EXIT_CODES:
            if type(exc) is cls:
                return code
        return 1
    except (ValueError, OSError) as exc:
        print(f"rle: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
