"""qdp-figures: render a FigureSpec JSON to an image file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render
from .spec import FigureSpec, SpecError


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="qdp-figures",
        description="Render a figure from qdp CSV/PGM outputs, driven by a "
                    "FigureSpec JSON document.")
    ap.add_argument("spec", help="FigureSpec JSON file")
    ap.add_argument("--out", default=None, help="override the output path")
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        spec_path = Path(args.spec)
        spec = FigureSpec.from_json(spec_path.read_text(),
                                    base_dir=spec_path.parent)
        if args.out:
            spec.out = args.out
        out = render(spec)
        print(f"wrote {out}")
        return 0
    except SpecError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
