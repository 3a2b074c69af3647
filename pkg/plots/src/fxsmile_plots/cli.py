"""Console entry point: render <scenario> [--format svg|png] [--out dir]."""

from __future__ import annotations

import argparse
import sys

from fxsmile_plots.csvdata import CsvFormatError, MissingInputError
from fxsmile_plots.figures import FIGURE_SCENARIOS, render_scenario


class _Parser(argparse.ArgumentParser):
    # Usage mistakes exit with 1; rendering failures with 2.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="render",
        description="Render an fxsmile scenario figure from its CSV output.")
    parser.add_argument("scenario", choices=sorted(FIGURE_SCENARIOS),
                        help="scenario whose CSVs to render")
    parser.add_argument("--format", default="svg", choices=["svg", "png"],
                        help="image format (default: svg)")
    parser.add_argument("--in", dest="in_dir", default="out",
                        help="directory holding the scenario CSVs "
                             "(default: out)")
    parser.add_argument("--out", dest="out_dir", default="figures",
                        help="directory for the image file "
                             "(default: figures)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = render_scenario(args.scenario, args.in_dir, args.out_dir,
                               args.format)
    except (MissingInputError, CsvFormatError, OSError) as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
