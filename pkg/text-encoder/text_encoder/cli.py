"""Command-line entry point: item file in, vector file out.

Output order matches input order, and identical inputs and flags
produce byte-identical output files. Progress goes to standard error.
"""

import argparse
import logging
import sys
from pathlib import Path

from .encoders import BACKENDS, EncoderError, get_encoder
from .items import encode_file

log = logging.getLogger("text_encoder")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="text-encoder",
        description="Encode video title/description text into 384-component vector lines.",
    )
    parser.add_argument("--input", type=Path, required=True,
                        help="video_id<TAB>field<TAB>text items")
    parser.add_argument("--output", type=Path, required=True,
                        help="vector file to write: video_id field components...")
    parser.add_argument("--backend", choices=BACKENDS, default="model",
                        help="'model' runs a sentence-transformer checkpoint, "
                             "'hash' is a deterministic offline stand-in")
    parser.add_argument("--model-path", type=Path, default=None,
                        help="local checkpoint directory for the 'model' backend")
    parser.add_argument("--batch-size", type=int, default=64)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        encoder = get_encoder(args.backend, args.model_path)
        n = encode_file(args.input, args.output, encoder, batch_size=args.batch_size)
    except (EncoderError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    log.info("wrote %d vector lines to %s", n, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
