"""Reference adapter executable: renders params.csv with the built-in plant.

Run as `python -m mirrornet.echo_plant <params.csv> <out.wav>`.  Exists so the
external-plant process contract can be tested end to end; it accepts an
optional header line in the CSV and either 7 or 10 columns per note.
"""

from __future__ import annotations

import argparse

import numpy as np

from .params import MelodyParams
from .plant import render_melody
from .wavio import write_wav


def _read_rows(path):
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if rows or lineno > 0:
                    raise SystemExit(f"{path}:{lineno + 1}: non-numeric row")
                # a single leading header line is tolerated
    if not rows:
        raise SystemExit(f"{path}: no parameter rows found")
    return np.array(rows, dtype=np.float64)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="mirrornet.echo_plant",
        description="Render a normalized parameter CSV to WAV with the built-in plant.",
    )
    ap.add_argument("params_csv")
    ap.add_argument("out_wav")
    ap.add_argument("--rate", type=int, default=16000, help="output sample rate in Hz")
    ap.add_argument("--duration", type=float, default=2.0, help="melody length in seconds")
    args = ap.parse_args(argv)

    mat = _read_rows(args.params_csv)
    melody = MelodyParams.from_array(mat, total_duration=args.duration)
    buf = render_melody(melody, args.rate)
    write_wav(args.out_wav, buf.samples, args.rate)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
