#!/usr/bin/env python3
"""Stub vocoder for benchmark self-tests. Standard library only.

Reads the frame count from a mel feature file header, sleeps for
delay-factor times the implied audio duration, then writes that much
16-bit PCM silence. Usage:

  one-shot:    stub_vocoder.py --delay-factor 0.5 IN OUT
  persistent:  stub_vocoder.py --delay-factor 0.5 --persistent
               (reads "IN<tab>OUT" lines on stdin, answers "DONE OUT")

--exit-code N exits with N before writing anything, --no-output exits 0
without writing, --rate R writes at a non-default sample rate: all three
exist so the harness's failure paths can be exercised.
"""

import argparse
import struct
import sys
import time
import wave

MAGIC = b"VBMEL\0"
SAMPLE_RATE = 24000
HOP = 300
WIN = 960


def mel_duration_seconds(path: str) -> float:
    with open(path, "rb") as f:
        header = f.read(len(MAGIC) + struct.calcsize("<IIIffB"))
    if header[: len(MAGIC)] != MAGIC:
        raise SystemExit(f"not a mel feature file: {path}")
    version, n_frames, n_mels, lo, hi, flag = struct.unpack_from(
        "<IIIffB", header, len(MAGIC)
    )
    return ((n_frames - 1) * HOP + WIN) / SAMPLE_RATE


def synthesize(in_path: str, out_path: str, delay_factor: float, rate: int) -> None:
    duration = mel_duration_seconds(in_path)
    if delay_factor > 0:
        time.sleep(delay_factor * duration)
    n = int(round(duration * rate))
    with wave.open(out_path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(b"\x00\x00" * n)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("paths", nargs="*")
    ap.add_argument("--delay-factor", type=float, default=0.0)
    ap.add_argument("--rate", type=int, default=SAMPLE_RATE)
    ap.add_argument("--persistent", action="store_true")
    ap.add_argument("--exit-code", type=int, default=0)
    ap.add_argument("--no-output", action="store_true")
    args = ap.parse_args()

    if args.exit_code != 0:
        sys.exit(args.exit_code)

    if args.persistent:
        for line in sys.stdin:
            line = line.rstrip("\n")
            if not line:
                continue
            in_path, _, out_path = line.partition("\t")
            synthesize(in_path, out_path, args.delay_factor, args.rate)
            sys.stdout.write(f"DONE {out_path}\n")
            sys.stdout.flush()
        return

    if len(args.paths) != 2:
        ap.error("expected IN and OUT paths")
    in_path, out_path = args.paths
    if args.no_output:
        mel_duration_seconds(in_path)
        return
    synthesize(in_path, out_path, args.delay_factor, args.rate)


if __name__ == "__main__":
    main()
