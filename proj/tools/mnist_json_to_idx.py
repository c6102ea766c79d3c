#!/usr/bin/env python3
"""Convert the per-digit JSON files of the npm `mnist` package into IDX files.

usage: mnist_json_to_idx.py <digits_dir> <out_dir>

<digits_dir> holds 0.json .. 9.json, each {"data": [...]} with 784 floats in
[0, 1] per image. Writes images-idx3-ubyte and labels-idx1-ubyte to <out_dir>.
"""
import json
import struct
import sys
from pathlib import Path


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    pixels = bytearray()
    labels = bytearray()
    per_digit = []
    for d in range(10):
        data = json.loads((src / f"{d}.json").read_text())["data"]
        if len(data) % 784:
            raise SystemExit(f"{d}.json: length {len(data)} is not a multiple of 784")
        n = len(data) // 784
        per_digit.append([data[i * 784:(i + 1) * 784] for i in range(n)])
    # interleave digits so any prefix is roughly balanced
    longest = max(len(p) for p in per_digit)
    for i in range(longest):
        for d in range(10):
            if i < len(per_digit[d]):
                pixels.extend(min(255, max(0, round(v * 255))) for v in per_digit[d][i])
                labels.append(d)
    n = len(labels)
    (out / "images-idx3-ubyte").write_bytes(struct.pack(">IIII", 0x803, n, 28, 28) + bytes(pixels))
    (out / "labels-idx1-ubyte").write_bytes(struct.pack(">II", 0x801, n) + bytes(labels))
    print(f"wrote {n} images to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
