#!/usr/bin/env python3
"""Convert an unpacked TID2013 distribution into the rated-database layout.

Writes <out>/images/*.png, <out>/ratings.csv (reference,distorted,mos) and a
starter run configuration <out>/config.json that uses the 25 reference images
as the natural-image set.

    python3 tools/convert_tid2013.py /data/tid2013 /data/tid2013-invt
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from PIL import Image


def find_dir(root: Path, name: str) -> Path:
    for p in root.iterdir():
        if p.is_dir() and p.name.lower() == name:
            return p
    sys.exit(f"{root}: no {name}/ directory")


def index_bmps(d: Path) -> dict:
    return {p.stem.lower(): p for p in d.iterdir() if p.suffix.lower() == ".bmp"}


def read_mos(root: Path) -> list:
    mos_file = next((p for p in root.iterdir() if p.name.lower() == "mos_with_names.txt"), None)
    if mos_file is None:
        sys.exit(f"{root}: no mos_with_names.txt")
    rows = []
    for n, line in enumerate(mos_file.read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            sys.exit(f"{mos_file}:{n}: expected '<mos> <file>'")
        rows.append((float(parts[0]), Path(parts[1]).stem.lower()))
    return rows


def to_png(src: Path, dst: Path) -> None:
    if not dst.exists():
        Image.open(src).convert("RGB").save(dst)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tid_root", type=Path, help="directory holding reference_images/, distorted_images/ and mos_with_names.txt")
    ap.add_argument("out", type=Path)
    ap.add_argument("--sample", type=int, default=25, help="natural images used for response curves")
    args = ap.parse_args()

    refs = index_bmps(find_dir(args.tid_root, "reference_images"))
    dists = index_bmps(find_dir(args.tid_root, "distorted_images"))
    images = args.out / "images"
    images.mkdir(parents=True, exist_ok=True)

    rows = []
    for mos, stem in read_mos(args.tid_root):
        # i01_01_1 -> reference i01
        ref_stem = stem.split("_")[0]
        if stem not in dists or ref_stem not in refs:
            sys.exit(f"missing image for {stem}")
        ref_png = images / f"{ref_stem}.png"
        dist_png = images / f"{stem}.png"
        to_png(refs[ref_stem], ref_png)
        to_png(dists[stem], dist_png)
        rows.append((f"images/{ref_png.name}", f"images/{dist_png.name}", f"{mos:.5f}"))

    with open(args.out / "ratings.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["reference", "distorted", "mos"])
        w.writerows(rows)

    natural = args.out / "natural"
    natural.mkdir(exist_ok=True)
    for stem in sorted(refs):
        to_png(refs[stem], natural / f"{stem}.png")

    config = {
        "datasets": [{"name": "tid2013", "path": "natural", "sample": args.sample}],
        "rated_database": {"csv": "ratings.csv", "higher_is_better": True},
        "metrics": ["rmse", "ssim"],
        "families": ["translation", "rotation", "scale"],
        "output_dir": "out",
        "seed": 1,
    }
    (args.out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"{len(rows)} rated pairs, {len(refs)} references -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
