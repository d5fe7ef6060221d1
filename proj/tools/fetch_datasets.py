#!/usr/bin/env python3
"""Download the three public benchmark scenes and convert them to HSC1/HSL1.

Fetches the corrected Indian Pines, corrected Salinas, and Pavia University
.mat files from the EHU mirror, writes temporary whitespace text dumps, and
runs the `hsilp convert` subcommand on each. Point HSILP_DATA_DIR at the
output directory to enable acceptance criteria 1-5.

Requires scipy (for .mat parsing) and network access:

    python3 tools/fetch_datasets.py --out data --hsilp build/hsilp
"""

import argparse
import os
import subprocess
import sys
import tempfile
import urllib.request

BASE = "https://www.ehu.eus/ccwintco/uploads"

SCENES = [
    {
        "stem": "indian-pines",
        "cube": (f"{BASE}/6/67/Indian_pines_corrected.mat", "indian_pines_corrected"),
        "labels": (f"{BASE}/c/c4/Indian_pines_gt.mat", "indian_pines_gt"),
    },
    {
        "stem": "salinas",
        "cube": (f"{BASE}/a/a3/Salinas_corrected.mat", "salinas_corrected"),
        "labels": (f"{BASE}/f/fa/Salinas_gt.mat", "salinas_gt"),
    },
    {
        "stem": "pavia-university",
        "cube": (f"{BASE}/e/ee/PaviaU.mat", "paviaU"),
        "labels": (f"{BASE}/5/50/PaviaU_gt.mat", "paviaU_gt"),
    },
]


def fetch(url, path):
    if os.path.exists(path):
        print(f"  cached {path}")
        return
    print(f"  downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as response, open(path, "wb") as out:
        while True:
            block = response.read(1 << 20)
            if not block:
                break
            out.write(block)


def mat_array(path, key):
    import scipy.io

    data = scipy.io.loadmat(path)
    if key not in data:
        candidates = [k for k in data if not k.startswith("__")]
        if len(candidates) != 1:
            raise KeyError(f"{path}: expected variable '{key}', found {candidates}")
        key = candidates[0]
    return data[key]


def dump_cube(arr, path):
    # (height, width, bands) -> one pixel per line, bands as columns, row-major.
    height, width, bands = arr.shape
    flat = arr.reshape(height * width, bands)
    with open(path, "w") as out:
        for row in flat:
            out.write(" ".join(str(v) for v in row))
            out.write("\n")
    return height, width


def dump_labels(arr, path):
    with open(path, "w") as out:
        for v in arr.reshape(-1):
            out.write(f"{int(v)}\n")


def convert_scene(scene, cache, out_dir, hsilp):
    stem = scene["stem"]
    print(f"{stem}:")
    cube_mat = os.path.join(cache, os.path.basename(scene["cube"][0]))
    labels_mat = os.path.join(cache, os.path.basename(scene["labels"][0]))
    fetch(scene["cube"][0], cube_mat)
    fetch(scene["labels"][0], labels_mat)

    cube = mat_array(cube_mat, scene["cube"][1])
    labels = mat_array(labels_mat, scene["labels"][1])
    if cube.shape[:2] != labels.shape:
        raise ValueError(f"{stem}: cube {cube.shape} does not match labels {labels.shape}")

    with tempfile.TemporaryDirectory() as tmp:
        cube_txt = os.path.join(tmp, "cube.txt")
        labels_txt = os.path.join(tmp, "labels.txt")
        height, width = dump_cube(cube, cube_txt)
        dump_labels(labels, labels_txt)
        subprocess.run(
            [
                hsilp, "convert",
                "--input", cube_txt,
                "--output", os.path.join(out_dir, f"{stem}.hsc"),
                "--labels-input", labels_txt,
                "--labels-output", os.path.join(out_dir, f"{stem}.hsl"),
                "--height", str(height),
                "--width", str(width),
            ],
            check=True,
        )
    print(f"  wrote {out_dir}/{stem}.hsc and {out_dir}/{stem}.hsl"
          f" ({height}x{width}, {cube.shape[2]} bands)")


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="data", help="output directory for HSC1/HSL1 files")
    parser.add_argument("--cache", default=None,
                        help="directory for downloaded .mat files (default: <out>/mat)")
    parser.add_argument("--hsilp", default="build/hsilp", help="path to the hsilp binary")
    args = parser.parse_args()

    try:
        import scipy.io  # noqa: F401
    except ImportError:
        sys.exit("scipy is required to parse the .mat files: pip install scipy")
    if not os.path.exists(args.hsilp):
        sys.exit(f"hsilp binary not found at {args.hsilp}; build it first (see README)")

    cache = args.cache or os.path.join(args.out, "mat")
    os.makedirs(args.out, exist_ok=True)
    os.makedirs(cache, exist_ok=True)
    for scene in SCENES:
        convert_scene(scene, cache, args.out, args.hsilp)
    print(f"done; export HSILP_DATA_DIR={os.path.abspath(args.out)}")


if __name__ == "__main__":
    main()
