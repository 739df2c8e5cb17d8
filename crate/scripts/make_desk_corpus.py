"""Build the desk corpus of natural grayscale covers used by the acceptance tests.

Sources are photographs bundled with scikit-image and scikit-learn, plus the
camera photos in `samples/data` of the opencv-python 4.9.0.80 source
distribution (opencv-python-4.9.0.80.tar.gz from PyPI, unpacked). Non-overlapping square tiles are converted to 8-bit luma and written
as lossless 8-bit PNG, taken round-robin across photos so no single one dominates.

    python3 scripts/make_desk_corpus.py --opencv-samples <dir> crates/ppd/tests/data/desk
"""

import argparse
import pathlib

import numpy as np
import skimage.data
import skimage.io
import sklearn.datasets
from PIL import Image

TILE = 296
COUNT = 100

SKIMAGE = [
    "astronaut", "camera", "coffee", "chelsea", "coins", "moon", "rocket",
    "retina", "cell", "immunohistochemistry", "hubble_deep_field", "brick",
    "grass", "gravel",
]
SKIMAGE_FILES = ["motorcycle_left.png"]
SKLEARN = ["china.jpg", "flower.jpg"]
# one view per scene (stereo pairs, calibration series); synthetic renders and screenshots left out
OPENCV = [
    "aero1.jpg", "aero3.jpg", "aloeL.jpg", "apple.jpg", "baboon.jpg",
    "basketball1.png", "board.jpg", "box_in_scene.png", "building.jpg",
    "butterfly.jpg", "ela_original.jpg", "fruits.jpg", "graf1.png", "home.jpg",
    "left.jpg", "leuvenA.jpg", "licenseplate_motion.jpg", "messi5.jpg",
    "orange.jpg", "pca_test1.jpg", "rubberwhale1.png", "squirrel_cls.jpg",
    "starry_night.jpg", "stuff.jpg", "sudoku.png", "text_defocus.jpg", "left01.jpg",
]


def luma(img):
    img = np.asarray(img)
    if img.ndim == 3:
        rgb = img[..., :3].astype(np.int64)
        img = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return img.astype(np.uint8)


def photos(opencv_dir):
    for name in SKIMAGE:
        yield name, luma(getattr(skimage.data, name)())
    data_dir = pathlib.Path(skimage.data.__file__).parent
    for name in SKIMAGE_FILES:
        yield name.split(".")[0], luma(skimage.io.imread(data_dir / name))
    for name in SKLEARN:
        yield name.split(".")[0], luma(sklearn.datasets.load_sample_image(name))
    for name in OPENCV:
        yield "cv_" + name.split(".")[0], luma(skimage.io.imread(opencv_dir / name))


def tiles(img, tile):
    h, w = img.shape
    for r in range(0, h - tile + 1, tile):
        for c in range(0, w - tile + 1, tile):
            t = img[r:r + tile, c:c + tile]
            # skip flat background (black borders, empty sky)
            if t.std() >= 4.0:
                yield r, c, t


def write_png(path, t):
    Image.fromarray(t, mode="L").save(path, optimize=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--opencv-samples", type=pathlib.Path, required=True)
    ap.add_argument("--tile", type=int, default=TILE)
    ap.add_argument("--count", type=int, default=COUNT)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    pools = [(name, list(tiles(img, args.tile))) for name, img in photos(args.opencv_samples)]
    picked = 0
    depth = 0
    while picked < args.count:
        progressed = False
        for name, pool in pools:
            if depth < len(pool) and picked < args.count:
                r, c, t = pool[depth]
                write_png(args.out / f"{name}_r{r:04d}_c{c:04d}.png", t)
                picked += 1
                progressed = True
        if not progressed:
            raise SystemExit(f"only {picked} tiles available")
        depth += 1
    print(f"wrote {picked} tiles to {args.out}")


if __name__ == "__main__":
    main()
