"""Regenerate the vendored illuminant and camera CSV files.

Illuminant SPDs come from the CIE tables shipped with colour-science.
D93 is synthesised from the CIE daylight basis at the nominal CCT.
Camera sensitivities are parametric approximations (see data/README.md).
"""
import math
import pathlib

import colour
import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent
WAVELENGTHS = np.arange(400, 701, 10)

NAMES = (
    ["A", "D50", "D55", "D60", "D65", "D75", "D93"]
    + [f"F{i}" for i in range(1, 13)]
    + ["LED-B1", "LED-B2", "LED-B3", "LED-B4", "LED-B5", "LED-BH1", "LED-RGB1", "LED-V1", "LED-V2"]
)


def spd(name):
    if name == "D93":
        xy = colour.temperature.CCT_to_xy_CIE_D(9300 * 1.4388 / 1.4380)
        sd = colour.sd_CIE_illuminant_D_series(xy)
    elif name.startswith("F"):
        sd = colour.SDS_ILLUMINANTS["FL" + name[1:]]
    else:
        sd = colour.SDS_ILLUMINANTS[name]
    return np.array([sd[w] for w in WAVELENGTHS], dtype=float)


def write_spd(path, values):
    with open(path, "w", encoding="utf-8") as f:
        f.write("wavelength_nm,value\n")
        for w, v in zip(WAVELENGTHS, values):
            f.write(f"{w},{v:.6f}\n")


def gaussian(center, width):
    return np.exp(-0.5 * ((WAVELENGTHS - center) / width) ** 2)


# (center, width, weight) terms per channel.
CAMERAS = {
    "canon_300d": {
        "r": [(600, 28, 1.00), (450, 20, 0.04)],
        "g": [(530, 38, 0.95), (600, 25, 0.10)],
        "b": [(460, 30, 0.80), (530, 25, 0.08)],
    },
    "nikon_d90": {
        "r": [(605, 26, 0.95), (455, 18, 0.05)],
        "g": [(535, 36, 1.00), (595, 22, 0.12)],
        "b": [(455, 28, 0.85), (525, 22, 0.10)],
    },
    "sony_nex5n": {
        "r": [(610, 24, 1.00), (460, 20, 0.06)],
        "g": [(525, 40, 0.90), (590, 25, 0.14)],
        "b": [(465, 26, 0.75), (520, 25, 0.12)],
    },
}


def main():
    manifest = []
    for name in NAMES:
        values = spd(name)
        assert (values >= 0).all(), name
        fname = name.lower() + ".csv"
        write_spd(ROOT / "cie" / fname, values)
        manifest.append(f"{fname} {name}")
    (ROOT / "cie" / "manifest.txt").write_text("\n".join(manifest) + "\n", encoding="utf-8")

    for cam, channels in CAMERAS.items():
        rows = []
        for ch in ("r", "g", "b"):
            rows.append(sum(w * gaussian(c, s) for c, s, w in channels[ch]))
        rows = np.array(rows)
        rows /= rows.max()
        with open(ROOT / "cameras" / f"{cam}.csv", "w", encoding="utf-8") as f:
            f.write("wavelength_nm,value,value2,value3\n")
            for i, w in enumerate(WAVELENGTHS):
                f.write(f"{w},{rows[0, i]:.6f},{rows[1, i]:.6f},{rows[2, i]:.6f}\n")


if __name__ == "__main__":
    main()
