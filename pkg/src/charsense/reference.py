"""Published spectral norms used as golden values."""

from __future__ import annotations

from typing import NamedTuple


class SpectralRow(NamedTuple):
    family: str
    p: int
    m: int
    M: int
    K: int
    N: int
    spectral_norm: float
    tight_frame_floor: float


PUBLISHED_NORMS = (
    SpectralRow("power-residue", 43, 1, 42, 43, 1763, 6.6282, 6.4031),
    SpectralRow("power-residue", 59, 1, 58, 59, 3363, 7.7431, 7.5498),
    SpectralRow("power-residue", 67, 1, 66, 67, 4355, 8.2439, 8.0623),
    SpectralRow("power-residue", 83, 1, 82, 83, 6723, 9.1635, 9.0),
    SpectralRow("power-residue", 97, 1, 96, 97, 9215, 9.8982, 9.7468),
    SpectralRow("sidelnikov", 3, 3, 26, 26, 650, 5.0990, 5.0),
    SpectralRow("sidelnikov", 7, 2, 48, 48, 2256, 6.9282, 6.8557),
    SpectralRow("sidelnikov", 3, 4, 80, 80, 6320, 8.9443, 8.8882),
    SpectralRow("sidelnikov", 5, 3, 124, 124, 15252, 11.1355, 11.0905),
    SpectralRow("sidelnikov", 13, 2, 168, 168, 28056, 12.9615, 12.9228),
)

NORM_TOL = 5e-4
FLOOR_TOL = 5e-5
