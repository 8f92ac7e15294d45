"""
Test objects: unit-amplitude binary phase objects on a centered support inside
a larger computational window, plus the twin operator.
"""

from __future__ import annotations

import numpy as np
import structlog

from nomad_phase_retrieval.config import (
    CheckerPattern,
    DiskPattern,
    GlyphPattern,
    PhantomSpec,
)
from nomad_phase_retrieval.errors import NyquistViolationError
from nomad_phase_retrieval.field import ComplexField, SupportMask

logger = structlog.get_logger(__name__)

GLYPH_ROWS = 7
GLYPH_COLS = 5

# 5x7 block font, one string of 7 rows x 5 columns per character
_FONT: dict[str, str] = {
    'A': '01110 10001 10001 11111 10001 10001 10001',
    'B': '11110 10001 10001 11110 10001 10001 11110',
    'C': '01110 10001 10000 10000 10000 10001 01110',
    'D': '11110 10001 10001 10001 10001 10001 11110',
    'E': '11111 10000 10000 11110 10000 10000 11111',
    'F': '11111 10000 10000 11110 10000 10000 10000',
    'G': '01110 10001 10000 10111 10001 10001 01111',
    'H': '10001 10001 10001 11111 10001 10001 10001',
    'I': '01110 00100 00100 00100 00100 00100 01110',
    'J': '00111 00010 00010 00010 00010 10010 01100',
    'K': '10001 10010 10100 11000 10100 10010 10001',
    'L': '10000 10000 10000 10000 10000 10000 11111',
    'M': '10001 11011 10101 10101 10001 10001 10001',
    'N': '10001 10001 11001 10101 10011 10001 10001',
    'O': '01110 10001 10001 10001 10001 10001 01110',
    'P': '11110 10001 10001 11110 10000 10000 10000',
    'Q': '01110 10001 10001 10001 10101 10010 01101',
    'R': '11110 10001 10001 11110 10100 10010 10001',
    'S': '01111 10000 10000 01110 00001 00001 11110',
    'T': '11111 00100 00100 00100 00100 00100 00100',
    'U': '10001 10001 10001 10001 10001 10001 01110',
    'V': '10001 10001 10001 10001 10001 01010 00100',
    'W': '10001 10001 10001 10101 10101 10101 01010',
    'X': '10001 10001 01010 00100 01010 10001 10001',
    'Y': '10001 10001 10001 01010 00100 00100 00100',
    'Z': '11111 00001 00010 00100 01000 10000 11111',
    '0': '01110 10001 10011 10101 11001 10001 01110',
    '1': '00100 01100 00100 00100 00100 00100 01110',
    '2': '01110 10001 00001 00010 00100 01000 11111',
    '3': '11111 00010 00100 00010 00001 10001 01110',
    '4': '00010 00110 01010 10010 11111 00010 00010',
    '5': '11111 10000 11110 00001 00001 10001 01110',
    '6': '00110 01000 10000 11110 10001 10001 01110',
    '7': '11111 00001 00010 00100 01000 01000 01000',
    '8': '01110 10001 10001 01110 10001 10001 01110',
    '9': '01110 10001 10001 01111 00001 00010 01100',
    ' ': '00000 00000 00000 00000 00000 00000 00000',
    '-': '00000 00000 00000 11111 00000 00000 00000',
}


def _glyph_bitmap(char: str) -> np.ndarray:
    try:
        rows = _FONT[char.upper()].split()
    except KeyError as exc:
        raise ValueError(f'no glyph for character {char!r}') from exc
    return np.array([[c == '1' for c in row] for row in rows], dtype=bool)


def render_text(text: str) -> np.ndarray:
    """Unscaled bitmap of ``text`` with one blank column between characters."""
    blank = np.zeros((GLYPH_ROWS, 1), dtype=bool)
    parts: list[np.ndarray] = []
    for i, char in enumerate(text):
        if i:
            parts.append(blank)
        parts.append(_glyph_bitmap(char))
    return np.hstack(parts)


def _glyph_layout(extent: tuple[int, int], text: str) -> np.ndarray:
    bitmap = render_text(text)
    h, w = extent
    # one blank cell of margin on every side, integer upscaling
    scale = min(h // (bitmap.shape[0] + 2), w // (bitmap.shape[1] + 2))
    if scale < 1:
        raise ValueError(f'text {text!r} does not fit a {h}x{w} support')
    scaled = np.kron(bitmap, np.ones((scale, scale), dtype=bool)).astype(bool)
    layout = np.zeros(extent, dtype=bool)
    r0 = (h - scaled.shape[0]) // 2
    c0 = (w - scaled.shape[1]) // 2
    layout[r0 : r0 + scaled.shape[0], c0 : c0 + scaled.shape[1]] = scaled
    return layout


def _checker_layout(
    extent: tuple[int, int], block: int, rng: np.random.Generator | None
) -> np.ndarray:
    offset = rng.integers(0, block, size=2) if rng is not None else (0, 0)
    ii, jj = np.indices(extent)
    return ((ii + offset[0]) // block + (jj + offset[1]) // block) % 2 == 1


def _disk_layout(extent: tuple[int, int], radius_frac: float) -> np.ndarray:
    h, w = extent
    radius = radius_frac * min(h, w) / 2.0
    ii, jj = np.indices(extent)
    return (ii - (h - 1) / 2.0) ** 2 + (jj - (w - 1) / 2.0) ** 2 <= radius**2


def support_origin(window: tuple[int, int], extent: tuple[int, int]) -> tuple[int, int]:
    return (window[0] - extent[0]) // 2, (window[1] - extent[1]) // 2


def make_phantom(spec: PhantomSpec) -> tuple[ComplexField, SupportMask]:
    rows, cols = spec.window
    h, w = spec.support_extent
    if 2 * h > rows or 2 * w > cols:
        raise NyquistViolationError(
            f'support {h}x{w} exceeds half of the {rows}x{cols} window '
            f'({rows // 2}x{cols // 2}); the Fourier intensity would be undersampled'
        )

    pattern = spec.pattern
    if isinstance(pattern, GlyphPattern):
        layout = _glyph_layout((h, w), pattern.text)
    elif isinstance(pattern, CheckerPattern):
        # seed 0 keeps the checker aligned to the support corner
        rng = np.random.default_rng(spec.seed) if spec.seed else None
        layout = _checker_layout((h, w), pattern.block, rng)
    elif isinstance(pattern, DiskPattern):
        layout = _disk_layout((h, w), pattern.radius_frac)
    else:  # pragma: no cover - the discriminated union is closed
        raise TypeError(f'unsupported pattern {pattern!r}')

    r0, c0 = support_origin(spec.window, spec.support_extent)
    inside = np.zeros(spec.window, dtype=bool)
    inside[r0 : r0 + h, c0 : c0 + w] = True

    phase = np.zeros(spec.window)
    phase[r0 : r0 + h, c0 : c0 + w] = np.where(layout, spec.phase_step, 0.0)
    samples = np.where(inside, np.exp(1j * phase), 0.0)

    logger.info(
        'phantom_created',
        window=spec.window,
        support=spec.support_extent,
        pattern=pattern.kind,
        phase_step=spec.phase_step,
        stepped_pixels=int(layout.sum()),
    )
    return ComplexField(samples), SupportMask(inside)


def twin(f: ComplexField) -> ComplexField:
    """``conj(f[-x mod rows, -y mod cols])``, same Fourier magnitude as ``f``."""
    reflected = np.roll(np.flip(f.samples, axis=(0, 1)), 1, axis=(0, 1))
    return f.with_samples(np.conj(reflected))
