"""
Lossless on-disk containers for fields, magnitudes and masks, the iteration
trace CSV, and 8-bit graymap exports for looking at results.

Field file layout (little endian)::

    magic  8 bytes  b'CGPRFLD1'
    rows   uint64
    cols   uint64
    dx     float64
    dy     float64
    kind   uint8    0 complex (re, im float64 pairs) | 1 magnitude float64 | 2 mask uint8
    payload         row-major, rows*cols*(16 | 8 | 1) bytes
"""

from __future__ import annotations

from enum import IntEnum
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import structlog
from PIL import Image

from nomad_phase_retrieval.complexity import MagnitudeData
from nomad_phase_retrieval.errors import (
    BadMagicError,
    FieldFileError,
    IoFailureError,
    TruncatedPayloadError,
    UnknownKindError,
)
from nomad_phase_retrieval.field import ComplexField, SupportMask
from nomad_phase_retrieval.solver import (
    TRACE_COLUMNS,
    IterationRecord,
    IterationTrace,
)

logger = structlog.get_logger(__name__)

MAGIC = b'CGPRFLD1'
HEADER_DTYPE = np.dtype(
    [
        ('magic', 'S8'),
        ('rows', '<u8'),
        ('cols', '<u8'),
        ('dx', '<f8'),
        ('dy', '<f8'),
        ('kind', 'u1'),
    ]
)

Payload = Union[ComplexField, MagnitudeData, SupportMask]
PathLike = Union[str, Path]


class FieldKind(IntEnum):
    COMPLEX = 0
    MAGNITUDE = 1
    MASK = 2


_PAYLOAD_DTYPES = {
    FieldKind.COMPLEX: np.dtype('<c16'),
    FieldKind.MAGNITUDE: np.dtype('<f8'),
    FieldKind.MASK: np.dtype('u1'),
}


def _encode(payload: Payload) -> tuple[FieldKind, np.ndarray, float, float]:
    if isinstance(payload, ComplexField):
        return FieldKind.COMPLEX, payload.samples, payload.dx, payload.dy
    if isinstance(payload, MagnitudeData):
        return FieldKind.MAGNITUDE, payload.values, payload.dx, payload.dy
    if isinstance(payload, SupportMask):
        return FieldKind.MASK, payload.inside.astype(np.uint8), 1.0, 1.0
    raise TypeError(f'cannot serialize {type(payload).__name__}')


def to_bytes(payload: Payload) -> bytes:
    kind, array, dx, dy = _encode(payload)
    header = np.array(
        [(MAGIC, array.shape[0], array.shape[1], dx, dy, int(kind))],
        dtype=HEADER_DTYPE,
    )
    body = np.ascontiguousarray(array, dtype=_PAYLOAD_DTYPES[kind])
    return header.tobytes() + body.tobytes()


def from_bytes(data: bytes) -> Payload:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f'not a field file (magic {data[:8]!r})')
    if len(data) < HEADER_DTYPE.itemsize:
        raise TruncatedPayloadError('header is incomplete')
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    try:
        kind = FieldKind(int(header['kind']))
    except ValueError as exc:
        raise UnknownKindError(f'unknown kind byte {int(header["kind"])}') from exc

    rows, cols = int(header['rows']), int(header['cols'])
    dtype = _PAYLOAD_DTYPES[kind]
    body = data[HEADER_DTYPE.itemsize :]
    expected = rows * cols * dtype.itemsize
    if len(body) != expected:
        raise TruncatedPayloadError(
            f'{rows}x{cols} {kind.name.lower()} needs {expected} payload bytes, '
            f'found {len(body)}'
        )
    array = np.frombuffer(body, dtype=dtype).reshape(rows, cols)
    if kind is FieldKind.MASK and np.any(array > 1):
        raise FieldFileError('mask payload holds bytes other than 0 and 1')
    dx, dy = float(header['dx']), float(header['dy'])
    try:
        if kind is FieldKind.COMPLEX:
            return ComplexField(array, dx, dy)
        if kind is FieldKind.MAGNITUDE:
            return MagnitudeData(array, dx, dy)
        return SupportMask(array.astype(bool))
    except ValueError as exc:
        raise FieldFileError(f'invalid {kind.name.lower()} payload: {exc}') from exc


def write_field(path: PathLike, payload: Payload) -> None:
    data = to_bytes(payload)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoFailureError(f'cannot write {path}: {exc}') from exc
    logger.info('field_written', path=str(path), kind=type(payload).__name__)


def read_field(path: PathLike) -> Payload:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailureError(f'cannot read {path}: {exc}') from exc
    return from_bytes(data)


def write_trace_csv(trace: IterationTrace, path: PathLike) -> None:
    if not len(trace):
        raise ValueError('refusing to write an empty trace')
    try:
        trace.to_frame().to_csv(
            path, index=False, float_format='%.17g', na_rep='', lineterminator='\n'
        )
    except OSError as exc:
        raise IoFailureError(f'cannot write {path}: {exc}') from exc
    logger.info('trace_written', path=str(path), iterations=len(trace))


def read_trace_csv(path: PathLike, engine: str = 'unknown') -> IterationTrace:
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except OSError as exc:
        raise IoFailureError(f'cannot read {path}: {exc}') from exc
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f'{path}: missing trace columns {missing}')

    trace = IterationTrace(engine=engine)
    for row in frame.itertuples(index=False):
        trace.append(
            IterationRecord(
                iter=int(row.iter),
                zeta=float(row.zeta),
                error_sq=None if pd.isna(row.error_sq) else float(row.error_sq),
                tv=float(row.tv),
                tv_substeps=int(row.tv_substeps),
                elapsed_ms=float(row.elapsed_ms),
            )
        )
    return trace


def grayscale_levels(
    f: ComplexField, channel: str = 'amplitude', centered: bool = False
) -> np.ndarray:
    """
    8-bit levels for ``channel``: ``amplitude`` and ``log_amplitude`` map
    [min, max] linearly to [0, 255] (a constant image maps to 0), ``phase`` maps
    [-pi, pi] to [0, 255].
    """
    samples = np.fft.fftshift(f.samples) if centered else f.samples
    if channel == 'phase':
        scaled = (np.angle(samples) + np.pi) / (2.0 * np.pi) * 255.0
    elif channel in ('amplitude', 'log_amplitude'):
        values = np.abs(samples)
        if channel == 'log_amplitude':
            values = np.log1p(values)
        lo, hi = float(values.min()), float(values.max())
        if hi <= lo:
            return np.zeros(values.shape, dtype=np.uint8)
        scaled = (values - lo) / (hi - lo) * 255.0
    else:
        raise ValueError(f'unknown channel {channel!r}')
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def export_grayscale(
    f: ComplexField, channel: str, path: PathLike, centered: bool = False
) -> None:
    """Write a binary portable graymap (P5, maxval 255)."""
    levels = grayscale_levels(f, channel, centered)
    try:
        Image.fromarray(levels).save(path, format='PPM')
    except OSError as exc:
        raise IoFailureError(f'cannot write {path}: {exc}') from exc
    logger.info('graymap_written', path=str(path), channel=channel)
