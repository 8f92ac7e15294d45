import numpy as np
import pytest

from nomad_phase_retrieval.complexity import MagnitudeData
from nomad_phase_retrieval.errors import (
    BadMagicError,
    FieldFileError,
    IoFailureError,
    TruncatedPayloadError,
    UnknownKindError,
)
from nomad_phase_retrieval.field import ComplexField, SupportMask
from nomad_phase_retrieval.io import (
    HEADER_DTYPE,
    MAGIC,
    export_grayscale,
    from_bytes,
    grayscale_levels,
    read_field,
    read_trace_csv,
    to_bytes,
    write_field,
    write_trace_csv,
)
from nomad_phase_retrieval.solver import IterationRecord, IterationTrace

HEADER_BYTES = 41
TRACE_HEADER = 'iter,zeta,error_sq,tv,tv_substeps,elapsed_ms'


def make_trace(with_error=True):
    trace = IterationTrace(engine='cgpr')
    for n, zeta in enumerate([0.1 + 0.2, 1 / 3, 2.0], start=1):
        trace.append(
            IterationRecord(
                iter=n,
                zeta=zeta,
                error_sq=zeta / 7 if with_error else None,
                tv=zeta * 10,
                tv_substeps=n * 3,
                elapsed_ms=1.5,
            )
        )
    return trace


def test_header_layout(random_field):
    data = to_bytes(random_field((3, 4), dx=0.5, dy=2.0))
    assert HEADER_DTYPE.itemsize == HEADER_BYTES
    assert data[:8] == MAGIC
    assert int.from_bytes(data[8:16], 'little') == 3  # noqa: PLR2004
    assert int.from_bytes(data[16:24], 'little') == 4  # noqa: PLR2004
    assert data[40] == 0
    assert len(data) == HEADER_BYTES + 3 * 4 * 16


def test_complex_field_round_trip_is_bit_exact(tmp_path, random_field):
    f = random_field((5, 7), dx=0.1, dy=0.3)
    path = tmp_path / 'obj.fld'
    write_field(path, f)
    back = read_field(path)
    assert isinstance(back, ComplexField)
    assert back.samples.tobytes() == f.samples.tobytes()
    assert (back.dx, back.dy) == (0.1, 0.3)


def test_magnitude_and_mask_round_trip(small_problem):
    m, mask, _ = small_problem
    back_m = from_bytes(to_bytes(m))
    assert isinstance(back_m, MagnitudeData)
    np.testing.assert_array_equal(back_m.values, m.values)
    back_mask = from_bytes(to_bytes(mask))
    np.testing.assert_array_equal(back_mask.inside, mask.inside)
    assert len(to_bytes(mask)) == HEADER_BYTES + mask.inside.size


def test_bad_magic_is_reported_first():
    with pytest.raises(BadMagicError):
        from_bytes(b'NOTAFLD!' + bytes(100))
    with pytest.raises(BadMagicError):
        from_bytes(b'CG')


def test_truncated_files(random_field):
    data = to_bytes(random_field((4, 4)))
    with pytest.raises(TruncatedPayloadError):
        from_bytes(data[:20])
    with pytest.raises(TruncatedPayloadError):
        from_bytes(data[:-1])
    with pytest.raises(TruncatedPayloadError):
        from_bytes(data + b'\x00')


def test_unknown_kind_byte(random_field):
    data = bytearray(to_bytes(random_field((4, 4))))
    data[40] = 9
    with pytest.raises(UnknownKindError):
        from_bytes(bytes(data))


def test_missing_file_is_an_io_failure(tmp_path):
    with pytest.raises(IoFailureError):
        read_field(tmp_path / 'absent.fld')


def test_trace_csv_layout_and_round_trip(tmp_path):
    trace = make_trace()
    path = tmp_path / 'cgpr_seed0.pr_trace.csv'
    write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == TRACE_HEADER
    assert lines[1].startswith('1,0.30000000000000004,')
    assert len(lines) == 4  # noqa: PLR2004

    back = read_trace_csv(path, engine='cgpr')
    assert len(back) == 3  # noqa: PLR2004
    for original, restored in zip(trace.records, back.records):
        assert restored.zeta == original.zeta
        assert restored.error_sq == original.error_sq
        assert restored.tv_substeps == original.tv_substeps


def test_trace_without_truth_leaves_error_column_empty(tmp_path):
    path = tmp_path / 'hio.csv'
    write_trace_csv(make_trace(with_error=False), path)
    first_row = path.read_text().splitlines()[1].split(',')
    assert first_row[2] == ''
    assert read_trace_csv(path).has_error is False


def test_empty_trace_is_not_written(tmp_path):
    with pytest.raises(ValueError):
        write_trace_csv(IterationTrace(engine='hio'), tmp_path / 'x.csv')


def test_trace_with_foreign_columns_is_rejected(tmp_path):
    path = tmp_path / 'other.csv'
    path.write_text('a,b\n1,2\n')
    with pytest.raises(ValueError, match='missing trace columns'):
        read_trace_csv(path)


def test_grayscale_levels():
    phase = ComplexField(np.exp(1j * np.array([[0.0, np.pi / 2], [-np.pi / 2, 0.0]])))
    levels = grayscale_levels(phase, 'phase')
    assert levels.dtype == np.uint8
    assert levels[0, 0] == 128  # noqa: PLR2004
    assert levels[0, 1] == 191  # noqa: PLR2004
    assert levels[1, 0] == 64  # noqa: PLR2004

    ramp = ComplexField(np.array([[0.0, 1.0], [2.0, 4.0]]))
    np.testing.assert_array_equal(
        grayscale_levels(ramp, 'amplitude'), [[0, 64], [128, 255]]
    )
    flat = ComplexField(np.full((3, 3), 2.0))
    assert not grayscale_levels(flat, 'amplitude').any()
    assert grayscale_levels(ramp, 'log_amplitude')[1, 1] == 255  # noqa: PLR2004
    with pytest.raises(ValueError):
        grayscale_levels(ramp, 'hue')


def test_centered_levels_put_dc_in_the_middle():
    samples = np.zeros((4, 4))
    samples[0, 0] = 1.0
    levels = grayscale_levels(ComplexField(samples), 'amplitude', centered=True)
    assert levels[2, 2] == 255  # noqa: PLR2004


def test_export_writes_binary_graymap(tmp_path, random_field):
    f = random_field((6, 9))
    path = tmp_path / 'phase.pgm'
    export_grayscale(f, 'phase', path)
    data = path.read_bytes()
    levels = grayscale_levels(f, 'phase')
    assert data.startswith(b'P5')
    assert b'9 6' in data[:16]
    assert data.endswith(levels.tobytes())


def test_mask_bytes_must_be_binary():
    inside = np.zeros((4, 4), dtype=bool)
    inside[1:3, 1:3] = True
    data = bytearray(to_bytes(SupportMask(inside)))
    data[HEADER_BYTES + 5] = 2
    with pytest.raises(FieldFileError, match='0 and 1'):
        from_bytes(bytes(data))


def test_empty_grid_is_a_field_file_error():
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header['magic'] = MAGIC
    header['rows'] = 0
    header['cols'] = 4
    header['dx'] = header['dy'] = 1.0
    with pytest.raises(FieldFileError):
        from_bytes(header.tobytes())
