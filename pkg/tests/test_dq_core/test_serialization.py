"""Tests for the JSON matrix, channel and code-space payloads."""

import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from apps.dq_core.channels import BathModel, QuantumChannel, collective_dephasing_exact
from apps.dq_core.dfs import CodeSpace
from apps.dq_core.errors import PayloadError
from apps.dq_core.serialization import (
    ChannelPayload,
    CodeSpacePayload,
    MatrixPayload,
    dumps_payload,
    load_channel,
    load_code,
    write_payload,
)


class TestMatrixPayload:
    """Tests for MatrixPayload."""

    def test_row_major_layout(self) -> None:
        """re/im are flattened row by row."""
        payload = MatrixPayload.from_matrix(np.array([[1, 2j], [3, 4]]))
        assert payload.re == [1.0, 0.0, 3.0, 4.0]
        assert payload.im == [0.0, 2.0, 0.0, 0.0]
        assert np.array_equal(payload.to_matrix(), np.array([[1, 2j], [3, 4]]))

    def test_vector_becomes_column(self) -> None:
        """A 1-D array is stored as a single column."""
        payload = MatrixPayload.from_matrix(np.array([1.0, 0.0, 0.0]))
        assert (payload.rows, payload.cols) == (3, 1)

    def test_entry_count_checked(self) -> None:
        """rows x cols must match the flat arrays."""
        with pytest.raises(ValidationError):
            MatrixPayload(rows=2, cols=2, re=[1.0, 0.0, 0.0], im=[0.0, 0.0, 0.0])

    def test_non_finite_rejected(self) -> None:
        """NaN entries are refused."""
        with pytest.raises(ValidationError):
            MatrixPayload(rows=1, cols=1, re=[float("nan")], im=[0.0])


class TestChannelPayload:
    """Tests for channel files."""

    def test_file_round_trip(self, tmp_path: Path, default_bath: BathModel) -> None:
        """A written channel loads back with the same Kraus operators."""
        ch = collective_dephasing_exact(2, default_bath, 1.0)
        path = tmp_path / "channel.json"
        write_payload(ChannelPayload.from_channel(ch), path)
        loaded = load_channel(path)
        assert loaded.label == ch.label
        assert len(loaded) == len(ch)
        for a, b in zip(loaded.kraus, ch.kraus, strict=True):
            assert np.allclose(a, b, atol=0)

    def test_kraus_shape_checked(self) -> None:
        """Every Kraus matrix must be dim x dim."""
        bad = {"dim": 2, "kraus": [MatrixPayload.from_matrix(np.eye(3)).model_dump()]}
        with pytest.raises(ValidationError):
            ChannelPayload.model_validate(bad)

    def test_non_cptp_file(self, tmp_path: Path) -> None:
        """Incomplete Kraus sets are reported as PayloadError."""
        path = tmp_path / "channel.json"
        write_payload(ChannelPayload.from_channel(QuantumChannel((0.5 * np.eye(2),))), path)
        with pytest.raises(PayloadError):
            load_channel(path)

    def test_missing_and_malformed(self, tmp_path: Path) -> None:
        """Missing files and invalid JSON are PayloadError."""
        with pytest.raises(PayloadError):
            load_channel(tmp_path / "absent.json")
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(PayloadError):
            load_channel(broken)


class TestCodeSpacePayload:
    """Tests for code files."""

    def test_file_round_trip(self, tmp_path: Path, dephasing_code: CodeSpace) -> None:
        """A written code loads back unchanged."""
        path = tmp_path / "code.json"
        write_payload(CodeSpacePayload.from_code(dephasing_code), path)
        loaded = load_code(path)
        assert loaded.label == dephasing_code.label
        assert np.array_equal(loaded.isometry, dephasing_code.isometry)

    def test_dims_must_match_shape(self, dephasing_code: CodeSpace) -> None:
        """phys_dim and code_dim describe the isometry."""
        data = CodeSpacePayload.from_code(dephasing_code).model_dump()
        data["code_dim"] = 3
        with pytest.raises(ValidationError):
            CodeSpacePayload.model_validate(data)

    def test_non_isometry(self, tmp_path: Path) -> None:
        """Non-orthonormal columns are a PayloadError."""
        base = MatrixPayload.from_matrix(np.array([[1.0, 1.0], [0.0, 1.0]])).model_dump()
        path = tmp_path / "code.json"
        path.write_text(json.dumps({**base, "phys_dim": 2, "code_dim": 2}), encoding="utf-8")
        with pytest.raises(PayloadError):
            load_code(path)

    def test_stable_text(self, dephasing_code: CodeSpace) -> None:
        """Sorted keys, two-space indent, trailing newline."""
        text = dumps_payload(CodeSpacePayload.from_code(dephasing_code))
        assert text.endswith("}\n")
        keys = list(json.loads(text))
        assert keys == sorted(keys)
        assert '\n  "code_dim": 2,' in text
