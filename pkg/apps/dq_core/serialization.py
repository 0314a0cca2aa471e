"""JSON exchange format for matrices, channels and code spaces.

A matrix is ``{"rows", "cols", "re", "im"}`` with row-major flat arrays; a
channel adds ``dim`` and ``label`` around a list of matrices; a code space
adds ``phys_dim`` and ``code_dim`` to its isometry.
"""

import json
from pathlib import Path
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from apps.dq_core.channels import QuantumChannel
from apps.dq_core.dfs import CodeSpace
from apps.dq_core.errors import DqError, PayloadError
from apps.dq_core.qcore import CMatrix


# ─────────────────────────────────────────────────────────────────────────────
# Payload Models
# ─────────────────────────────────────────────────────────────────────────────
class MatrixPayload(BaseModel):
    """Dense complex matrix, row-major."""

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    re: list[float]
    im: list[float]

    @model_validator(mode="after")
    def validate_entries(self) -> Self:
        expected = self.rows * self.cols
        if len(self.re) != expected or len(self.im) != expected:
            raise ValueError(
                f"expected {expected} entries for a {self.rows}x{self.cols} matrix, "
                f"got re={len(self.re)}, im={len(self.im)}"
            )
        if not all(np.isfinite(self.re)) or not all(np.isfinite(self.im)):
            raise ValueError("matrix entries must be finite")
        return self

    @classmethod
    def from_matrix(cls, matrix: CMatrix) -> "MatrixPayload":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim == 1:
            m = m[:, None]
        return cls(
            rows=m.shape[0],
            cols=m.shape[1],
            re=[float(x) for x in m.real.ravel()],
            im=[float(x) for x in m.imag.ravel()],
        )

    def to_matrix(self) -> CMatrix:
        flat = np.array(self.re, dtype=np.float64) + 1j * np.array(self.im, dtype=np.float64)
        return flat.reshape(self.rows, self.cols)


class ChannelPayload(BaseModel):
    """Kraus operators of one channel."""

    dim: int = Field(..., ge=1)
    label: str = ""
    kraus: list[MatrixPayload] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_dims(self) -> Self:
        for i, k in enumerate(self.kraus):
            if (k.rows, k.cols) != (self.dim, self.dim):
                raise ValueError(f"kraus[{i}] is {k.rows}x{k.cols}, expected {self.dim}x{self.dim}")
        return self

    @classmethod
    def from_channel(cls, ch: QuantumChannel) -> "ChannelPayload":
        return cls(
            dim=ch.dim,
            label=ch.label,
            kraus=[MatrixPayload.from_matrix(k) for k in ch.kraus],
        )

    def to_channel(self) -> QuantumChannel:
        return QuantumChannel(tuple(k.to_matrix() for k in self.kraus), self.label)


class CodeSpacePayload(MatrixPayload):
    """Isometry in the matrix format plus its dimensions."""

    phys_dim: int = Field(..., ge=1)
    code_dim: int = Field(..., ge=1)
    label: str = ""

    @model_validator(mode="after")
    def validate_shape(self) -> Self:
        if (self.rows, self.cols) != (self.phys_dim, self.code_dim):
            raise ValueError(
                f"isometry is {self.rows}x{self.cols} but phys_dim={self.phys_dim}, "
                f"code_dim={self.code_dim}"
            )
        return self

    @classmethod
    def from_code(cls, code: CodeSpace) -> "CodeSpacePayload":
        base = MatrixPayload.from_matrix(code.isometry)
        return cls(
            **base.model_dump(),
            phys_dim=code.phys_dim,
            code_dim=code.code_dim,
            label=code.label,
        )

    def to_code(self) -> CodeSpace:
        return CodeSpace(self.to_matrix(), self.label)


# ─────────────────────────────────────────────────────────────────────────────
# File helpers
# ─────────────────────────────────────────────────────────────────────────────
def _read_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise PayloadError(f"File not found: {path}") from e
    except json.JSONDecodeError as e:
        raise PayloadError(f"{path} is not valid JSON: {e}") from e


def load_channel(path: Path) -> QuantumChannel:
    """Read a channel JSON file.

    Raises:
        PayloadError: On unreadable or malformed payloads.
    """
    try:
        payload = ChannelPayload.model_validate(_read_json(path))
        return payload.to_channel().check_cptp()
    except ValidationError as e:
        raise PayloadError(f"Invalid channel payload in {path}: {e.error_count()} error(s)") from e
    except DqError as e:
        if isinstance(e, PayloadError):
            raise
        raise PayloadError(f"Invalid channel in {path}: {e}") from e


def load_code(path: Path) -> CodeSpace:
    """Read a code-space JSON file.

    Raises:
        PayloadError: On unreadable or malformed payloads, or a non-isometry.
    """
    try:
        payload = CodeSpacePayload.model_validate(_read_json(path))
        return payload.to_code()
    except ValidationError as e:
        raise PayloadError(f"Invalid code payload in {path}: {e.error_count()} error(s)") from e
    except DqError as e:
        if isinstance(e, PayloadError):
            raise
        raise PayloadError(f"Invalid code in {path}: {e}") from e


def dumps_payload(payload: BaseModel) -> str:
    """Stable JSON text of a payload (sorted keys, trailing newline)."""
    return json.dumps(payload.model_dump(), indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def write_payload(payload: BaseModel, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_payload(payload))
