"""Systematic (n, k) MDS erasure code over GF(256).

Content is zero-padded to a multiple of k, split into k equal data shards,
and extended with n - k parity shards so that any k of the n shards
reconstruct the original bytes exactly.

The parity rows come from a Cauchy matrix (entries 1/(x_i XOR y_j) over
distinct field labels), every square submatrix of which is invertible, so
the systematic generator [I_k ; C] keeps every k x k row subset invertible.
Columns are scaled so the first parity row is all ones, making parity shard
k the plain XOR of the data shards.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CodecError",
    "InsufficientShardsError",
    "ShardFormatError",
    "CodeSpec",
    "ContentFile",
    "Shard",
    "encode",
    "decode",
    "serialize_shard",
    "parse_shard",
    "generator_rows",
]

MAX_SHARDS = 255  # labels must be distinct nonzero-XOR field elements

_MAGIC = b"KOFN"
_VERSION = 1
_HEADER = struct.Struct("<4sHHHHQ")  # magic, version, n, k, index, original_len


class CodecError(ValueError):
    """Base for encode/decode failures."""


class InsufficientShardsError(CodecError):
    """Fewer than k distinct shards were supplied."""


class ShardFormatError(CodecError):
    """A serialized shard could not be parsed."""


# --- GF(256) arithmetic, generated by x^8 + x^4 + x^3 + x^2 + 1 ---

_PRIM = 0x11D


def _build_tables() -> tuple[list[int], list[int]]:
    alog = [0] * 255
    log = [0] * 256
    x = 1
    for i in range(255):
        alog[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _PRIM
    return alog, log


_ALOG, _LOG = _build_tables()


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _ALOG[(_LOG[a] + _LOG[b]) % 255]


def _gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("no inverse of 0 in GF(256)")
    return _ALOG[(255 - _LOG[a]) % 255]


def _build_mul_table() -> np.ndarray:
    log = np.array(_LOG, dtype=np.int32)
    alog = np.array(_ALOG, dtype=np.uint8)
    table = np.zeros((256, 256), dtype=np.uint8)
    cols = np.arange(1, 256)
    for a in range(1, 256):
        table[a, 1:] = alog[(log[a] + log[cols]) % 255]
    return table


_MUL = _build_mul_table()  # _MUL[c, b] = c * b in GF(256)


@dataclass(frozen=True)
class CodeSpec:
    """An (n, k) code over the fixed 8-bit field: n total shards, any k
    of which recover the data."""

    FIELD_BITS = 8  # the construction is tied to GF(2^8)

    n: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise CodecError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > MAX_SHARDS:
            raise CodecError(f"n must be <= {MAX_SHARDS}, got {self.n}")


@dataclass(frozen=True)
class ContentFile:
    """Raw content plus its unpadded length."""

    data: bytes
    original_len: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.original_len == -1:
            object.__setattr__(self, "original_len", len(self.data))
        if self.original_len != len(self.data):
            raise CodecError(
                f"original_len {self.original_len} != data length {len(self.data)}"
            )


@dataclass(frozen=True)
class Shard:
    """One coded block: its position in the code plus the payload.

    original_len rides along (it is part of the shard header on disk) so
    that any k shards alone suffice to strip the padding after decoding.
    """

    index: int
    payload: bytes
    original_len: int

    @property
    def shard_len(self) -> int:
        return len(self.payload)


def _parity_matrix(spec: CodeSpec) -> list[list[int]]:
    """(n-k) x k Cauchy rows, column-scaled so row 0 is all ones."""
    n, k = spec.n, spec.k
    raw = [[_gf_inv((k + i) ^ j) for j in range(k)] for i in range(n - k)]
    if not raw:
        return raw
    col_scale = [_gf_inv(raw[0][j]) for j in range(k)]
    return [[_gf_mul(raw[i][j], col_scale[j]) for j in range(k)] for i in range(n - k)]


def generator_rows(spec: CodeSpec) -> list[list[int]]:
    """All n generator rows: identity rows for the data shards, then the
    normalized Cauchy parity rows."""
    k = spec.k
    rows = [[1 if j == i else 0 for j in range(k)] for i in range(k)]
    rows.extend(_parity_matrix(spec))
    return rows


def encode(spec: CodeSpec, content: ContentFile | bytes) -> list[Shard]:
    """Split (zero-padded) content into k data shards and derive n - k
    parity shards; shards 0..k-1 are the raw data blocks."""
    if isinstance(content, (bytes, bytearray)):
        content = ContentFile(bytes(content))
    if not content.data:
        raise CodecError("cannot encode empty content")
    k, n = spec.k, spec.n
    shard_len = -(-content.original_len // k)  # ceil division
    padded = content.data.ljust(k * shard_len, b"\x00")
    blocks = np.frombuffer(padded, dtype=np.uint8).reshape(k, shard_len)
    shards = [
        Shard(index=i, payload=blocks[i].tobytes(), original_len=content.original_len)
        for i in range(k)
    ]
    for i, row in enumerate(_parity_matrix(spec)):
        acc = np.zeros(shard_len, dtype=np.uint8)
        for j, coeff in enumerate(row):
            if coeff:
                acc ^= _MUL[coeff, blocks[j]]
        shards.append(
            Shard(index=k + i, payload=acc.tobytes(), original_len=content.original_len)
        )
    return shards


def _gf_matrix_inverse(m: list[list[int]]) -> list[list[int]]:
    """Gauss-Jordan inverse over GF(256)."""
    size = len(m)
    a = [row[:] for row in m]
    inv = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col]), None)
        if pivot is None:
            raise CodecError("singular decode matrix (corrupt shard indices?)")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = _gf_inv(a[col][col])
        a[col] = [_gf_mul(v, scale) for v in a[col]]
        inv[col] = [_gf_mul(v, scale) for v in inv[col]]
        for r in range(size):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [v ^ _gf_mul(f, w) for v, w in zip(a[r], a[col])]
                inv[r] = [v ^ _gf_mul(f, w) for v, w in zip(inv[r], inv[col])]
    return inv


def decode(spec: CodeSpec, shards: list[Shard]) -> ContentFile:
    """Reconstruct the original bytes from any k distinct shards."""
    k = spec.k
    by_index: dict[int, Shard] = {}
    for s in shards:
        if not 0 <= s.index < spec.n:
            raise CodecError(f"shard index {s.index} out of range for n={spec.n}")
        by_index.setdefault(s.index, s)
    if len(by_index) < k:
        raise InsufficientShardsError(
            f"need {k} distinct shards, got {len(by_index)}"
        )
    chosen = [by_index[i] for i in sorted(by_index)[:k]]
    shard_len = chosen[0].shard_len
    original_len = chosen[0].original_len
    for s in chosen:
        if s.shard_len != shard_len:
            raise CodecError(
                f"shard length mismatch: {s.shard_len} != {shard_len}"
            )
        if s.original_len != original_len:
            raise CodecError("shards disagree on original content length")
    if original_len > k * shard_len:
        raise CodecError(
            f"original_len {original_len} exceeds decoded size {k * shard_len}"
        )
    rows = generator_rows(spec)
    matrix = [rows[s.index] for s in chosen]
    inverse = _gf_matrix_inverse(matrix)
    payloads = np.stack(
        [np.frombuffer(s.payload, dtype=np.uint8) for s in chosen]
    )
    out = np.empty((k, shard_len), dtype=np.uint8)
    for r in range(k):
        acc = np.zeros(shard_len, dtype=np.uint8)
        for c, coeff in enumerate(inverse[r]):
            if coeff:
                acc ^= _MUL[coeff, payloads[c]]
        out[r] = acc
    data = out.tobytes()[:original_len]
    return ContentFile(data=data, original_len=original_len)


def serialize_shard(spec: CodeSpec, shard: Shard) -> bytes:
    """Fixed-width little-endian header followed by the payload."""
    if not 0 <= shard.index < spec.n:
        raise CodecError(f"shard index {shard.index} out of range for n={spec.n}")
    header = _HEADER.pack(
        _MAGIC, _VERSION, spec.n, spec.k, shard.index, shard.original_len
    )
    return header + shard.payload


def parse_shard(blob: bytes) -> tuple[CodeSpec, Shard]:
    """Inverse of serialize_shard; validates magic, version, and ranges."""
    if len(blob) < _HEADER.size:
        raise ShardFormatError(
            f"truncated shard: {len(blob)} bytes < header size {_HEADER.size}"
        )
    magic, version, n, k, index, original_len = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise ShardFormatError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise ShardFormatError(f"unsupported shard version {version}")
    if n < 1 or not 1 <= k <= n or n > MAX_SHARDS:
        raise ShardFormatError(f"invalid code parameters n={n}, k={k}")
    if not 0 <= index < n:
        raise ShardFormatError(f"shard index {index} out of range for n={n}")
    payload = blob[_HEADER.size :]
    expected = -(-original_len // k)
    if len(payload) < expected:
        raise ShardFormatError(
            f"truncated payload: {len(payload)} bytes, expected {expected}"
        )
    if len(payload) > expected:
        raise ShardFormatError(
            f"oversized payload: {len(payload)} bytes, expected {expected}"
        )
    return CodeSpec(n=n, k=k), Shard(
        index=index, payload=payload, original_len=original_len
    )
