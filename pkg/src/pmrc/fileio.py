"""On-disk formats: the text manifest, binary share files, and the byte <-> symbol mapping.

Manifest: ``key=value`` lines followed by ``checksum=<sha256 of the preceding text>``.
It holds only code parameters and integrity digests, never message or random material.
Share headers carry the digest of the parameter lines (everything but the share
digests), and the manifest lists a sha256 of each share's element bytes.

Share file layout (little-endian)::

    b"PMRC" | version (1 byte) | manifest sha256 (32 bytes) | node id (uint16) |
    stripes * alpha field elements, each ``width`` bytes

where ``width`` is the smallest of 1, 2, 4 bytes that holds q - 1.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, CorruptShare, FormatError

MAGIC = b"PMRC"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sB32sH")
BYTE_PAD = 256  # padding sentinel in byte payload mode, never a byte value


def element_width(q: int) -> int:
    for w in (1, 2, 4):
        if q - 1 < 1 << (8 * w):
            return w
    raise ConfigError(f"q={q} does not fit in 4-byte share elements")


# -- payload mapping ----------------------------------------------------------


def digits_per_block(q: int) -> int:
    """Base-q digits needed for one 8-byte block."""
    n = math.ceil(64 / math.log2(q))
    while q ** n < 2**64:
        n += 1
    while q ** (n - 1) >= 2**64:
        n -= 1
    return n


def resolve_payload(payload: str, q: int) -> str:
    if payload == "auto":
        return "bytes" if q >= 257 else "digits"
    if payload == "bytes" and q < 257:
        raise ConfigError(f"byte payload mode needs q >= 257, got q={q}")
    if payload not in ("bytes", "digits"):
        raise ConfigError(f"unknown payload mode {payload!r}")
    return payload


def symbol_count(length: int, q: int, payload: str) -> int:
    if payload == "bytes":
        return length
    return -(-length // 8) * digits_per_block(q)


def bytes_to_symbols(data: bytes, q: int, payload: str) -> np.ndarray:
    if payload == "bytes":
        return np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    padded = data + b"\0" * (-len(data) % 8)
    blocks = np.frombuffer(padded, dtype=">u8").astype(np.uint64)
    nd = digits_per_block(q)
    digits = np.zeros((blocks.size, nd), dtype=np.int64)
    rest = blocks.copy()
    for j in range(nd - 1, -1, -1):  # big-endian digit order
        digits[:, j] = (rest % np.uint64(q)).astype(np.int64)
        rest //= np.uint64(q)
    return digits.ravel()


def symbols_to_bytes(symbols: np.ndarray, length: int, q: int, payload: str) -> bytes:
    symbols = np.asarray(symbols, dtype=np.int64)
    if payload == "bytes":
        if symbols.size and symbols.max() > 255:
            raise CorruptShare("decoded a symbol outside the byte range")
        return symbols.astype(np.uint8).tobytes()[:length]
    nd = digits_per_block(q)
    digits = symbols.reshape(-1, nd).astype(np.uint64)
    value = np.zeros(digits.shape[0], dtype=np.uint64)
    for j in range(nd):  # wraps mod 2**64, exact for valid data
        value = value * np.uint64(q) + digits[:, j]
    return value.astype(">u8").tobytes()[:length]


# -- manifest -----------------------------------------------------------------


@dataclass
class Manifest:
    mode: str
    n: int
    k: int
    d: int
    beta: int
    q: int
    ell: int
    ell_prime: int
    stripes: int
    length: int
    payload: str
    points: list[int]
    share_digests: list[str] = field(default_factory=list)
    version: int = FORMAT_VERSION

    _INT_KEYS = ("version", "n", "k", "d", "beta", "q", "ell", "ell_prime", "stripes", "length")

    def body(self, with_digests: bool = True) -> str:
        lines = [
            f"version={self.version}",
            f"mode={self.mode}",
            *(f"{key}={getattr(self, key)}" for key in self._INT_KEYS if key != "version"),
            f"payload={self.payload}",
            f"points={','.join(map(str, self.points))}",
        ]
        if with_digests:
            lines.append(f"share_digests={','.join(self.share_digests)}")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> bytes:
        """Digest of the parameter lines, stamped into every share header."""
        return hashlib.sha256(self.body(with_digests=False).encode()).digest()

    def to_text(self) -> str:
        body = self.body()
        return body + f"checksum={hashlib.sha256(body.encode()).hexdigest()}\n"

    @classmethod
    def parse(cls, text: str) -> Manifest:
        lines = text.splitlines()
        if not lines or not lines[-1].startswith("checksum="):
            raise FormatError("manifest lacks its trailing checksum line")
        body = "\n".join(lines[:-1]) + "\n"
        if hashlib.sha256(body.encode()).hexdigest() != lines[-1].split("=", 1)[1].strip():
            raise CorruptShare("manifest checksum mismatch")
        kv = {}
        for line in lines[:-1]:
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"bad manifest line {line!r}")
            kv[key.strip()] = value.strip()
        try:
            ints = {key: int(kv[key]) for key in cls._INT_KEYS}
            if ints["version"] != FORMAT_VERSION:
                raise FormatError(f"unsupported manifest version {ints['version']}")
            return cls(
                mode=kv["mode"],
                payload=kv["payload"],
                points=[int(x) for x in kv["points"].split(",") if x],
                share_digests=[x for x in kv["share_digests"].split(",") if x],
                **ints,
            )
        except KeyError as exc:
            raise FormatError(f"manifest is missing {exc.args[0]!r}") from None

    def save(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> Manifest:
        return cls.parse(Path(path).read_text())


# -- share files --------------------------------------------------------------


_DTYPES = {1: "<u1", 2: "<u2", 4: "<u4"}


def share_body(q: int, data: np.ndarray) -> bytes:
    """Element bytes of one node's ``stripes x alpha`` symbols."""
    return np.ascontiguousarray(data, dtype=np.int64).astype(_DTYPES[element_width(q)]).tobytes()


def body_digest(body: bytes) -> str:
    return hashlib.sha256(body).hexdigest()


def share_bytes(manifest: Manifest, node: int, data: np.ndarray) -> bytes:
    header = HEADER.pack(MAGIC, FORMAT_VERSION, manifest.digest, node)
    return header + share_body(manifest.q, data)


def parse_share(manifest: Manifest, raw: bytes, alpha: int) -> tuple[int, np.ndarray]:
    """Validate a share file against ``manifest``; returns (node id, stripes x alpha array)."""
    if len(raw) < HEADER.size:
        raise CorruptShare("share file truncated")
    magic, version, mdigest, node = HEADER.unpack_from(raw)
    if magic != MAGIC or version != FORMAT_VERSION:
        raise CorruptShare("not a PMRC share file")
    if mdigest != manifest.digest:
        raise CorruptShare(f"share for node {node} belongs to a different manifest")
    if not 1 <= node <= manifest.n:
        raise CorruptShare(f"node id {node} outside 1..{manifest.n}")
    width = element_width(manifest.q)
    body = raw[HEADER.size:]
    if len(body) != manifest.stripes * alpha * width:
        raise CorruptShare(f"share for node {node} has the wrong length")
    if manifest.share_digests and body_digest(body) != manifest.share_digests[node - 1]:
        raise CorruptShare(f"share for node {node} fails its checksum")
    data = np.frombuffer(body, dtype=_DTYPES[width]).astype(np.int64).reshape(manifest.stripes, alpha)
    if data.size and data.max() >= manifest.q:
        raise CorruptShare(f"share for node {node} holds values outside GF({manifest.q})")
    return node, data


def share_filename(node: int) -> str:
    return f"share_{node:03d}.pmrc"
