"""Encoding and decoding at arbitrary k.

An encoded symbol carries its selector (which input payloads were XORed
into it) in-band, plus the XOR itself.  Two decoders are provided:

* belief propagation (peeling): substitute known inputs, recover from
  degree-1 equations, cascade;
* incremental Gaussian elimination: maintains a fully reduced selector
  basis with payload row operations; decoding completes exactly when the
  received selectors reach rank k.

BP never succeeds where elimination fails; elimination is the stronger
(and slower) reference.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .distributions import PdsSpec, cprime_pds, lt_pds


class CorruptStreamError(Exception):
    """Received symbols are mutually inconsistent (corrupted payload)."""


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError(f"payload length mismatch: {len(a)} != {len(b)}")
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(n, "little")


@dataclass(frozen=True)
class InputBlock:
    """The k input payloads, all of the same byte length."""

    k: int
    payloads: tuple[bytes, ...]

    def __post_init__(self):
        if len(self.payloads) != self.k:
            raise ValueError(f"expected {self.k} payloads, got {len(self.payloads)}")
        ell = len(self.payloads[0]) if self.payloads else 0
        if ell < 1:
            raise ValueError("payloads must be at least 1 byte")
        for p in self.payloads:
            if len(p) != ell:
                raise ValueError("payloads must all have the same length")

    @property
    def ell(self) -> int:
        return len(self.payloads[0])

    @classmethod
    def random(cls, k: int, ell: int, rng: np.random.Generator) -> "InputBlock":
        raw = rng.integers(0, 256, size=(k, ell), dtype=np.uint8)
        return cls(k, tuple(bytes(row) for row in raw))

    def encode(self, selector: int) -> bytes:
        """XOR of the payloads picked out by the selector mask."""
        acc = 0
        for i in _bits(selector):
            acc ^= int.from_bytes(self.payloads[i], "little")
        return acc.to_bytes(self.ell, "little")


@dataclass(frozen=True)
class EncodedSymbol:
    seq: int  # 1-based transmission index
    k: int
    selector: int
    payload: bytes


class StreamEncoder:
    """Generates symbols whose selectors follow a per-step distribution
    sequence; with the same rng seed the stream is identical."""

    def __init__(self, block: InputBlock, pds: PdsSpec, rng: np.random.Generator):
        if pds.k != block.k:
            raise ValueError(f"sequence is over F_2^{pds.k}, block has k={block.k}")
        self.block = block
        self.pds = pds
        self.rng = rng
        self.t = 0

    def next_symbol(self) -> EncodedSymbol:
        self.t += 1
        mask = self.pds.at(self.t).sample_mask(self.rng)
        return EncodedSymbol(self.t, self.block.k, mask, self.block.encode(mask))

    def take(self, n: int) -> list[EncodedSymbol]:
        return [self.next_symbol() for _ in range(n)]

    def __iter__(self):
        while True:
            yield self.next_symbol()


def lt_encoder(block: InputBlock, c: float, delta: float, rng) -> StreamEncoder:
    """Constant robust-soliton stream (degree draw, then uniform support)."""
    return StreamEncoder(block, lt_pds(block.k, c, delta), rng)


def cprime_encoder(block: InputBlock, c: float, delta: float, rng) -> StreamEncoder:
    """Varying-distribution stream: the first k selectors form a triangular
    staircase of distinct pivots (always full rank), then robust-soliton
    selectors, repeating with period floor(3k/2).  Selectors are re-sampled
    every period: the distributions repeat, not the realizations."""
    return StreamEncoder(block, cprime_pds(block.k, c, delta), rng)


class BpDecoder:
    """Peeling decoder state; feed symbols with push()."""

    mode = "bp"

    def __init__(self, k: int):
        self.k = k
        self.recovered: dict[int, bytes] = {}
        self.pending: dict[int, list] = {}  # eq id -> [residual mask, payload]
        self.by_input: dict[int, set] = {}
        self.by_residual: dict[int, int] = {}
        self.received_count = 0
        self._next_eq = 0

    @property
    def done(self) -> bool:
        return len(self.recovered) == self.k

    def push(self, sym: EncodedSymbol) -> "BpDecoder":
        if sym.k != self.k:
            raise ValueError(f"symbol for k={sym.k}, decoder for k={self.k}")
        self.received_count += 1
        mask, payload = sym.selector, sym.payload
        for i in _bits(mask):
            if i in self.recovered:
                mask &= ~(1 << i)
                payload = xor_bytes(payload, self.recovered[i])
        if mask == 0:
            if any(payload):
                raise CorruptStreamError(f"symbol {sym.seq}: zero residual, nonzero payload")
            return self
        if mask & (mask - 1) == 0:
            self._recover(mask.bit_length() - 1, payload)
        else:
            self._store(mask, payload)
        return self

    def _store(self, mask: int, payload: bytes):
        other = self.by_residual.get(mask)
        if other is not None:
            if self.pending[other][1] != payload:
                raise CorruptStreamError("same residual selector, different payload")
            return
        eq = self._next_eq
        self._next_eq += 1
        self.pending[eq] = [mask, payload]
        self.by_residual[mask] = eq
        for i in _bits(mask):
            self.by_input.setdefault(i, set()).add(eq)

    def _recover(self, idx: int, value: bytes):
        queue = [(idx, value)]
        while queue:
            idx, value = queue.pop()
            if idx in self.recovered:
                if self.recovered[idx] != value:
                    raise CorruptStreamError(f"input {idx} recovered twice with different values")
                continue
            self.recovered[idx] = value
            for eq in sorted(self.by_input.pop(idx, ())):
                entry = self.pending.get(eq)
                if entry is None:
                    continue
                mask, payload = entry
                del self.by_residual[mask]
                mask &= ~(1 << idx)
                payload = xor_bytes(payload, value)
                if mask == 0:
                    del self.pending[eq]
                    if any(payload):
                        raise CorruptStreamError("equation reduced to 0 = nonzero payload")
                    continue
                if mask & (mask - 1) == 0:
                    del self.pending[eq]
                    queue.append((mask.bit_length() - 1, payload))
                    continue
                other = self.by_residual.get(mask)
                if other is not None:
                    del self.pending[eq]
                    if self.pending[other][1] != payload:
                        raise CorruptStreamError("same residual selector, different payload")
                    continue
                entry[0] = mask
                entry[1] = payload
                self.by_residual[mask] = eq


class GeDecoder:
    """Incremental Gaussian elimination with payload row operations.

    Keeps the basis fully reduced (each row is zero at every other pivot),
    so at rank k every row is a unit vector and the payloads are the
    recovered inputs."""

    mode = "ge"

    def __init__(self, k: int):
        self.k = k
        self.basis: dict[int, list] = {}  # pivot bit -> [mask, payload]
        self.recovered: dict[int, bytes] = {}
        self.received_count = 0

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def done(self) -> bool:
        return len(self.recovered) == self.k

    def push(self, sym: EncodedSymbol) -> "GeDecoder":
        if sym.k != self.k:
            raise ValueError(f"symbol for k={sym.k}, decoder for k={self.k}")
        self.received_count += 1
        mask, payload = sym.selector, sym.payload
        # clear every existing pivot bit (one pass: rows are fully reduced,
        # so each is zero at all pivots but its own)
        for b, row in self.basis.items():
            if (mask >> b) & 1:
                mask ^= row[0]
                payload = xor_bytes(payload, row[1])
        if mask == 0:
            if any(payload):
                raise CorruptStreamError(f"symbol {sym.seq}: dependent selector, inconsistent payload")
            return self
        b = (mask & -mask).bit_length() - 1
        for row in self.basis.values():
            if (row[0] >> b) & 1:
                row[0] ^= mask
                row[1] = xor_bytes(row[1], payload)
        self.basis[b] = [mask, payload]
        if len(self.basis) == self.k:
            self.recovered = {b: row[1] for b, row in self.basis.items()}
        return self


def bp_decode_step(state: BpDecoder, sym: EncodedSymbol) -> BpDecoder:
    return state.push(sym)


def ge_decode_step(state: GeDecoder, sym: EncodedSymbol) -> GeDecoder:
    return state.push(sym)


# ---------------------------------------------------------------------------
# symbol wire format: u32 seq | u32 k | ceil(k/8) selector bytes | u32 len |
# payload bytes (all little-endian; selector bit i = coordinate i+1)
# ---------------------------------------------------------------------------


def pack_symbol(sym: EncodedSymbol) -> bytes:
    sel = sym.selector.to_bytes((sym.k + 7) // 8, "little")
    return (
        struct.pack("<II", sym.seq, sym.k)
        + sel
        + struct.pack("<I", len(sym.payload))
        + sym.payload
    )


def unpack_symbol(buf: bytes, offset: int = 0) -> tuple[EncodedSymbol, int]:
    seq, k = struct.unpack_from("<II", buf, offset)
    offset += 8
    nsel = (k + 7) // 8
    selector = int.from_bytes(buf[offset : offset + nsel], "little")
    offset += nsel
    (ell,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    payload = bytes(buf[offset : offset + ell])
    offset += ell
    return EncodedSymbol(seq, k, selector, payload), offset


def write_symbols(fp, symbols) -> None:
    for sym in symbols:
        fp.write(pack_symbol(sym))


def read_symbols(buf: bytes) -> list[EncodedSymbol]:
    out = []
    offset = 0
    while offset < len(buf):
        sym, offset = unpack_symbol(buf, offset)
        out.append(sym)
    return out
