"""Fixed-length bit strings, MSB first, used as seed material.

A BitString is an immutable value: ``value`` holds the bits as a
non-negative integer and ``nbits`` fixes the length, so leading zero
bits are significant.  Bit 0 of the string is the most significant bit
of ``value``.
"""

from __future__ import annotations

import numpy as np

from .errors import InputSizeError, ParameterError


class BitString:
    __slots__ = ("value", "nbits")

    def __init__(self, value: int, nbits: int):
        if nbits < 0:
            raise ParameterError("nbits must be non-negative")
        if value < 0 or value >> nbits:
            raise ParameterError(f"value does not fit in {nbits} bits")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "nbits", nbits)

    def __setattr__(self, name, val):
        raise AttributeError("BitString is immutable")

    @classmethod
    def from_hex(cls, text: str, nbits: int | None = None) -> "BitString":
        text = text.strip().removeprefix("0x")
        if not text:
            raise ParameterError("empty hex string")
        value = int(text, 16)
        if nbits is None:
            nbits = 4 * len(text)
        return cls(value, nbits)

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int | None = None) -> "BitString":
        if nbits is None:
            nbits = 8 * len(data)
        if len(data) * 8 < nbits:
            raise InputSizeError(f"need {nbits} bits, got {len(data) * 8}")
        value = int.from_bytes(data, "big") >> (len(data) * 8 - nbits)
        return cls(value, nbits)

    def chunk(self, offset: int, length: int) -> int:
        """Bits [offset, offset+length) as an integer."""
        if offset < 0 or length < 0 or offset + length > self.nbits:
            raise InputSizeError(
                f"chunk [{offset}, {offset + length}) outside {self.nbits} bits"
            )
        return (self.value >> (self.nbits - offset - length)) & ((1 << length) - 1)

    def to_bytes(self) -> bytes:
        """Big-endian bytes; the final byte is zero-padded on the right."""
        nbytes = (self.nbits + 7) // 8
        return (self.value << (8 * nbytes - self.nbits)).to_bytes(nbytes, "big")

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def to_words_u64(self) -> np.ndarray:
        """View as big-endian 64-bit words; requires nbits % 64 == 0."""
        if self.nbits % 64:
            raise InputSizeError("bit length is not a multiple of 64")
        return np.frombuffer(self.to_bytes(), dtype=">u8").astype(np.uint64)

    def __len__(self) -> int:
        return self.nbits

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and self.nbits == other.nbits
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.value, self.nbits))

    def __repr__(self) -> str:
        return f"BitString({self.nbits} bits, 0x{self.to_hex()})"
