"""MSB-first bit packing."""

from __future__ import annotations

from .errors import TruncatedStream


class BitWriter:
    __slots__ = ("_out", "_acc", "_nbits", "bits_written")

    def __init__(self):
        self._out = bytearray()
        self._acc = 0
        self._nbits = 0
        self.bits_written = 0

    def write_uint(self, value: int, bits: int) -> None:
        """Append the low `bits` bits of value, most significant first."""
        if bits == 0:
            return
        if value < 0 or value >> bits:
            raise ValueError(f"{value} does not fit in {bits} bits")
        self._acc = (self._acc << bits) | value
        self._nbits += bits
        self.bits_written += bits
        while self._nbits >= 8:
            self._nbits -= 8
            self._out.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def write_bool(self, value: bool) -> None:
        self.write_uint(int(bool(value)), 1)

    def getvalue(self) -> bytes:
        """Packed bytes, the last one zero-padded on the right."""
        if self._nbits:
            return bytes(self._out) + bytes([(self._acc << (8 - self._nbits)) & 0xFF])
        return bytes(self._out)


class BitReader:
    __slots__ = ("_data", "_pos", "_limit")

    def __init__(self, data: bytes, start_bit: int = 0):
        self._data = bytes(data)
        self._pos = start_bit
        self._limit = len(self._data) * 8

    @property
    def position(self) -> int:
        """Bits consumed so far."""
        return self._pos

    def read_uint(self, bits: int) -> int:
        if bits == 0:
            return 0
        if self._pos + bits > self._limit:
            raise TruncatedStream(f"need {bits} bits at bit {self._pos}, stream has {self._limit}")
        value = 0
        for _ in range(bits):
            byte = self._data[self._pos >> 3]
            value = (value << 1) | ((byte >> (7 - (self._pos & 7))) & 1)
            self._pos += 1
        return value

    def read_bool(self) -> bool:
        return bool(self.read_uint(1))

    def align(self) -> int:
        """Skip to the next byte boundary; return the byte offset reached."""
        self._pos = (self._pos + 7) & ~7
        return self._pos >> 3
