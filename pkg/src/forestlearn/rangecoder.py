"""Carry-less range coder: 64-bit state, 32-bit word renormalization.

Symbols are coded from exact integer frequency tables (cumulative low,
cumulative high, total).  The coder keeps the invariant
low + range <= 2^64, so no carry ever propagates into emitted words;
output is therefore bit-identical across platforms.  The final flush
emits the fewest whole bytes that pin a value inside [low, low+range),
at most four since range >= 2^32 after renormalization.

Totals must stay at or below 2^32; the per-symbol precision loss from
integer division is then below 2^-31 of a bit in practice.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_TOP = 1 << 32
# underflow threshold: forcing a boundary truncation wastes up to ~32
# bits, so it must be far rarer than the settled-word emissions
_BOT = 1 << 26

MAX_TOTAL = 1 << 24


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = _MASK64
        self._out = bytearray()
        self._started = False

    def encode(self, cum_lo: int, cum_hi: int, total: int) -> None:
        """Narrow the interval to the symbol spanning [cum_lo, cum_hi)/total."""
        if not (0 <= cum_lo < cum_hi <= total <= MAX_TOTAL):
            raise ValueError("bad frequency interval")
        self._started = True
        r = self.range // total
        self.low += cum_lo * r
        if cum_hi == total:
            # hand the last symbol the division remainder
            self.range -= cum_lo * r
        else:
            self.range = (cum_hi - cum_lo) * r
        self._renorm()

    def _renorm(self) -> None:
        while True:
            if (self.low ^ (self.low + self.range)) < _TOP:
                pass  # top word settled, emit it
            elif self.range < _BOT:
                # interval straddles a word boundary with a tiny range:
                # truncate the range to end at the boundary
                self.range = (_TOP - (self.low & _MASK32)) & _MASK32
            else:
                break
            self._out += ((self.low >> 32) & _MASK32).to_bytes(4, "big")
            self.low = (self.low << 32) & _MASK64
            self.range = (self.range << 32) & _MASK64

    def finish(self) -> bytes:
        """Flush and return the payload; empty input gives empty output."""
        if not self._started:
            return b""
        for nbytes in range(1, 9):
            shift = 64 - 8 * nbytes
            v = self.low >> shift
            if self.low & ((1 << shift) - 1):
                v += 1
            v <<= shift
            if v <= self.low + self.range - 1:
                self._out += v.to_bytes(8, "big")[:nbytes]
                break
        return bytes(self._out)

    @property
    def n_bytes(self) -> int:
        return len(self._out)


class RangeDecoder:
    """Mirror of RangeEncoder; reads 32-bit words, zero-padded past the end."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self.low = 0
        self.range = _MASK64
        self.code = (self._next_word() << 32) | self._next_word()

    def _next_word(self) -> int:
        chunk = self._data[self._pos : self._pos + 4]
        self._pos += 4
        return int.from_bytes(chunk.ljust(4, b"\0"), "big")

    def decode_target(self, total: int) -> int:
        """Value in [0, total) locating the next symbol's cumulative slot."""
        if not 1 <= total <= MAX_TOTAL:
            raise ValueError("bad total")
        r = self.range // total
        t = (self.code - self.low) // r
        return t if t < total else total - 1

    def advance(self, cum_lo: int, cum_hi: int, total: int) -> None:
        if not (0 <= cum_lo < cum_hi <= total <= MAX_TOTAL):
            raise ValueError("bad frequency interval")
        r = self.range // total
        self.low += cum_lo * r
        if cum_hi == total:
            self.range -= cum_lo * r
        else:
            self.range = (cum_hi - cum_lo) * r
        while True:
            if (self.low ^ (self.low + self.range)) < _TOP:
                pass
            elif self.range < _BOT:
                self.range = (_TOP - (self.low & _MASK32)) & _MASK32
            else:
                break
            self.low = (self.low << 32) & _MASK64
            self.range = (self.range << 32) & _MASK64
            self.code = ((self.code << 32) & _MASK64) | self._next_word()
