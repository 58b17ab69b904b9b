"""Pulse-timing IR codec.

Encodes and decodes remote-control transmissions as trains of mark/space
durations. The default timing constants follow the commodity NEC
convention (9 ms leader, 560 us bit marks, complement-byte integrity),
but every duration and the matching tolerance are configurable through
``ProtocolParams``.

Decoding never raises on malformed input: bad timing is reported through
``Diagnostic`` records and the decoder resynchronizes at the next
candidate leader mark.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence, Union

Duration = Union[int, float]

BITS_PER_FRAME = 32
_BYTES_PER_FRAME = 4


class Level(Enum):
    """Carrier state of one pulse: MARK = carrier on, SPACE = carrier off."""

    MARK = "mark"
    SPACE = "space"

    @property
    def opposite(self) -> "Level":
        return Level.SPACE if self is Level.MARK else Level.MARK


class FrameKind(Enum):
    DATA = "data"
    REPEAT = "repeat"


class DiagnosticReason(Enum):
    BAD_LEADER = "BadLeader"
    BIT_TIMING_OUT_OF_TOLERANCE = "BitTimingOutOfTolerance"
    INTEGRITY_CHECK_FAILED = "IntegrityCheckFailed"
    TRUNCATED_FRAME = "TruncatedFrame"


@dataclass(frozen=True)
class ProtocolParams:
    """Nominal pulse timings (microseconds) plus a relative tolerance.

    A measured duration ``d`` matches a nominal ``n`` iff
    ``|d - n| <= tolerance * n``. Validation rejects parameter sets whose
    tolerance windows make decoding ambiguous: the one/zero bit spaces and
    the leader/repeat spaces must have disjoint windows.
    """

    leader_mark: Duration = 9000
    leader_space: Duration = 4500
    bit_mark: Duration = 560
    zero_space: Duration = 560
    one_space: Duration = 1690
    repeat_space: Duration = 2250
    frame_gap: Duration = 40000
    tolerance: float = 0.25

    def __post_init__(self) -> None:
        for name in (
            "leader_mark",
            "leader_space",
            "bit_mark",
            "zero_space",
            "one_space",
            "repeat_space",
            "frame_gap",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0.0 < self.tolerance < 0.5:
            raise ValueError("tolerance must lie in the open interval (0, 0.5)")
        if self.one_space <= self.zero_space:
            raise ValueError("one_space must exceed zero_space")
        if self.one_space * (1 - self.tolerance) <= self.zero_space * (1 + self.tolerance):
            raise ValueError(
                "tolerance windows of one_space and zero_space overlap; "
                "bit values would be ambiguous"
            )
        if not self._disjoint(self.leader_space, self.repeat_space):
            raise ValueError(
                "tolerance windows of leader_space and repeat_space overlap; "
                "data and repeat frames would be ambiguous"
            )

    def _disjoint(self, a: Duration, b: Duration) -> bool:
        t = self.tolerance
        return a * (1 - t) > b * (1 + t) or b * (1 - t) > a * (1 + t)

    def matches(self, duration: Duration, nominal: Duration) -> bool:
        """True iff ``duration`` falls inside the tolerance window of ``nominal``."""
        return abs(duration - nominal) <= self.tolerance * nominal


#: Commodity NEC timing; the built-in integrity check comes from the
#: complement bytes this layout transmits.
DEFAULT_PARAMS = ProtocolParams()


@dataclass(frozen=True)
class PulseTrain:
    """A raw transmission: durations in microseconds, strictly alternating
    levels starting at ``first_level``."""

    durations: tuple
    first_level: Level = Level.MARK

    def __init__(self, durations: Iterable[Duration], first_level: Level = Level.MARK):
        durations = tuple(durations)
        for i, d in enumerate(durations):
            if d <= 0:
                raise ValueError(f"duration at index {i} must be strictly positive, got {d!r}")
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "first_level", first_level)

    def __len__(self) -> int:
        return len(self.durations)

    def level_at(self, index: int) -> Level:
        if index % 2 == 0:
            return self.first_level
        return self.first_level.opposite

    def pulses(self) -> Iterator[tuple]:
        """Yield (duration, level) pairs in transmission order."""
        level = self.first_level
        for d in self.durations:
            yield d, level
            level = level.opposite


@dataclass(frozen=True)
class IrFrame:
    """One decoded transmission: an (address, command) pair or a repeat burst."""

    address: Optional[int]
    command: Optional[int]
    kind: FrameKind = FrameKind.DATA

    def __post_init__(self) -> None:
        if self.kind is FrameKind.DATA:
            for name, value in (("address", self.address), ("command", self.command)):
                if not isinstance(value, int) or not 0 <= value <= 0xFF:
                    raise ValueError(f"{name} must be an integer in 0..255, got {value!r}")
        else:
            # Repeat bursts carry no payload.
            if self.address is not None or self.command is not None:
                raise ValueError("repeat frames carry no address or command")

    @classmethod
    def data(cls, address: int, command: int) -> "IrFrame":
        return cls(address=address, command=command, kind=FrameKind.DATA)

    @classmethod
    def repeat(cls) -> "IrFrame":
        return cls(address=None, command=None, kind=FrameKind.REPEAT)


@dataclass(frozen=True)
class Diagnostic:
    """A decode failure: offset of the offending duration plus the reason."""

    offset: int
    reason: DiagnosticReason


@dataclass(frozen=True)
class DecodeOutcome:
    frames: tuple
    diagnostics: tuple


def encode_frame(params: ProtocolParams, frame: IrFrame) -> PulseTrain:
    """Encode a data frame to its nominal pulse train (zero jitter).

    Layout: leader mark+space, then 32 bit cells carrying address,
    ~address, command, ~command (LSB first within each byte), then a
    trailing bit mark. 67 durations total.
    """
    if frame.kind is not FrameKind.DATA:
        raise ValueError("encode_frame only encodes data frames; use encode_repeat")
    durations = [params.leader_mark, params.leader_space]
    for byte in (frame.address, frame.address ^ 0xFF, frame.command, frame.command ^ 0xFF):
        for bit in range(8):
            durations.append(params.bit_mark)
            durations.append(params.one_space if (byte >> bit) & 1 else params.zero_space)
    durations.append(params.bit_mark)
    return PulseTrain(durations, Level.MARK)


def encode_repeat(params: ProtocolParams) -> PulseTrain:
    """Encode the held-button repeat burst: leader mark, repeat space, bit mark."""
    return PulseTrain(
        [params.leader_mark, params.repeat_space, params.bit_mark], Level.MARK
    )


# Decoder phases.
_IDLE = 0  # hunting for a leader mark
_LEADER_SPACE = 1  # saw a leader mark, expecting leader or repeat space
_REPEAT_TRAIL = 2  # saw a repeat space, expecting the trailing bit mark
_BIT_MARK = 3  # inside the 32 bit cells, expecting a bit mark
_BIT_SPACE = 4  # inside the 32 bit cells, expecting a zero/one space
_TRAIL_MARK = 5  # all 32 bits read, expecting the trailing bit mark


class StreamDecoder:
    """Incremental decoder fed one (duration, level) pair at a time.

    Feeding a whole train duration-by-duration yields exactly the frames
    and diagnostics of :func:`decode_train` in the same order. A single
    decoder instance must not be fed from multiple threads.
    """

    def __init__(self, params: ProtocolParams):
        self.params = params
        self.reset()

    def reset(self) -> None:
        """Drop all partial progress. The duration index keeps counting."""
        self._phase = _IDLE
        self._bits = 0
        self._nbits = 0
        if not hasattr(self, "_index"):
            self._index = 0
            self._expected_level: Optional[Level] = None

    @property
    def index(self) -> int:
        """Number of durations consumed so far."""
        return self._index

    def feed(self, duration: Duration, level: Level):
        """Consume one duration.

        Returns ``(frame, diagnostic)``; either or both may be None.
        Two consecutive durations at the same level reset the decoder and
        report a TruncatedFrame (the offending duration is discarded).
        """
        if duration <= 0:
            raise ValueError("duration must be strictly positive")
        offset = self._index
        self._index += 1

        if self._expected_level is not None and level is not self._expected_level:
            self.reset()
            self._expected_level = None  # next duration may be either level
            return None, Diagnostic(offset, DiagnosticReason.TRUNCATED_FRAME)
        self._expected_level = level.opposite

        p = self.params
        phase = self._phase

        if phase == _IDLE:
            if level is Level.MARK and p.matches(duration, p.leader_mark):
                self._phase = _LEADER_SPACE
            return None, None

        if phase == _LEADER_SPACE:
            if p.matches(duration, p.leader_space):
                self._phase = _BIT_MARK
                self._bits = 0
                self._nbits = 0
                return None, None
            if p.matches(duration, p.repeat_space):
                self._phase = _REPEAT_TRAIL
                return None, None
            self._phase = _IDLE
            return None, Diagnostic(offset, DiagnosticReason.BAD_LEADER)

        if phase == _REPEAT_TRAIL:
            if p.matches(duration, p.bit_mark):
                self._phase = _IDLE
                return IrFrame.repeat(), None
            return self._mark_failure(duration, offset, DiagnosticReason.BAD_LEADER)

        if phase == _BIT_MARK:
            if p.matches(duration, p.bit_mark):
                self._phase = _BIT_SPACE
                return None, None
            return self._mark_failure(
                duration, offset, DiagnosticReason.BIT_TIMING_OUT_OF_TOLERANCE
            )

        if phase == _BIT_SPACE:
            if p.matches(duration, p.zero_space):
                bit = 0
            elif p.matches(duration, p.one_space):
                bit = 1
            else:
                self._phase = _IDLE
                return None, Diagnostic(
                    offset, DiagnosticReason.BIT_TIMING_OUT_OF_TOLERANCE
                )
            self._bits |= bit << self._nbits
            self._nbits += 1
            self._phase = _TRAIL_MARK if self._nbits == BITS_PER_FRAME else _BIT_MARK
            return None, None

        # _TRAIL_MARK
        if p.matches(duration, p.bit_mark):
            self._phase = _IDLE
            return self._finish_frame(offset)
        return self._mark_failure(
            duration, offset, DiagnosticReason.BIT_TIMING_OUT_OF_TOLERANCE
        )

    def _mark_failure(self, duration: Duration, offset: int, reason: DiagnosticReason):
        # Resynchronize: the failing mark may itself open the next frame.
        if self.params.matches(duration, self.params.leader_mark):
            self._phase = _LEADER_SPACE
        else:
            self._phase = _IDLE
        return None, Diagnostic(offset, reason)

    def _finish_frame(self, offset: int):
        raw = self._bits
        payload = [(raw >> (8 * i)) & 0xFF for i in range(_BYTES_PER_FRAME)]
        if payload[1] != payload[0] ^ 0xFF or payload[3] != payload[2] ^ 0xFF:
            return None, Diagnostic(offset, DiagnosticReason.INTEGRITY_CHECK_FAILED)
        return IrFrame.data(payload[0], payload[2]), None


def decode_train(params: ProtocolParams, train: PulseTrain) -> DecodeOutcome:
    """Decode a complete pulse train.

    Greedy leader-synchronized scan; never raises on malformed timing.
    A partial frame at the end of the train is left unreported (the same
    train could legally continue), matching the stream decoder exactly.
    """
    decoder = StreamDecoder(params)
    frames = []
    diagnostics = []
    for duration, level in train.pulses():
        frame, diagnostic = decoder.feed(duration, level)
        if frame is not None:
            frames.append(frame)
        if diagnostic is not None:
            diagnostics.append(diagnostic)
    return DecodeOutcome(tuple(frames), tuple(diagnostics))


def concat_trains(trains: Sequence[PulseTrain], gap: Optional[Duration] = None,
                  params: Optional[ProtocolParams] = None) -> PulseTrain:
    """Join encoder-produced trains, inserting a gap space between them.

    Every train must start and end on a mark (as encoder output does).
    ``gap`` defaults to ``params.frame_gap`` (or the NEC default).
    """
    if not trains:
        raise ValueError("need at least one train")
    if gap is None:
        gap = (params or DEFAULT_PARAMS).frame_gap
    durations: list = []
    for i, train in enumerate(trains):
        if train.first_level is not Level.MARK or len(train) % 2 == 0:
            raise ValueError("trains must start and end on a mark")
        if i:
            durations.append(gap)
        durations.extend(train.durations)
    return PulseTrain(durations, Level.MARK)


_CAPTURE_LINE = re.compile(r"^([+-])(\d+)$")


def parse_capture(text: str) -> PulseTrain:
    """Parse the pulse-capture text format.

    One duration per line as ``<+|-><integer us>`` where ``+`` is a mark
    and ``-`` a space; blank lines and ``#`` comments are ignored.
    Alternation is enforced here: two consecutive lines with the same sign
    are a parse error.
    """
    durations = []
    first_level: Optional[Level] = None
    previous: Optional[Level] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _CAPTURE_LINE.match(line)
        if m is None:
            raise ValueError(f"line {lineno}: expected <+|-><integer us>, got {raw!r}")
        level = Level.MARK if m.group(1) == "+" else Level.SPACE
        value = int(m.group(2))
        if value <= 0:
            raise ValueError(f"line {lineno}: duration must be strictly positive")
        if previous is not None and level is previous:
            raise ValueError(
                f"line {lineno}: levels must alternate, got two consecutive "
                f"{level.value}s"
            )
        if first_level is None:
            first_level = level
        durations.append(value)
        previous = level
    if not durations:
        raise ValueError("capture contains no pulses")
    return PulseTrain(durations, first_level or Level.MARK)


def format_capture(train: PulseTrain) -> str:
    """Render a train in the pulse-capture text format (integer microseconds)."""
    lines = []
    for duration, level in train.pulses():
        sign = "+" if level is Level.MARK else "-"
        lines.append(f"{sign}{int(round(duration))}")
    return "\n".join(lines) + "\n"
