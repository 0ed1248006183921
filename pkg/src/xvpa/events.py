"""Streaming XML front end.

Documents become words over open-tags, close-tags and coalesced text data.
Attributes are encoded as child elements named ``@name`` (emitted first,
sorted by encoded name) and namespaced names are rendered ``{uri}local``.
DTDs are rejected outright, so entity expansion never happens.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import BinaryIO, Iterable, Iterator, Union
from xml.parsers import expat

from .datatypes import DEFAULT, Datatype, DatatypeSystem

__all__ = [
    "Open",
    "Close",
    "Text",
    "Data",
    "Event",
    "TypedEvent",
    "StreamConfig",
    "TokenizerStats",
    "XmlInputError",
    "MalformedXml",
    "DepthExceeded",
    "DtdRejected",
    "iter_events",
    "tokenize",
    "abstract",
    "describe",
]

_XML_WS = " \t\r\n"
_CHUNK = 1 << 16


@dataclass(frozen=True, slots=True)
class Open:
    name: str


@dataclass(frozen=True, slots=True)
class Close:
    name: str


@dataclass(frozen=True, slots=True)
class Text:
    datum: str


@dataclass(frozen=True, slots=True)
class Data:
    types: frozenset[Datatype]


Event = Union[Open, Close, Text]
TypedEvent = Union[Open, Close, Data]
Source = Union[bytes, bytearray, str, os.PathLike, BinaryIO]


def describe(symbol: object) -> str:
    """Short human-readable rendering of an event or datatype."""
    if isinstance(symbol, Open):
        return f"<{symbol.name}>"
    if isinstance(symbol, Close):
        return f"</{symbol.name}>"
    if isinstance(symbol, Text):
        return repr(symbol.datum)
    if isinstance(symbol, Data):
        return "{" + ", ".join(sorted(t.value for t in symbol.types)) + "}"
    if isinstance(symbol, Datatype):
        return symbol.value
    return str(symbol)


@dataclass(frozen=True)
class StreamConfig:
    max_depth: int = 1024
    keep_whitespace_text: bool = False
    trim_text: bool = True

    # entity and DTD resolution is never enabled
    resolve_dtd: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass
class TokenizerStats:
    events: int = 0
    max_depth: int = 0
    max_text_buffer: int = 0
    max_pending_events: int = 0


class XmlInputError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte {offset})")
        self.reason = message
        self.offset = offset


class MalformedXml(XmlInputError):
    pass


class DepthExceeded(XmlInputError):
    pass


class DtdRejected(XmlInputError):
    pass


def _qualify(name: str) -> str:
    uri, sep, local = name.rpartition(" ")
    return f"{{{uri}}}{local}" if sep else name


class _Handler:
    def __init__(self, parser, config: StreamConfig, stats: TokenizerStats | None):
        self.parser = parser
        self.config = config
        self.stats = stats
        self.queue: deque = deque()
        self.text: list[str] = []
        self.text_len = 0
        self.depth = 0

    def _flush(self):
        if not self.text:
            return
        datum = "".join(self.text)
        self.text.clear()
        self.text_len = 0
        if self.config.keep_whitespace_text or datum.strip(_XML_WS):
            self.queue.append(Text(datum))

    def start(self, name, attrs):
        self._flush()
        self.depth += 1
        if self.depth > self.config.max_depth:
            raise DepthExceeded(
                f"nesting depth exceeds {self.config.max_depth}", self.parser.CurrentByteIndex
            )
        if self.stats is not None and self.depth > self.stats.max_depth:
            self.stats.max_depth = self.depth
        q = self.queue
        q.append(Open(_qualify(name)))
        if attrs:
            pairs = sorted(("@" + _qualify(attrs[i]), attrs[i + 1]) for i in range(0, len(attrs), 2))
            for key, value in pairs:
                q.append(Open(key))
                if value:
                    q.append(Text(value))
                q.append(Close(key))

    def end(self, name):
        self._flush()
        self.depth -= 1
        self.queue.append(Close(_qualify(name)))

    def chars(self, data):
        self.text.append(data)
        self.text_len += len(data)
        if self.stats is not None and self.text_len > self.stats.max_text_buffer:
            self.stats.max_text_buffer = self.text_len

    def reject_dtd(self, *args):
        raise DtdRejected("document type declarations are not accepted", self.parser.CurrentByteIndex)

    def reject_entity(self, *args):
        raise DtdRejected("external entity references are not accepted", self.parser.CurrentByteIndex)


def _chunks(source: Source) -> Iterator[bytes]:
    if isinstance(source, (bytes, bytearray)):
        for i in range(0, len(source), _CHUNK):
            yield bytes(source[i : i + _CHUNK])
        return
    if isinstance(source, str):
        raise TypeError("pass XML text as bytes; str sources are ambiguous with paths")
    if isinstance(source, os.PathLike):
        with open(source, "rb") as fh:
            yield from _chunks(fh)
        return
    while True:
        block = source.read(_CHUNK)
        if not block:
            return
        yield block


def iter_events(
    source: Source, config: StreamConfig | None = None, stats: TokenizerStats | None = None
) -> Iterator[Event]:
    """Lazily tokenize one XML document.

    Memory is bounded by nesting depth, the pending text of the current datum
    and the events produced by one input chunk.
    """
    config = config or StreamConfig()
    parser = expat.ParserCreate(namespace_separator=" ")
    h = _Handler(parser, config, stats)
    parser.ordered_attributes = True
    parser.buffer_text = True
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
    parser.StartElementHandler = h.start
    parser.EndElementHandler = h.end
    parser.CharacterDataHandler = h.chars
    parser.StartDoctypeDeclHandler = h.reject_dtd
    parser.EntityDeclHandler = h.reject_dtd
    parser.ExternalEntityRefHandler = h.reject_entity

    utf16 = False
    first = True
    for block in _chunks(source):
        if first:
            utf16 = block[:2] in (b"\xff\xfe", b"\xfe\xff")
            first = False
        _feed(parser, block, False, utf16)
        yield from _drain(h, stats)
    _feed(parser, b"", True, utf16)
    yield from _drain(h, stats)


def _drain(h: _Handler, stats: TokenizerStats | None) -> Iterator[Event]:
    q = h.queue
    if stats is not None:
        stats.max_pending_events = max(stats.max_pending_events, len(q))
        stats.events += len(q)
    while q:
        yield q.popleft()


def _feed(parser, block: bytes, final: bool, utf16: bool) -> None:
    try:
        parser.Parse(block, final)
    except expat.ExpatError as exc:
        offset = parser.ErrorByteIndex
        if exc.code == expat.errors.codes[expat.errors.XML_ERROR_TAG_MISMATCH]:
            # expat points at the name; report the start of "</"
            offset -= 4 if utf16 else 2
        raise MalformedXml(expat.errors.messages[exc.code], offset) from None


def tokenize(source: Source, config: StreamConfig | None = None) -> list[Event]:
    return list(iter_events(source, config))


def parse_text(text: str, config: StreamConfig | None = None) -> list[Event]:
    """Convenience for tests and small documents given as text."""
    return tokenize(text.encode("utf-8"), config)


@lru_cache(maxsize=4096)
def _cached_types(dts: DatatypeSystem, datum: str) -> frozenset[Datatype]:
    return dts.types(datum)


def _trimmed(datum: str) -> str:
    stripped = datum.strip(_XML_WS)
    return stripped if stripped else datum


def abstract(
    events: Iterable[Event | TypedEvent],
    dts: DatatypeSystem | None = None,
    *,
    trim: bool = True,
) -> Iterator[TypedEvent]:
    """Replace every text datum by its minimal datatypes.

    With ``trim`` the datum loses leading and trailing XML whitespace before
    typing (unless nothing would remain).  ``Data`` events pass through.
    """
    dts = dts or DEFAULT
    for ev in events:
        if type(ev) is Text:
            datum = _trimmed(ev.datum) if trim else ev.datum
            if len(datum) <= 256:
                yield Data(_cached_types(dts, datum))
            else:
                yield Data(dts.types(datum))
        else:
            yield ev
