"""Lexical datatype system: 44 XML Schema style datatypes ordered by inclusion.

Each datatype has a *base* pattern that follows the XSD lexical space (with a
handful of documented adoptions), and the inclusion order is the explicit
Hasse edge list in :data:`HASSE_EDGES`.  Matching is upward closed along the
order: a string matches ``b`` whenever it matches the base pattern of any
``a <= b``.  This makes the order a true subset relation even where the raw
XSD patterns do not nest (for instance ``"0"`` is a ``boolean0`` and therefore
also a ``language`` and an ``NCName``).
"""

from __future__ import annotations

import functools
import heapq
import re
from enum import Enum
from typing import Callable, Iterable

__all__ = [
    "Datatype",
    "DatatypeSystem",
    "DATATYPES_VERSION",
    "HASSE_EDGES",
    "ADOPTED_EDGES",
    "DEFAULT",
    "lexical_match",
    "leq",
    "types",
    "first_type",
    "cl_inverse",
]

DATATYPES_VERSION = "xsd-lexical-44/1"


class Datatype(str, Enum):
    string = "string"
    normalizedString = "normalizedString"
    token = "token"
    NMTOKEN = "NMTOKEN"
    Name = "Name"
    QName = "QName"
    NCName = "NCName"
    language = "language"
    anyURI = "anyURI"
    boolean = "boolean"
    boolean0 = "boolean0"
    boolean1 = "boolean1"
    booleanNum = "booleanNum"
    byte = "byte"
    unsignedByte = "unsignedByte"
    short = "short"
    unsignedShort = "unsignedShort"
    int = "int"
    unsignedInt = "unsignedInt"
    long = "long"
    unsignedLong = "unsignedLong"
    integer = "integer"
    nonNegativeInteger = "nonNegativeInteger"
    nonPositiveInteger = "nonPositiveInteger"
    positiveInteger = "positiveInteger"
    negativeInteger = "negativeInteger"
    evenLenInteger = "evenLenInteger"
    decimal = "decimal"
    double = "double"
    duration = "duration"
    yearMonthDuration = "yearMonthDuration"
    dateTimeDuration = "dateTimeDuration"
    dateTime = "dateTime"
    dateTimeStamp = "dateTimeStamp"
    date = "date"
    time = "time"
    gYear = "gYear"
    gYearMonth = "gYearMonth"
    gMonth = "gMonth"
    gMonthDay = "gMonthDay"
    gDay = "gDay"
    hexBinary = "hexBinary"
    base64Binary = "base64Binary"
    base64BinaryLF = "base64BinaryLF"

    def __str__(self) -> str:
        return self.value

    def __repr__(self) -> str:
        return f"Datatype.{self.value}"


D = Datatype

# (lower, upper) pairs; the order is their reflexive-transitive closure.
HASSE_EDGES: tuple[tuple[Datatype, Datatype], ...] = (
    (D.boolean0, D.booleanNum),
    (D.boolean1, D.booleanNum),
    (D.boolean0, D.nonPositiveInteger),
    (D.boolean1, D.positiveInteger),
    (D.booleanNum, D.unsignedByte),
    (D.booleanNum, D.byte),
    (D.booleanNum, D.boolean),
    (D.boolean, D.language),
    (D.language, D.NCName),
    (D.yearMonthDuration, D.duration),
    (D.dateTimeDuration, D.duration),
    (D.duration, D.NCName),
    (D.NCName, D.QName),
    (D.QName, D.Name),
    (D.QName, D.anyURI),
    (D.Name, D.NMTOKEN),
    (D.anyURI, D.NMTOKEN),
    (D.NMTOKEN, D.token),
    (D.token, D.normalizedString),
    (D.normalizedString, D.string),
    (D.base64Binary, D.base64BinaryLF),
    (D.base64Binary, D.token),
    (D.base64BinaryLF, D.string),
    (D.gMonth, D.NMTOKEN),
    (D.gDay, D.NMTOKEN),
    (D.gMonthDay, D.NMTOKEN),
    (D.gYearMonth, D.NMTOKEN),
    (D.date, D.dateTime),
    (D.time, D.dateTime),
    (D.dateTimeStamp, D.dateTime),
    (D.dateTime, D.NMTOKEN),
    (D.integer, D.decimal),
    (D.decimal, D.double),
    (D.double, D.NMTOKEN),
    (D.unsignedByte, D.unsignedShort),
    (D.unsignedShort, D.unsignedInt),
    (D.unsignedInt, D.unsignedLong),
    (D.unsignedLong, D.nonNegativeInteger),
    (D.nonNegativeInteger, D.integer),
    (D.unsignedByte, D.short),
    (D.unsignedShort, D.int),
    (D.unsignedInt, D.long),
    (D.byte, D.short),
    (D.short, D.int),
    (D.int, D.long),
    (D.long, D.integer),
    (D.positiveInteger, D.nonNegativeInteger),
    (D.negativeInteger, D.nonPositiveInteger),
    (D.nonPositiveInteger, D.integer),
    (D.gYear, D.integer),
    (D.evenLenInteger, D.nonNegativeInteger),
    (D.evenLenInteger, D.hexBinary),
    (D.hexBinary, D.NCName),
)

# Edges whose raw XSD patterns do not nest; matching closure fills the gap.
ADOPTED_EDGES: frozenset[tuple[Datatype, Datatype]] = frozenset(
    {
        (D.boolean, D.language),  # "0", "1"
        (D.hexBinary, D.NCName),  # digit-initial hex
        (D.duration, D.NCName),  # "-P1Y"
        (D.QName, D.anyURI),  # unprefixed names carry no scheme
        (D.anyURI, D.NMTOKEN),  # "/", "?", "#", "%"
        (D.double, D.NMTOKEN),  # leading "+"
        (D.dateTime, D.NMTOKEN),  # "+hh:mm" zones
        (D.gMonth, D.NMTOKEN),
        (D.gDay, D.NMTOKEN),
        (D.gMonthDay, D.NMTOKEN),
        (D.gYearMonth, D.NMTOKEN),
        (D.date, D.dateTime),
        (D.time, D.dateTime),
    }
)


# -- base lexical patterns -------------------------------------------------

_NAME_START = (
    "A-Z_a-z\u00c0-\u00d6\u00d8-\u00f6\u00f8-\u02ff\u0370-\u037d\u037f-\u1fff"
    "\u200c-\u200d\u2070-\u218f\u2c00-\u2fef\u3001-\ud7ff\uf900-\ufdcf"
    "\ufdf0-\ufffd\U00010000-\U000effff"
)
_NAME_CHAR = _NAME_START + r"\-.0-9" + "\u00b7\u0300-\u036f\u203f-\u2040"
_NCNAME = f"[{_NAME_START}][{_NAME_CHAR}]*"

_ESC = "%[0-9A-Fa-f]{2}"
_URIC = rf"(?:[A-Za-z0-9\-_.!~*'();/?:@&=+$,]|{_ESC})"
_URIC_NO_SLASH = rf"(?:[A-Za-z0-9\-_.!~*'();?:@&=+$,]|{_ESC})"
_PCHAR = rf"(?:[A-Za-z0-9\-_.!~*'():@&=+$,]|{_ESC})"
_SEGMENT = rf"{_PCHAR}*(?:;{_PCHAR}*)*"
_ABS_PATH = rf"/{_SEGMENT}(?:/{_SEGMENT})*"
_AUTHORITY = rf"(?:[A-Za-z0-9\-_.!~*'()$,;:@&=+]|{_ESC})*"
_URI = (
    rf"[A-Za-z][A-Za-z0-9+\-.]*:"
    rf"(?:(?://{_AUTHORITY})?{_ABS_PATH}(?:\?{_URIC}*)?|{_URIC_NO_SLASH}{_URIC}*)"
    rf"(?:#{_URIC}*)?"
)

_B64 = "[A-Za-z0-9+/] ?"
_B64_FINAL = f"(?:(?:{_B64}){{3}}[A-Za-z0-9+/]|(?:{_B64}){{2}}[AEIMQUYcgkosw048] ?=|{_B64}[AQgw] ?= ?=)"

_YEAR = r"(?P<year>-?(?:[1-9][0-9]{3,}|0[0-9]{3}))"
_MONTH = r"(?P<month>0[1-9]|1[0-2])"
_DAY = r"(?P<day>0[1-9]|[12][0-9]|3[01])"
_TIME = r"(?:(?:[01][0-9]|2[0-3]):[0-5][0-9]:[0-5][0-9](?:\.[0-9]+)?|24:00:00(?:\.0+)?)"
_TZ = r"(?:Z|[+-](?:(?:0[0-9]|1[0-3]):[0-5][0-9]|14:00))"
_SECONDS = r"(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)S"
_DUR_TIME = rf"T(?=[0-9.])(?:[0-9]+H)?(?:[0-9]+M)?(?:{_SECONDS})?"

_PATTERNS: dict[Datatype, str] = {
    D.normalizedString: r"[^\t\n\r]*",
    D.token: r"(?:[^\t\n\r ]+(?: [^\t\n\r ]+)*)?",
    D.NMTOKEN: f"[{_NAME_CHAR}:]+",
    D.Name: f"[{_NAME_START}:][{_NAME_CHAR}:]*",
    D.QName: f"{_NCNAME}(?::{_NCNAME})?",
    D.NCName: _NCNAME,
    D.language: r"[a-zA-Z]{1,8}(?:-[a-zA-Z0-9]{1,8})*",
    D.anyURI: _URI,
    D.boolean: r"true|false|1|0",
    D.boolean0: r"0",
    D.boolean1: r"1",
    D.booleanNum: r"[01]",
    D.evenLenInteger: r"(?:[0-9]{2})+",
    D.decimal: r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)",
    D.double: r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?|[+-]?INF|NaN",
    D.duration: rf"-?P(?=[0-9T])(?:[0-9]+Y)?(?:[0-9]+M)?(?:[0-9]+D)?(?:{_DUR_TIME})?",
    D.yearMonthDuration: r"-?P(?:[0-9]+Y(?:[0-9]+M)?|[0-9]+M)",
    D.dateTimeDuration: rf"-?P(?=[0-9T])(?:[0-9]+D)?(?:{_DUR_TIME})?",
    D.dateTime: rf"{_YEAR}-{_MONTH}-{_DAY}T{_TIME}{_TZ}?",
    D.dateTimeStamp: rf"{_YEAR}-{_MONTH}-{_DAY}T{_TIME}{_TZ}",
    D.date: rf"{_YEAR}-{_MONTH}-{_DAY}{_TZ}?",
    D.time: rf"{_TIME}{_TZ}?",
    D.gYear: _YEAR,
    D.gYearMonth: rf"{_YEAR}-{_MONTH}{_TZ}?",
    D.gMonth: rf"--{_MONTH}{_TZ}?",
    D.gMonthDay: rf"--{_MONTH}-{_DAY}{_TZ}?",
    D.gDay: rf"---{_DAY}{_TZ}?",
    D.hexBinary: r"(?:[0-9a-fA-F]{2})+",
    D.base64Binary: f"(?:(?:(?:{_B64}){{4}})*{_B64_FINAL})?",
    D.base64BinaryLF: f"\\n*(?:(?:(?:{_B64}){{4}}\\n*)*{_B64_FINAL}\\n*)?",
}

# inclusive value ranges; None means unbounded
_INT_RANGES: dict[Datatype, tuple[int | None, int | None]] = {
    D.integer: (None, None),
    D.nonNegativeInteger: (0, None),
    D.positiveInteger: (1, None),
    D.nonPositiveInteger: (None, 0),
    D.negativeInteger: (None, -1),
    D.byte: (-(2**7), 2**7 - 1),
    D.short: (-(2**15), 2**15 - 1),
    D.int: (-(2**31), 2**31 - 1),
    D.long: (-(2**63), 2**63 - 1),
    D.unsignedByte: (0, 2**8 - 1),
    D.unsignedShort: (0, 2**16 - 1),
    D.unsignedInt: (0, 2**32 - 1),
    D.unsignedLong: (0, 2**64 - 1),
}

_INT_RE = re.compile(r"([+-]?)0*([0-9]+)")
_DAYS_IN_MONTH = (31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def _in_range(sign: str, digits: str, lo: int | None, hi: int | None) -> bool:
    if len(digits) > 24:
        # beyond every bounded type; only the sign matters
        negative = sign == "-"
        return (lo is None or not negative) and (hi is None or negative)
    value = int(digits)
    if sign == "-":
        value = -value
    return (lo is None or value >= lo) and (hi is None or value <= hi)


def _int_matcher(lo: int | None, hi: int | None) -> Callable[[str], bool]:
    def match(text: str) -> bool:
        m = _INT_RE.fullmatch(text)
        return m is not None and _in_range(*m.groups(), lo, hi)

    return match


def _is_leap(year_text: str) -> bool:
    year = int(year_text.lstrip("-")[-4:])
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def _dated_matcher(pattern: str, with_year: bool) -> Callable[[str], bool]:
    compiled = re.compile(pattern)

    def match(text: str) -> bool:
        m = compiled.fullmatch(text)
        if m is None:
            return False
        month = int(m.group("month"))
        day = int(m.group("day"))
        if day <= _DAYS_IN_MONTH[month - 1]:
            if month == 2 and day == 29 and with_year:
                return _is_leap(m.group("year"))
            return True
        return False

    return match


def _build_matchers() -> dict[Datatype, Callable[[str], bool]]:
    matchers: dict[Datatype, Callable[[str], bool]] = {D.string: lambda text: True}
    for dt, (lo, hi) in _INT_RANGES.items():
        matchers[dt] = _int_matcher(lo, hi)
    for dt in (D.dateTime, D.dateTimeStamp, D.date):
        matchers[dt] = _dated_matcher(_PATTERNS[dt], with_year=True)
    matchers[D.gMonthDay] = _dated_matcher(_PATTERNS[D.gMonthDay], with_year=False)
    for dt, pattern in _PATTERNS.items():
        if dt not in matchers:
            matchers[dt] = re.compile(pattern).fullmatch  # type: ignore[assignment]
    return matchers


class DatatypeSystem:
    """The datatype poset together with its membership predicates.

    Instances are immutable after construction and safe to share.
    """

    def __init__(
        self,
        edges: Iterable[tuple[Datatype, Datatype]] = HASSE_EDGES,
        version: str = DATATYPES_VERSION,
    ):
        self.version = version
        self.edges = tuple(edges)
        self._base = _build_matchers()
        up: dict[Datatype, set[Datatype]] = {d: {d} for d in Datatype}
        changed = True
        while changed:
            changed = False
            for lo, hi in self.edges:
                before = len(up[lo])
                up[lo] |= up[hi]
                changed |= len(up[lo]) != before
        self._up = {d: frozenset(s) for d, s in up.items()}
        self._down = {d: frozenset(a for a in Datatype if d in self._up[a]) for d in Datatype}
        self._strict_up = {d: self._up[d] - {d} for d in Datatype}
        # integer range types share one parse per datum
        self._pairs = tuple((d, self._base[d]) for d in Datatype if d not in _INT_RANGES)
        self._ranges = tuple((d, lo, hi) for d, (lo, hi) in _INT_RANGES.items())
        self.types = functools.lru_cache(maxsize=4096)(self._types)
        self.canonical_order = self._linear_extension()
        self._rank = {d: i for i, d in enumerate(self.canonical_order)}

    def _linear_extension(self) -> tuple[Datatype, ...]:
        # Kahn's algorithm, bottom-up, smallest name first among the ready ones
        below = {d: {lo for lo, hi in self.edges if hi is d} for d in Datatype}
        ready = [d.value for d in Datatype if not below[d]]
        heapq.heapify(ready)
        order: list[Datatype] = []
        while ready:
            d = Datatype(heapq.heappop(ready))
            order.append(d)
            for lo, hi in self.edges:
                if lo is d:
                    below[hi].discard(d)
                    if not below[hi] and hi not in order and hi.value not in ready:
                        heapq.heappush(ready, hi.value)
        if len(order) != len(Datatype):
            raise ValueError("datatype edges contain a cycle")
        return tuple(order)

    def base_match(self, d: Datatype, r: str) -> bool:
        """Match against the datatype's own pattern, ignoring the order."""
        return bool(self._base[d](r))

    def lexical_match(self, d: Datatype, r: str) -> bool:
        return any(self._base[a](r) for a in self._down[d])

    def leq(self, a: Datatype, b: Datatype) -> bool:
        return b in self._up[a]

    def upper(self, d: Datatype) -> frozenset[Datatype]:
        return self._up[d]

    def lower(self, d: Datatype) -> frozenset[Datatype]:
        return self._down[d]

    def types(self, r: str) -> frozenset[Datatype]:
        """Minimal matching datatypes of ``r``; never empty."""
        return self._types(r)

    def _types(self, r: str) -> frozenset[Datatype]:
        matched = [d for d, match in self._pairs if match(r)]
        m = _INT_RE.fullmatch(r)
        if m is not None:
            sign, digits = m.groups()
            matched += [d for d, lo, hi in self._ranges if _in_range(sign, digits, lo, hi)]
        above: set[Datatype] = set()
        for m in matched:
            above |= self._strict_up[m]
        return frozenset(matched).difference(above)

    def first(self, candidates: Iterable[Datatype]) -> Datatype:
        return min(candidates, key=self._rank.__getitem__)

    def first_type(self, r: str) -> Datatype:
        return self.first(self.types(r))

    def cl_inverse(self, s: Iterable[Datatype]) -> frozenset[Datatype]:
        out: set[Datatype] = set()
        for b in s:
            out |= self._down[b]
        return frozenset(out)


DEFAULT = DatatypeSystem()


def lexical_match(d: Datatype, r: str) -> bool:
    return DEFAULT.lexical_match(d, r)


def leq(a: Datatype, b: Datatype) -> bool:
    return DEFAULT.leq(a, b)


def types(r: str) -> frozenset[Datatype]:
    return DEFAULT.types(r)


def first_type(r: str) -> Datatype:
    return DEFAULT.first_type(r)


def cl_inverse(s: Iterable[Datatype]) -> frozenset[Datatype]:
    return DEFAULT.cl_inverse(s)
