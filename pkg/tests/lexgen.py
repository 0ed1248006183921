"""Independent generators for members of each datatype's lexical space.

Built from the XSD grammar by hand (no regexes shared with the package), so
agreement between these and the package matchers is a real cross-check.
"""

from __future__ import annotations

import base64
import calendar
import random
import string

from xvpa.datatypes import Datatype as D

ALPHA = string.ascii_letters
DIGITS = string.digits
# a few non-ASCII name characters
NAME_START_EXTRA = "éÅΩжअ中ⅷ"
NAME_CHAR_EXTRA = "·̀‿"


def _digits(rng: random.Random, lo: int, hi: int) -> str:
    return "".join(rng.choice(DIGITS) for _ in range(rng.randint(lo, hi)))


def _ncname(rng: random.Random) -> str:
    start = rng.choice(ALPHA + "_" + NAME_START_EXTRA)
    rest = "".join(
        rng.choice(ALPHA + DIGITS + "-._" + NAME_START_EXTRA + NAME_CHAR_EXTRA)
        for _ in range(rng.randint(0, 8))
    )
    return start + rest


def _int_in(rng: random.Random, lo, hi) -> str:
    if lo is None and hi is None:
        lo, hi = -(10**30), 10**30
    elif lo is None:
        lo = hi - 10 ** rng.randint(1, 25)
    elif hi is None:
        hi = lo + 10 ** rng.randint(1, 25)
    # favor the ends of the range
    pick = rng.random()
    if pick < 0.15:
        v = lo
    elif pick < 0.3:
        v = hi
    elif pick < 0.6:
        v = rng.randint(lo, min(hi, lo + 100))
    else:
        v = rng.randint(lo, hi)
    text = str(abs(v))
    if rng.random() < 0.2:
        text = "0" * rng.randint(1, 3) + text
    if v < 0:
        return "-" + text
    return rng.choice(["", "", "", "+"]) + text


_RANGES = {
    D.integer: (None, None),
    D.nonNegativeInteger: (0, None),
    D.positiveInteger: (1, None),
    D.nonPositiveInteger: (None, 0),
    D.negativeInteger: (None, -1),
    D.byte: (-128, 127),
    D.short: (-32768, 32767),
    D.int: (-(2**31), 2**31 - 1),
    D.long: (-(2**63), 2**63 - 1),
    D.unsignedByte: (0, 255),
    D.unsignedShort: (0, 65535),
    D.unsignedInt: (0, 2**32 - 1),
    D.unsignedLong: (0, 2**64 - 1),
}


def _year(rng: random.Random) -> tuple[str, int]:
    y = rng.choice([rng.randint(1, 9999), rng.randint(0, 99), rng.randint(10000, 99999)])
    text = f"{y:04d}"
    if rng.random() < 0.1 and y != 0:
        return "-" + text, y
    return text, y


def _tz(rng: random.Random, required: bool = False) -> str:
    if not required and rng.random() < 0.5:
        return ""
    pick = rng.random()
    if pick < 0.3:
        return "Z"
    if pick < 0.4:
        return rng.choice("+-") + "14:00"
    return f"{rng.choice('+-')}{rng.randint(0, 13):02d}:{rng.randint(0, 59):02d}"


def _time(rng: random.Random) -> str:
    if rng.random() < 0.05:
        return "24:00:00"
    t = f"{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}:{rng.randint(0, 59):02d}"
    if rng.random() < 0.3:
        t += "." + _digits(rng, 1, 4)
    return t


def _date(rng: random.Random) -> str:
    ytext, y = _year(rng)
    m = rng.randint(1, 12)
    leap = calendar.isleap(y)
    days = [31, 29 if leap else 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31][m - 1]
    return f"{ytext}-{m:02d}-{rng.randint(1, days):02d}"


def _duration(rng: random.Random, ym: bool, dt: bool) -> str:
    while True:
        out = "-P" if rng.random() < 0.2 else "P"
        body = ""
        if ym:
            if rng.random() < 0.6:
                body += f"{rng.randint(0, 99)}Y"
            if rng.random() < 0.6:
                body += f"{rng.randint(0, 99)}M"
        if dt:
            if rng.random() < 0.5:
                body += f"{rng.randint(0, 99)}D"
            tpart = ""
            if rng.random() < 0.4:
                tpart += f"{rng.randint(0, 99)}H"
            if rng.random() < 0.4:
                tpart += f"{rng.randint(0, 99)}M"
            if rng.random() < 0.4:
                tpart += f"{rng.randint(0, 99)}" + (f".{rng.randint(0, 999)}" if rng.random() < 0.3 else "") + "S"
            if tpart:
                body += "T" + tpart
        if body:
            return out + body


def _uri(rng: random.Random) -> str:
    scheme = rng.choice(["http", "https", "ftp", "urn", "mailto", "x-y.z+w"])
    safe = ALPHA + DIGITS + "-_.~"
    seg = lambda: "".join(rng.choice(safe) for _ in range(rng.randint(0, 6)))  # noqa: E731
    if scheme in ("urn", "mailto"):
        path = rng.choice(ALPHA) + "".join(rng.choice(safe + ":@") for _ in range(rng.randint(0, 10)))
        uri = f"{scheme}:{path}"
    else:
        host = ".".join(
            rng.choice(ALPHA) + "".join(rng.choice(ALPHA + DIGITS) for _ in range(rng.randint(0, 5)))
            for _ in range(rng.randint(1, 3))
        )
        path = "/" + "/".join(seg() for _ in range(rng.randint(0, 3)))
        uri = f"{scheme}://{host}{path}"
        if rng.random() < 0.3:
            uri += "?" + seg() + "=" + seg()
    if rng.random() < 0.2:
        uri += "#" + seg()
    if rng.random() < 0.1:
        uri += "%2F"
    return uri


def _decimal(rng: random.Random) -> str:
    sign = rng.choice(["", "", "-", "+"])
    shape = rng.random()
    if shape < 0.4:
        return f"{sign}{_digits(rng, 1, 6)}.{_digits(rng, 1, 4)}"
    if shape < 0.6:
        return f"{sign}.{_digits(rng, 1, 4)}"
    if shape < 0.8:
        return f"{sign}{_digits(rng, 1, 6)}."
    return f"{sign}{_digits(rng, 1, 9)}"


def _base64(rng: random.Random, lf: bool) -> str:
    raw = bytes(rng.randrange(256) for _ in range(rng.randint(0, 120 if lf else 40)))
    if lf:
        return base64.encodebytes(raw).decode("ascii")
    return base64.b64encode(raw).decode("ascii")


def _token(rng: random.Random) -> str:
    pool = ALPHA + DIGITS + "!#$%&'()*+,-./:;=?@[]^_`{|}~éΩ中"
    words = ["".join(rng.choice(pool) for _ in range(rng.randint(1, 6))) for _ in range(rng.randint(0, 4))]
    return " ".join(words)


def _normalized(rng: random.Random) -> str:
    pool = ALPHA + DIGITS + "   !<>&'\"éΩ中"
    return "".join(rng.choice(pool) for _ in range(rng.randint(0, 15)))


def _string(rng: random.Random) -> str:
    pool = ALPHA + DIGITS + " \t\n\r!<>&'\"éΩ中"
    return "".join(rng.choice(pool) for _ in range(rng.randint(0, 15)))


def generate(d: D, rng: random.Random) -> str:
    """One random member of the base lexical space of ``d``."""
    if d in _RANGES:
        return _int_in(rng, *_RANGES[d])
    if d is D.string:
        return _string(rng)
    if d is D.normalizedString:
        return _normalized(rng)
    if d is D.token:
        return _token(rng)
    if d is D.NMTOKEN:
        return "".join(rng.choice(ALPHA + DIGITS + "-._:" + NAME_START_EXTRA) for _ in range(rng.randint(1, 10)))
    if d is D.Name:
        start = rng.choice(ALPHA + "_:" + NAME_START_EXTRA)
        return start + "".join(rng.choice(ALPHA + DIGITS + "-._:") for _ in range(rng.randint(0, 8)))
    if d is D.QName:
        return _ncname(rng) + (":" + _ncname(rng) if rng.random() < 0.5 else "")
    if d is D.NCName:
        return _ncname(rng)
    if d is D.language:
        parts = ["".join(rng.choice(ALPHA) for _ in range(rng.randint(1, 8)))]
        for _ in range(rng.randint(0, 2)):
            parts.append("".join(rng.choice(ALPHA + DIGITS) for _ in range(rng.randint(1, 8))))
        return "-".join(parts)
    if d is D.anyURI:
        return _uri(rng)
    if d is D.boolean:
        return rng.choice(["true", "false", "0", "1"])
    if d is D.boolean0:
        return "0"
    if d is D.boolean1:
        return "1"
    if d is D.booleanNum:
        return rng.choice("01")
    if d is D.evenLenInteger:
        return _digits(rng, 1, 8) * 2 if rng.random() < 0.1 else "".join(
            rng.choice(DIGITS) for _ in range(2 * rng.randint(1, 8))
        )
    if d is D.decimal:
        return _decimal(rng)
    if d is D.double:
        pick = rng.random()
        if pick < 0.1:
            return rng.choice(["INF", "-INF", "+INF", "NaN"])
        if pick < 0.5:
            return f"{_decimal(rng)}{rng.choice('eE')}{rng.choice(['', '+', '-'])}{_digits(rng, 1, 3)}"
        return _decimal(rng)
    if d is D.duration:
        return _duration(rng, True, True)
    if d is D.yearMonthDuration:
        return _duration(rng, True, False)
    if d is D.dateTimeDuration:
        return _duration(rng, False, True)
    if d is D.dateTime:
        return f"{_date(rng)}T{_time(rng)}{_tz(rng)}"
    if d is D.dateTimeStamp:
        return f"{_date(rng)}T{_time(rng)}{_tz(rng, required=True)}"
    if d is D.date:
        return _date(rng) + _tz(rng)
    if d is D.time:
        return _time(rng) + _tz(rng)
    if d is D.gYear:
        return _year(rng)[0]
    if d is D.gYearMonth:
        return f"{_year(rng)[0]}-{rng.randint(1, 12):02d}{_tz(rng)}"
    if d is D.gMonth:
        return f"--{rng.randint(1, 12):02d}{_tz(rng)}"
    if d is D.gMonthDay:
        m = rng.randint(1, 12)
        days = [31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31][m - 1]
        return f"--{m:02d}-{rng.randint(1, days):02d}{_tz(rng)}"
    if d is D.gDay:
        return f"---{rng.randint(1, 31):02d}{_tz(rng)}"
    if d is D.hexBinary:
        return "".join(rng.choice("0123456789abcdefABCDEF") for _ in range(2 * rng.randint(1, 8)))
    if d is D.base64Binary:
        return _base64(rng, lf=False)
    if d is D.base64BinaryLF:
        return _base64(rng, lf=True)
    raise KeyError(d)


def random_string(rng: random.Random) -> str:
    """Member of some datatype, possibly mutated, or plain noise."""
    pick = rng.random()
    if pick < 0.6:
        s = generate(rng.choice(list(D)), rng)
        if rng.random() < 0.3 and s:
            i = rng.randrange(len(s))
            s = s[:i] + rng.choice(string.printable + "éΩ") + s[i + 1 :]
        return s
    pool = string.printable + "éΩ中"
    return "".join(rng.choice(pool) for _ in range(rng.randint(0, 12)))


def closure(edges) -> dict:
    """Reflexive-transitive closure of ``edges`` by Floyd-Warshall."""
    items = list(D)
    up = {a: {b: a is b for b in items} for a in items}
    for lo, hi in edges:
        up[lo][hi] = True
    for k in items:
        for i in items:
            if up[i][k]:
                for j in items:
                    if up[k][j]:
                        up[i][j] = True
    return {a: frozenset(b for b in items if up[a][b]) for a in items}
