"""Plain-text formats for entourages, systems and covers.

Entourage::

    entourage N=<n> name=<tag>
    0110...        (one row per point)

System::

    system N=<n> invertible=<0|1>
    <f(0)> <f(1)> ...
    <p/q> <p/q> ...   (optional, one metric row per point)

Cover::

    cover N=<n> members=<m>
    0110...        (one membership row per member)
"""

import math
from fractions import Fraction

import numpy as np

from .covers import Cover, bits_to_mask, mask_to_bits
from .errors import ConfigError
from .systems import FiniteSystem, Metric
from .uniform import Carrier, Entourage


def _header(line, kind):
    parts = line.split()
    if not parts or parts[0] != kind:
        raise ConfigError(f"expected a '{kind}' header, got {line!r}")
    fields = {}
    for p in parts[1:]:
        key, sep, val = p.partition("=")
        if not sep:
            raise ConfigError(f"bad header field {p!r}")
        fields[key] = val
    if "N" not in fields:
        raise ConfigError("header is missing N")
    return fields


def _lines(text):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty input")
    return lines


def _bitrow(row, n):
    if len(row) != n or set(row) - {"0", "1"}:
        raise ConfigError(f"row must be {n} characters of 0/1: {row!r}")
    return np.frombuffer(row.encode(), dtype=np.uint8) == ord("1")


def _rowtext(mask):
    return "".join("1" if b else "0" for b in mask)


def dump_entourage(E):
    rows = [_rowtext(r) for r in E.relation]
    return "\n".join([f"entourage N={E.size} name={E.tag}"] + rows) + "\n"


def load_entourage(text, symmetrize=False):
    lines = _lines(text)
    fields = _header(lines[0], "entourage")
    n = int(fields["N"])
    if len(lines) - 1 != n:
        raise ConfigError(f"expected {n} rows, got {len(lines) - 1}")
    rel = np.array([_bitrow(r, n) for r in lines[1:]], dtype=bool).reshape(n, n)
    return Entourage(Carrier(n), rel, name=fields.get("name"), symmetrize=symmetrize)


def dump_system(sys, with_metric=True):
    out = [f"system N={sys.size} invertible={int(bool(sys.invertible))}",
           " ".join(str(int(v)) for v in sys.map)]
    if with_metric and sys.metric is not None:
        num, den = sys.metric.num, sys.metric.denom
        for row in num:
            out.append(" ".join(str(Fraction(int(v), den)) for v in row))
    return "\n".join(out) + "\n"


def load_system(text, name="loaded"):
    lines = _lines(text)
    fields = _header(lines[0], "system")
    n = int(fields["N"])
    if len(lines) < 2:
        raise ConfigError("system text is missing its map line")
    table = np.array([int(v) for v in lines[1].split()], dtype=np.int64)
    if table.size != n:
        raise ConfigError(f"map line has {table.size} entries, expected {n}")
    metric = None
    rows = lines[2:]
    if rows:
        if len(rows) != n:
            raise ConfigError(f"expected {n} metric rows, got {len(rows)}")
        fr = [[Fraction(v) for v in r.split()] for r in rows]
        if any(len(r) != n for r in fr):
            raise ConfigError("metric rows must have N entries")
        den = 1
        for r in fr:
            for v in r:
                den = den * v.denominator // math.gcd(den, v.denominator)
        num = np.array([[int(v * den) for v in r] for r in fr], dtype=np.int64)
        metric = Metric(num, den)
    invertible = fields.get("invertible")
    inv = None if invertible is None else invertible == "1"
    return FiniteSystem(Carrier(n), table, metric, name=name, invertible=inv)


def dump_cover(a):
    rows = [_rowtext(bits_to_mask(m, a.size)) for m in a.members]
    return "\n".join([f"cover N={a.size} members={len(a.members)}"] + rows) + "\n"


def load_cover(text, name=None):
    lines = _lines(text)
    fields = _header(lines[0], "cover")
    n = int(fields["N"])
    m = int(fields.get("members", len(lines) - 1))
    if len(lines) - 1 != m:
        raise ConfigError(f"expected {m} member rows, got {len(lines) - 1}")
    members = tuple(mask_to_bits(_bitrow(r, n)) for r in lines[1:])
    return Cover(Carrier(n), members, name=name)
