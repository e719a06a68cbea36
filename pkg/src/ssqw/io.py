"""
CSV readers and writers.

Input files are recognised by their header line, never by extension:

* ``target_site,source_site,row,col,re,im``: nonzero entries of a walk
  operator (matrix dump), optional ``# window=lo,hi`` comment;
* ``site,p,r,theta,kappa,cut_after``: canonical parameters, optional
  ``# theta_left=<v>`` comment;
* ``site,p,a,q_re,q_im,b_re,b_im``: Suzuki parameters.

Floats are written with ``repr``, the shortest string that reads back to
the same double, so output is byte-stable.
"""

from __future__ import annotations

import csv
import io
import re
import sys
from pathlib import Path
from typing import Iterable

import numpy as np

from .builders import GaugeTransform, SSQWParams, SuzukiParams
from .errors import InvalidParams, InvariantViolation, NotUnitary, ParseError
from .operator import StateVector, WalkOperator

__all__ = [
    "MATRIX_HEADER",
    "PARAMS_HEADER",
    "SUZUKI_HEADER",
    "STATE_HEADER",
    "detect_kind",
    "parse_walk_text",
    "parse_walk_file",
    "format_matrix",
    "format_params",
    "format_suzuki",
    "format_canonical",
    "format_gauge",
    "format_state",
    "format_distribution",
    "format_dense",
    "parse_state_text",
    "parse_state_file",
    "fmt",
    "write_text",
]

MATRIX_HEADER = ["target_site", "source_site", "row", "col", "re", "im"]
PARAMS_HEADER = ["site", "p", "r", "theta", "kappa", "cut_after"]
SUZUKI_HEADER = ["site", "p", "a", "q_re", "q_im", "b_re", "b_im"]
STATE_HEADER = ["site", "c1_re", "c1_im", "c2_re", "c2_im"]
_KINDS = {
    tuple(MATRIX_HEADER): "matrix",
    tuple(PARAMS_HEADER): "params",
    tuple(SUZUKI_HEADER): "suzuki",
    tuple(STATE_HEADER): "state",
}
_COMMENT_KV = re.compile(r"^#\s*(\w+)\s*=\s*(.+?)\s*$")


def fmt(x: float) -> str:
    """Shortest round-trip decimal; negative zero is written as ``0.0``."""
    x = float(x)
    return repr(0.0 if x == 0 else x)


def _rows(text: str):
    """Yield ``(line_number, fields)`` for data lines and collect comment key/values."""
    meta: dict[str, tuple[int, str]] = {}
    rows = []
    header = None
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _COMMENT_KV.match(line)
            if m:
                meta[m.group(1)] = (num, m.group(2))
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if header is None:
            header = (num, fields)
        else:
            rows.append((num, fields))
    return header, rows, meta


def detect_kind(text: str) -> str:
    header, _, _ = _rows(text)
    if header is None:
        raise ParseError("empty input: no header line")
    kind = _KINDS.get(tuple(header[1]))
    if kind is None:
        raise ParseError(f"unrecognised header {','.join(header[1])!r}", header[0])
    return kind


def _num(value: str, line: int, name: str, kind=float):
    try:
        v = kind(value)
    except ValueError:
        raise ParseError(f"{name}: cannot read {value!r} as {kind.__name__}", line) from None
    if kind is float and not np.isfinite(v):
        raise ParseError(f"{name}: non-finite value {value!r}", line)
    return v


def _checked_rows(rows, width: int):
    for num, fields in rows:
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, found {len(fields)}", num)
        yield num, fields


def _consecutive_sites(sites: list[tuple[int, int]]):
    for (_, a), (num, b) in zip(sites, sites[1:]):
        if b != a + 1:
            raise ParseError(f"sites must be consecutive; {b} follows {a}", num)


def _parse_matrix(rows, meta) -> WalkOperator:
    entries = []
    for num, f in _checked_rows(rows, 6):
        t = _num(f[0], num, "target_site", int)
        s = _num(f[1], num, "source_site", int)
        i = _num(f[2], num, "row", int)
        j = _num(f[3], num, "col", int)
        if i not in (0, 1) or j not in (0, 1):
            raise ParseError("row and col must be 0 or 1", num)
        z = complex(_num(f[4], num, "re"), _num(f[5], num, "im"))
        entries.append((num, t, s, i, j, z))
    if "window" in meta:
        num, val = meta["window"]
        try:
            lo, hi = (int(v) for v in val.split(","))
        except ValueError:
            raise ParseError(f"window comment must read 'lo,hi', got {val!r}", num) from None
    elif entries:
        sites = [e[1] for e in entries] + [e[2] for e in entries]
        lo, hi = min(sites), max(sites)
    else:
        raise ParseError("matrix dump without entries needs a '# window=lo,hi' comment")
    if hi < lo:
        raise ParseError(f"empty window [{lo}, {hi}]")
    n = hi - lo + 1
    diag = np.zeros((n, 2, 2), dtype=np.complex128)
    up = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    down = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    for num, t, s, i, j, z in entries:
        if not (lo <= t <= hi and lo <= s <= hi):
            raise ParseError(f"site outside window [{lo}, {hi}]", num)
        if abs(t - s) > 1:
            if z != 0:
                raise InvariantViolation(
                    f"line {num}: band violated, entry couples sites {s} -> {t}"
                )
            continue
        if t == s:
            diag[t - lo, i, j] = z
        elif t == s + 1:
            up[s - lo, i, j] = z
        else:
            down[t - lo, i, j] = z
    try:
        return WalkOperator(lo, diag, up, down)
    except NotUnitary as e:
        raise InvariantViolation(f"matrix dump is not unitary: {e}") from None


def _parse_params(rows, meta) -> SSQWParams:
    data = []
    for num, f in _checked_rows(rows, 6):
        site = _num(f[0], num, "site", int)
        p, r, th, ka = (_num(v, num, k) for v, k in zip(f[1:5], PARAMS_HEADER[1:5]))
        cut = _num(f[5], num, "cut_after", int)
        if cut not in (0, 1):
            raise ParseError("cut_after must be 0 or 1", num)
        if cut and p != 1.0:
            raise InvariantViolation(f"line {num}: cut_after=1 requires p = 1 (q = 0), got p = {p!r}")
        if not cut and p == 1.0:
            raise InvariantViolation(f"line {num}: p = 1 closes the bond; mark it with cut_after=1")
        if p == 0 and th != 0:
            raise InvariantViolation(f"line {num}: theta must be 0 where p = 0 (phase convention)")
        if r == 0 and ka != 0:
            raise InvariantViolation(f"line {num}: kappa must be 0 where r = 0 (phase convention)")
        data.append((num, site, p, r, th, ka, cut))
    if not data:
        raise ParseError("parameter file has no rows")
    _consecutive_sites([(d[0], d[1]) for d in data])
    if not data[-1][6]:
        raise InvariantViolation(f"line {data[-1][0]}: the last bond leaves the window; set cut_after=1")
    tl = 0.0
    if "theta_left" in meta:
        num, val = meta["theta_left"]
        tl = _num(val, num, "theta_left")
    arr = np.array([d[2:6] for d in data], dtype=float)
    try:
        return SSQWParams(data[0][1], arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], tl)
    except InvalidParams as e:
        raise InvariantViolation(str(e)) from None


def _parse_suzuki(rows) -> SuzukiParams:
    data = []
    for num, f in _checked_rows(rows, 7):
        site = _num(f[0], num, "site", int)
        vals = [_num(v, num, k) for v, k in zip(f[1:], SUZUKI_HEADER[1:])]
        data.append((num, site, *vals))
    if not data:
        raise ParseError("Suzuki file has no rows")
    _consecutive_sites([(d[0], d[1]) for d in data])
    arr = np.array([d[2:] for d in data], dtype=float)
    try:
        return SuzukiParams(data[0][1], arr[:, 0], arr[:, 1], arr[:, 2] + 1j * arr[:, 3],
                            arr[:, 4] + 1j * arr[:, 5])
    except InvalidParams as e:
        raise InvariantViolation(str(e)) from None


def parse_walk_text(text: str):
    """Parse any of the three walk formats; returns the matching object."""
    kind = detect_kind(text)
    _, rows, meta = _rows(text)
    if kind == "matrix":
        return _parse_matrix(rows, meta)
    if kind == "params":
        return _parse_params(rows, meta)
    if kind == "suzuki":
        return _parse_suzuki(rows)
    raise ParseError("expected a walk file, found a state file")


def _read(path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def parse_walk_file(path):
    return parse_walk_text(_read(path))


def parse_state_text(text: str) -> StateVector:
    if detect_kind(text) != "state":
        raise ParseError("expected a state file with header " + ",".join(STATE_HEADER))
    _, rows, _ = _rows(text)
    data = []
    for num, f in _checked_rows(rows, 5):
        site = _num(f[0], num, "site", int)
        v = [_num(x, num, k) for x, k in zip(f[1:], STATE_HEADER[1:])]
        data.append((num, site, complex(v[0], v[1]), complex(v[2], v[3])))
    if not data:
        raise ParseError("state file has no rows")
    _consecutive_sites([(d[0], d[1]) for d in data])
    return StateVector(data[0][1], np.array([[d[2], d[3]] for d in data]))


def parse_state_file(path) -> StateVector:
    return parse_state_text(_read(path))


# --------------------------------------------------------------------------- #
# writers
# --------------------------------------------------------------------------- #

def _csv(header: list[str], rows: Iterable[Iterable[str]], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_matrix(U: WalkOperator) -> str:
    """Nonzero entries, ordered by source site, target site, row, col."""
    rows = []
    for s in range(U.lo, U.hi + 1):
        for t in (s - 1, s, s + 1):
            if not U.lo <= t <= U.hi:
                continue
            b = U.block(t, s)
            for i in (0, 1):
                for j in (0, 1):
                    z = b[i, j]
                    if z != 0:
                        rows.append([str(t), str(s), str(i), str(j), fmt(z.real), fmt(z.imag)])
    return _csv(MATRIX_HEADER, rows, [f"window={U.lo},{U.hi}"])


def format_dense(m: np.ndarray, lo: int) -> str:
    """Dense ``2n x 2n`` matrix in the matrix-dump layout (any band)."""
    m = np.asarray(m)
    rows = []
    n = m.shape[0] // 2
    for s in range(n):
        for t in range(n):
            for i in (0, 1):
                for j in (0, 1):
                    z = m[2 * t + i, 2 * s + j]
                    if z != 0:
                        rows.append([str(lo + t), str(lo + s), str(i), str(j), fmt(z.real), fmt(z.imag)])
    return _csv(MATRIX_HEADER, rows, [f"window={lo},{lo + n - 1}"])


def format_params(params: SSQWParams) -> str:
    rows = [
        [str(params.lo + k), fmt(params.p[k]), fmt(params.r[k]), fmt(params.theta[k]),
         fmt(params.kappa[k]), "1" if params.cut_after[k] else "0"]
        for k in range(params.n)
    ]
    return _csv(PARAMS_HEADER, rows, [f"theta_left={fmt(params.theta_left)}"])


def format_suzuki(sp: SuzukiParams) -> str:
    rows = [
        [str(sp.lo + k), fmt(sp.p[k]), fmt(sp.a[k]), fmt(sp.q[k].real), fmt(sp.q[k].imag),
         fmt(sp.b[k].real), fmt(sp.b[k].imag)]
        for k in range(sp.n)
    ]
    return _csv(SUZUKI_HEADER, rows)


def format_canonical(form) -> str:
    """One block of rows per segment, each introduced by its comment line."""
    buf = io.StringIO()
    buf.write("site,p,r,theta,kappa\n")
    for k, seg in enumerate(form.segments):
        pr = seg.params
        buf.write(
            f"# segment={k} case={seg.tag} anchor_site={seg.anchor.w} "
            f"anchor_rule={seg.anchor.rule} theta_left={fmt(pr.theta_left)}\n"
        )
        for i in range(pr.n):
            buf.write(",".join([str(pr.lo + i), fmt(pr.p[i]), fmt(pr.r[i]),
                                fmt(pr.theta[i]), fmt(pr.kappa[i])]) + "\n")
    return buf.getvalue()


def format_gauge(W: GaugeTransform, full: bool | None = None) -> str:
    """``site,g,h`` for diagonal gauges, otherwise all four entries per site."""
    if full is None:
        full = not W.is_diagonal
    if not full:
        g, h = W.phases()
        rows = [[str(W.lo + k), fmt(g[k]), fmt(h[k])] for k in range(W.n)]
        return _csv(["site", "g", "h"], rows)
    header = ["site"] + [f"w{i}{j}_{part}" for i in (1, 2) for j in (1, 2) for part in ("re", "im")]
    rows = []
    for k in range(W.n):
        m = W.mats[k]
        row = [str(W.lo + k)]
        for i in (0, 1):
            for j in (0, 1):
                row += [fmt(m[i, j].real), fmt(m[i, j].imag)]
        rows.append(row)
    return _csv(header, rows)


def format_state(psi: StateVector) -> str:
    rows = [
        [str(psi.lo + k), fmt(c[0].real), fmt(c[0].imag), fmt(c[1].real), fmt(c[1].imag)]
        for k, c in enumerate(psi.amps)
    ]
    return _csv(STATE_HEADER, rows)


def format_distribution(d) -> str:
    rows = [[str(d.lo + k), fmt(v)] for k, v in enumerate(d.prob)]
    return _csv(["site", "prob"], rows)


def write_text(path, text: str) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)
