"""Line-oriented text format for measures.

::

    # comment
    real                      # carrier: real | pos | circle
    atom 0 1/3                # atom <position> <mass>
    piece semicircle 0 2 2/3  # piece <kind> <params...> <weight>
    piece tabulated dens.csv 0.5

Statements may also be separated by ``;`` on one line.  Numbers accept
decimals, ``p/q`` fractions and, for angles, a ``pi`` factor (``pi``,
``0.5pi``, ``pi/2``).  Tabulated pieces name a two-column CSV file resolved
relative to ``base_dir``.
"""

import csv
import math
import os
from fractions import Fraction

from .errors import MeasureError, SpecSyntaxError
from .measures import CircleMeasure, PosMeasure, RealMeasure, validate
from .pieces import CIRCLE_KINDS, LINE_KINDS

__all__ = ["parse_measure_spec", "load_measure", "serialize_measure", "save_measure"]

_CARRIERS = {"real": RealMeasure, "pos": PosMeasure, "circle": CircleMeasure}
_ARITY = {"semicircle": 2, "arcsine": 2, "uniform": 2, "marchenko-pastur": 1, "arc": 2}


def _number(token, line, col):
    text = token.strip().lower()
    try:
        if "pi" in text:
            head, _, tail = text.partition("pi")
            factor = float(Fraction(head)) if head not in ("", "+") else 1.0
            if head == "-":
                factor = -1.0
            if tail:
                if not tail.startswith("/"):
                    raise ValueError(tail)
                factor /= float(Fraction(tail[1:]))
            return factor * math.pi
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise SpecSyntaxError(f"cannot parse number {token!r}", line, col) from None


def _statements(text):
    """Yield ``(line_no, [(token, column), ...])`` per statement."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        offset = 0
        for chunk in body.split(";"):
            tokens = []
            pos = 0
            for tok in chunk.split():
                idx = chunk.index(tok, pos)
                tokens.append((tok, offset + idx + 1))
                pos = idx + len(tok)
            if tokens:
                yield lineno, tokens
            offset += len(chunk) + 1


def _read_table(path, line, col):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise SpecSyntaxError(f"cannot read tabulated file {path!r}: {exc.strerror}", line, col) from None
    xs, ys = [], []
    for r in rows:
        try:
            xs.append(float(r[0]))
            ys.append(float(r[1]))
        except (ValueError, IndexError):
            # tolerate a single header row
            if xs:
                raise SpecSyntaxError(f"bad row {r!r} in {path!r}", line, col) from None
    return xs, ys


def parse_measure_spec(text, base_dir=None, check=True):
    """Parse a measure from spec text.

    Raises `SpecSyntaxError` (with line/column) on malformed input and
    `MeasureError` when the described measure violates an invariant.
    """
    carrier = None
    atoms, pieces = [], []
    for lineno, tokens in _statements(text):
        head, col = tokens[0]
        if carrier is None:
            if head not in _CARRIERS or len(tokens) != 1:
                raise SpecSyntaxError(f"expected carrier (real, pos or circle), got {head!r}", lineno, col)
            carrier = head
            continue
        if head == "atom":
            if len(tokens) != 3:
                raise SpecSyntaxError("atom takes <position> <mass>", lineno, col)
            (ptok, pcol), (mtok, mcol) = tokens[1], tokens[2]
            atoms.append((_number(ptok, lineno, pcol), _number(mtok, lineno, mcol)))
        elif head == "piece":
            if len(tokens) < 3:
                raise SpecSyntaxError("piece takes <kind> <params...> <weight>", lineno, col)
            kind, kcol = tokens[1]
            kinds = CIRCLE_KINDS if carrier == "circle" else LINE_KINDS
            if kind not in kinds:
                raise SpecSyntaxError(f"unknown piece kind {kind!r} for carrier {carrier}", lineno, kcol)
            args = tokens[2:]
            if kind == "tabulated":
                if len(args) != 2:
                    raise SpecSyntaxError("tabulated takes <csv path> <weight>", lineno, kcol)
                path = args[0][0]
                full = os.path.join(base_dir, path) if base_dir and not os.path.isabs(path) else path
                xs, ys = _read_table(full, lineno, args[0][1])
                piece = kinds[kind](xs, ys, source=path)
            else:
                if len(args) != _ARITY[kind] + 1:
                    raise SpecSyntaxError(f"{kind} takes {_ARITY[kind]} parameters and a weight", lineno, kcol)
                params = [_number(tok, lineno, c) for tok, c in args[:-1]]
                piece = kinds[kind](*params)
            pieces.append((piece, _number(args[-1][0], lineno, args[-1][1])))
        else:
            raise SpecSyntaxError(f"unknown statement {head!r}", lineno, col)
    if carrier is None:
        raise SpecSyntaxError("empty spec: missing carrier line", 1, 1)
    measure = _CARRIERS[carrier](atoms=atoms, pieces=pieces, check=False)
    if check:
        problems = validate(measure)
        if problems:
            raise MeasureError(problems)
    return measure


def load_measure(path):
    with open(path) as fh:
        return parse_measure_spec(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def serialize_measure(measure, table_dir=None, stem="piece"):
    """Render a measure in the spec grammar.

    Tabulated pieces are written as ``<stem>_<k>.csv`` inside ``table_dir``
    (required when such pieces exist); the spec refers to them by file name.
    """
    lines = [measure.carrier]
    for p, m in measure.atoms:
        lines.append(f"atom {p!r} {m!r}")
    for k, (piece, w) in enumerate(measure.pieces):
        if piece.kind == "tabulated":
            if table_dir is None:
                raise ValueError("table_dir is required to serialize tabulated pieces")
            name = f"{stem}_{k}.csv"
            with open(os.path.join(table_dir, name), "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                for x, y in zip(piece.abscissae, piece.values):
                    writer.writerow([repr(x), repr(y)])
            lines.append(f"piece tabulated {name} {w!r}")
        else:
            params = " ".join(repr(float(v)) for v in piece.params())
            lines.append(f"piece {piece.kind} {params} {w!r}")
    return "\n".join(lines) + "\n"


def save_measure(measure, path):
    directory = os.path.dirname(os.path.abspath(path))
    stem = os.path.splitext(os.path.basename(path))[0]
    text = serialize_measure(measure, table_dir=directory, stem=stem)
    with open(path, "w") as fh:
        fh.write(text)
