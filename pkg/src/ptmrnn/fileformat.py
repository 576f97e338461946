"""Text formats for machines and reports.

Machine files are UTF-8 and line oriented. Each line is a directive followed
by whitespace-separated fields. Blank lines and ``#`` comments are ignored.
Unknown directives, a repeated single-use directive and a wrong field count
are all errors that name the line. The serializer writes directives in a
fixed order with sorted contents, so ``serialize(parse(text))`` is canonical
and stable.

Example (``m_geo.machine``)::

    format 1
    kind 2pda
    name m_geo
    sigma a
    gamma ⊥
    states q0 qf
    initial q0
    final qf
    rule q0 ⊥ a q0 ε ε ε ε 1/2
    rule q0 ⊥ ε qf ε ε ε ε 1/2

Rule fields by kind:

* ``qptm``: ``rule STATE READ EMIT TARGET WRITE MOVE WEIGHT``
* ``ptm``: ``delta1 STATE READ EMIT TARGET WRITE MOVE`` and the same for ``delta2``
* ``2pda``: ``rule STATE TOP EMIT TARGET POP1 PUSH1 POP2 PUSH2 WEIGHT``
* ``2pda-full``: ``rule STATE TOP1 TOP2 EMIT TARGET POP1 PUSH1 POP2 PUSH2 WEIGHT``

``rnn`` files hold the dimensions, layout and every matrix as rows of
fraction literals (see :func:`serialize`).
"""

from __future__ import annotations

from fractions import Fraction

from ptmrnn.machines import (
    BLANK,
    FullStackRule,
    Machine,
    Ptm,
    Qptm,
    RnnLm,
    StackRule,
    TapeAction,
    TapeRule,
    TwoPda,
    TwoPdaFull,
    Violation,
    validate,
)
from ptmrnn.numerics import RationalSyntaxError, rat_format, rat_parse

FORMAT_VERSION = "1"
KINDS = ("ptm", "qptm", "2pda", "2pda-full", "rnn")

_MACHINE_SINGLE = ("format", "kind", "name", "sigma", "gamma", "states", "initial", "final", "aux", "blank")
_RNN_SINGLE = ("format", "kind", "name", "sigma", "phases", "emission-phase", "inputs", "outputs", "labels", "h0", "b")
_LIST_FIELDS = {"sigma", "gamma", "states", "aux", "inputs", "outputs", "labels"}
_RULE_ARITY = {"ptm": 6, "qptm": 7, "2pda": 9, "2pda-full": 10}


class SpecError(ValueError):
    """A machine file could not be parsed or does not validate.

    Attributes:
        line: 1-based line number of the problem, if it has one.
        violations: Validation problems, when parsing succeeded but validation failed.
    """

    def __init__(self, message: str, line: int | None = None, violations: list[Violation] | None = None):
        self.line = line
        self.violations = violations or []
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


def _weight(text: str, line: int, field: str) -> Fraction:
    try:
        return rat_parse(text)
    except RationalSyntaxError as exc:
        raise SpecError(f"field {field}: {exc}", line) from None


def _lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            directive, *fields = content.split()
            yield number, directive, fields


def load_spec(text: str) -> Machine | RnnLm:
    """Parses a machine file without validating it.

    Raises:
        SpecError: On a syntax problem, with the offending line number.
    """
    lines = list(_lines(text))
    kinds = [(number, fields) for number, directive, fields in lines if directive == "kind"]
    if not kinds:
        raise SpecError("missing kind directive")
    number, fields = kinds[0]
    kind = fields[0] if len(fields) == 1 else None
    if kind not in KINDS:
        raise SpecError(f"unknown kind {' '.join(fields)!r}; expected one of {', '.join(KINDS)}", number)
    allowed_single = _RNN_SINGLE if kind == "rnn" else _MACHINE_SINGLE
    allowed_repeated = _repeated_directives(kind)
    singles: dict[str, tuple[int, list[str]]] = {}
    repeated: dict[str, list[tuple[int, list[str]]]] = {}
    for number, directive, fields in lines:
        if directive in allowed_single:
            if directive in singles:
                raise SpecError(f"directive {directive} appears twice", number)
            if directive not in _LIST_FIELDS and directive not in ("h0", "b") and len(fields) != 1:
                raise SpecError(f"directive {directive} takes exactly one field", number)
            singles[directive] = (number, fields)
        elif directive in allowed_repeated:
            repeated.setdefault(directive, []).append((number, fields))
        else:
            raise SpecError(f"unknown directive {directive!r}", number)
    if "format" not in singles:
        raise SpecError("missing format directive")
    if singles["format"][1] != [FORMAT_VERSION]:
        raise SpecError(f"unsupported format {' '.join(singles['format'][1])}", singles["format"][0])
    if kind == "rnn":
        return _load_rnn(singles, repeated)
    return _load_machine(kind, singles, repeated)


def _repeated_directives(kind: str) -> tuple[str, ...]:
    if kind == "rnn":
        return ("layout", "pair-column", "stack-code", "U", "V", "E")
    if kind == "ptm":
        return ("delta1", "delta2")
    return ("rule",)


def _need(singles, name: str) -> list[str]:
    if name not in singles:
        raise SpecError(f"missing {name} directive")
    return singles[name][1]


def _one(singles, name: str) -> str:
    return _need(singles, name)[0]


def _load_machine(kind: str, singles, repeated) -> Machine:
    if "blank" in singles and kind not in ("ptm", "qptm"):
        raise SpecError("directive blank only applies to tape machines", singles["blank"][0])
    common = dict(
        states=tuple(_need(singles, "states")),
        sigma=tuple(_need(singles, "sigma")),
        gamma=tuple(_need(singles, "gamma")),
        initial=_one(singles, "initial"),
        final=_one(singles, "final"),
        aux=frozenset(singles.get("aux", (0, []))[1]),
        name=_one(singles, "name") if "name" in singles else kind,
    )
    arity = _RULE_ARITY[kind]
    if kind == "ptm":
        deltas = {}
        for which in ("delta1", "delta2"):
            table = {}
            for number, fields in repeated.get(which, []):
                _arity(fields, arity, number, which)
                q, g, emit, target, write, move = fields
                if (q, g) in table:
                    raise SpecError(f"{which} defined twice at ({q}, {g})", number)
                table[q, g] = TapeAction(target, write, emit, move)
            deltas[which] = table
        blank = _one(singles, "blank") if "blank" in singles else BLANK
        return Ptm(delta1=deltas["delta1"], delta2=deltas["delta2"], blank=blank, **common)
    rules = []
    for number, fields in repeated.get("rule", []):
        _arity(fields, arity, number, "rule")
        weight = _weight(fields[-1], number, "weight")
        if kind == "qptm":
            rules.append(TapeRule(*fields[:-1], weight))
        elif kind == "2pda":
            rules.append(StackRule(*fields[:-1], weight))
        else:
            rules.append(FullStackRule(*fields[:-1], weight))
    if kind == "qptm":
        blank = _one(singles, "blank") if "blank" in singles else BLANK
        return Qptm(rules=tuple(rules), blank=blank, **common)
    if kind == "2pda":
        return TwoPda(rules=tuple(rules), **common)
    return TwoPdaFull(rules=tuple(rules), **common)


def _arity(fields: list[str], arity: int, number: int, directive: str) -> None:
    if len(fields) != arity:
        raise SpecError(f"{directive} needs {arity} fields, got {len(fields)}", number)


def _load_rnn(singles, repeated) -> RnnLm:
    labels = tuple(_need(singles, "labels"))
    D = len(labels)
    inputs = tuple(_need(singles, "inputs"))
    outputs = tuple(_need(singles, "outputs"))

    def vector(name: str, fields: list[str], number: int, length: int) -> tuple[Fraction, ...]:
        if len(fields) != length:
            raise SpecError(f"{name} needs {length} entries, got {len(fields)}", number)
        return tuple(_weight(f, number, name) for f in fields)

    def matrix(name: str, rows: int, cols: int) -> tuple[tuple[Fraction, ...], ...]:
        entries = repeated.get(name, [])
        if len(entries) != rows:
            raise SpecError(f"matrix {name} needs {rows} rows, got {len(entries)}")
        return tuple(vector(name, fields, number, cols) for number, fields in entries)

    layout = []
    for number, fields in repeated.get("layout", []):
        _arity(fields, 3, number, "layout")
        try:
            layout.append((fields[0], int(fields[1]), int(fields[2])))
        except ValueError:
            raise SpecError("layout bounds must be integers", number) from None
    pair_columns = []
    for number, fields in repeated.get("pair-column", []):
        _arity(fields, 2, number, "pair-column")
        pair_columns.append((fields[0], fields[1]))
    codes = []
    for number, fields in repeated.get("stack-code", []):
        _arity(fields, 2, number, "stack-code")
        codes.append((fields[0], fields[1]))
    try:
        phases = int(_one(singles, "phases"))
        emission_phase = int(_one(singles, "emission-phase"))
    except ValueError:
        raise SpecError("phases and emission-phase must be integers") from None
    if "h0" not in singles or "b" not in singles:
        raise SpecError("missing h0 or b directive")
    h0_line, h0_fields = singles["h0"]
    b_line, b_fields = singles["b"]
    return RnnLm(
        sigma=tuple(_need(singles, "sigma")),
        labels=labels,
        inputs=inputs,
        outputs=outputs,
        U=matrix("U", D, D),
        V=matrix("V", D, len(inputs)),
        b=vector("b", b_fields, b_line, D),
        h0=vector("h0", h0_fields, h0_line, D),
        E=matrix("E", len(outputs), D),
        layout=tuple(layout),
        phases=phases,
        emission_phase=emission_phase,
        pair_columns=tuple(pair_columns),
        stack_codes=tuple(codes),
        name=_one(singles, "name") if "name" in singles else "rnn",
    )


def parse_spec(text: str | bytes) -> Machine | RnnLm:
    """Parses and validates a machine or RNN file.

    Raises:
        SpecError: On a syntax error, or with ``violations`` set when the
            machine does not validate.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SpecError(f"file is not UTF-8: {exc}") from None
    machine = load_spec(text)
    problems = validate(machine)
    if problems:
        raise SpecError("validation failed: " + "; ".join(map(str, problems)), violations=problems)
    return machine


# ---------------------------------------------------------------- serialization


def _header(kind: str, m) -> list[str]:
    lines = [f"format {FORMAT_VERSION}", f"kind {kind}", f"name {m.name}"]
    lines.append(" ".join(["sigma", *m.sigma]))
    return lines


def serialize(obj) -> str:
    """Canonical text for a machine, RNN, semimeasure table or report."""
    from ptmrnn import reports

    if isinstance(obj, RnnLm):
        return _serialize_rnn(obj)
    if isinstance(obj, (Ptm, Qptm, TwoPda, TwoPdaFull)):
        return _serialize_machine(obj)
    return reports.render(obj)


def _serialize_machine(m: Machine) -> str:
    kind = {Ptm: "ptm", Qptm: "qptm", TwoPda: "2pda", TwoPdaFull: "2pda-full"}[type(m)]
    lines = _header(kind, m)
    lines.append(" ".join(["gamma", *m.gamma]))
    lines.append(" ".join(["states", *m.states]))
    lines.append(f"initial {m.initial}")
    lines.append(f"final {m.final}")
    if m.aux:
        lines.append(" ".join(["aux", *sorted(m.aux)]))
    if isinstance(m, (Ptm, Qptm)) and m.blank != BLANK:
        lines.append(f"blank {m.blank}")
    if isinstance(m, Ptm):
        for which, delta in (("delta1", m.delta1), ("delta2", m.delta2)):
            for (q, g), a in sorted(delta.items()):
                lines.append(f"{which} {q} {g} {a.emit} {a.target} {a.write} {a.move}")
    else:
        for r in m.rules:
            fields = [str(getattr(r, f)) for f in r.__dataclass_fields__ if f != "weight"]
            lines.append(" ".join(["rule", *fields, rat_format(r.weight)]))
    return "\n".join(lines) + "\n"


def _row(values) -> str:
    return " ".join(rat_format(v) for v in values)


def _serialize_rnn(r: RnnLm) -> str:
    lines = _header("rnn", r)
    lines.append(f"phases {r.phases}")
    lines.append(f"emission-phase {r.emission_phase}")
    lines.append(" ".join(["inputs", *r.inputs]))
    lines.append(" ".join(["outputs", *r.outputs]))
    lines.append(" ".join(["labels", *r.labels]))
    for name, start, stop in r.layout:
        lines.append(f"layout {name} {start} {stop}")
    for top, state in r.pair_columns:
        lines.append(f"pair-column {top} {state}")
    for sym, code in r.stack_codes:
        lines.append(f"stack-code {sym} {code}")
    lines.append("h0 " + _row(r.h0))
    lines.append("b " + _row(r.b))
    for name, matrix in (("U", r.U), ("V", r.V), ("E", r.E)):
        for row in matrix:
            lines.append(f"{name} " + _row(row))
    return "\n".join(lines) + "\n"
