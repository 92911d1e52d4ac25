"""Plain-text matrix file format.

    # comment, to end of line
    matrix <name> <n>
    <n rows of n whitespace-separated entries>

Names match ``[A-Za-z_][A-Za-z0-9_]*`` and must be unique within a file.  An
entry is ``<float>``, ``<float><sign><float>j`` or ``<float>j`` where floats
are decimal with an optional exponent.  Canonical serialization always
writes ``<re><sign><im>j`` with 17 significant digits, which round-trips
IEEE doubles exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import MatrixFileError
from .numeric import as_square_matrix

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_FLOAT = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_ENTRY_RE = re.compile(
    rf"^(?:(?P<re2>{_FLOAT})(?P<im2>[+-](?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)j"
    rf"|(?P<im1>{_FLOAT})j"
    rf"|(?P<re1>{_FLOAT}))$"
)


@dataclass
class MatrixFile:
    """Named matrices parsed from one file, in file order."""

    blocks: dict = field(default_factory=dict)

    def names(self):
        return list(self.blocks)

    def __getitem__(self, name):
        if name not in self.blocks:
            raise MatrixFileError(f"no matrix named {name!r} in file; "
                                  f"available: {', '.join(self.blocks) or 'none'}")
        return self.blocks[name]

    def __contains__(self, name):
        return name in self.blocks

    def __len__(self):
        return len(self.blocks)


def parse_entry(token: str) -> complex:
    """Parse one entry token; raises ValueError on malformed input."""
    m = _ENTRY_RE.match(token)
    if m is None:
        raise ValueError(f"malformed entry {token!r}")
    if m.group("re2") is not None:
        return complex(float(m.group("re2")), float(m.group("im2")))
    if m.group("im1") is not None:
        return complex(0.0, float(m.group("im1")))
    return complex(float(m.group("re1")), 0.0)


def format_entry(z: complex) -> str:
    """Canonical 17-significant-digit form <re><sign><im>j."""
    z = complex(z)
    return f"{z.real:.16e}{z.imag:+.16e}j"


def _content_lines(text):
    """(line_number, content) with comments stripped and blanks dropped."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        cut = raw.find("#")
        line = raw if cut < 0 else raw[:cut]
        if line.strip():
            yield lineno, line


def parse_matrix_file(text: str) -> MatrixFile:
    """Parse the format above; errors carry the offending line and column."""
    blocks = {}
    lines = list(_content_lines(text))
    i = 0
    while i < len(lines):
        lineno, line = lines[i]
        tokens = line.split()
        if tokens[0] != "matrix":
            raise MatrixFileError(
                f"expected a 'matrix <name> <n>' header, got {tokens[0]!r}", line=lineno
            )
        if len(tokens) != 3:
            raise MatrixFileError(
                f"header needs exactly 'matrix <name> <n>', got {len(tokens)} tokens",
                line=lineno,
            )
        name, n_txt = tokens[1], tokens[2]
        if not _NAME_RE.match(name):
            raise MatrixFileError(f"bad matrix name {name!r}", line=lineno)
        if name in blocks:
            raise MatrixFileError(f"duplicate matrix name {name!r}", line=lineno)
        try:
            n = int(n_txt)
        except ValueError:
            raise MatrixFileError(f"bad dimension {n_txt!r}", line=lineno)
        if n < 1:
            raise MatrixFileError(f"dimension must be positive, got {n}", line=lineno)
        i += 1
        rows = []
        for r in range(n):
            if i >= len(lines):
                raise MatrixFileError(
                    f"matrix {name!r} ends after {r} of {n} rows", line=lineno
                )
            row_lineno, row_line = lines[i]
            if row_line.split()[0] == "matrix":
                raise MatrixFileError(
                    f"matrix {name!r} has only {r} of {n} rows", line=row_lineno
                )
            entries = []
            for m in re.finditer(r"\S+", row_line):
                try:
                    entries.append(parse_entry(m.group()))
                except ValueError:
                    raise MatrixFileError(
                        f"malformed entry {m.group()!r}",
                        line=row_lineno,
                        column=m.start() + 1,
                    )
            if len(entries) != n:
                raise MatrixFileError(
                    f"row has {len(entries)} entries, expected {n}", line=row_lineno
                )
            rows.append(entries)
            i += 1
        blocks[name] = np.array(rows, dtype=np.complex128)
    return MatrixFile(blocks=blocks)


def serialize_matrix_file(blocks) -> str:
    """Canonical text for a name -> matrix mapping (or a MatrixFile)."""
    if isinstance(blocks, MatrixFile):
        blocks = blocks.blocks
    out = []
    for name, m in blocks.items():
        if not _NAME_RE.match(str(name)):
            raise MatrixFileError(f"bad matrix name {name!r}")
        a = as_square_matrix(m)
        out.append(f"matrix {name} {a.shape[0]}")
        for row in a:
            out.append(" ".join(format_entry(z) for z in row))
    return "\n".join(out) + "\n"


def load_matrix_file(path) -> MatrixFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix_file(fh.read())


def save_matrix_file(path, blocks) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_matrix_file(blocks))
