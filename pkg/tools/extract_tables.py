"""Regenerate data/tables/*.json from the LaTeX source of the candidate tables.

Usage: python tools/extract_tables.py SOURCE.md
"""
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "nahmsums" / "data" / "tables"


def num(tok: str) -> str:
    tok = tok.strip().replace(" ", "")
    m = re.fullmatch(r"(-?)\\frac\{(\d+)\}\{(\d+)\}", tok)
    if m:
        v = Fraction(int(m.group(2)), int(m.group(3)))
        v = -v if m.group(1) else v
    else:
        v = Fraction(tok)
    return str(v)


def parse_block(text: str, d_default):
    """Rows in order: (A, b, c, d) from one tblr environment."""
    rows = []
    A = d = None
    pos = 0
    tok = re.compile(r"\\begin\{pmatrix\}(.*?)\\end\{pmatrix\}|"
                     r"\\begin\{bsmallmatrix\}(.*?)\\end\{bsmallmatrix\}\s*&\s*"
                     r"(-?\s*\\frac\{\d+\}\{\d+\}|-?\d+)(.*?)(?:\\\\)", re.S)
    for m in tok.finditer(text):
        if m.group(1) is not None:
            A = [[num(x) for x in r.split("&")] for r in m.group(1).split("\\\\") if r.strip()]
            tail = text[m.end():m.end() + 400]
            continue
        b = [num(x) for x in m.group(2).split("\\\\") if x.strip()]
        c = num(m.group(3).replace("\\frac{-1}", "-\\frac{1}"))
        extra = m.group(4)
        dm = re.search(r"\{\((\d+(?:,\d+)*)\)\}", extra)
        if dm:
            d = [int(x) for x in dm.group(1).split(",")]
        rows.append({"A": A, "b": b, "c": c, "d": d or d_default})
    return rows


def main(path):
    src = Path(path).read_text()
    t1 = src[src.index("\\begin{table}[t]"):src.index("\\label{table:rank2}")]
    # the sign in "\frac{-1}{40}" is inside the fraction in one row
    t1 = t1.replace("\\frac{-1}{40}", "-\\frac{1}{40}")
    left, right = t1.split("\\hfill", 1)
    rows1 = parse_block(left, None)
    # the d column of each block is on its first row; carry it forward
    rows1r = parse_block(right, None)
    for rows in (rows1, rows1r):
        cur = None
        for r in rows:
            cur = r["d"] or cur
            r["d"] = cur
    i2 = src.index("\\label{table:1,1,2}")
    s2 = src.rindex("\\afterpage", 0, i2)
    rows2 = parse_block(src[s2:i2], [1, 1, 2])
    i3 = src.index("\\label{table:2,2,1}")
    rows3 = parse_block(src[i2:i3], [2, 2, 1])
    OUT.mkdir(parents=True, exist_ok=True)
    for name, rows in (("rank2_left", rows1), ("rank2_right", rows1r),
                       ("rank3_112", rows2), ("rank3_221", rows3)):
        body = ",\n".join(" " + json.dumps(r) for r in rows)
        (OUT / f"{name}.json").write_text("[\n" + body + "\n]\n")
        print(name, len(rows))


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
