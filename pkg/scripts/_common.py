"""Helpers shared by the scripts: dataclass <-> argparse and plain-text tables."""

import argparse
import dataclasses


def parse_into(cls, description, argv=None):
    """Build an argparse parser from the fields of dataclass ``cls`` and return an instance."""
    ap = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            ap.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif isinstance(default, (list, tuple)):
            kind = type(default[0]) if default else str
            ap.add_argument(flag, nargs="+", type=kind, default=list(default))
        else:
            ap.add_argument(flag, type=type(default), default=default)
    return cls(**vars(ap.parse_args(argv)))


def print_table(rows, floatfmt="%.4e"):
    if not rows:
        print("(no rows)")
        return
    cols = list(rows[0])
    fmt = lambda v: floatfmt % v if isinstance(v, float) else str(v)
    cells = [[fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)))
