#!/usr/bin/env python3
"""Assemble the 1 MiB English prose fixture used by the compression tests.

Sources, in order, all shipped with a stock Python / Debian install:
the Python language reference topics (pydoc_data), the license texts under
/usr/share/common-licenses, and docstrings of standard-library modules.
Output is ASCII-normalized, deterministic, and exactly 1,048,576 bytes.
"""

import argparse
import importlib
import inspect
import os
import sys

TARGET = 1 << 20


def topics():
    from pydoc_data.topics import topics as t
    for key in sorted(t):
        yield t[key]


def licenses(root="/usr/share/common-licenses"):
    if not os.path.isdir(root):
        return
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if os.path.islink(path) or not os.path.isfile(path):
            continue
        with open(path, encoding="utf-8", errors="replace") as f:
            yield f.read()


def docstrings():
    seen = set()
    for mod in sorted(n for n in sys.stdlib_module_names if not n.startswith("_")):
        if mod in ("antigravity", "this", "idlelib", "turtledemo", "tkinter", "turtle"):
            continue
        try:
            module = importlib.import_module(mod)
        except Exception:
            continue
        for _, obj in sorted(vars(module).items(), key=lambda kv: kv[0]):
            doc = inspect.getdoc(obj) if callable(obj) or inspect.ismodule(obj) else None
            if doc and len(doc) > 200 and doc not in seen:
                seen.add(doc)
                yield doc


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("output")
    args = ap.parse_args()
    out = []
    size = 0
    for source in (topics(), licenses(), docstrings()):
        for text in source:
            text = text.encode("ascii", "replace").decode("ascii") + "\n\n"
            out.append(text)
            size += len(text)
            if size >= TARGET:
                break
        if size >= TARGET:
            break
    data = "".join(out).encode("ascii")[:TARGET]
    if len(data) < TARGET:
        raise SystemExit(f"only {len(data)} bytes of text available")
    with open(args.output, "wb") as f:
        f.write(data)


if __name__ == "__main__":
    main()
