"""Download the named benchmark matrices into the data directory.

Fetches each entry of ``SUITESPARSE_MANIFEST`` as a Matrix Market
tarball, extracts the ``.mtx`` member, and writes it to
``<data-dir>/<name>.mtx`` where ``load_named_matrix`` looks first.
Pattern-format files carry no numeric values; their entries are
materialized as 1.0 because the reader accepts real entries only.

The test suite never runs this script: without the files the package
substitutes deterministic stand-ins.

Usage:
    python scripts/fetch_suitesparse.py [--data-dir data] [--only name ...]
"""

import argparse
import io
import sys
import tarfile
import urllib.request
from pathlib import Path

from smoothkrylov.matrices import SUITESPARSE_MANIFEST, default_data_dir


def _materialize_pattern(text):
    """Rewrite a pattern-format header/body with unit values."""
    lines = text.splitlines()
    out = []
    header_done = False
    counts_done = False
    for line in lines:
        if not header_done and line.startswith("%%MatrixMarket"):
            out.append(line.replace(" pattern ", " real "))
            header_done = True
            continue
        if line.startswith("%"):
            out.append(line)
            continue
        if not counts_done:
            out.append(line)
            counts_done = True
            continue
        parts = line.split()
        if len(parts) == 2:
            out.append(f"{parts[0]} {parts[1]} 1.0")
        else:
            out.append(line)
    return "\n".join(out) + "\n"


def fetch_one(name, entry, data_dir, timeout):
    target = data_dir / f"{name}.mtx"
    if target.exists():
        print(f"{name}: already present at {target}")
        return True
    print(f"{name}: downloading {entry['url']}")
    try:
        with urllib.request.urlopen(entry["url"], timeout=timeout) as resp:
            payload = resp.read()
    except OSError as err:
        print(f"{name}: download failed ({err})", file=sys.stderr)
        return False
    with tarfile.open(fileobj=io.BytesIO(payload), mode="r:gz") as tar:
        member = next(
            (m for m in tar.getmembers() if m.name.endswith(f"{name}.mtx")),
            None,
        )
        if member is None:
            print(f"{name}: no .mtx member in archive", file=sys.stderr)
            return False
        text = tar.extractfile(member).read().decode("ascii")
    if " pattern " in text.splitlines()[0]:
        text = _materialize_pattern(text)
    target.write_text(text, encoding="ascii")
    print(f"{name}: wrote {target}")
    return True


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default=None)
    parser.add_argument("--only", nargs="*", default=None)
    parser.add_argument("--timeout", type=float, default=60.0)
    args = parser.parse_args()

    data_dir = (
        Path(args.data_dir) if args.data_dir is not None else default_data_dir()
    )
    data_dir.mkdir(parents=True, exist_ok=True)

    names = args.only if args.only else sorted(SUITESPARSE_MANIFEST)
    unknown = [n for n in names if n not in SUITESPARSE_MANIFEST]
    if unknown:
        raise SystemExit(f"unknown matrix names: {', '.join(unknown)}")

    ok = True
    for name in names:
        ok = fetch_one(name, SUITESPARSE_MANIFEST[name], data_dir,
                       args.timeout) and ok
    if not ok:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
