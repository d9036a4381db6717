#!/usr/bin/env python3
"""Extract standalone functions from Python and Java source trees.

Each extracted function is written to its own file under OUT_DIR and listed
in OUT_DIR/manifest.txt, ready for `codetok normalize --list`.

    python3 scripts/extract_functions.py python /usr/lib/python3.10 /usr/local/lib/python3.10/dist-packages out/py
    python3 scripts/extract_functions.py java /path/to/java/sources out/java
"""

import argparse
import ast
import hashlib
import os
import random
import sys
import textwrap

MAX_CHARS = 6000


def python_functions(path):
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
        tree = ast.parse(source)
    except (SyntaxError, UnicodeDecodeError, ValueError):
        return
    lines = source.splitlines(keepends=True)
    # Only outermost functions: module-level defs and methods of module-level
    # classes. Nested defs stay inside their parent.
    stack = [(node, False) for node in tree.body]
    while stack:
        node, in_class = stack.pop()
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            start = node.lineno - 1
            end = node.end_lineno
            text = textwrap.dedent("".join(lines[start:end]))
            yield text
        elif isinstance(node, ast.ClassDef) and not in_class:
            stack.extend((child, True) for child in node.body)


class JavaScanner:
    """Minimal lexical scan: yields (index, char) for code chars outside
    strings and comments."""

    def __init__(self, text):
        self.text = text

    def code_chars(self):
        t = self.text
        i, n = 0, len(t)
        while i < n:
            c = t[i]
            if c == "/" and i + 1 < n and t[i + 1] == "/":
                j = t.find("\n", i)
                i = n if j < 0 else j
                continue
            if c == "/" and i + 1 < n and t[i + 1] == "*":
                j = t.find("*/", i + 2)
                i = n if j < 0 else j + 2
                continue
            if t.startswith('"""', i):
                j = t.find('"""', i + 3)
                i = n if j < 0 else j + 3
                yield i - 1, '"'
                continue
            if c in "\"'":
                j = i + 1
                while j < n and t[j] != c and t[j] != "\n":
                    j += 2 if t[j] == "\\" else 1
                i = j + 1
                yield j, c
                continue
            yield i, c
            i += 1


def java_functions(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError:
        return
    # Track brace depth; a `{` opened right after `)` (optionally followed by
    # a throws clause) at a class-body depth starts a method body.
    depth = 0
    class_depths = set()
    last_boundary = {0: 0}
    pending_class = False
    word = []
    prev_sig = ""
    method_start = None
    method_depth = None
    recent = []
    for i, c in JavaScanner(text).code_chars():
        if c.isalnum() or c == "_":
            word.append(c)
            continue
        if word:
            w = "".join(word)
            word = []
            if w in ("class", "interface", "enum") and method_start is None:
                pending_class = True
            recent.append(w)
            prev_sig = w
        if c.isspace():
            continue
        if c == "{":
            if method_start is None and depth in class_depths and (
                prev_sig == ")" or (len(recent) >= 2 and "throws" in recent[-6:])
            ) and not pending_class:
                method_start = last_boundary.get(depth, 0)
                method_depth = depth
            elif pending_class and method_start is None:
                class_depths.add(depth + 1)
                pending_class = False
            depth += 1
            last_boundary[depth] = i + 1
            recent = []
        elif c == "}":
            depth -= 1
            if method_start is not None and depth == method_depth:
                body = text[method_start : i + 1].strip()
                yield textwrap.dedent(body)
                method_start = None
                method_depth = None
            class_depths.discard(depth + 1)
            last_boundary[depth] = i + 1
            recent = []
        elif c == ";":
            last_boundary[depth] = i + 1
            recent = []
        else:
            recent.append(c)
        prev_sig = c


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lang", choices=["python", "java"])
    ap.add_argument("src", nargs="+")
    ap.add_argument("out")
    ap.add_argument("--limit", type=int, default=12000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--exclude", action="append", default=[])
    args = ap.parse_args()

    ext = ".py" if args.lang == "python" else ".java"
    extract = python_functions if args.lang == "python" else java_functions
    seen = set()
    functions = []
    sources = [
        os.path.join(root, name)
        for src in args.src
        for root, dirs, files in sorted(os.walk(src))
        if not any(x in root for x in args.exclude)
        for name in sorted(files)
        if name.endswith(ext)
    ]
    for path in sources:
        for fn in extract(path):
            if len(fn) > MAX_CHARS or fn.count("\n") < 1:
                continue
            digest = hashlib.sha1(fn.encode()).hexdigest()
            if digest in seen:
                continue
            seen.add(digest)
            functions.append(fn)
    random.Random(args.seed).shuffle(functions)
    functions = functions[: args.limit]
    os.makedirs(args.out, exist_ok=True)
    paths = []
    for k, fn in enumerate(functions):
        p = os.path.join(args.out, f"{k:06d}{ext}")
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(fn)
        paths.append(p)
    with open(os.path.join(args.out, "manifest.txt"), "w") as fh:
        fh.write("\n".join(paths) + "\n")
    print(f"{len(seen)} unique functions, wrote {len(functions)}", file=sys.stderr)


if __name__ == "__main__":
    main()
