#!/usr/bin/env python3
"""Regenerate the curated diagnostic corpus under tests/fixtures/diag_corpus/.

Each corpus entry is the real stderr of one compiler on one broken (or
warning-producing) fixture, next to hand-curated annotations of the
diagnostics it contains. Curation is verified mechanically: every annotated
(file, line, severity) must appear literally as a `file:line:` line whose
text contains the severity word, otherwise generation aborts. That check
ties the annotations to the actual compiler output without involving the
parser under test.

Usage:
    python3 tools/gen_diag_corpus.py            # regenerate corpus files
    python3 tools/gen_diag_corpus.py --report   # just print compiler output
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from pathlib import Path

CORPUS_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "diag_corpus"

COMPILERS = {
    "gcc": ["gcc", "-Wall", "-c"],
    "clang": ["clang", "-Wall", "-c"],
}


# name -> (source, {compiler: [(file, line, severity), ...]})
# An empty annotation list means "entry not yet curated" and is rejected.
FIXTURES: dict[str, tuple[str, dict[str, list[tuple[str, int, str]]]]] = {
    "missing_semicolon": (
        """\
#include <stdio.h>

int main(void) {
    int x = 3
    printf("%d\\n", x);
    return 0;
}
""",
        {
            "gcc": [("missing_semicolon.c", 5, "error")],
            "clang": [("missing_semicolon.c", 4, "error")],
        },
    ),
    "undeclared_identifier": (
        """\
int main(void) {
    total = 4;
    return total;
}
""",
        {
            "gcc": [("undeclared_identifier.c", 2, "error")],
            "clang": [
                ("undeclared_identifier.c", 2, "error"),
                ("undeclared_identifier.c", 3, "error"),
            ],
        },
    ),
    "unused_variable": (
        """\
int main(void) {
    int unused_counter = 9;
    return 0;
}
""",
        {
            "gcc": [("unused_variable.c", 2, "warning")],
            "clang": [("unused_variable.c", 2, "warning")],
        },
    ),
    "implicit_declaration": (
        """\
int main(void) {
    say_hello();
    return 0;
}
""",
        {
            "gcc": [("implicit_declaration.c", 2, "warning")],
            "clang": [("implicit_declaration.c", 2, "warning")],
        },
    ),
    "missing_header": (
        """\
#include <stdioo.h>

int main(void) {
    return 0;
}
""",
        {
            "gcc": [("missing_header.c", 1, "error")],
            "clang": [("missing_header.c", 1, "error")],
        },
    ),
    "wrong_format": (
        """\
#include <stdio.h>

int main(void) {
    printf("%d\\n", "hello");
    return 0;
}
""",
        {
            "gcc": [("wrong_format.c", 4, "warning")],
            "clang": [("wrong_format.c", 4, "warning")],
        },
    ),
    "conflicting_types": (
        """\
int area(int w, int h);

double area(int w, int h) {
    return (double)(w * h);
}
""",
        {
            "gcc": [
                ("conflicting_types.c", 3, "error"),
                ("conflicting_types.c", 1, "note"),
            ],
            "clang": [
                ("conflicting_types.c", 3, "error"),
                ("conflicting_types.c", 1, "note"),
            ],
        },
    ),
    "redefinition": (
        """\
int limit = 10;
int limit = 20;

int main(void) {
    return limit;
}
""",
        {
            "gcc": [
                ("redefinition.c", 2, "error"),
                ("redefinition.c", 1, "note"),
            ],
            "clang": [
                ("redefinition.c", 2, "error"),
                ("redefinition.c", 1, "note"),
            ],
        },
    ),
    "incompatible_pointer": (
        """\
int main(void) {
    double value = 1.5;
    int *p = &value;
    return p != 0;
}
""",
        {
            "gcc": [("incompatible_pointer.c", 3, "warning")],
            "clang": [("incompatible_pointer.c", 3, "warning")],
        },
    ),
    "void_value": (
        """\
void report(void) {}

int main(void) {
    int x = report();
    return x;
}
""",
        {
            "gcc": [("void_value.c", 4, "error")],
            "clang": [("void_value.c", 4, "error")],
        },
    ),
    "too_few_args": (
        """\
int add(int a, int b) {
    return a + b;
}

int main(void) {
    return add(1);
}
""",
        {
            "gcc": [
                ("too_few_args.c", 6, "error"),
                ("too_few_args.c", 1, "note"),
            ],
            "clang": [("too_few_args.c", 6, "error")],
        },
    ),
    "missing_brace": (
        """\
int main(void) {
    if (1) {
        return 1;
    return 0;
}
""",
        {
            "gcc": [("missing_brace.c", 5, "error")],
            "clang": [("missing_brace.c", 5, "error")],
        },
    ),
    "return_local_address": (
        """\
int *make(void) {
    int local = 3;
    return &local;
}

int main(void) {
    return *make();
}
""",
        {
            "gcc": [("return_local_address.c", 3, "warning")],
            "clang": [("return_local_address.c", 3, "warning")],
        },
    ),
    "assignment_in_condition": (
        """\
int main(void) {
    int x = 0;
    if (x = 1)
        return 1;
    return 0;
}
""",
        {
            "gcc": [("assignment_in_condition.c", 3, "warning")],
            "clang": [("assignment_in_condition.c", 3, "warning")],
        },
    ),
    "unknown_type": (
        """\
int main(void) {
    strng name;
    return 0;
}
""",
        {
            "gcc": [("unknown_type.c", 2, "error")],
            "clang": [("unknown_type.c", 2, "error")],
        },
    ),
    "const_assign": (
        """\
int main(void) {
    const int locked = 1;
    locked = 2;
    return locked;
}
""",
        {
            "gcc": [("const_assign.c", 3, "error")],
            "clang": [("const_assign.c", 3, "error")],
        },
    ),
    "duplicate_case": (
        """\
int main(void) {
    int x = 1;
    switch (x) {
    case 1:
        return 1;
    case 1:
        return 2;
    }
    return 0;
}
""",
        {
            "gcc": [
                ("duplicate_case.c", 6, "error"),
                ("duplicate_case.c", 4, "note"),
            ],
            "clang": [
                ("duplicate_case.c", 6, "error"),
                ("duplicate_case.c", 4, "note"),
            ],
        },
    ),
    "pointer_int_compare": (
        """\
int main(void) {
    int x = 5;
    int *p = &x;
    if (p == 5)
        return 1;
    return 0;
}
""",
        {
            "gcc": [("pointer_int_compare.c", 4, "warning")],
            "clang": [("pointer_int_compare.c", 4, "warning")],
        },
    ),
    "uninitialized_use": (
        """\
int main(void) {
    int total;
    return total + 1;
}
""",
        {
            "gcc": [("uninitialized_use.c", 3, "warning")],
            "clang": [("uninitialized_use.c", 3, "warning")],
        },
    ),
    "expected_expression": (
        """\
int main(void) {
    int x = ;
    return x;
}
""",
        {
            "gcc": [("expected_expression.c", 2, "error")],
            "clang": [("expected_expression.c", 2, "error")],
        },
    ),
    "array_subscript_not_int": (
        """\
int main(void) {
    int values[4] = {1, 2, 3, 4};
    double idx = 1.5;
    return values[idx];
}
""",
        {
            "gcc": [("array_subscript_not_int.c", 4, "error")],
            "clang": [("array_subscript_not_int.c", 4, "error")],
        },
    ),
    "undefined_label": (
        """\
int main(void) {
    goto finish;
    return 0;
}
""",
        {
            "gcc": [("undefined_label.c", 2, "error")],
            "clang": [("undefined_label.c", 2, "error")],
        },
    ),
    "struct_unknown_member": (
        """\
struct point { int x; int y; };

int main(void) {
    struct point p = {1, 2};
    return p.z;
}
""",
        {
            "gcc": [("struct_unknown_member.c", 5, "error")],
            "clang": [("struct_unknown_member.c", 5, "error")],
        },
    ),
    "missing_return_value": (
        """\
int answer(void) {
    return;
}

int main(void) {
    return answer();
}
""",
        {
            "gcc": [("missing_return_value.c", 2, "warning")],
            "clang": [("missing_return_value.c", 2, "error")],
        },
    ),
    "divide_by_zero_constant": (
        """\
int main(void) {
    int x = 1 / 0;
    return x;
}
""",
        {
            "gcc": [("divide_by_zero_constant.c", 2, "warning")],
            "clang": [("divide_by_zero_constant.c", 2, "warning")],
        },
    ),
}


def compile_fixture(name: str, source: str, compiler: str) -> str:
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / f"{name}.c"
        src.write_text(source)
        cmd = COMPILERS[compiler] + [src.name, "-o", str(Path(tmp) / "out.o")]
        proc = subprocess.run(cmd, capture_output=True, text=True, cwd=tmp)
        return proc.stderr


def verify_annotations(stderr: str, annotations: list[tuple[str, int, str]]) -> list[str]:
    """Literal-substring verification tying annotations to the raw output."""
    problems = []
    lines = stderr.splitlines()
    for file, line_no, severity in annotations:
        prefix = f"{file}:{line_no}:"
        matching = [ln for ln in lines if ln.startswith(prefix)]
        if not matching:
            problems.append(f"no line starts with {prefix!r}")
            continue
        if not any(f"{severity}:" in ln for ln in matching):
            problems.append(f"{prefix!r} line does not mention {severity!r}")
    return problems


def main(argv: list[str]) -> int:
    report_only = "--report" in argv
    CORPUS_DIR.mkdir(parents=True, exist_ok=True)
    failures = []
    total_entries = 0
    total_diags = 0
    for name, (source, per_compiler) in sorted(FIXTURES.items()):
        for compiler, annotations in per_compiler.items():
            stderr = compile_fixture(name, source, compiler)
            if report_only:
                print(f"=== {name} [{compiler}] ===")
                print(stderr)
                continue
            if not annotations:
                failures.append(f"{name}/{compiler}: no annotations")
                continue
            problems = verify_annotations(stderr, annotations)
            if problems:
                failures.append(f"{name}/{compiler}: " + "; ".join(problems))
                continue
            entry = f"{name}__{compiler}"
            (CORPUS_DIR / f"{entry}.stderr.txt").write_text(stderr)
            expected = [
                {"file": f, "line": ln, "severity": sev} for f, ln, sev in annotations
            ]
            (CORPUS_DIR / f"{entry}.expected.json").write_text(
                json.dumps({"diagnostics": expected}, indent=2) + "\n"
            )
            total_entries += 1
            total_diags += len(expected)
    if report_only:
        return 0
    if failures:
        print("curation failed:", file=sys.stderr)
        for failure in failures:
            print(f"  {failure}", file=sys.stderr)
        return 1
    print(f"wrote {total_entries} corpus entries, {total_diags} annotated diagnostics")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
