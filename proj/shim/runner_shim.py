#!/usr/bin/env python3
"""Single-shot runner: executes one solution plus one assertion and reports.

Protocol
  stdin   one JSON object {"solution_code": str, "test": str}
  stdout  final line is one JSON object
          {"status": "pass"|"assert_fail"|"error", "error_type": str|null,
           "elapsed_ms": float}
  exit    0 when a report was written, 2 when the request was unreadable.

Anything the solution prints (Python-level or native) goes to /dev/null.
Timeouts are enforced by the caller.
"""

import json
import os
import sys
import time


def _read_request():
    try:
        req = json.loads(sys.stdin.buffer.read().decode("utf-8"))
    except Exception:
        return None
    if not isinstance(req, dict):
        return None
    code, test = req.get("solution_code"), req.get("test")
    if not isinstance(code, str) or not isinstance(test, str) or not code or not test:
        return None
    return code, test


def main():
    req = _read_request()
    if req is None:
        return 2
    code, test = req

    report_fd = os.dup(1)
    sink = os.open(os.devnull, os.O_WRONLY)
    os.dup2(sink, 1)
    os.dup2(sink, 2)
    os.close(sink)
    sys.stdout = open(os.devnull, "w")
    sys.stderr = sys.stdout
    sys.stdin = open(os.devnull, "r")

    namespace = {"__name__": "__solution__", "__builtins__": __builtins__}
    status, error_type = "pass", None
    start = time.perf_counter()
    try:
        exec(compile(code, "<solution>", "exec"), namespace)
        exec(compile(test, "<test>", "exec"), namespace)
    except AssertionError:
        status, error_type = "assert_fail", "AssertionError"
    except BaseException as exc:  # noqa: BLE001 - every class is reported
        status, error_type = "error", type(exc).__name__
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    report = json.dumps({"status": status, "error_type": error_type,
                         "elapsed_ms": max(elapsed_ms, 1e-6)})
    with os.fdopen(report_fd, "w") as out:
        out.write("\n" + report + "\n")
        out.flush()
    return 0


if __name__ == "__main__":
    os._exit(main())
