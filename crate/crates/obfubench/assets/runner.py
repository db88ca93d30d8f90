"""Differential execution runner. Reads NDJSON requests on stdin, writes one
NDJSON response per request on stdout."""

import ast
import io
import json
import math
import statistics
import sys
import time

PROTOCOL_OUT = sys.stdout


def reply(obj):
    PROTOCOL_OUT.write(json.dumps(obj) + "\n")
    PROTOCOL_OUT.flush()


def load(source):
    namespace = {"__name__": "__subject__", "__builtins__": __builtins__}
    exec(compile(source, "<subject>", "exec"), namespace)
    return namespace


def literal(text):
    return ast.literal_eval(text)


def call(fn, args, kwargs):
    # fresh argument objects for every call so mutation cannot leak
    return fn(*[literal(a) for a in args], **{k: literal(v) for k, v in kwargs.items()})


def equal(a, b, tol):
    if type(a).__name__ != type(b).__name__:
        return False
    if tol is None:
        return a == b
    if isinstance(a, float):
        return a == b or (math.isfinite(a) and math.isfinite(b) and abs(a - b) <= tol)
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(equal(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(equal(a[k], b[k], tol) for k in a)
    return a == b


def side(source, entry, args, kwargs, repeats):
    """Returns (kind, value, seconds) with kind in ok/raise/load."""
    try:
        fn = load(source)[entry]
    except BaseException as e:  # noqa: BLE001
        return "load", type(e).__name__, None
    try:
        value = call(fn, args, kwargs)
    except BaseException as e:  # noqa: BLE001
        return "raise", type(e).__name__, None
    times = []
    for _ in range(repeats):
        fn = load(source)[entry]
        start = time.perf_counter()
        call(fn, args, kwargs)
        times.append(time.perf_counter() - start)
    return "ok", value, statistics.median(times)


def case(req):
    args, kwargs = req["args"], req.get("kwargs", {})
    for text in list(args) + list(kwargs.values()):
        literal(text)
    repeats = max(1, int(req.get("repeats", 5)))
    tol = req.get("float_tol")
    o_kind, o_val, o_time = side(req["orig_source"], req["orig_entry"], args, kwargs, repeats)
    if o_kind == "load":
        return {"error": "original failed to load: " + o_val}
    b_kind, b_val, b_time = side(req["obf_source"], req["obf_entry"], args, kwargs, repeats)
    if b_kind == "load":
        return {"verdict": "obf_error", "detail": b_val}
    if o_kind == "ok" and b_kind == "ok":
        if equal(o_val, b_val, tol):
            return {"verdict": "match", "orig_time_s": o_time, "obf_time_s": b_time, "detail": ""}
        return {"verdict": "mismatch", "detail": "outputs differ"}
    if o_kind == "raise" and b_kind == "raise":
        if o_val == b_val:
            return {"verdict": "match", "orig_time_s": None, "obf_time_s": None, "detail": o_val}
        return {"verdict": "mismatch", "detail": o_val + " vs " + b_val}
    if b_kind == "raise":
        return {"verdict": "obf_error", "detail": b_val}
    return {"verdict": "mismatch", "detail": "original raised " + o_val}


def handle(line):
    try:
        req = json.loads(line)
        op = req["op"]
    except Exception:  # noqa: BLE001
        return {"error": "protocol"}
    try:
        if op == "load":
            try:
                load(req["source"])
            except BaseException as e:  # noqa: BLE001
                return {"ok": False, "detail": type(e).__name__}
            return {"ok": True, "detail": ""}
        if op == "case":
            return case(req)
        return {"error": "unknown op " + str(op)}
    except BaseException as e:  # noqa: BLE001
        return {"error": type(e).__name__ + ": " + str(e)[:200]}


def serve():
    for line in iter(sys.stdin.readline, ""):
        if not line.strip():
            continue
        sys.stdout = io.StringIO()
        try:
            response = handle(line)
        finally:
            sys.stdout = PROTOCOL_OUT
        reply(response)


serve()
