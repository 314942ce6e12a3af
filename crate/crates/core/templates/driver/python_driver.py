# Generated test driver. Runs the selected cases against candidate.py and
# prints one verdict line per case.
import json
import math
import os
import sys

sys.setrecursionlimit(10000)

_HERE = os.path.dirname(os.path.abspath(__file__))
_ENTRY = "{{entry_function}}"
_EPSILON = {{epsilon}}
_SELECTED = set(int(a) for a in sys.argv[1:]) if len(sys.argv) > 1 else None

_namespace = {"__name__": "candidate"}
_load_error = None
try:
    with open(os.path.join(_HERE, "candidate.py"), encoding="utf-8") as _fh:
        _source = _fh.read()
    exec(compile(_source, "candidate.py", "exec"), _namespace)
except BaseException as _exc:  # noqa: B902 - SystemExit included
    _load_error = "%s: %s" % (type(_exc).__name__, _exc)


def _one_line(text):
    return " ".join(str(text).split())


def _normalize(value):
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(_normalize(v) for v in value)
    return value


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _equal(got, expected):
    if isinstance(got, bool) and _is_number(expected):
        got = int(got)
    if isinstance(expected, bool) and _is_number(got):
        expected = int(expected)
    if _is_number(got) and _is_number(expected):
        if _EPSILON is None:
            return got == expected
        if isinstance(got, float) and math.isnan(got):
            return isinstance(expected, float) and math.isnan(expected)
        diff = abs(got - expected)
        return diff <= _EPSILON or diff <= _EPSILON * max(abs(got), abs(expected))
    if isinstance(got, list) and isinstance(expected, list):
        return len(got) == len(expected) and all(_equal(g, e) for g, e in zip(got, expected))
    if isinstance(got, dict) and isinstance(expected, dict):
        return got.keys() == expected.keys() and all(_equal(got[k], expected[k]) for k in got)
    return type(got) == type(expected) and got == expected


def _emit(line):
    sys.stdout.write("\n" + line + "\n")
    sys.stdout.flush()


def _run_case(index, case_id, args_json, expected_json):
    if _SELECTED is not None and index not in _SELECTED:
        return
    _emit("REASONTRANS BEGIN %s" % case_id)
    try:
        if _load_error is not None:
            raise RuntimeError("candidate failed to load: " + _load_error)
        function = _namespace.get(_ENTRY)
        if not callable(function):
            raise NameError("entry function %r not found" % _ENTRY)
        args = json.loads(args_json)
        expected = json.loads(expected_json)
        got = _normalize(function(*args))
        if _equal(got, expected):
            _emit("REASONTRANS CASE %s PASS" % case_id)
        else:
            try:
                shown = json.dumps(got)
            except (TypeError, ValueError):
                shown = repr(got)
            _emit("REASONTRANS CASE %s FAIL got=%s" % (case_id, _one_line(shown)))
    except BaseException as exc:  # noqa: B902 - SystemExit included
        _emit("REASONTRANS CASE %s ERROR %s: %s" % (case_id, type(exc).__name__, _one_line(exc)))


{{cases}}
