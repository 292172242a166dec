"""Hot numeric kernels: cloc-style line classification and LOC-union coverage.

Every kernel has two implementations with identical results:

* ``*_jit``: compiled with numba (see :mod:`fpmine._jit`);
* ``*_py``: a pure numpy / Python fallback.

The small helpers used by the classifier are compiled whenever numba is
importable, so only the main loop differs between the two paths.
The unsuffixed names dispatch to whichever path ``FPMINE_NO_JIT`` selects.
``benchmarks/bench_kernels.py`` times both.
"""

from __future__ import annotations

import numpy as np

from ._jit import JIT_ENABLED, NUMBA_AVAILABLE, njit

BLANK = 0
COMMENT = 1
CODE = 2

# lexer states
_CODE = 0
_LINE_COMMENT = 1
_BLOCK_COMMENT = 2
_SQ = 3
_DQ = 4
_TEMPLATE = 5
_REGEX = 6
_REGEX_CLASS = 7

_TEMPLATE_DEPTH = 64

# Keywords after which a "/" starts a regular expression literal.
_KEYWORDS = b" return typeof instanceof in of new delete void throw case do else yield await "
_KEYWORDS_ARR = np.frombuffer(_KEYWORDS, dtype=np.uint8).copy()


@njit
def _is_ident(c):
    return (
        (c >= 97 and c <= 122)
        or (c >= 65 and c <= 90)
        or (c >= 48 and c <= 57)
        or c == 95
        or c == 36
    )


@njit
def _regex_allowed(buf, prev, prev_end, kw):
    if prev == 0:
        return True
    # ( , = : [ ! & | ? { } ; + - * % < > ~ ^
    if (
        prev == 40 or prev == 44 or prev == 61 or prev == 58 or prev == 91
        or prev == 33 or prev == 38 or prev == 124 or prev == 63 or prev == 123
        or prev == 125 or prev == 59 or prev == 43 or prev == 45 or prev == 42
        or prev == 37 or prev == 60 or prev == 62 or prev == 126 or prev == 94
    ):
        return True
    if not (prev >= 97 and prev <= 122):
        return False
    start = prev_end
    while start > 0 and _is_ident(buf[start - 1]):
        start -= 1
    length = prev_end - start + 1
    # match " word " inside the keyword table
    k = 0
    m = len(kw)
    while k + length + 1 < m:
        if kw[k] == 32:
            ok = kw[k + length + 1] == 32
            j = 0
            while ok and j < length:
                if kw[k + 1 + j] != buf[start + j]:
                    ok = False
                j += 1
            if ok:
                return True
        k += 1
    return False


def _classify(buf, n, kw):
    breaks = 0
    i = 0
    while i < n:
        c = buf[i]
        if c == 10:
            breaks += 1
        elif c == 13 and (i + 1 >= n or buf[i + 1] != 10):
            breaks += 1
        i += 1
    nlines = breaks
    if n > 0 and buf[n - 1] != 10 and buf[n - 1] != 13:
        nlines += 1

    starts = np.zeros(max(nlines, 1), dtype=np.int64)
    classes = np.zeros(nlines, dtype=np.int8)
    tstack = np.zeros(_TEMPLATE_DEPTH, dtype=np.int64)
    top = 0

    state = _CODE
    line = 0
    has_code = False
    has_comment = False
    continued = False
    prev = 0
    prev_end = -1

    i = 0
    if n >= 3 and buf[0] == 0xEF and buf[1] == 0xBB and buf[2] == 0xBF:
        i = 3
    if i + 1 < n and buf[i] == 35 and buf[i + 1] == 33:
        state = _LINE_COMMENT
        has_comment = True

    while i < n:
        c = buf[i]
        if c == 10 or c == 13:
            if c == 13 and i + 1 < n and buf[i + 1] == 10:
                i += 1
            if has_code:
                classes[line] = CODE
            elif has_comment:
                classes[line] = COMMENT
            else:
                classes[line] = BLANK
            line += 1
            if line < nlines:
                starts[line] = i + 1
            has_code = False
            has_comment = False
            if state == _LINE_COMMENT or state == _REGEX or state == _REGEX_CLASS:
                state = _CODE
            elif (state == _SQ or state == _DQ) and not continued:
                state = _CODE
            continued = False
            i += 1
            continue

        ws = c == 32 or c == 9 or c == 11 or c == 12
        nx = buf[i + 1] if i + 1 < n else 0

        if state == _CODE:
            if ws:
                i += 1
                continue
            if c == 47:
                if nx == 47:
                    state = _LINE_COMMENT
                    has_comment = True
                    i += 2
                    continue
                if nx == 42:
                    state = _BLOCK_COMMENT
                    has_comment = True
                    i += 2
                    continue
                has_code = True
                if _regex_allowed(buf, prev, prev_end, kw):
                    state = _REGEX
                prev = c
                prev_end = i
                i += 1
                continue
            has_code = True
            if c == 39:
                state = _SQ
            elif c == 34:
                state = _DQ
            elif c == 96:
                state = _TEMPLATE
            elif c == 123 and top > 0:
                tstack[top - 1] += 1
            elif c == 125 and top > 0:
                if tstack[top - 1] == 0:
                    top -= 1
                    state = _TEMPLATE
                else:
                    tstack[top - 1] -= 1
            prev = c
            prev_end = i
            i += 1
        elif state == _LINE_COMMENT:
            if not ws:
                has_comment = True
            i += 1
        elif state == _BLOCK_COMMENT:
            if c == 42 and nx == 47:
                has_comment = True
                state = _CODE
                i += 2
                continue
            if not ws:
                has_comment = True
            i += 1
        elif state == _SQ or state == _DQ:
            has_code = True
            if c == 92:
                if nx == 10 or nx == 13:
                    continued = True
                    i += 1
                else:
                    i += 2
                continue
            if (state == _SQ and c == 39) or (state == _DQ and c == 34):
                state = _CODE
                prev = c
                prev_end = i
            i += 1
        elif state == _TEMPLATE:
            if not ws:
                has_code = True
            if c == 92:
                i += 1 if (nx == 10 or nx == 13) else 2
                continue
            if c == 96:
                state = _CODE
                prev = c
                prev_end = i
            elif c == 36 and nx == 123:
                if top < _TEMPLATE_DEPTH:
                    tstack[top] = 0
                    top += 1
                state = _CODE
                prev = 123
                prev_end = i + 1
                i += 2
                continue
            i += 1
        else:
            # _REGEX or _REGEX_CLASS
            has_code = True
            if c == 92:
                i += 1 if (nx == 10 or nx == 13) else 2
                continue
            if state == _REGEX:
                if c == 91:
                    state = _REGEX_CLASS
                elif c == 47:
                    state = _CODE
                    prev = 41  # a closed regex literal behaves like an operand
                    prev_end = i
            elif c == 93:
                state = _REGEX
            i += 1

    if line < nlines:
        if has_code:
            classes[line] = CODE
        elif has_comment:
            classes[line] = COMMENT
        else:
            classes[line] = BLANK
    return starts, classes


_classify_nb = njit(_classify)


def classify_lines_py(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(line_starts, classes)`` for ``data`` without numba.

    ``line_starts`` holds the byte offset of each physical line (always at
    least ``[0]``); ``classes`` holds one of BLANK / COMMENT / CODE per line.
    """
    return _classify(bytes(data), len(data), _KEYWORDS)


def classify_lines_jit(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """numba-compiled twin of :func:`classify_lines_py`."""
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    return _classify_nb(buf, buf.shape[0], _KEYWORDS_ARR)


def union_count_py(starts: np.ndarray, ends: np.ndarray, classes: np.ndarray) -> int:
    """Count CODE lines covered by at least one 1-based inclusive interval."""
    n = classes.shape[0]
    if n == 0 or len(starts) == 0:
        return 0
    s = np.clip(np.asarray(starts, dtype=np.int64), 1, n)
    e = np.clip(np.asarray(ends, dtype=np.int64), 1, n)
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, s - 1, 1)
    np.add.at(diff, e, -1)
    covered = np.cumsum(diff[:-1]) > 0
    return int(np.count_nonzero(covered & (classes == CODE)))


def _union_count(starts, ends, classes):
    n = classes.shape[0]
    if n == 0:
        return 0
    mark = np.zeros(n, dtype=np.bool_)
    for k in range(starts.shape[0]):
        lo = max(starts[k], 1) - 1
        hi = min(ends[k], n)
        for line in range(lo, hi):
            mark[line] = True
    total = 0
    for line in range(n):
        if mark[line] and classes[line] == CODE:
            total += 1
    return total


_union_count_nb = njit(_union_count)


def union_count_jit(starts: np.ndarray, ends: np.ndarray, classes: np.ndarray) -> int:
    """numba-compiled twin of :func:`union_count_py`."""
    return int(
        _union_count_nb(
            np.asarray(starts, dtype=np.int64),
            np.asarray(ends, dtype=np.int64),
            np.asarray(classes, dtype=np.int8),
        )
    )


if JIT_ENABLED:
    classify_lines = classify_lines_jit
    union_count = union_count_jit
else:
    classify_lines = classify_lines_py
    union_count = union_count_py
