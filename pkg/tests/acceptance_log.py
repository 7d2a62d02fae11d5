"""Collects one pass/fail line per acceptance criterion."""
from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(num: int, title: str):
    """Record PASS when the block finishes, FAIL with the reason otherwise."""
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        LINES.append(f"criterion {num:2d} FAIL  {title}: {reason}")
        print(LINES[-1])
        raise
    else:
        extra = "  " + ", ".join(f"{k}={v}" for k, v in detail.items()) if detail else ""
        LINES.append(f"criterion {num:2d} PASS  {title}{extra}")
        print(LINES[-1])
