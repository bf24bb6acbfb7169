"""
Machine-readable reports
"""
import fractions
import json
import logging
import os
import sys
import tempfile
import typing

from .errors import SmiError


logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
ERROR = "error"


def to_jsonable(value: typing.Any) -> typing.Any:
    """
    Fractions become "p/q" strings (or "p" for integers); sets become sorted lists
    """
    if isinstance(value, fractions.Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(to_jsonable(v) for v in value)
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value


def make_report(command: str, status: str, payload: typing.Optional[typing.Dict] = None) -> typing.Dict:
    report = dict(command=command, status=status)
    report.update(payload or {})
    return to_jsonable(report)


def error_report(command: str, error: SmiError) -> typing.Dict:
    return make_report(command, ERROR, dict(error=error.to_dict()))


def render(report: typing.Dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def write_report(report: typing.Dict, path: typing.Optional[str] = None) -> None:
    """
    Write the report to stdout, or replace the file at path in one step
    """
    text = render(report)
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, temporary = tempfile.mkstemp(prefix=".report-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    logger.info("wrote report to %s", path)
