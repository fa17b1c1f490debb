# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from contextlib import contextmanager
from pprint import pprint
import os
import sys
import tempfile
import threading
import warnings


__DEBUG_MODE = False

_collectors = threading.local()


class ShrinkmetaError(RuntimeError):
    """
    Base error, tagged with the module which raised it
    """

    def __init__(self, module, message):
        super().__init__("[{}] {}".format(module, message))
        self.module = module
        self.message = message


class ValidationError(ShrinkmetaError):
    pass


class NumericalError(ShrinkmetaError):
    pass


class ShrinkmetaWarning(UserWarning):
    pass


def is_debug_mode():
    if os.environ.get("SHRINKMETA_DEBUG_MODE") == "true":
        return True
    return __DEBUG_MODE


def enable_debug_mode():
    # pylint: disable=W0603
    global __DEBUG_MODE
    __DEBUG_MODE = True


def disable_debug_mode():
    # pylint: disable=W0603
    global __DEBUG_MODE
    __DEBUG_MODE = False


def debug_print(*s):
    """
    Print message to error stream in debugging mode
    """

    if is_debug_mode():
        pprint(s, stream=sys.stderr)


@contextmanager
def collect_warnings():
    """
    Record the messages passed to warn() by the current thread instead of
    raising them
    """

    stack = getattr(_collectors, "stack", None)
    if stack is None:
        stack = _collectors.stack = []
    caught = []
    stack.append(caught)
    try:
        yield caught
    finally:
        stack.pop()


def warn(module, message):
    text = "[{}] {}".format(module, message)
    stack = getattr(_collectors, "stack", None)
    if stack:
        stack[-1].append(text)
        return
    warnings.warn(text, ShrinkmetaWarning, stacklevel=3)


def check_finite(module, name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise NumericalError(module, "{} is not a number ({!r})"
                             .format(name, value)) from None
    if v != v or v in (float("inf"), float("-inf")):
        raise NumericalError(module, "{} is not finite ({})".format(name, v))
    return v


def check_output_path(path):
    """
    Raise ValidationError unless the directory of path exists
    """

    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise ValidationError(
            "output", "directory of {} does not exist".format(path))


def atomic_write(path, text):
    """
    Write text to path via a temporary file in the same directory
    """

    check_output_path(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp_path = tempfile.mkstemp(prefix=".shrinkmeta-", dir=directory)
    except OSError as e:
        raise ValidationError(
            "output", "cannot write {}: {}".format(path, e.strerror)) from None
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise ValidationError(
            "output", "cannot write {}: {}".format(path, e.strerror)) from None
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
