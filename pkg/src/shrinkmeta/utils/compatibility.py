# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

import numpy as np


def _numpy_version():
    parts = []
    for p in np.__version__.split(".")[:3]:
        digits = "".join(ch for ch in p if ch.isdigit())
        parts.append(int(digits) if digits else 0)
    while len(parts) < 3:
        parts.append(0)
    return tuple(parts)


def check_version(major, minor, _):
    """
    Check numpy version
    """

    version = _numpy_version()
    if version[0] == major and version[1] == minor:
        return 0
    if version[0] > major:
        return 1
    if version[0] == major and version[1] > minor:
        return 1
    return -1


def trapezoid(y, x):
    # np.trapz is deprecated from 2.0
    if check_version(2, 0, 0) >= 0:
        return np.trapezoid(y, x)
    return np.trapz(y, x)    # pylint: disable=E1101
