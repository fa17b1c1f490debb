# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

import sys

from .. import common
from .props import is_property


class Command:
    """
    Base class of CLI commands

    Subclasses set idname/label/description and declare their own options
    as property class attributes.
    """

    idname = ""
    label = ""
    description = ""
    use_analysis_config = False
    config = None

    @classmethod
    def properties(cls):
        props = []
        for klass in reversed(cls.__mro__):
            for attr, value in vars(klass).items():
                if is_property(value):
                    props = [p for p in props if p[0] != attr]
                    props.append((attr, value))
        return props

    def report(self, level, message):
        for lv in sorted(level):
            print("[{}] {}".format(lv, message), file=sys.stderr)

    def execute(self, args):
        raise NotImplementedError


class CommandRegistry:
    """
    Class decorator collecting CLI commands by idname, in import order
    """

    class_list = []

    def __call__(self, cls):
        CommandRegistry.add_class(cls.idname, cls)
        return cls

    @classmethod
    def add_class(cls, idname, cmd_class):
        if not idname:
            raise RuntimeError("{} has no idname".format(cmd_class.__name__))
        for class_ in cls.class_list:
            if class_["idname"] == idname:
                raise RuntimeError("{} is already registered"
                                   .format(idname))
        cls.class_list.append({"idname": idname, "class": cmd_class})
        common.debug_print("{} is registered.".format(idname))

    @classmethod
    def commands(cls):
        return [c["class"] for c in cls.class_list]

    @classmethod
    def get(cls, idname):
        for class_ in cls.class_list:
            if class_["idname"] == idname:
                return class_["class"]
        raise KeyError(idname)
