# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from .. import common


class PropertyClassRegistry:
    """
    Collects the analysis settings each op module declares

    A registered class provides idname, init_props(config) and
    del_props(config). Settings are declared on a config in registration
    order, which is the import order of the op modules.
    """

    class_list = []

    def __call__(self, cls):
        PropertyClassRegistry.add_class(cls.idname, cls)
        return cls

    @classmethod
    def add_class(cls, idname, prop_class):
        if idname in cls.idnames():
            raise RuntimeError("{} is already registered".format(idname))
        cls.class_list.append({"idname": idname, "class": prop_class})
        common.debug_print("settings of {} are registered.".format(idname))

    @classmethod
    def idnames(cls):
        return [c["idname"] for c in cls.class_list]

    @classmethod
    def init_props(cls, config):
        for class_ in cls.class_list:
            class_["class"].init_props(config)

    @classmethod
    def del_props(cls, config):
        for class_ in reversed(cls.class_list):
            class_["class"].del_props(config)
