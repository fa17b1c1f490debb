# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from . import common
from .utils.props import is_property
from .utils.property_class_registry import PropertyClassRegistry


class AnalysisConfig:
    """
    Settings of one analysis run

    Assigning a property descriptor to an attribute declares the setting and
    sets its default value, assigning anything else sets the value.
    """

    def __init__(self):
        object.__setattr__(self, "_definitions", {})

    def __setattr__(self, name, value):
        if is_property(value):
            if not value.name:
                value.name = name
            self._definitions[name] = value
            object.__setattr__(self, name, value.default)
            return
        if name not in self._definitions:
            raise AttributeError("Unknown setting '{}'".format(name))
        object.__setattr__(self, name, value)

    def __delattr__(self, name):
        self._definitions.pop(name, None)
        object.__delattr__(self, name)

    def definitions(self):
        return dict(self._definitions)

    def set(self, name, text):
        """
        Set a setting from its text form (CLI or echoed configuration)
        """

        prop = self._definitions.get(name)
        if prop is None:
            raise common.ValidationError(
                "report-cli", "unknown setting '{}'".format(name))
        try:
            value = prop.parse(text)
        except ValueError as e:
            raise common.ValidationError(
                "report-cli", "invalid value for {}: {}".format(name, e)) \
                from None
        object.__setattr__(self, name, value)

    def to_dict(self):
        return {name: getattr(self, name) for name in self._definitions}

    @classmethod
    def from_dict(cls, values):
        config = new_config()
        for name, value in values.items():
            config.set(name, value)
        return config


def init_props(config):
    PropertyClassRegistry.init_props(config)


def clear_props(config):
    PropertyClassRegistry.del_props(config)


def new_config(**overrides):
    config = AnalysisConfig()
    init_props(config)
    for name, value in overrides.items():
        config.set(name, value)
    return config
