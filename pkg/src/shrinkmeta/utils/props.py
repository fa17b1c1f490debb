# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"


class _Property:
    """
    Typed property descriptor: default value, CLI flag and text conversion
    """

    type_name = "string"
    repeatable = False

    def __init__(self, name="", description="", default=None):
        self.name = name
        self.description = description
        self.default = default

    def convert(self, text):
        return text

    def validate(self, value):
        return value

    def parse(self, text):
        return self.validate(self.convert(text))

    def metavar(self):
        return self.type_name.upper()


class StringProperty(_Property):
    def __init__(self, name="", description="", default=""):
        super().__init__(name, description, default)


class StringCollectionProperty(_Property):
    """
    Repeatable string option, collected in order
    """

    type_name = "string"
    repeatable = True

    def __init__(self, name="", description="", default=()):
        super().__init__(name, description, tuple(default))

    def parse(self, text):
        if isinstance(text, (list, tuple)):
            return tuple(str(t) for t in text)
        return (str(text),)


class _NumberProperty(_Property):
    number_type = float

    def __init__(self, name="", description="", default=0, min=None,
                 max=None):
        # pylint: disable=W0622
        super().__init__(name, description, default)
        self.min = min
        self.max = max

    def convert(self, text):
        return self.number_type(text)

    def validate(self, value):
        if self.min is not None and value < self.min:
            raise ValueError("{} must be >= {} (got {})"
                             .format(self.name, self.min, value))
        if self.max is not None and value > self.max:
            raise ValueError("{} must be <= {} (got {})"
                             .format(self.name, self.max, value))
        return value


class FloatProperty(_NumberProperty):
    type_name = "float"


class IntProperty(_NumberProperty):
    type_name = "int"
    number_type = int


class EnumProperty(_Property):
    """
    items: list of (identifier, name, description); the CLI accepts either
    the name or the identifier, case-insensitively
    """

    type_name = "enum"

    def __init__(self, name="", description="", items=(), default=None):
        if default is None and items:
            default = items[0][0]
        super().__init__(name, description, default)
        self.items = list(items)

    def convert(self, text):
        t = str(text).strip().lower()
        for ident, name, _ in self.items:
            if t in (ident.lower(), name.lower()):
                return ident
        raise ValueError("'{}' is not one of {}"
                         .format(text, ", ".join(self.choices())))

    def choices(self):
        return [name for _, name, _ in self.items]

    def name_of(self, ident):
        for i, name, _ in self.items:
            if i == ident:
                return name
        return ident

    def metavar(self):
        return "|".join(self.choices())


def is_property(obj):
    return isinstance(obj, _Property)
