"""Human-recorded values: text, list of texts, or the ``nothing`` sentinel.

Raw text entered by a person is split on commas into a list when it
contains one ("a, b" -> ["a", "b"]); otherwise it stays a single text
value verbatim.  Empty list segments are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass


class _Nothing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Nothing"

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


NOTHING = _Nothing()


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class TextList:
    items: tuple[str, ...]

    def __post_init__(self):
        if any(not item for item in self.items):
            raise ValueError("list elements must be non-empty strings")


Value = Text | TextList | _Nothing


def parse_answer(raw: str) -> Value:
    """Apply the comma-entry rule to raw human text."""
    if "," not in raw:
        return Text(raw)
    items = tuple(piece.strip() for piece in raw.split(",") if piece.strip())
    return TextList(items)


def from_json(data) -> Value:
    """Decode the wire form: string (comma rule), list of strings, or null."""
    if data is None:
        return NOTHING
    if isinstance(data, str):
        return parse_answer(data)
    if isinstance(data, (list, tuple)):
        items = []
        for item in data:
            if not isinstance(item, str):
                raise ValueError("list values must contain only strings")
            if item.strip():
                items.append(item)
        return TextList(tuple(items))
    raise ValueError(f"cannot decode value from {type(data).__name__}")


def from_stored(data) -> Value:
    """Decode a stored value exactly; no comma splitting on strings."""
    if data is None:
        return NOTHING
    if isinstance(data, str):
        return Text(data)
    if isinstance(data, (list, tuple)):
        return TextList(tuple(data))
    raise ValueError(f"cannot decode stored value from {type(data).__name__}")


def to_json(value: Value):
    if value is NOTHING or isinstance(value, _Nothing):
        return None
    if isinstance(value, Text):
        return value.value
    if isinstance(value, TextList):
        return list(value.items)
    raise TypeError(f"not a value: {value!r}")


def display(value: Value) -> str:
    """Render a value the way the tracker shows it."""
    if value is NOTHING or isinstance(value, _Nothing):
        return "nothing"
    if isinstance(value, Text):
        return value.value
    return ", ".join(value.items)


def as_iteration_list(value: Value | None) -> list[str]:
    """The elements a FOR EACH loop walks for a bound value.

    A single text iterates once; nothing (or an unbound name) iterates
    zero times.
    """
    if value is None or isinstance(value, _Nothing):
        return []
    if isinstance(value, Text):
        return [value.value] if value.value else []
    return list(value.items)
