"""Scalar values, timestamps and durations as they travel on the wire."""

import math
from datetime import datetime, timedelta, timezone
from typing import Tuple, Union

from core.errors import InvalidState

Scalar = Union[int, float, str, datetime, timedelta]

VALUE_TYPES = ("int", "float", "text", "time", "duration")


def utc_ms(value: datetime) -> datetime:
    """Normalize to an aware UTC datetime truncated to milliseconds."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    value = value.astimezone(timezone.utc)
    return value.replace(microsecond=(value.microsecond // 1000) * 1000)


def format_timestamp(value: datetime) -> str:
    value = utc_ms(value)
    return value.strftime("%Y-%m-%dT%H:%M:%S.") + f"{value.microsecond // 1000:03d}Z"


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp '{text}' has no timezone")
    return utc_ms(parsed)


def duration_ms(value: timedelta) -> int:
    return (value.days * 86_400_000) + (value.seconds * 1000) + (value.microseconds // 1000)


def is_finite(value: Scalar) -> bool:
    return not isinstance(value, float) or math.isfinite(value)


def is_temporal(value: Scalar) -> bool:
    return isinstance(value, (datetime, timedelta))


def value_type(value: Scalar) -> str:
    # bool is an int subclass; it is not a scalar here
    if isinstance(value, bool):
        raise TypeError("booleans are not scalar values")
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "text"
    if isinstance(value, datetime):
        return "time"
    if isinstance(value, timedelta):
        return "duration"
    raise TypeError(f"unsupported scalar {type(value).__name__}")


def format_scalar(value: Scalar) -> Tuple[str, str]:
    """Return (text, type tag)."""
    tag = value_type(value)
    if tag == "float":
        if not math.isfinite(value):
            raise InvalidState(f"non-finite number {value!r} cannot be written")
        return repr(value), tag
    if tag == "time":
        return format_timestamp(value), tag
    if tag == "duration":
        return str(duration_ms(value)), tag
    return str(value), tag


def parse_scalar(text: str, tag: str) -> Scalar:
    if tag == "int":
        return int(text)
    if tag == "float":
        value = float(text)
        if not math.isfinite(value):
            raise ValueError("numbers must be finite")
        return value
    if tag == "text":
        return text
    if tag == "time":
        return parse_timestamp(text)
    if tag == "duration":
        return timedelta(milliseconds=int(text))
    raise ValueError(f"unknown value type '{tag}'")


def is_identifier(text: str) -> bool:
    return bool(text) and not any(ch.isspace() for ch in text)
