import math
from typing import Any, Dict, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

from .consts import REL_TOLERANCE, ABS_TOLERANCE
from .exception import OptionError


def _dotted_lookup(values: Mapping, name: str) -> Tuple[bool, Any]:
    current: Any = values
    for chunk in name.split('.'):
        if not isinstance(current, Mapping) or chunk not in current:
            return False, None
        current = current[chunk]
    return True, current


def dict_has_name(values: Mapping, name: str) -> bool:
    """
    Whether *values* has the dotted key *name* (``config.lambda``).
    """
    return _dotted_lookup(values, name)[0]


def dict_get_value(values: Mapping, name: str) -> Any:
    """
    Value of the dotted key *name* (``config.lambda``).

    :raises: :class:`chainmarket.exception.OptionError` if any level is missing
    """
    found, value = _dotted_lookup(values, name)
    if not found:
        raise OptionError('Could not find option "{}"'.format(name))
    return value


def _flatten_items(values: Mapping, prefix: str, sep: str) -> Iterator[Tuple[str, Any]]:
    for key, value in values.items():
        path = '{}{}{}'.format(prefix, sep, key) if prefix else str(key)
        if isinstance(value, Mapping):
            yield from _flatten_items(value, path, sep)
        else:
            yield path, value


def dict_flatten(values: Mapping, sep: str = '.') -> Dict[str, Any]:
    """
    Nested mapping as a single level keyed by *sep*-joined paths, in insertion order.
    """
    return dict(_flatten_items(values, '', sep))


def type_name(t: Any) -> str:
    """Name of *t* if it is a type, else of its type."""
    t = t if isinstance(t, type) else type(t)
    return getattr(t, '__name__', repr(t))


def is_allowed_types(value: Any, allowed_types: Optional[Sequence[Any]], required: Optional[bool] = None) -> bool:
    """
    Whether *value* is an instance of one of *allowed_types* (*None* entries admit *None*). A *None*
    value is decided by *required* when it is given.
    """
    if value is None and required is not None:
        return not required
    if allowed_types is None:
        return True
    return any(value is None if t is None else isinstance(value, t) for t in allowed_types)


def float_tolerance(a: float, b: float) -> float:
    """
    Comparison tolerance for two welfare-scale values: relative 1e-9 with an absolute floor of 1e-12.
    """
    return max(REL_TOLERANCE * max(abs(a), abs(b)), ABS_TOLERANCE)


def float_close(a: float, b: float) -> bool:
    """Whether *a* and *b* are equal within :func:`float_tolerance`."""
    return abs(a - b) <= float_tolerance(a, b)


def float_less(a: float, b: float) -> bool:
    """Whether *a* is strictly less than *b* beyond :func:`float_tolerance`."""
    return b - a > float_tolerance(a, b)


def format_number(value: Any) -> str:
    """
    Formats a number for CSV output with 10 significant digits and a locale-independent decimal point.
    Integers are written as-is.
    """
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    try:
        fvalue = float(value)
    except (ValueError, TypeError):
        return str(value)
    if math.isinf(fvalue):
        return 'inf' if fvalue > 0 else '-inf'
    if fvalue.is_integer() and abs(fvalue) < 1e15:
        return str(int(fvalue))
    return '{:.10g}'.format(fvalue)


def float_less_array(a: float, b: np.ndarray) -> np.ndarray:
    """Elementwise :func:`float_less` of a scalar against an array, ``a < b``."""
    tol = np.maximum(REL_TOLERANCE * np.maximum(abs(a), np.abs(b)), ABS_TOLERANCE)
    return b - a > tol
