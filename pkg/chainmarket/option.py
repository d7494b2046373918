from dataclasses import dataclass
from typing import Any, Optional, Sequence

NUMBER_TYPES = (int, float)


class Option:
    """
    Marker base of option declarations; any other value in a definitions mapping is a nested section.
    """
    pass


@dataclass(frozen=True)
class OptionDef(Option):
    """
    Declares one configuration key.

    :param required: a missing or *None* value is an error
    :param default_value: value used when the key is not set
    :param allowed_types: types checked with :func:`isinstance`, *None* to accept anything.
        *None* values pass when the option is not required.
    :param description: unit or meaning, shown in rendered configuration files
    """
    required: bool = False
    default_value: Optional[Any] = None
    allowed_types: Optional[Sequence[Any]] = None
    description: Optional[str] = None


def number_option(default_value: float, description: Optional[str] = None) -> OptionDef:
    """
    A required numeric market parameter.
    """
    return OptionDef(required=True, default_value=default_value, allowed_types=NUMBER_TYPES,
                     description=description)
