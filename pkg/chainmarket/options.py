from typing import Any, List, Mapping, Optional, Protocol, Tuple

from .consts import DEFAULT_T, DEFAULT_R, DEFAULT_LAMBDA, DEFAULT_XI, DEFAULT_C, DEFAULT_D, DEFAULT_A1, \
    DEFAULT_A2, DEFAULT_A3, DEFAULT_Q, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_S_MAX, DEFAULT_INSTANCES, DEFAULT_MINERS, \
    MODE_MULTI, PARAM_NONE
from .exception import OptionError, TypeError
from .option import Option, OptionDef, number_option
from .private.options import OptionsCheckDefinitions
from .util import dict_get_value, dict_has_name, is_allowed_types, type_name


class OptionsBase:
    """
    Option values, optionally restricted to a tree of :class:`chainmarket.option.OptionDef`.

    :param defined_options: nested mapping of option definitions, or *None* for no restriction
    :param options: the values set by the user, keyed like *defined_options*
    :raises: :class:`chainmarket.exception.OptionError` if a value is set for an undeclared key
    """
    defined_options: Any
    options: Any

    def __init__(self, defined_options: Optional[Any] = None, options: Optional[Any] = None):
        self.defined_options = defined_options
        self.options = options
        OptionsCheckDefinitions(self.defined_options, self.options)

    def value_definition_get(self, name: str) -> Tuple[Option, Any]:
        """
        Definition of the dotted key *name* and its user value. When the user did not set the key, the
        definition itself stands in for the value.

        :raises: :class:`chainmarket.exception.OptionError`
        """
        definition = dict_get_value(self.defined_options, name)
        if not isinstance(definition, Option):
            raise OptionError('"{}" is an option section, not an option: {}'.format(name, repr(definition)))
        if self.options is not None and dict_has_name(self.options, name):
            return definition, dict_get_value(self.options, name)
        return definition, definition

    def value_get(self, name: str) -> Any:
        """
        Raw value of the dotted key *name*, without defaults or type checks.
        """
        if self.defined_options is None:
            return dict_get_value(self.options, name)
        return self.value_definition_get(name)[1]

    def option_get(self, name: str) -> Any:
        """
        See :func:`option_get`.
        """
        return option_get(self, name)


class Options(OptionsBase):
    """
    Options declared by the subclass in :func:`define_options`.

    :param options: the values to set
    :raises: :class:`chainmarket.exception.OptionError`
    """
    def __init__(self, options: Optional[Any] = None):
        super().__init__(defined_options=self.define_options(), options=options)

    def define_options(self) -> Optional[Any]:
        """
        Definitions tree of this option set, *None* to accept any key.
        """
        return None


def _check_type(name: str, definition: OptionDef, value: Any) -> None:
    if is_allowed_types(value, definition.allowed_types, required=definition.required):
        return
    if value is None or definition.allowed_types is None:
        raise TypeError('Option "{}" is required'.format(name))
    accepted: List[Any] = list(definition.allowed_types)
    if not definition.required:
        accepted.insert(0, None)
    raise TypeError('Option "{}" has type "{}", expected one of: {}'.format(
        name, type_name(value), ', '.join('"{}"'.format(type_name(t)) for t in accepted)))


def option_get(options: OptionsBase, name: str) -> Any:
    """
    Value of the dotted key *name*, the declared default when it is not set.

    :raises: :class:`chainmarket.exception.OptionError` for an undeclared key
    :raises: :class:`chainmarket.exception.TypeError` for a missing required value or a disallowed type
    """
    definition, value = options.value_definition_get(name)
    if isinstance(value, OptionDef):
        value = value.default_value
    if isinstance(definition, OptionDef):
        _check_type(name, definition, value)
    return value


def _market_definitions() -> Mapping[str, OptionDef]:
    return {
        'T': number_option(DEFAULT_T, 'fixed block bonus (tokens)'),
        'r': number_option(DEFAULT_R, 'transaction fee rate (tokens per data unit)'),
        'lambda': number_option(DEFAULT_LAMBDA, 'average block time (seconds)'),
        'xi': number_option(DEFAULT_XI, 'propagation coefficient (seconds per data unit)'),
        'c': number_option(DEFAULT_C, 'unit resource cost (tokens per resource unit)'),
        'D': number_option(DEFAULT_D, 'total resource supply (resource units)'),
        'a1': number_option(DEFAULT_A1, 'network effects constant'),
        'a2': number_option(DEFAULT_A2, 'network effects constant'),
        'a3': number_option(DEFAULT_A3, 'network effects exponent'),
        'q': number_option(DEFAULT_Q, 'constant demand (resource units)'),
        'beta1': number_option(DEFAULT_BETA1, 'lower demand ratio of D'),
        'beta2': number_option(DEFAULT_BETA2, 'upper demand ratio of D'),
        's_max': number_option(DEFAULT_S_MAX, 'block size upper bound (data units)'),
    }


class MarketOptions(Options):
    """
    Market configuration options.

    .. list-table::
        :header-rows: 1

        * - option
          - description
          - allowed types
          - default value
        * - T
          - fixed block bonus
          - int, float
          - ``12.5``
        * - r
          - transaction fee rate
          - int, float
          - ``0.007``
        * - lambda
          - average block time
          - int, float
          - ``15``
        * - xi
          - propagation coefficient
          - int, float
          - ``0.001``
        * - c
          - unit resource cost
          - int, float
          - ``0.001``
        * - D
          - total resource supply
          - int, float
          - ``1000``
        * - a1, a2, a3
          - network effects constants
          - int, float
          - ``1.97``, ``0.35``, ``1.02``
        * - q
          - constant demand
          - int, float
          - ``10``
        * - beta1, beta2
          - demand ratios
          - int, float
          - ``0``, ``0.02``
        * - s_max
          - block size upper bound
          - int, float
          - ``1024``
    """
    def define_options(self) -> Optional[Any]:
        return _market_definitions()


class SweepOptions(Options):
    """
    Options of a sweep spec file. The *config* key holds :class:`MarketOptions` overrides.
    """
    def define_options(self) -> Optional[Any]:
        return {
            'mechanism': OptionDef(required=True, allowed_types=[str]),
            'mode': OptionDef(required=True, default_value=MODE_MULTI, allowed_types=[str]),
            'parameter': OptionDef(required=True, default_value=PARAM_NONE, allowed_types=[str]),
            'grid': OptionDef(required=True, default_value=[0], allowed_types=[list]),
            'miners': OptionDef(required=True, default_value=DEFAULT_MINERS, allowed_types=[int]),
            'instances': OptionDef(required=True, default_value=DEFAULT_INSTANCES, allowed_types=[int]),
            'seed': OptionDef(required=False, allowed_types=[int]),
            'common_random_numbers': OptionDef(required=True, default_value=True, allowed_types=[bool]),
            'config': _market_definitions(),
        }


class OptionGetter(Protocol):
    """
    Anything :meth:`chainmarket.model.MarketConfig.from_options` can read market values from.
    """
    def option_get(self, name: str) -> Any:
        ...
