from typing import Any, List, Mapping, Optional, Tuple

from ..exception import OptionError
from ..option import Option


def OptionsCheckDefinitions(defined_options: Optional[Mapping[Any, Any]],
                            options: Optional[Mapping[Any, Any]]) -> None:
    """
    Checks that every key set in *options* is declared in *defined_options*, walking nested sections
    such as the ``config`` mapping of a sweep spec.

    :raises: :class:`chainmarket.exception.OptionError`
    """
    if defined_options is None or options is None:
        return

    pending: List[Tuple[str, Mapping[Any, Any], Mapping[Any, Any]]] = [('', defined_options, options)]
    while pending:
        prefix, section, values = pending.pop()
        for oname, ovalue in values.items():
            path = '{}{}'.format(prefix, oname)
            if oname not in section:
                raise OptionError('Unknown option: "{}", expected one of: {}'.format(
                    path, ', '.join(sorted(str(k) for k in section))))
            if isinstance(section[oname], Option):
                continue
            if not isinstance(ovalue, Mapping):
                raise OptionError('Option "{}" must be a mapping'.format(path))
            pending.append(('{}.'.format(path), section[oname], ovalue))
