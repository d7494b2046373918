import numbers

import deepmerge  # type: ignore

from ..exception import OptionError, MergeError


def option_check_key_exist(config, path, base, nxt):
    unknown = sorted(str(k) for k in nxt.keys() if k not in base)
    if unknown:
        raise OptionError('Unknown option: "{}"'.format(
            '", "'.join('.'.join(path + [k]) for k in unknown)))
    return deepmerge.STRATEGY_END


def option_type_conflict(config, path, base, nxt):
    # an int parameter may be replaced by a float and back, nothing else changes type
    if isinstance(base, numbers.Real) and isinstance(nxt, numbers.Real) \
            and not isinstance(base, bool) and not isinstance(nxt, bool):
        return nxt
    raise MergeError('Cannot replace {} value {} of "{}" with {}'.format(
        type(base).__name__, repr(base), '.'.join(path) or '<root>', repr(nxt)))
