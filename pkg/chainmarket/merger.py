import copy
from typing import Any, Mapping, Dict

import deepmerge  # type: ignore

from .private.merger import option_check_key_exist, option_type_conflict

MergerNoCreate = deepmerge.Merger(
    [
        (list, "append"),
        (dict, [option_check_key_exist, "merge"]),
    ],
    ['override'], [option_type_conflict]
)
"""A dict merger that doesn't allow dict key creation, based on the :mod:`deepmerge` module."""


def merge_overrides(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Merges *overrides* on a copy of *base* using :data:`MergerNoCreate`.

    :param base: the current values
    :param overrides: the values to change, only keys existing in *base* are allowed
    :return: the merged values
    :raises: :class:`chainmarket.exception.OptionError`
    :raises: :class:`chainmarket.exception.MergeError`
    """
    return MergerNoCreate.merge(copy.deepcopy(dict(base)), copy.deepcopy(dict(overrides)))
