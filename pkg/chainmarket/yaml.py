import yaml

import numpy as np


def _represent_float(dumper: yaml.Dumper, data):
    return dumper.represent_float(float(data))


def _represent_int(dumper: yaml.Dumper, data):
    return dumper.represent_int(int(data))


def _represent_tuple(dumper: yaml.Dumper, data):
    return dumper.represent_list(list(data))


class YamlDumperBase(yaml.Dumper):
    """
    YAML dumper that writes numpy scalars and tuples as plain YAML values.
    """
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)

        # https://stackoverflow.com/questions/51272814/python-yaml-dumping-pointer-references
        self.ignore_aliases = lambda *args: True

        self.add_multi_representer(np.floating, _represent_float)
        self.add_multi_representer(np.integer, _represent_int)
        self.add_representer(np.bool_, lambda dumper, data: dumper.represent_bool(bool(data)))
        self.add_representer(tuple, _represent_tuple)
