from typing import Any, Dict, Mapping, Optional, Sequence

import yaml

from .exception import NotSupportedError, ConfigFileError
from .model import MarketConfig
from .options import MarketOptions
from .util import dict_flatten, format_number
from .yaml import YamlDumperBase


class ConfigFileOutput:
    """
    Configuration contents tagged with their shape, so a renderer can tell whether it can write them.
    """
    value: Any

    def __init__(self, value: Any):
        self.value = value


class ConfigFileOutput_Dict(ConfigFileOutput):
    """
    A possibly nested mapping of configuration values.
    """
    pass


class ConfigFileRender:
    """
    Writes :class:`ConfigFileOutput` contents as text. This base class accepts nothing.
    """
    def supports(self, value: ConfigFileOutput) -> bool:
        """
        Whether :func:`render` accepts *value*.
        """
        return False

    def render(self, value: ConfigFileOutput) -> str:
        """
        Text of *value*.

        :raises: :class:`chainmarket.exception.NotSupportedError` when :func:`supports` is False
        """
        raise NotSupportedError('No renderer for configuration contents: "{}"'.format(repr(value)))


class ConfigFileRender_Dict(ConfigFileRender):
    """
    Base of renderers for :class:`ConfigFileOutput_Dict` contents.
    """
    def render_dict(self, value: Mapping) -> str:
        raise NotImplementedError()

    def supports(self, value: ConfigFileOutput) -> bool:
        return isinstance(value, ConfigFileOutput_Dict)

    def render(self, value: ConfigFileOutput) -> str:
        if not self.supports(value):
            return super().render(value)
        return self.render_dict(value.value)


class ConfigFileRender_KeyValue(ConfigFileRender_Dict):
    """
    Flat ``key = value`` lines, the format read by :func:`parse_keyvalue`. Nested dicts are flattened
    with *separator*; keys found in *descriptions* get a ``#`` comment line above them.
    """
    separator: str
    descriptions: Mapping[str, str]

    def __init__(self, separator: str = '.', descriptions: Optional[Mapping[str, str]] = None):
        self.separator = separator
        self.descriptions = descriptions if descriptions is not None else {}

    def render_dict(self, value: Mapping) -> str:
        lines = []
        for key, item in dict_flatten(value, sep=self.separator).items():
            if key in self.descriptions:
                lines.append('# {}'.format(self.descriptions[key]))
            lines.append('{} = {}'.format(key, format_number(item)))
        return '\n'.join(lines) + '\n'


class ConfigFileRender_Yaml(ConfigFileRender_Dict):
    """
    A YAML mapping in insertion order. Also renders the mapping documents of
    :class:`chainmarket.output.OutputFile_Yaml`, such as probe reports.
    """
    def render_dict(self, value: Mapping) -> str:
        return yaml.dump(dict(value), Dumper=YamlDumperBase, default_flow_style=False, sort_keys=False)


def parse_keyvalue(text: str, source: str = '<string>') -> Dict[str, str]:
    """
    Parses flat ``key = value`` lines. Blank lines and ``#`` comments are ignored.

    :param text: file contents
    :param source: name used in error messages
    :return: the raw string values
    :raises: :class:`chainmarket.exception.ConfigFileError`
    """
    ret: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigFileError('{}:{}: expected "key = value": "{}"'.format(source, lineno, line))
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigFileError('{}:{}: empty key'.format(source, lineno))
        if key in ret:
            raise ConfigFileError('{}:{}: duplicated key "{}"'.format(source, lineno, key))
        ret[key] = value
    return ret


def parse_overrides(items: Sequence[str]) -> Dict[str, str]:
    """
    Parses ``KEY=VALUE`` command line overrides. Later items win.

    :raises: :class:`chainmarket.exception.ConfigFileError`
    """
    ret: Dict[str, str] = {}
    for item in items:
        if '=' not in item:
            raise ConfigFileError('Override must be "KEY=VALUE": "{}"'.format(item))
        key, value = (part.strip() for part in item.split('=', 1))
        if not key:
            raise ConfigFileError('Override has an empty key: "{}"'.format(item))
        ret[key] = value
    return ret


def read_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> MarketConfig:
    """
    Reads a market configuration file and applies overrides on top of it. Missing keys keep their
    defaults.

    :param path: key=value file, or None for defaults
    :param overrides: values that replace the file values
    :raises: :class:`chainmarket.exception.ConfigFileError`
    :raises: :class:`chainmarket.exception.OptionError` on unknown keys
    :raises: :class:`chainmarket.exception.ConfigError` on invalid values
    """
    cfg = MarketConfig()
    if path is not None:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigFileError('Could not read config "{}": {}'.format(path, e)) from e
        cfg = cfg.with_overrides(parse_keyvalue(text, source=path))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def render_config(cfg: MarketConfig, renderer: Optional[ConfigFileRender] = None) -> str:
    """
    Renders a market configuration, by default as ``key = value`` lines commented with the option
    descriptions of :class:`chainmarket.options.MarketOptions`.
    """
    if renderer is None:
        descriptions = {name: definition.description
                        for name, definition in MarketOptions().define_options().items()
                        if definition.description}
        renderer = ConfigFileRender_KeyValue(descriptions=descriptions)
    return renderer.render(ConfigFileOutput_Dict(cfg.to_dict()))
