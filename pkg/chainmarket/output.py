import os
import sys
from typing import Any, List, Mapping, Optional, Sequence, TextIO

import yaml

from .configfile import ConfigFileOutput_Dict, ConfigFileRender_Yaml
from .exception import InvalidOperationError
from .util import format_number
from .yaml import YamlDumperBase


class OutputFile:
    """
    Result document assembled piece by piece and rendered by :func:`to_string`. Pieces that are
    None are skipped.

    :param filename: target file name, None when written to standard output
    """
    filename: Optional[str]
    data: List[Any]

    def __init__(self, filename: Optional[str] = None):
        self.filename = filename
        self.data = []

    def append(self, data: Any) -> None:
        self.data.append(data)

    def file_newline(self) -> Optional[str]:
        """*newline* argument of :func:`open`."""
        return None

    def file_encoding(self) -> str:
        """*encoding* argument of :func:`open`."""
        return 'utf-8'

    def pieces(self) -> List[Any]:
        return [d for d in self.data if d is not None]

    def to_string(self) -> str:
        return '\n'.join(d if isinstance(d, str) else repr(d) for d in self.pieces())


class OutputFile_Csv(OutputFile):
    """
    A comma separated file with a header. Rows are sequences of values; numbers are written by
    :func:`chainmarket.util.format_number`. Strings appended with :func:`comment` are written as
    ``#`` lines after the rows.

    :param filename: file name
    :param header: column names
    """
    header: Sequence[str]
    comments: List[str]

    def __init__(self, filename: Optional[str], header: Sequence[str]):
        super().__init__(filename)
        self.header = tuple(header)
        self.comments = []

    def file_newline(self) -> Optional[str]:
        return '\n'

    def append(self, data: Any) -> None:
        if len(data) != len(self.header):
            raise InvalidOperationError('Row has {} values, header has {}'.format(len(data), len(self.header)))
        super().append(data)

    def comment(self, text: str) -> None:
        self.comments.append(text)

    def to_string(self) -> str:
        ret = [','.join(self.header)]
        for row in self.data:
            ret.append(','.join(format_number(v) for v in row))
        for c in self.comments:
            ret.append('# {}'.format(c))
        return '\n'.join(ret) + '\n'


class OutputFile_Yaml(OutputFile):
    """
    A YAML stream; each appended mapping or list is one document. Mappings are written by
    :class:`chainmarket.configfile.ConfigFileRender_Yaml`.
    """
    def _document(self, d: Any) -> str:
        if isinstance(d, Mapping):
            return ConfigFileRender_Yaml().render(ConfigFileOutput_Dict(d)).rstrip('\n')
        if isinstance(d, list):
            return yaml.dump(d, Dumper=YamlDumperBase, default_flow_style=False, sort_keys=False).rstrip('\n')
        return str(d)

    def to_string(self) -> str:
        return '\n---\n'.join(self._document(d) for d in self.pieces()) + '\n'


class OutputDriver:
    """
    Destination of rendered :class:`OutputFile` objects.
    """
    def write_file(self, file: OutputFile, filecontents: str) -> None:
        raise NotImplementedError()

    def output(self, file: OutputFile) -> None:
        self.write_file(file, file.to_string())


class OutputDriver_Print(OutputDriver):
    """
    An :class:`OutputDriver` that writes the raw file contents to a stream, standard output by default.
    """
    stream: Optional[TextIO]

    def __init__(self, stream: Optional[TextIO] = None):
        self.stream = stream

    def write_file(self, file: OutputFile, filecontents: str) -> None:
        stream = self.stream if self.stream is not None else sys.stdout
        stream.write(filecontents)
        stream.flush()


class OutputDriver_File(OutputDriver):
    """
    An :class:`OutputDriver` that writes files to disk, creating the parent directory if needed.

    :param path: output path; when None, the file name of each file is used
    """
    path: Optional[str]

    def __init__(self, path: Optional[str] = None):
        self.path = path

    def write_file(self, file: OutputFile, filecontents: str) -> None:
        outfilename = self.path if self.path is not None else file.filename
        if outfilename is None:
            raise InvalidOperationError('Output file has no name')
        parent = os.path.dirname(outfilename)
        if parent and not os.path.exists(parent):
            os.makedirs(parent)
        with open(outfilename, 'w', newline=file.file_newline(), encoding=file.file_encoding()) as f:
            f.write(filecontents)


def output_driver(path: Optional[str]) -> OutputDriver:
    """
    Driver for an optional output path: a file driver, or standard output for None and ``-``.
    """
    if path is None or path == '-':
        return OutputDriver_Print()
    return OutputDriver_File(path)
