import csv
import io
import logging
import math
from typing import List, Optional

from .exception import InstanceFileError, InvalidParamError
from .model import MarketConfig, Miner, Instance, truthful_bid
from .output import OutputFile_Csv, OutputDriver_File

logger = logging.getLogger(__name__)

INSTANCE_COLUMNS = ('id', 's', 'd')
INSTANCE_BID_COLUMN = 'b'


def _number(value: str, column: str, lineno: int, source: str) -> float:
    try:
        ret = float(value)
    except ValueError as e:
        raise InstanceFileError('{}:{}: column "{}" is not a number: "{}"'.format(
            source, lineno, column, value)) from e
    if not math.isfinite(ret):
        raise InstanceFileError('{}:{}: column "{}" is not finite: "{}"'.format(source, lineno, column, value))
    return ret


def parse_instance(text: str, cfg: MarketConfig, source: str = '<string>') -> Instance:
    """
    Parses instance CSV contents. Blank lines and ``#`` lines are skipped.

    :raises: :class:`chainmarket.exception.InstanceFileError`
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith('#')]
    if not lines:
        raise InstanceFileError('{}: missing header'.format(source))
    reader = csv.reader(io.StringIO('\n'.join(lines)))
    header = [h.strip() for h in next(reader)]
    if tuple(header[:3]) != INSTANCE_COLUMNS or header[3:] not in ([], [INSTANCE_BID_COLUMN]):
        raise InstanceFileError('{}: header must be "id,s,d" or "id,s,d,b": "{}"'.format(source, ','.join(header)))
    has_bid = len(header) == 4

    miners: List[Miner] = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise InstanceFileError('{}:{}: expected {} columns, got {}'.format(source, lineno, len(header), len(row)))
        mid = _number(row[0], 'id', lineno, source)
        if not mid.is_integer():
            raise InstanceFileError('{}:{}: id must be an integer: "{}"'.format(source, lineno, row[0]))
        s = _number(row[1], 's', lineno, source)
        d = _number(row[2], 'd', lineno, source)
        try:
            b = _number(row[3], 'b', lineno, source) if has_bid else truthful_bid(s, d, cfg)
            miners.append(Miner(id=int(mid), s=s, d=d, b=b))
        except InvalidParamError as e:
            raise InstanceFileError('{}:{}: {}'.format(source, lineno, e)) from e
    try:
        inst = Instance(cfg, tuple(miners))
    except InvalidParamError as e:
        raise InstanceFileError('{}: {}'.format(source, e)) from e
    logger.debug('read %d miners from %s', len(inst), source)
    return inst


def read_instance(path: str, cfg: Optional[MarketConfig] = None) -> Instance:
    """
    Reads an instance file.

    :param path: CSV file
    :param cfg: market configuration, defaults if None
    :raises: :class:`chainmarket.exception.InstanceFileError`
    """
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            text = f.read()
    except OSError as e:
        raise InstanceFileError('Could not read instance "{}": {}'.format(path, e)) from e
    return parse_instance(text, cfg if cfg is not None else MarketConfig(), source=path)


def instance_file(inst: Instance, filename: Optional[str] = None) -> OutputFile_Csv:
    """
    The instance as an ``id,s,d,b`` CSV output file.
    """
    ret = OutputFile_Csv(filename, INSTANCE_COLUMNS + (INSTANCE_BID_COLUMN,))
    for m in inst.miners:
        ret.append((m.id, m.s, m.d, m.b))
    return ret


def write_instance(inst: Instance, path: str) -> None:
    """
    Writes an instance file readable by :func:`read_instance`.
    """
    OutputDriver_File(path).output(instance_file(inst, path))
