from typing import NewType

TMechanism = NewType('TMechanism', str)
"""Mechanism name type for the :class:`chainmarket.mechanism.Mechanism` class."""

TDemandMode = NewType('TDemandMode', str)
"""Demand generation mode for :func:`chainmarket.simlab.gen_instance`."""

TSweepParameter = NewType('TSweepParameter', str)
"""Name of the parameter swept by a :class:`chainmarket.simlab.SweepSpec`."""
