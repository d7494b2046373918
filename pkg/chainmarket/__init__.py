from .model import (
    MarketConfig,
    Miner,
    Instance,
    AuctionOutcome,
)

__version__ = "0.3.1"
