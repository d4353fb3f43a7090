"""Best-response dynamics in player-specific singleton congestion games."""

__version__ = "0.1.0"
