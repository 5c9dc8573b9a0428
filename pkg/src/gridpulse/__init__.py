"""gridpulse: localize and trace oscillation events over a PMU network."""

__version__ = "0.1.0"
