"""RF baseband dataset synthesizer and transmission-channel simulator."""

__version__ = "0.1.0"
