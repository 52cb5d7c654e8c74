"""Dueling-game toolkit: minimax strategies, price of competition and factor-revealing bounds."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("duelbench")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
