"""Detector implementations; importing this package registers every rule."""

from smelter import history  # noqa: F401
from smelter.detectors import elixir_design, elixir_lowlevel, traditional  # noqa: F401
