"""smelter: a code smell analyzer for Elixir projects."""

__version__ = "0.1.0"
