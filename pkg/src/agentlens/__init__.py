"""agentlens: post-hoc explanation engine for AI coding-agent edit sessions."""

__version__ = "0.1.0"
