"""gridflow: generative visual reasoning on procedurally generated puzzles."""

__version__ = "0.1.0"
