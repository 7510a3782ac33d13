"""Extended-state-observer disturbance rejection lab with a learning feedforward."""

__version__ = "0.1.0"
