"""Open-ended question feedback service with hidden grading criteria."""

__version__ = "0.1.0"
