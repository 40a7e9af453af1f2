"""Configuration unit tests package."""
