"""gevns tests package."""
