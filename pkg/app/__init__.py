"""interdict command-line application."""
