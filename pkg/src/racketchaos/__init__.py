"""Constructive chaos for the bouncing ball on a periodically moving racket."""
