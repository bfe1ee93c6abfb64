"""Audit toolkit: quantify gender-stereotype structure in movie-rating
corpora and measure the gender-inference risk it creates."""

__version__ = "0.1.0"
