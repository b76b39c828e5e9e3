"""Hamburger moment problem toolkit."""
