"""Diffusion-guided symbolic regression package."""
