"""Trainable linkers: text rendering, kernels, model."""
