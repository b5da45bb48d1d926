"""Symbolic-numeric toolkit for variable-coefficient nonlinear reaction-diffusion equations."""
