"""Numerical toolkit for majorants, h-Beurling-Carleson sets and harmonic measure on Joukowski-Privalov domains."""
