"""Convex hulls of unitary orbits: metric criteria, certificates, support oracles."""
