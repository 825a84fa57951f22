"""Photon-cost optimization for sequential GHZ-state generation."""
