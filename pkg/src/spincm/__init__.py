"""spincm: exact construction and verification of generalised spin
Calogero-Moser operators by parabolic restriction of Cherednik-algebra
representations, with commuting-integral, gauge, and Yangian checks."""

__version__ = "0.1.0"
