"""Cyclic polar codes over GF(q) and spatially-coupled LDPC burst-erasure analysis."""
