"""Classical S-unit toolkit: approximate ideal lattices, the HSP oracle and applications."""

__version__ = "0.1.0"
