"""Hardy- and Cabello-type nonlocality arguments for n spin-s particles."""

__version__ = "0.1.0"
