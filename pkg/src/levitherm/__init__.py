"""Internal-energy thermalization of a levitated nanoparticle in a thermal field."""

__version__ = "0.1.0"
