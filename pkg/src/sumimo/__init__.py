"""Link-level simulator for single-user massive MIMO with turbo coding."""
__version__ = "0.1.0"
