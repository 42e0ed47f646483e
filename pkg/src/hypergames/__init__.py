"""Game-based model checking for HyperLTL on finite Kripke structures."""

__version__ = "0.1.0"

KS_FORMAT_VERSION = 1
FORMULA_FORMAT_VERSION = 1
PROPHECY_FORMAT_VERSION = 1
CERTIFICATE_FORMAT_VERSION = 1
VIEW_FORMAT_VERSION = 1
