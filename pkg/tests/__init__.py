"""fastweb test suite package."""
