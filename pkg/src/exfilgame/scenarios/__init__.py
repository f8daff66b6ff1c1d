"""Bundled scenario files (``table1``, ``variance_symmetric``, ``variance_single``)."""
