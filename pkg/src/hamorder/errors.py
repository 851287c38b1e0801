"""Shared exception types."""


class FormatError(ValueError):
    """A file on disk does not conform to one of the supported formats.

    Raised for malformed corpus lines, bad magic bytes, truncated payloads
    and invalid stored values. Distinct from plain ValueError so the CLI can
    map file problems to its I/O exit code.
    """
