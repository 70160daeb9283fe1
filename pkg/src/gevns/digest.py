"""
Default checksum implementation using the `cryptography` library.

Provides SHA-256 digests for the artifacts listed in a run manifest.
"""

from .interfaces import ChecksumProvider


class DefaultChecksumProvider(ChecksumProvider):
    """SHA-256 via cryptography's hash primitives."""

    algorithm = "sha256"

    def digest(self, data: bytes) -> str:
        from cryptography.hazmat.primitives import hashes

        h = hashes.Hash(hashes.SHA256())
        h.update(data)
        return h.finalize().hex()


def get_default_checksum_provider() -> ChecksumProvider:
    """Get the default checksum provider."""
    return DefaultChecksumProvider()
