"""Exception hierarchy shared by every blindpad module."""


class BlindPadError(Exception):
    """Base class for all errors raised by blindpad."""


# arithmetic / sampling
class InvalidModulusError(BlindPadError, ValueError):
    pass


class NoInverseError(BlindPadError, ValueError):
    pass


class EmptyRangeError(BlindPadError, ValueError):
    pass


# ciphers
class CapacityError(BlindPadError, ValueError):
    """More ciphertexts requested than distinct nonzero residues exist (L > p - 1)."""


class EmptyBatchError(BlindPadError, ValueError):
    pass


class DegenerateSystemError(BlindPadError, ValueError):
    """Two plaintext/ciphertext pairs share a residue mod p, so the key is underdetermined."""


class InvalidCiphertextError(BlindPadError, ValueError):
    pass


class ModulusMismatchError(BlindPadError, ValueError):
    """A pad key was applied to a value living in a different modulus."""


# protocol
class ProtocolError(BlindPadError):
    """Generic protocol misuse: wrong arity, unknown session, bad phase."""


class SessionStateError(ProtocolError):
    pass


class SelectionError(ProtocolError, IndexError):
    pass


class MalformedBatchError(ProtocolError):
    pass


class InvalidRequestError(ProtocolError):
    pass


class CorruptedResponseError(ProtocolError):
    pass


class SingleUseViolation(ProtocolError):
    """The session's key material has already served its one decryption."""


# verifier
class VerificationBoundError(BlindPadError, ValueError):
    pass


# wire / storage
class MalformedFrameError(ProtocolError):
    pass


class EncodingError(BlindPadError, ValueError):
    pass


class KeystoreError(BlindPadError):
    """A keystore file is corrupt or fails validation."""
