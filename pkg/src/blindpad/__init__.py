"""Information-theoretic symmetric blind decryption.

A two-element key pad over Z_{p^2} wrapped in an additive one-time pad,
run as a three-party protocol (Encryptor, Alice, Decryptor) in which each
key bundle serves a single blind decryption.
"""

from .errors import BlindPadError
from .numcore import PrimeModulus, RandomSource
from .outerpad import OuterKey, otp_decrypt, otp_encrypt, otp_gen
from .protocol import (
    AliceView,
    BlindRequest,
    BlindResponse,
    CiphertextBatch,
    DecryptorView,
    EncryptorView,
    ErrorReply,
    SessionKeyMaterial,
    alice_finish,
    alice_receive,
    alice_request,
    dealer_issue,
    decryptor_respond,
    encryptor_publish,
)
from .twopad import TwoPadKey, decrypt, encrypt, encrypt_batch, gen, map_ciphertext, recover_key

__version__ = "0.1.0"
