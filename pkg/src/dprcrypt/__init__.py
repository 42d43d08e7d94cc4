"""AES core and a simulator for a self-reconfiguring AES coprocessor fabric."""

from dprcrypt.aes_core import (
    AES128,
    AES192,
    AES256,
    CipherVariant,
    KeySchedule,
    decrypt_block,
    encrypt_block,
    key_expansion,
)

__version__ = "0.1.0"

__all__ = [
    "AES128",
    "AES192",
    "AES256",
    "CipherVariant",
    "KeySchedule",
    "decrypt_block",
    "encrypt_block",
    "key_expansion",
]
