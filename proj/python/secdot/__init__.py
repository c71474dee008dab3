"""Secure multi-party gram matrix toolkit."""

from ._secdot import (
    FIELD_MODULUS,
    SecdotError,
    compare,
    cost_model,
    decode_dot,
    dump_scheme,
    encode_real,
    field_inv,
    muladd_decode,
    muladd_encode,
    rbf_from_gram,
    regen,
    run,
)

__all__ = [
    "FIELD_MODULUS",
    "SecdotError",
    "compare",
    "cost_model",
    "decode_dot",
    "dump_scheme",
    "encode_real",
    "field_inv",
    "muladd_decode",
    "muladd_encode",
    "rbf_from_gram",
    "regen",
    "run",
]
