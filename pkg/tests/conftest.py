import random

import pytest

from dprcrypt.aes_core import AES128, AES192, AES256

ALL_VARIANTS = (AES128, AES192, AES256)


@pytest.fixture
def rng():
    return random.Random(0xAE5)


@pytest.fixture(params=ALL_VARIANTS, ids=lambda v: v.name)
def variant(request):
    return request.param
