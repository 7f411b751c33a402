import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("repo", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def generations():
    from favard_lab.cantor import build_generation

    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = build_generation(n)
        return cache[n]

    return get
