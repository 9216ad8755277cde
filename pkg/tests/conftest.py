import importlib

import pytest

from schifferlab import _pykernels

_MODULES = ("geom2d", "specfun", "verify", "nodal")


def _compiled():
    try:
        return importlib.import_module("schifferlab._ckernels")
    except ImportError:
        return None


@pytest.fixture(params=["python", "cython"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend by rebinding ``kernels`` in each module."""
    if request.param == "python":
        impl = _pykernels
    else:
        impl = _compiled()
        if impl is None:
            pytest.skip("compiled kernels not built")
    for name in _MODULES:
        monkeypatch.setattr(importlib.import_module(f"schifferlab.{name}"), "kernels", impl)
    return request.param
