import importlib

import pytest

from qgrowth._kernels import _pure

try:
    _ckernels = importlib.import_module("qgrowth._kernels._ckernels")
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pure, id="python")]
BACKENDS.append(pytest.param(_ckernels, id="cython", marks=pytest.mark.skipif(
    _ckernels is None, reason="compiled kernels not built")))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    """Each kernel implementation in turn."""
    return request.param
