"""Backend selection for the Monte Carlo inner loops.

The compiled extension is preferred; the numpy implementation is used when
it is missing. ``CRS_BACKEND`` forces a choice: ``cython`` (fail if the
extension is not built), ``python``, or ``auto`` (default).
"""
import importlib
import os

from . import _pykernels

_NAMES = ("gaussian_to_sphere", "zonal_proposal", "complement_lift",
          "eval_monomials", "abs_power")


def available_backends():
    names = ["python"]
    try:
        importlib.import_module("crsphere._ckernels")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def load_backend(name):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("crsphere._ckernels")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    choice = os.environ.get("CRS_BACKEND", "auto").lower()
    if choice == "auto":
        try:
            return "cython", load_backend("cython")
        except ImportError:
            return "python", _pykernels
    return choice, load_backend(choice)


BACKEND, _impl = _select()

gaussian_to_sphere = _impl.gaussian_to_sphere
zonal_proposal = _impl.zonal_proposal
complement_lift = _impl.complement_lift
eval_monomials = _impl.eval_monomials
abs_power = _impl.abs_power
