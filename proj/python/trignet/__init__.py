"""Tripartite-graph personality detection: python surface over the C++ core."""

try:
    from ._trignet import *  # noqa: F401,F403  (installed package layout)
    from ._trignet import __doc__ as _core_doc
except ImportError:  # in-tree builds put the module on PYTHONPATH directly
    from _trignet import *  # noqa: F401,F403
    from _trignet import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
