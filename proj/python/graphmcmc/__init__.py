"""Python bindings for the graph-accelerated MCMC core.

The compiled module normally lives inside this package (installed wheels).
For in-tree use, point GRAPHMCMC_CORE_DIR at the directory holding the built
extension and put this package on PYTHONPATH.
"""

import glob
import importlib.util
import os


def _load_core():
    try:
        from . import _core  # type: ignore[attr-defined]

        return _core
    except ImportError:
        pass
    core_dir = os.environ.get("GRAPHMCMC_CORE_DIR")
    if not core_dir:
        raise ImportError(
            "graphmcmc._core is not built; install the package or set "
            "GRAPHMCMC_CORE_DIR to the directory containing the extension"
        )
    candidates = sorted(
        glob.glob(os.path.join(core_dir, "_core*.so"))
        + glob.glob(os.path.join(core_dir, "_core*.pyd"))
    )
    if not candidates:
        raise ImportError(f"no _core extension found in {core_dir}")
    spec = importlib.util.spec_from_file_location("graphmcmc._core", candidates[0])
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


_core = _load_core()

splitmix64 = _core.splitmix64
Rng = _core.Rng
Target = _core.Target
GmmTarget = _core.GmmTarget
BananaTarget = _core.BananaTarget
autocorrelation = _core.autocorrelation
effective_sample_size = _core.effective_sample_size
SampleGraph = _core.SampleGraph
build_graph = _core.build_graph

__all__ = [
    "splitmix64",
    "Rng",
    "Target",
    "GmmTarget",
    "BananaTarget",
    "autocorrelation",
    "effective_sample_size",
    "SampleGraph",
    "build_graph",
]
