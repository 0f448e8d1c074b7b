# Under ctest, test the module just built rather than whatever is installed.
import glob
import importlib.util
import os
import sys

_dir = os.environ.get("SPDE_PYTHON_MODULE_DIR")
if _dir:
    (_path,) = glob.glob(os.path.join(_dir, "spdemoments*.so"))
    _spec = importlib.util.spec_from_file_location("spdemoments", _path)
    _mod = importlib.util.module_from_spec(_spec)
    _spec.loader.exec_module(_mod)
    sys.modules["spdemoments"] = _mod
