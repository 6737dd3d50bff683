import os
import sys

# Under ctest the module under test is the one in the build tree; an editable
# install would otherwise shadow it through its import hook.
_build = os.environ.get("MMLAB_EXPECT_BUILD_DIR")
if _build:
    sys.meta_path[:] = [f for f in sys.meta_path if not type(f).__module__.startswith("_editable_skbc_mmlab")]
    sys.path.insert(0, _build)


def pytest_report_header(config):
    import mmlab

    return f"mmlab core: {mmlab._core.__file__}"
