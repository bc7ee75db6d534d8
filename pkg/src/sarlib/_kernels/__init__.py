"""Backend selection for the hot solver kernel.

The compiled Cython kernel is preferred when importable; the numpy fallback
implements the identical algorithm. Set ``SAR_BACKEND=python`` to force the
fallback or ``SAR_BACKEND=compiled`` to insist on the extension (raises if it
is unavailable). Both backends are deterministic; across backends the solver
results agree to float rounding, not bit for bit.
"""

import os

_requested = os.environ.get("SAR_BACKEND", "").strip().lower()

HAVE_COMPILED = False
if _requested != "python":
    try:
        from ._svr_cy import svr_solve as _compiled_svr_solve

        HAVE_COMPILED = True
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "SAR_BACKEND=compiled but the compiled kernel is not built; "
                "reinstall with Cython and a C compiler available"
            )

from ._svr_py import svr_solve as _python_svr_solve  # noqa: E402

if HAVE_COMPILED:
    svr_solve = _compiled_svr_solve
    BACKEND = "compiled"
else:
    svr_solve = _python_svr_solve
    BACKEND = "python"

python_svr_solve = _python_svr_solve
compiled_svr_solve = _compiled_svr_solve if HAVE_COMPILED else None

__all__ = ["svr_solve", "python_svr_solve", "compiled_svr_solve", "BACKEND",
           "HAVE_COMPILED"]
