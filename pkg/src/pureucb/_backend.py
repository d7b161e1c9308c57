"""Backend selection: compiled kernel when importable, else pure Python.

Set PUREUCB_BACKEND=python to force the fallback (used by the benchmark
and the cross-backend tests); PUREUCB_BACKEND=compiled makes a missing
extension a hard error instead of a silent fallback.
"""

import os

_forced = os.environ.get("PUREUCB_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _fallback as impl
elif _forced == "compiled":
    from . import _kernel as impl  # ImportError here is intentional
else:
    try:
        from . import _kernel as impl
    except ImportError:
        from . import _fallback as impl

BACKEND = impl.BACKEND_NAME
