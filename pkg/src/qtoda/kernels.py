"""Kernel backend selection.

Imports the compiled polynomial kernels when the extension built, otherwise
the pure-Python twin. `QTODA_KERNELS=py` forces the fallback, `=cy` insists on
the compiled backend (raising if it is absent); anything else means "auto".
"""

from __future__ import annotations

import os

_choice = os.environ.get("QTODA_KERNELS", "auto")

if _choice == "py":
	from . import _kernels_py as _impl
elif _choice == "cy":
	from . import _kernels_cy as _impl  # type: ignore[no-redef]
else:
	try:
		from . import _kernels_cy as _impl  # type: ignore[no-redef]
	except ImportError:
		from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
poly_mul = _impl.poly_mul
poly_mul_clip = _impl.poly_mul_clip
