# cython: boundscheck=False, wraparound=False, cdivision=True
"""Dense integer polynomial kernels, compiled backend.

Same contract as qtoda._kernels_py. Coefficients that fit comfortably in
int64 take a C fast path; anything larger falls back to PyObject arithmetic
(still loop-compiled). Overflow safety: the fast path requires
max|a| * max|b| * min(len) < 2**62, so every accumulated sum stays in range.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc

BACKEND = "cy"

_PROBE_LIMIT = 1 << 61  # per-coefficient probe bound
_SUM_LIMIT = 1 << 62


cdef inline object _probe_max(list a):
	# returns max|coeff| as a Python int, or None if any entry is huge
	cdef Py_ssize_t i, n = len(a)
	cdef object x, m = 0
	for i in range(n):
		x = a[i]
		if x < 0:
			x = -x
		if x > m:
			m = x
		if m > _PROBE_LIMIT:
			return None
	return m


cdef list _mul_obj(list a, list b, Py_ssize_t lo, Py_ssize_t hi):
	cdef Py_ssize_t la = len(a), lb = len(b), i, j, jmin, jmax
	cdef list out = [0] * (hi - lo + 1)
	cdef object ai
	for i in range(la):
		ai = a[i]
		if not ai:
			continue
		jmin = lo - i
		if jmin < 0:
			jmin = 0
		jmax = hi - i
		if jmax > lb - 1:
			jmax = lb - 1
		for j in range(jmin, jmax + 1):
			if b[j]:
				out[i + j - lo] = out[i + j - lo] + ai * b[j]
	return out


cdef list _mul_i64(list a, list b, Py_ssize_t lo, Py_ssize_t hi):
	cdef Py_ssize_t la = len(a), lb = len(b), i, j, jmin, jmax, n = hi - lo + 1
	cdef long long *ca = <long long *> PyMem_Malloc(la * sizeof(long long))
	cdef long long *cb = <long long *> PyMem_Malloc(lb * sizeof(long long))
	cdef long long *co = <long long *> PyMem_Malloc(n * sizeof(long long))
	if ca == NULL or cb == NULL or co == NULL:
		PyMem_Free(ca); PyMem_Free(cb); PyMem_Free(co)
		raise MemoryError()
	cdef long long ai
	try:
		for i in range(la):
			ca[i] = a[i]
		for j in range(lb):
			cb[j] = b[j]
		for i in range(n):
			co[i] = 0
		for i in range(la):
			ai = ca[i]
			if ai == 0:
				continue
			jmin = lo - i
			if jmin < 0:
				jmin = 0
			jmax = hi - i
			if jmax > lb - 1:
				jmax = lb - 1
			for j in range(jmin, jmax + 1):
				co[i + j - lo] += ai * cb[j]
		return [co[i] for i in range(n)]
	finally:
		PyMem_Free(ca)
		PyMem_Free(cb)
		PyMem_Free(co)


cdef bint _fast_ok(list a, list b):
	cdef object ma = _probe_max(a)
	if ma is None:
		return False
	cdef object mb = _probe_max(b)
	if mb is None:
		return False
	cdef Py_ssize_t k = len(a) if len(a) < len(b) else len(b)
	return ma * mb * k < _SUM_LIMIT


def poly_mul(list a, list b):
	cdef Py_ssize_t la = len(a), lb = len(b)
	if la == 0 or lb == 0:
		return []
	if _fast_ok(a, b):
		return _mul_i64(a, b, 0, la + lb - 2)
	return _mul_obj(a, b, 0, la + lb - 2)


def poly_mul_clip(list a, list b, lo, hi):
	cdef Py_ssize_t clo = lo, chi = hi
	if chi < clo:
		return []
	if len(a) == 0 or len(b) == 0:
		return [0] * (chi - clo + 1)
	if _fast_ok(a, b):
		return _mul_i64(a, b, clo, chi)
	return _mul_obj(a, b, clo, chi)
