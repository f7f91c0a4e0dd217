# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled probe kernel; same contract as ``probe_py.probe_chain``."""

from cpython.dict cimport PyDict_GetItem
from cpython.object cimport PyObject


def probe_chain(t, list steps, Py_ssize_t n):
    cdef Py_ssize_t nsteps = len(steps)
    cdef list q = [0] * nsteps
    cdef list m = [0] * nsteps
    cdef list s = [0] * nsteps
    cdef list first = [None] * n
    cdef list frontier, nxt, partial, ext
    cdef tuple step, chk
    cdef Py_ssize_t k, l, r, qk, mk, sk, blen
    cdef object attr_l, lookup, checks, bucket, key, u, ukv
    cdef PyObject* found
    cdef bint is_dict, ok

    first[t.stream] = t
    frontier = [first]
    for k in range(nsteps):
        step = <tuple>steps[k]
        l = step[0]
        r = step[1]
        attr_l = step[2]
        lookup = step[3]
        checks = step[4]
        is_dict = type(lookup) is dict
        nxt = []
        qk = 0
        mk = 0
        sk = 0
        for partial in frontier:
            qk += 1
            key = partial[l].key_values[attr_l]
            if is_dict:
                found = PyDict_GetItem(<dict>lookup, key)
                if found is NULL:
                    continue
                bucket = <object>found
            else:
                bucket = lookup.get(key)
                if bucket is None:
                    continue
            blen = len(bucket)
            if blen == 0:
                continue
            mk += 1
            sk += blen
            for u in bucket:
                if checks:
                    ukv = u.key_values
                    ok = True
                    for chk in checks:
                        if partial[chk[0]].key_values[chk[1]] != ukv[chk[2]]:
                            ok = False
                            break
                    if not ok:
                        continue
                ext = list(partial)
                ext[r] = u
                nxt.append(ext)
        q[k] = qk
        m[k] = mk
        s[k] = sk
        frontier = nxt
        if not frontier:
            break
    return frontier, q, m, s
