"""Pure-Python probe kernel; reference twin of ``_probe.pyx``."""

from __future__ import annotations


def probe_chain(t, steps, n):
    """Iteratively probe ``steps`` starting from the single binding ``t``.

    Each step is ``(l, r, attr_l, lookup, checks)``: partials look up the
    value of ``attr_l`` on their ``l`` binding in ``lookup`` (a ``dict`` or
    anything with ``.get``) and are extended once per returned tuple.
    ``checks`` lists extra ``(stream, attr_on_stream, attr_on_r)`` equality
    predicates for edges that close a cycle. Partials with no match are
    dropped and probing stops once none are left.

    Returns ``(complete_partials, q, m, s)`` with per-step query, successful
    query and returned-record counts.
    """
    nsteps = len(steps)
    q = [0] * nsteps
    m = [0] * nsteps
    s = [0] * nsteps
    first = [None] * n
    first[t.stream] = t
    frontier = [first]
    for k in range(nsteps):
        l, r, attr_l, lookup, checks = steps[k]
        get = lookup.get
        nxt = []
        qk = mk = sk = 0
        for partial in frontier:
            qk += 1
            bucket = get(partial[l].key_values[attr_l])
            if not bucket:
                continue
            mk += 1
            sk += len(bucket)
            for u in bucket:
                if checks:
                    ukv = u.key_values
                    if not all(partial[o].key_values[ao] == ukv[ar] for o, ao, ar in checks):
                        continue
                ext = partial.copy()
                ext[r] = u
                nxt.append(ext)
        q[k] = qk
        m[k] = mk
        s[k] = sk
        frontier = nxt
        if not frontier:
            break
    return frontier, q, m, s
