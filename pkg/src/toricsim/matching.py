"""Exact minimum-weight perfect matching on the anyon graph.

The solver is the classic O(n^3) blossom algorithm for maximum-weight
matching (primal-dual with blossom shrinking, per Galil's survey), restated
over flat arrays so it JIT-compiles.  Minimum-weight perfect matching on a
complete graph is obtained by maximising the reflected weights
``max(w) - w`` under the maximum-cardinality rule.

``brute_force_matching`` enumerates all (n-1)!! pairings and serves as the
independent oracle for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit


class MatchingError(ValueError):
    pass


@dataclass(frozen=True)
class MatchingGraph:
    """Dense symmetric weights over an even set of vertices."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise MatchingError("weight matrix must be square")
        if w.shape[0] > 1 and not np.array_equal(w, w.T):
            raise MatchingError("weight matrix must be symmetric")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Matching:
    """A perfect matching: disjoint vertex pairs covering every vertex."""

    pairs: tuple[tuple[int, int], ...]
    total_weight: float


# ---------------------------------------------------------------------------
# blossom kernel helpers (vertices 0..n-1, blossom slots n..2n-1)


@njit(cache=True)
def _bl_slack(k, eu, ev, ew, dualvar):
    return dualvar[eu[k]] + dualvar[ev[k]] - 2.0 * ew[k]


@njit(cache=True)
def _bl_leaves(b, n, childs, childcount, out, stack):
    # Collect the vertices inside blossom b (b itself if b is a vertex).
    cnt = 0
    top = 0
    stack[top] = b
    top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        if x < n:
            out[cnt] = x
            cnt += 1
        else:
            for i in range(childcount[x] - 1, -1, -1):
                stack[top] = childs[x, i]
                top += 1
    return cnt


@njit(cache=True)
def _bl_assign_label(
    w0, t0, p0, n, endpoint, mate, label, labelend, bestedge, inblossom,
    blossombase, childs, childcount, queue, qtail, leaves, lstack,
):
    # Label vertex/blossom; a T label immediately labels the mate S (loop
    # replaces the tail recursion).
    w, t, p = w0, t0, p0
    while True:
        b = inblossom[w]
        label[w] = t
        label[b] = t
        labelend[w] = p
        labelend[b] = p
        bestedge[w] = -1
        bestedge[b] = -1
        if t == 1:
            cnt = _bl_leaves(b, n, childs, childcount, leaves, lstack)
            for i in range(cnt):
                queue[qtail[0]] = leaves[i]
                qtail[0] += 1
            return
        base = blossombase[b]
        w = endpoint[mate[base]]
        t = 1
        p = mate[base] ^ 1


@njit(cache=True)
def _bl_scan_blossom(v0, w0, endpoint, mate, label, labelend, inblossom,
                     blossombase, pathbuf):
    # Walk both alternating paths toward their roots, dropping breadcrumb
    # marks (bit 4 on the label); the first marked blossom met is the LCA.
    v, w = v0, w0
    npath = 0
    base = -1
    while v != -1 or w != -1:
        b = inblossom[v]
        if label[b] & 4:
            base = blossombase[b]
            break
        pathbuf[npath] = b
        npath += 1
        label[b] = 5
        if labelend[b] == -1:
            v = -1
        else:
            v = endpoint[labelend[b]]
            b = inblossom[v]
            v = endpoint[labelend[b]]
        if w != -1:
            t = v
            v = w
            w = t
    for i in range(npath):
        label[pathbuf[i]] = 1
    return base


@njit(cache=True)
def _bl_add_blossom(
    base, k, n, eu, ev, ew, endpoint, nb_indptr, nb_p, mate, label, labelend,
    bestedge, inblossom, blossomparent, blossombase, childs, childcount,
    endps, dualvar, bbe, bbe_count, bestedgeto, unused, ucount, queue, qtail,
    leaves, lstack,
):
    v = eu[k]
    w = ev[k]
    bb = inblossom[base]
    bv = inblossom[v]
    bw = inblossom[w]
    ucount[0] -= 1
    b = unused[ucount[0]]
    blossombase[b] = base
    blossomparent[b] = -1
    blossomparent[bb] = b
    # Trace from v back to the base, collecting the blossom's children and
    # the endpoints linking consecutive children.
    nch = 0
    while bv != bb:
        blossomparent[bv] = b
        childs[b, nch] = bv
        endps[b, nch] = labelend[bv]
        nch += 1
        v = endpoint[labelend[bv]]
        bv = inblossom[v]
    childs[b, nch] = bb
    nch += 1
    # reverse the collected prefix
    for i in range(nch // 2):
        t1 = childs[b, i]
        childs[b, i] = childs[b, nch - 1 - i]
        childs[b, nch - 1 - i] = t1
    for i in range((nch - 1) // 2):
        t2 = endps[b, i]
        endps[b, i] = endps[b, nch - 2 - i]
        endps[b, nch - 2 - i] = t2
    endps[b, nch - 1] = 2 * k
    # Trace from w back to the base.
    while bw != bb:
        blossomparent[bw] = b
        childs[b, nch] = bw
        endps[b, nch] = labelend[bw] ^ 1
        nch += 1
        w = endpoint[labelend[bw]]
        bw = inblossom[w]
    childcount[b] = nch
    label[b] = 1
    labelend[b] = labelend[bb]
    dualvar[b] = 0.0
    cnt = _bl_leaves(b, n, childs, childcount, leaves, lstack)
    for i in range(cnt):
        lv = leaves[i]
        if label[inblossom[lv]] == 2:
            queue[qtail[0]] = lv
            qtail[0] += 1
        inblossom[lv] = b
    # Recompute the least-slack edge toward every other S-blossom.
    for i in range(2 * n):
        bestedgeto[i] = -1
    for ci in range(nch):
        bvv = childs[b, ci]
        if bbe_count[bvv] < 0:
            cnt = _bl_leaves(bvv, n, childs, childcount, leaves, lstack)
            for li in range(cnt):
                lv = leaves[li]
                for pi in range(nb_indptr[lv], nb_indptr[lv + 1]):
                    kk = nb_p[pi] // 2
                    j = ev[kk] if inblossom[ev[kk]] != b else eu[kk]
                    bj = inblossom[j]
                    if bj != b and label[bj] == 1:
                        if bestedgeto[bj] == -1 or _bl_slack(
                            kk, eu, ev, ew, dualvar
                        ) < _bl_slack(bestedgeto[bj], eu, ev, ew, dualvar):
                            bestedgeto[bj] = kk
        else:
            for li in range(bbe_count[bvv]):
                kk = bbe[bvv, li]
                j = ev[kk] if inblossom[ev[kk]] != b else eu[kk]
                bj = inblossom[j]
                if bj != b and label[bj] == 1:
                    if bestedgeto[bj] == -1 or _bl_slack(
                        kk, eu, ev, ew, dualvar
                    ) < _bl_slack(bestedgeto[bj], eu, ev, ew, dualvar):
                        bestedgeto[bj] = kk
        bbe_count[bvv] = -1
        bestedge[bvv] = -1
    m = 0
    for i in range(2 * n):
        if bestedgeto[i] != -1:
            bbe[b, m] = bestedgeto[i]
            m += 1
    bbe_count[b] = m
    bestedge[b] = -1
    for i in range(m):
        kk = bbe[b, i]
        if bestedge[b] == -1 or _bl_slack(kk, eu, ev, ew, dualvar) < _bl_slack(
            bestedge[b], eu, ev, ew, dualvar
        ):
            bestedge[b] = kk


@njit(cache=True)
def _bl_expand_blossom(
    b0, endstage, n, endpoint, mate, label, labelend, bestedge, inblossom,
    blossomparent, blossombase, childs, childcount, endps, dualvar, bbe_count,
    allowedge, unused, ucount, queue, qtail, leaves, lstack, expstack,
):
    top = 0
    expstack[top] = b0
    top += 1
    while top > 0:
        top -= 1
        b = expstack[top]
        # Detach children back to top level.
        for ci in range(childcount[b]):
            s = childs[b, ci]
            blossomparent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0.0:
                expstack[top] = s
                top += 1
            else:
                cnt = _bl_leaves(s, n, childs, childcount, leaves, lstack)
                for li in range(cnt):
                    inblossom[leaves[li]] = s
        # Mid-stage expansion of a T-blossom: relabel along the cycle.
        if (not endstage) and label[b] == 2:
            nch = childcount[b]
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = 0
            for ci in range(nch):
                if childs[b, ci] == entrychild:
                    j = ci
                    break
            if j & 1:
                j -= nch
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[b, (j - endptrick) % nch] ^ endptrick ^ 1]] = 0
                _bl_assign_label(
                    endpoint[p ^ 1], 2, p, n, endpoint, mate, label, labelend,
                    bestedge, inblossom, blossombase, childs, childcount,
                    queue, qtail, leaves, lstack,
                )
                allowedge[endps[b, (j - endptrick) % nch] // 2] = True
                j += jstep
                p = endps[b, (j - endptrick) % nch] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            # Relabel the base sub-blossom without stepping to its mate.
            # Its label edge is the final cycle edge reached by the walk
            # (p), which is incident to the base child; the original entry
            # endpoint labelend[b] would record a stale edge.
            bv = childs[b, j % nch]
            label[endpoint[p ^ 1]] = 2
            label[bv] = 2
            labelend[endpoint[p ^ 1]] = p
            labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs[b, j % nch] != entrychild:
                bv = childs[b, j % nch]
                if label[bv] == 1:
                    j += jstep
                    continue
                cnt = _bl_leaves(bv, n, childs, childcount, leaves, lstack)
                vfound = leaves[cnt - 1] if cnt > 0 else -1
                for li in range(cnt):
                    if label[leaves[li]] != 0:
                        vfound = leaves[li]
                        break
                if vfound >= 0 and label[vfound] != 0:
                    label[vfound] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    _bl_assign_label(
                        vfound, 2, labelend[vfound], n, endpoint, mate, label,
                        labelend, bestedge, inblossom, blossombase, childs,
                        childcount, queue, qtail, leaves, lstack,
                    )
                j += jstep
        # Recycle the slot.
        label[b] = -1
        labelend[b] = -1
        childcount[b] = 0
        blossombase[b] = -1
        bbe_count[b] = -1
        bestedge[b] = -1
        unused[ucount[0]] = b
        ucount[0] += 1


@njit(cache=True)
def _bl_augment_blossom(
    b0, v0, n, endpoint, mate, blossomparent, blossombase, childs, childcount,
    endps, taskb, taskv, rot,
):
    top = 0
    taskb[top] = b0
    taskv[top] = v0
    top += 1
    while top > 0:
        top -= 1
        b = taskb[top]
        v = taskv[top]
        # Bubble up from v to an immediate child of b.
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= n:
            taskb[top] = t
            taskv[top] = v
            top += 1
        nch = childcount[b]
        i = 0
        for ci in range(nch):
            if childs[b, ci] == t:
                i = ci
                break
        j = i
        if i & 1:
            j -= nch
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[b, j % nch]
            p = endps[b, (j - endptrick) % nch] ^ endptrick
            if t >= n:
                taskb[top] = t
                taskv[top] = endpoint[p]
                top += 1
            j += jstep
            t = childs[b, j % nch]
            if t >= n:
                taskb[top] = t
                taskv[top] = endpoint[p ^ 1]
                top += 1
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        # Rotate children so the entry child becomes the base.  The entry
        # vertex v becomes the blossom base (deferred sub-tasks rebase the
        # entry child to v as well, so assigning v directly is equivalent
        # to reading the child's base after its recursive augmentation).
        if i > 0:
            for ci in range(nch):
                rot[ci] = childs[b, (i + ci) % nch]
            for ci in range(nch):
                childs[b, ci] = rot[ci]
            for ci in range(nch):
                rot[ci] = endps[b, (i + ci) % nch]
            for ci in range(nch):
                endps[b, ci] = rot[ci]
        blossombase[b] = v


@njit(cache=True)
def _bl_augment_matching(
    k, n, eu, ev, endpoint, mate, label, labelend, inblossom, blossomparent,
    blossombase, childs, childcount, endps, taskb, taskv, rot,
):
    for side in range(2):
        if side == 0:
            s = eu[k]
            p = 2 * k + 1
        else:
            s = ev[k]
            p = 2 * k
        while True:
            bs = inblossom[s]
            if bs >= n:
                _bl_augment_blossom(
                    bs, s, n, endpoint, mate, blossomparent, blossombase,
                    childs, childcount, endps, taskb, taskv, rot,
                )
            mate[s] = p
            if labelend[bs] == -1:
                break
            t = endpoint[labelend[bs]]
            bt = inblossom[t]
            s = endpoint[labelend[bt]]
            j = endpoint[labelend[bt] ^ 1]
            if bt >= n:
                _bl_augment_blossom(
                    bt, j, n, endpoint, mate, blossomparent, blossombase,
                    childs, childcount, endps, taskb, taskv, rot,
                )
            mate[j] = labelend[bt]
            p = labelend[bt] ^ 1


@njit(cache=True)
def _mwm_kernel(n, eu, ev, ew, maxcardinality, warmstart):
    """Maximum-weight matching; returns mate vertex per vertex (-1 single).

    ``warmstart`` seeds the search with mutually-best tight pairs under the
    feasible duals u_v = max incident weight.  That start state satisfies the
    primal-dual invariants, but the optimality certificate it leads to only
    covers maximum-cardinality solutions, so it must stay off when
    ``maxcardinality`` is false.
    """
    m = eu.shape[0]
    maxweight = 0.0
    for k in range(m):
        if ew[k] > maxweight:
            maxweight = ew[k]
    endpoint = np.empty(2 * m, np.int32)
    for k in range(m):
        endpoint[2 * k] = eu[k]
        endpoint[2 * k + 1] = ev[k]
    # neighbend CSR: remote endpoints of edges incident to each vertex
    nb_indptr = np.zeros(n + 1, np.int64)
    for k in range(m):
        nb_indptr[eu[k] + 1] += 1
        nb_indptr[ev[k] + 1] += 1
    for i in range(n):
        nb_indptr[i + 1] += nb_indptr[i]
    nb_p = np.empty(2 * m, np.int32)
    fill = nb_indptr.copy()
    for k in range(m):
        nb_p[fill[eu[k]]] = 2 * k + 1
        fill[eu[k]] += 1
        nb_p[fill[ev[k]]] = 2 * k
        fill[ev[k]] += 1

    mate = np.full(n, -1, np.int32)
    dualinit = np.full(n, maxweight, np.float64)
    if warmstart and maxcardinality:
        bestw = np.zeros(n, np.float64)
        bestp = np.full(n, -1, np.int32)
        for k in range(m):
            u0 = eu[k]
            v0 = ev[k]
            if ew[k] > bestw[u0]:
                bestw[u0] = ew[k]
                bestp[u0] = 2 * k + 1
            if ew[k] > bestw[v0]:
                bestw[v0] = ew[k]
                bestp[v0] = 2 * k
        for v0 in range(n):
            dualinit[v0] = bestw[v0]
        for k in range(m):
            u0 = eu[k]
            v0 = ev[k]
            if bestp[u0] == 2 * k + 1 and bestp[v0] == 2 * k and mate[u0] == -1 and mate[v0] == -1:
                mate[u0] = 2 * k + 1
                mate[v0] = 2 * k
    label = np.zeros(2 * n, np.int32)
    labelend = np.full(2 * n, -1, np.int32)
    inblossom = np.arange(n).astype(np.int32)
    blossomparent = np.full(2 * n, -1, np.int32)
    blossombase = np.empty(2 * n, np.int32)
    for v in range(n):
        blossombase[v] = v
    for b in range(n, 2 * n):
        blossombase[b] = -1
    childs = np.empty((2 * n, n + 1), np.int32)
    childcount = np.zeros(2 * n, np.int32)
    endps = np.empty((2 * n, n + 1), np.int32)
    bestedge = np.full(2 * n, -1, np.int32)
    bbe = np.empty((2 * n, 2 * n), np.int32)
    bbe_count = np.full(2 * n, -1, np.int32)
    bestedgeto = np.empty(2 * n, np.int32)
    dualvar = np.empty(2 * n, np.float64)
    for v in range(n):
        dualvar[v] = dualinit[v]
    for b in range(n, 2 * n):
        dualvar[b] = 0.0
    allowedge = np.zeros(m, np.uint8)
    unused = np.empty(n, np.int32)
    for i in range(n):
        unused[i] = n + i
    ucount = np.empty(1, np.int64)
    ucount[0] = n
    queue = np.empty(2 * n * n + 8 * n + 16, np.int32)
    qtail = np.empty(1, np.int64)
    leaves = np.empty(n, np.int32)
    lstack = np.empty(2 * n, np.int32)
    pathbuf = np.empty(2 * n, np.int32)
    expstack = np.empty(2 * n, np.int32)
    taskb = np.empty(4 * n + 4, np.int32)
    taskv = np.empty(4 * n + 4, np.int32)
    rot = np.empty(n + 1, np.int32)

    for _stage in range(n):
        for i in range(2 * n):
            label[i] = 0
            bestedge[i] = -1
        for b in range(n, 2 * n):
            bbe_count[b] = -1
        for k in range(m):
            allowedge[k] = 0
        qtail[0] = 0
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                _bl_assign_label(
                    v, 1, -1, n, endpoint, mate, label, labelend, bestedge,
                    inblossom, blossombase, childs, childcount, queue, qtail,
                    leaves, lstack,
                )
        augmented = False
        while True:
            while qtail[0] > 0 and not augmented:
                qtail[0] -= 1
                v = queue[qtail[0]]
                for pi in range(nb_indptr[v], nb_indptr[v + 1]):
                    p = nb_p[pi]
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0.0
                    if not allowedge[k]:
                        kslack = _bl_slack(k, eu, ev, ew, dualvar)
                        if kslack <= 0.0:
                            allowedge[k] = 1
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            _bl_assign_label(
                                w, 2, p ^ 1, n, endpoint, mate, label,
                                labelend, bestedge, inblossom, blossombase,
                                childs, childcount, queue, qtail, leaves,
                                lstack,
                            )
                        elif label[inblossom[w]] == 1:
                            base = _bl_scan_blossom(
                                v, w, endpoint, mate, label, labelend,
                                inblossom, blossombase, pathbuf,
                            )
                            if base >= 0:
                                _bl_add_blossom(
                                    base, k, n, eu, ev, ew, endpoint,
                                    nb_indptr, nb_p, mate, label, labelend,
                                    bestedge, inblossom, blossomparent,
                                    blossombase, childs, childcount, endps,
                                    dualvar, bbe, bbe_count, bestedgeto,
                                    unused, ucount, queue, qtail, leaves,
                                    lstack,
                                )
                            else:
                                _bl_augment_matching(
                                    k, n, eu, ev, endpoint, mate, label,
                                    labelend, inblossom, blossomparent,
                                    blossombase, childs, childcount, endps,
                                    taskb, taskv, rot,
                                )
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < _bl_slack(
                            bestedge[b], eu, ev, ew, dualvar
                        ):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < _bl_slack(
                            bestedge[w], eu, ev, ew, dualvar
                        ):
                            bestedge[w] = k
            if augmented:
                break
            # Choose the smallest admissible dual adjustment.
            deltatype = -1
            delta = 0.0
            deltaedge = -1
            deltablossom = -1
            if not maxcardinality:
                deltatype = 1
                delta = dualvar[0]
                for v in range(1, n):
                    if dualvar[v] < delta:
                        delta = dualvar[v]
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = _bl_slack(bestedge[v], eu, ev, ew, dualvar)
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(2 * n):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    d = _bl_slack(bestedge[b], eu, ev, ew, dualvar) / 2.0
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, 2 * n):
                if (
                    blossombase[b] >= 0
                    and blossomparent[b] == -1
                    and label[b] == 2
                    and (deltatype == -1 or dualvar[b] < delta)
                ):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                # Max-cardinality optimum: clamp the final adjustment.
                deltatype = 1
                dmin = dualvar[0]
                for v in range(1, n):
                    if dualvar[v] < dmin:
                        dmin = dualvar[v]
                delta = max(0.0, dmin)
            for v in range(n):
                lab = label[inblossom[v]]
                if lab == 1:
                    dualvar[v] -= delta
                elif lab == 2:
                    dualvar[v] += delta
            for b in range(n, 2 * n):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta
            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = 1
                i = eu[deltaedge]
                if label[inblossom[i]] == 0:
                    i = ev[deltaedge]
                queue[qtail[0]] = i
                qtail[0] += 1
            elif deltatype == 3:
                allowedge[deltaedge] = 1
                queue[qtail[0]] = eu[deltaedge]
                qtail[0] += 1
            else:
                _bl_expand_blossom(
                    deltablossom, False, n, endpoint, mate, label, labelend,
                    bestedge, inblossom, blossomparent, blossombase, childs,
                    childcount, endps, dualvar, bbe_count, allowedge, unused,
                    ucount, queue, qtail, leaves, lstack, expstack,
                )
        if not augmented:
            break
        for b in range(n, 2 * n):
            if (
                blossomparent[b] == -1
                and blossombase[b] >= 0
                and label[b] == 1
                and dualvar[b] == 0.0
            ):
                _bl_expand_blossom(
                    b, True, n, endpoint, mate, label, labelend, bestedge,
                    inblossom, blossomparent, blossombase, childs, childcount,
                    endps, dualvar, bbe_count, allowedge, unused, ucount,
                    queue, qtail, leaves, lstack, expstack,
                )

    out = np.full(n, -1, np.int32)
    for v in range(n):
        if mate[v] >= 0:
            out[v] = endpoint[mate[v]]
    return out, dualvar[:n].copy()


# ---------------------------------------------------------------------------
# public API


def _as_weights(graph) -> np.ndarray:
    if isinstance(graph, MatchingGraph):
        return graph.weights
    return MatchingGraph(np.asarray(graph, np.float64)).weights


def max_weight_matching_edges(
    n: int,
    eu: np.ndarray,
    ev: np.ndarray,
    ew: np.ndarray,
    maxcardinality: bool,
    warmstart: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """(mate, vertex duals) of a maximum-weight matching of an edge list."""
    return _mwm_kernel(
        np.int64(n),
        np.ascontiguousarray(eu, np.int32),
        np.ascontiguousarray(ev, np.int32),
        np.ascontiguousarray(ew, np.float64),
        maxcardinality,
        warmstart and maxcardinality,
    )


def mwpm(graph) -> Matching:
    """Exact minimum-weight perfect matching of a dense symmetric graph."""
    w = _as_weights(graph)
    n = w.shape[0]
    if n % 2 != 0:
        raise MatchingError(f"perfect matching needs an even vertex count, got {n}")
    if n == 0:
        return Matching(pairs=(), total_weight=0.0)
    iu, iv = np.triu_indices(n, k=1)
    ew = w[iu, iv]
    reflected = ew.max() + 1.0 - ew
    mate, _ = max_weight_matching_edges(n, iu, iv, reflected, True, warmstart=True)
    if np.any(mate < 0):
        raise MatchingError("no perfect matching found")
    pairs = tuple(
        (int(v), int(mate[v])) for v in range(n) if v < mate[v]
    )
    total = float(sum(w[a, b] for a, b in pairs))
    return Matching(pairs=pairs, total_weight=total)


def solve_sparse_exact(
    n: int,
    eu: np.ndarray,
    ev: np.ndarray,
    ew: np.ndarray,
    absent_bound: np.ndarray,
) -> tuple[tuple[tuple[int, int], ...], bool]:
    """Perfect matching on a subgraph, certified optimal for the full graph.

    ``absent_bound`` is an (n, n) array lower-bounding the true weight of
    every vertex pair absent from the edge list.  After the blossom solve, dual
    feasibility of the absent edges is checked: an absent pair needs
    ``y_i + y_j >= 2 * (C - bound)`` in the reflected maximisation, which
    the vertex duals alone certify (blossom duals only tighten it).
    Returns (pairs, certified); pairs are valid only when certified.
    """
    if len(eu) == 0:
        return (), n == 0
    cmax = float(ew.max()) + 1.0
    reflected = cmax - ew
    mate, duals = max_weight_matching_edges(n, eu, ev, reflected, True, warmstart=True)
    if np.any(mate < 0):
        return (), False
    present = np.zeros((n, n), bool)
    present[eu, ev] = True
    present[ev, eu] = True
    np.fill_diagonal(present, True)
    need = 2.0 * (cmax - absent_bound)
    ok = (duals[:, None] + duals[None, :] >= need) | present
    if not ok.all():
        return (), False
    pairs = tuple((int(v), int(mate[v])) for v in range(n) if v < mate[v])
    return pairs, True


def mwpm_dense_fast(w: np.ndarray, m_start: int = 8) -> tuple[tuple[int, int], ...]:
    """Exact MWPM of a dense matrix via nearest-neighbour column generation.

    Solves on each vertex's ``m`` lightest partners and grows the subgraph
    until the dual certificate covers every absent pair; equivalent to
    :func:`mwpm` but much faster on geometric instances.
    """
    n = w.shape[0]
    if n % 2 != 0:
        raise MatchingError(f"perfect matching needs an even vertex count, got {n}")
    if n == 0:
        return ()
    if n <= 2 * m_start + 2:
        return mwpm(w).pairs
    worder = w + np.diag(np.full(n, np.inf))
    order = np.argsort(worder, axis=1, kind="stable")
    m = m_start
    while True:
        if m >= n - 1:
            return mwpm(w).pairs
        keep = np.zeros((n, n), bool)
        rows = np.repeat(np.arange(n), m)
        cols = order[:, :m].ravel()
        keep[rows, cols] = True
        keep |= keep.T
        iu, iv = np.nonzero(np.triu(keep, k=1))
        pairs, certified = solve_sparse_exact(n, iu, iv, w[iu, iv], w)
        if certified:
            return pairs
        m = min(n - 1, 2 * m)


def brute_force_matching(graph) -> Matching:
    """Exhaustive minimum over all (n-1)!! perfect matchings; n <= 12."""
    w = _as_weights(graph)
    n = w.shape[0]
    if n % 2 != 0:
        raise MatchingError(f"perfect matching needs an even vertex count, got {n}")
    if n > 12:
        raise MatchingError("brute force limited to n <= 12")
    if n == 0:
        return Matching(pairs=(), total_weight=0.0)
    best_weight = np.inf
    best_pairs: tuple[tuple[int, int], ...] = ()
    verts = list(range(n))

    def rec(remaining: list[int], acc: list[tuple[int, int]], acc_w: float):
        nonlocal best_weight, best_pairs
        if not remaining:
            if acc_w < best_weight:
                best_weight = acc_w
                best_pairs = tuple(acc)
            return
        a = remaining[0]
        rest = remaining[1:]
        for idx, b in enumerate(rest):
            nxt = rest[:idx] + rest[idx + 1 :]
            acc.append((a, b))
            rec(nxt, acc, acc_w + w[a, b])
            acc.pop()

    rec(verts, [], 0.0)
    return Matching(pairs=best_pairs, total_weight=float(best_weight))
