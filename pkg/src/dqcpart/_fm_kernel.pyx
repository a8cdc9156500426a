# distutils: language = c++
"""Compiled FM kernel. Mirrors ``_fm_py.FMKernel`` operation for operation."""
import numpy as np

from libc.stdint cimport int64_t, uint64_t
from libcpp.vector cimport vector

cdef enum:
    NONE = 0
    IN = 1
    PARKED = 2


cdef inline int popcount64(uint64_t x) nogil:
    return __builtin_popcountll(x)

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef class FMKernel:
    cdef public int n_q, L, K, N, E
    cdef int64_t off, nb, minb, total
    cdef bint active
    cdef uint64_t rng_state
    cdef vector[int64_t] root_ptr, root_idx, rec_ptr, rec_idx, inc_ptr, inc_edge, inc_role
    cdef vector[int64_t] cap, phi, occ, root_cnt, rec_cnt, ecost, gains, bpos, bkey
    cdef vector[uint64_t] cfg
    cdef vector[char] movable, locked, status
    cdef vector[vector[int64_t]] buckets, parked

    def __init__(self, root_ptr, root_idx, rec_ptr, rec_idx, inc_ptr, inc_edge, inc_role,
                 n_q, n_layers, K, cap, phi, movable, seed):
        if K > 64:
            raise ValueError("at most 64 partitions are supported")
        self.n_q = n_q
        self.L = n_layers
        self.K = K
        self.N = n_q * n_layers
        self.root_ptr = [int(x) for x in root_ptr]
        self.root_idx = [int(x) for x in root_idx]
        self.rec_ptr = [int(x) for x in rec_ptr]
        self.rec_idx = [int(x) for x in rec_idx]
        self.inc_ptr = [int(x) for x in inc_ptr]
        self.inc_edge = [int(x) for x in inc_edge]
        self.inc_role = [int(x) for x in inc_role]
        self.E = self.root_ptr.size() - 1
        self.cap = [int(x) for x in cap]
        self.movable = [1 if x else 0 for x in movable]
        self.rng_state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
        cdef int64_t maxdeg = 0, v
        for v in range(self.N):
            if self.inc_ptr[v + 1] - self.inc_ptr[v] > maxdeg:
                maxdeg = self.inc_ptr[v + 1] - self.inc_ptr[v]
        self.off = 2 * maxdeg
        self.nb = 2 * self.off + 1
        self.set_phi(phi)

    # -- rng -----------------------------------------------------------------
    cdef inline uint64_t _next(self) nogil:
        self.rng_state += 0x9E3779B97F4A7C15ULL
        cdef uint64_t z = self.rng_state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        return z ^ (z >> 31)

    # -- state ---------------------------------------------------------------
    def set_phi(self, phi):
        cdef int K = self.K
        cdef int64_t v, e, i, p
        cdef uint64_t c
        self.phi = [int(x) for x in phi]
        self.occ.assign(self.L * K, 0)
        for v in range(self.N):
            self.occ[(v // self.n_q) * K + self.phi[v]] += 1
        self.root_cnt.assign(self.E * K, 0)
        self.rec_cnt.assign(self.E * K, 0)
        self.cfg.assign(self.E, 0)
        self.ecost.assign(self.E, 0)
        self.total = 0
        for e in range(self.E):
            for i in range(self.root_ptr[e], self.root_ptr[e + 1]):
                self.root_cnt[e * K + self.phi[self.root_idx[i]]] += 1
            for i in range(self.rec_ptr[e], self.rec_ptr[e + 1]):
                self.rec_cnt[e * K + self.phi[self.rec_idx[i]]] += 1
            c = 0
            for p in range(K):
                if self.rec_cnt[e * K + p] > 0 and self.root_cnt[e * K + p] == 0:
                    c |= (<uint64_t>1) << p
            self.cfg[e] = c
            self.ecost[e] = popcount64(c)
            self.total += self.ecost[e]
        self.locked.assign(self.N, 0)
        self.gains.assign(self.N * K, 0)
        self.status.assign(self.N * K, NONE)
        self.bpos.assign(self.N * K, 0)
        self.bkey.assign(self.N * K, 0)
        self.buckets.clear()
        self.buckets.resize(self.nb)
        self.parked.clear()
        self.parked.resize(self.L * K)
        self.minb = self.nb
        self.active = False
        self.recompute_gains()

    def get_phi(self):
        return np.asarray(<list>self.phi, dtype=np.int64)

    def get_occ(self):
        return np.asarray(<list>self.occ, dtype=np.int64).reshape(self.L, self.K)

    def part(self, int64_t v):
        return self.phi[v]

    def occ_at(self, int64_t layer, int p):
        return self.occ[layer * self.K + p]

    def total_cost(self):
        return self.total

    def edge_cost(self, int64_t e):
        return self.ecost[e]

    def edge_cfg(self, int64_t e):
        return self.cfg[e]

    def edge_counts(self, int64_t e):
        cdef int K = self.K
        return ([self.root_cnt[e * K + p] for p in range(K)],
                [self.rec_cnt[e * K + p] for p in range(K)])

    # -- gains ---------------------------------------------------------------
    cdef inline int _delta(self, int64_t e, int64_t role, int64_t s, int64_t t) nogil:
        cdef int K = self.K
        cdef int64_t rs = self.root_cnt[e * K + s], rt = self.root_cnt[e * K + t]
        cdef int64_t cs = self.rec_cnt[e * K + s], ct = self.rec_cnt[e * K + t]
        cdef int old = (cs > 0 and rs == 0) + (ct > 0 and rt == 0)
        if role == 0:
            rs -= 1
            rt += 1
        else:
            cs -= 1
            ct += 1
        return (cs > 0 and rs == 0) + (ct > 0 and rt == 0) - old

    cdef int64_t _scratch(self, int64_t v, int64_t p) nogil:
        cdef int64_t s = self.phi[v], g = 0, i
        if p == s:
            return 0
        for i in range(self.inc_ptr[v], self.inc_ptr[v + 1]):
            g += self._delta(self.inc_edge[i], self.inc_role[i], s, p)
        return g

    def scratch_gain(self, int64_t v, int64_t p):
        return self._scratch(v, p)

    def gain(self, int64_t v, int64_t p):
        return self.gains[v * self.K + p]

    cdef void _refresh_row(self, int64_t v):
        cdef int K = self.K
        cdef int64_t p, mv
        for p in range(K):
            mv = v * K + p
            self._set_gain(mv, self._scratch(v, p))
            if p == self.phi[v]:
                if self.status[mv] == IN:
                    self._remove(mv)
                self.status[mv] = NONE
            elif self.active and self.status[mv] == NONE and self.movable[v] and not self.locked[v]:
                self._insert(mv)

    def recompute_gains(self):
        cdef int64_t v, p
        for v in range(self.N):
            for p in range(self.K):
                self.gains[v * self.K + p] = self._scratch(v, p)

    # -- buckets -------------------------------------------------------------
    cdef inline void _insert(self, int64_t mv):
        cdef int64_t b = self.gains[mv] + self.off
        self.bpos[mv] = self.buckets[b].size()
        self.bkey[mv] = b
        self.buckets[b].push_back(mv)
        self.status[mv] = IN
        if b < self.minb:
            self.minb = b

    cdef inline void _remove(self, int64_t mv):
        cdef int64_t b = self.bkey[mv], i = self.bpos[mv]
        cdef int64_t last = self.buckets[b].back()
        self.buckets[b].pop_back()
        if last != mv:
            self.buckets[b][i] = last
            self.bpos[last] = i
        self.status[mv] = NONE

    cdef inline void _set_gain(self, int64_t mv, int64_t g):
        if self.gains[mv] == g:
            return
        self.gains[mv] = g
        if self.status[mv] == IN:
            self._remove(mv)
            self._insert(mv)

    def clear_buckets(self):
        cdef int64_t i
        for i in range(self.nb):
            self.buckets[i].clear()
        for i in range(self.L * self.K):
            self.parked[i].clear()
        self.status.assign(self.N * self.K, NONE)
        self.minb = self.nb
        self.active = False

    def build_buckets(self):
        self.clear_buckets()
        self.active = True
        cdef int K = self.K
        cdef int64_t v, p
        for v in range(self.N):
            if not self.movable[v] or self.locked[v]:
                continue
            for p in range(K):
                if p != self.phi[v]:
                    self._insert(v * K + p)

    def bucket_key(self, int64_t v, int64_t p):
        cdef int64_t mv = v * self.K + p
        if self.status[mv] == IN:
            return self.bkey[mv] - self.off
        if self.status[mv] == PARKED:
            return self.gains[mv]
        return None

    cdef int64_t _best_move(self):
        cdef int K = self.K
        cdef int64_t b = self.minb, mv, v, p, slot, n
        while b < self.nb:
            n = self.buckets[b].size()
            if n == 0:
                b += 1
                continue
            mv = self.buckets[b][self._next() % <uint64_t>n]
            v = mv // K
            p = mv % K
            slot = (v // self.n_q) * K + p
            if self.occ[slot] >= self.cap[p]:
                self._remove(mv)
                self.status[mv] = PARKED
                self.parked[slot].push_back(mv)
                continue
            self.minb = b
            return mv
        self.minb = self.nb
        return -1

    def best_move(self):
        cdef int64_t mv = self._best_move()
        if mv < 0:
            return -1, -1
        return mv // self.K, mv % self.K

    cdef void _unpark(self, int64_t slot):
        cdef size_t i
        cdef int64_t mv
        for i in range(self.parked[slot].size()):
            mv = self.parked[slot][i]
            if self.status[mv] == PARKED:
                self._insert(mv)
        self.parked[slot].clear()

    def lock(self, int64_t v):
        self._lock(v)

    def unlock_all(self):
        self.locked.assign(self.N, 0)

    cdef void _lock(self, int64_t v):
        self.locked[v] = 1
        cdef int64_t p, mv
        for p in range(self.K):
            mv = v * self.K + p
            if self.status[mv] == IN:
                self._remove(mv)
            self.status[mv] = NONE

    # -- moves ---------------------------------------------------------------
    cdef int64_t _raw_move(self, int64_t v, int64_t p, int update):
        cdef int K = self.K
        cdef int64_t s = self.phi[v], before = self.total, i, e, role, x, j, nc
        cdef uint64_t c, bit
        if s == p:
            return 0
        for i in range(self.inc_ptr[v], self.inc_ptr[v + 1]):
            e = self.inc_edge[i]
            role = self.inc_role[i]
            if update:
                self._edge_gain_pass(e, v, -1)
            if role == 0:
                self.root_cnt[e * K + s] -= 1
                self.root_cnt[e * K + p] += 1
            else:
                self.rec_cnt[e * K + s] -= 1
                self.rec_cnt[e * K + p] += 1
            c = self.cfg[e]
            for j in range(2):
                x = s if j == 0 else p
                bit = (<uint64_t>1) << x
                if self.rec_cnt[e * K + x] > 0 and self.root_cnt[e * K + x] == 0:
                    c |= bit
                else:
                    c &= ~bit
            self.cfg[e] = c
            nc = popcount64(c)
            self.total += nc - self.ecost[e]
            self.ecost[e] = nc
            if update:
                self._edge_gain_pass(e, v, 1)
        self.phi[v] = p
        cdef int64_t lay = v // self.n_q
        self.occ[lay * K + s] -= 1
        self.occ[lay * K + p] += 1
        if update == 2:
            self._refresh_row(v)
        return self.total - before

    cdef void _edge_gain_pass(self, int64_t e, int64_t moved, int sign):
        cdef int K = self.K
        cdef int64_t i, u, su, p, mv, lo, hi
        cdef int role
        for role in range(2):
            if role == 0:
                lo, hi = self.root_ptr[e], self.root_ptr[e + 1]
            else:
                lo, hi = self.rec_ptr[e], self.rec_ptr[e + 1]
            for i in range(lo, hi):
                u = self.root_idx[i] if role == 0 else self.rec_idx[i]
                if u == moved or self.locked[u] or not self.movable[u]:
                    continue
                su = self.phi[u]
                for p in range(K):
                    if p != su:
                        mv = u * K + p
                        self._set_gain(mv, self.gains[mv] + sign * self._delta(e, role, su, p))

    def move(self, int64_t v, int64_t p):
        cdef int64_t s = self.phi[v]
        cdef int64_t d = self._raw_move(v, p, 2)
        if s != p:
            self._unpark((v // self.n_q) * self.K + s)
        return d

    def fm_pass(self, int64_t move_cap, bint explore):
        cdef int K = self.K
        cdef vector[int64_t] undo_v, undo_s
        cdef int64_t gcum = 0, best = 0, best_i = 0, mv, v, p, s, g, kept, result
        self.locked.assign(self.N, 0)
        self.build_buckets()
        while <int64_t>undo_v.size() < move_cap:
            mv = self._best_move()
            if mv < 0:
                break
            v = mv // K
            p = mv % K
            g = self.gains[mv]
            s = self.phi[v]
            self._lock(v)
            self._raw_move(v, p, 1)
            self._unpark((v // self.n_q) * K + s)
            undo_v.push_back(v)
            undo_s.push_back(s)
            gcum += g
            if gcum < best:
                best = gcum
                best_i = undo_v.size()
        if explore:
            kept = undo_v.size()
            result = gcum
        else:
            while <int64_t>undo_v.size() > best_i:
                self._raw_move(undo_v.back(), undo_s.back(), 0)
                undo_v.pop_back()
                undo_s.pop_back()
            kept = best_i
            result = best
        self.clear_buckets()
        self.locked.assign(self.N, 0)
        self.recompute_gains()
        return result, kept
