"""Pure-Python FM kernel. Mirrors ``_fm_kernel.pyx`` operation for operation."""
from __future__ import annotations

import numpy as np

from ._rng import SplitMix64

NONE, IN, PARKED = 0, 1, 2


class FMKernel:
    """Edge counts, configuration words, gain table and gain buckets over CSR arrays.

    Nodes are ``pos * n_q + qubit``; moves are ``node * K + partition``. Gains
    follow the negative convention (negative lowers the cost).
    """

    def __init__(self, root_ptr, root_idx, rec_ptr, rec_idx, inc_ptr, inc_edge, inc_role,
                 n_q, n_layers, K, cap, phi, movable, seed):
        if K > 64:
            raise ValueError("at most 64 partitions are supported")
        self.n_q, self.L, self.K = int(n_q), int(n_layers), int(K)
        self.N = self.n_q * self.L
        self.root_ptr = [int(x) for x in root_ptr]
        self.root_idx = [int(x) for x in root_idx]
        self.rec_ptr = [int(x) for x in rec_ptr]
        self.rec_idx = [int(x) for x in rec_idx]
        self.inc_ptr = [int(x) for x in inc_ptr]
        self.inc_edge = [int(x) for x in inc_edge]
        self.inc_role = [int(x) for x in inc_role]
        self.E = len(self.root_ptr) - 1
        self.cap = [int(x) for x in cap]
        self.movable = [bool(x) for x in movable]
        self.rng = SplitMix64(int(seed))
        maxdeg = max((self.inc_ptr[v + 1] - self.inc_ptr[v] for v in range(self.N)), default=0)
        self.off = 2 * maxdeg
        self.nb = 2 * self.off + 1
        self.set_phi(phi)

    # -- state ---------------------------------------------------------------
    def set_phi(self, phi):
        K = self.K
        self.phi = [int(x) for x in phi]
        self.occ = [0] * (self.L * K)
        for v, p in enumerate(self.phi):
            self.occ[(v // self.n_q) * K + p] += 1
        self.root_cnt = [0] * (self.E * K)
        self.rec_cnt = [0] * (self.E * K)
        self.cfg = [0] * self.E
        self.ecost = [0] * self.E
        self.total = 0
        for e in range(self.E):
            for i in range(self.root_ptr[e], self.root_ptr[e + 1]):
                self.root_cnt[e * K + self.phi[self.root_idx[i]]] += 1
            for i in range(self.rec_ptr[e], self.rec_ptr[e + 1]):
                self.rec_cnt[e * K + self.phi[self.rec_idx[i]]] += 1
            c = 0
            for p in range(K):
                if self.rec_cnt[e * K + p] > 0 and self.root_cnt[e * K + p] == 0:
                    c |= 1 << p
            self.cfg[e] = c
            self.ecost[e] = c.bit_count()
            self.total += self.ecost[e]
        self.locked = [False] * self.N
        self.gains = [0] * (self.N * K)
        self.status = [NONE] * (self.N * K)
        self.buckets = [[] for _ in range(self.nb)]
        self.bpos = [0] * (self.N * K)
        self.bkey = [0] * (self.N * K)
        self.parked = [[] for _ in range(self.L * K)]
        self.minb = self.nb
        self.active = False
        self.recompute_gains()

    def get_phi(self):
        return np.asarray(self.phi, dtype=np.int64)

    def get_occ(self):
        return np.asarray(self.occ, dtype=np.int64).reshape(self.L, self.K)

    def part(self, v: int) -> int:
        return self.phi[v]

    def occ_at(self, layer: int, p: int) -> int:
        return self.occ[layer * self.K + p]

    def total_cost(self) -> int:
        return self.total

    def edge_cost(self, e: int) -> int:
        return self.ecost[e]

    def edge_cfg(self, e: int) -> int:
        return self.cfg[e]

    def edge_counts(self, e: int):
        K = self.K
        return self.root_cnt[e * K:(e + 1) * K], self.rec_cnt[e * K:(e + 1) * K]

    # -- gains ---------------------------------------------------------------
    def _delta(self, e: int, role: int, s: int, t: int) -> int:
        """Cost change of edge ``e`` if one member with ``role`` moves from s to t."""
        K = self.K
        rs, rt = self.root_cnt[e * K + s], self.root_cnt[e * K + t]
        cs, ct = self.rec_cnt[e * K + s], self.rec_cnt[e * K + t]
        old = (cs > 0 and rs == 0) + (ct > 0 and rt == 0)
        if role == 0:
            rs -= 1
            rt += 1
        else:
            cs -= 1
            ct += 1
        return (cs > 0 and rs == 0) + (ct > 0 and rt == 0) - old

    def scratch_gain(self, v: int, p: int) -> int:
        s = self.phi[v]
        if p == s:
            return 0
        g = 0
        for i in range(self.inc_ptr[v], self.inc_ptr[v + 1]):
            g += self._delta(self.inc_edge[i], self.inc_role[i], s, p)
        return g

    def gain(self, v: int, p: int) -> int:
        return self.gains[v * self.K + p]

    def _refresh_row(self, v: int):
        K = self.K
        for p in range(K):
            mv = v * K + p
            g = self.scratch_gain(v, p)
            self._set_gain(mv, g)
            if p == self.phi[v]:
                if self.status[mv] == IN:
                    self._remove(mv)
                self.status[mv] = NONE
            elif self.active and self.status[mv] == NONE and self.movable[v] and not self.locked[v]:
                self._insert(mv)

    def recompute_gains(self):
        for v in range(self.N):
            for p in range(self.K):
                self.gains[v * self.K + p] = self.scratch_gain(v, p)

    # -- buckets -------------------------------------------------------------
    def _insert(self, mv: int):
        b = self.gains[mv] + self.off
        lst = self.buckets[b]
        self.bpos[mv] = len(lst)
        self.bkey[mv] = b
        lst.append(mv)
        self.status[mv] = IN
        self.minb = min(self.minb, b)

    def _remove(self, mv: int):
        lst = self.buckets[self.bkey[mv]]
        i = self.bpos[mv]
        last = lst.pop()
        if last != mv:
            lst[i] = last
            self.bpos[last] = i
        self.status[mv] = NONE

    def _set_gain(self, mv: int, g: int):
        if self.gains[mv] == g:
            return
        self.gains[mv] = g
        if self.status[mv] == IN:
            self._remove(mv)
            self._insert(mv)

    def clear_buckets(self):
        for b in self.buckets:
            b.clear()
        for lst in self.parked:
            lst.clear()
        self.status = [NONE] * (self.N * self.K)
        self.minb = self.nb
        self.active = False

    def build_buckets(self):
        """Insert every move of every movable, unlocked node."""
        self.clear_buckets()
        self.active = True
        K = self.K
        for v in range(self.N):
            if not self.movable[v] or self.locked[v]:
                continue
            for p in range(K):
                if p != self.phi[v]:
                    self._insert(v * K + p)

    def bucket_key(self, v: int, p: int):
        mv = v * self.K + p
        if self.status[mv] == IN:
            return self.bkey[mv] - self.off
        if self.status[mv] == PARKED:
            return self.gains[mv]
        return None

    def best_move(self):
        """Uniform pick among the lowest-gain admissible moves, or (-1, -1)."""
        K = self.K
        b = self.minb
        while b < self.nb:
            lst = self.buckets[b]
            if not lst:
                b += 1
                continue
            mv = lst[self.rng.below(len(lst))]
            v, p = divmod(mv, K)
            slot = (v // self.n_q) * K + p
            if self.occ[slot] >= self.cap[p]:
                self._remove(mv)
                self.status[mv] = PARKED
                self.parked[slot].append(mv)
                continue
            self.minb = b
            return v, p
        self.minb = self.nb
        return -1, -1

    def _unpark(self, slot: int):
        lst = self.parked[slot]
        for mv in lst:
            if self.status[mv] == PARKED:
                self._insert(mv)
        lst.clear()

    def lock(self, v: int):
        self._lock(v)

    def unlock_all(self):
        self.locked = [False] * self.N

    def _lock(self, v: int):
        self.locked[v] = True
        K = self.K
        for p in range(K):
            mv = v * K + p
            if self.status[mv] == IN:
                self._remove(mv)
            self.status[mv] = NONE

    # -- moves ---------------------------------------------------------------
    def _raw_move(self, v: int, p: int, update: int):
        """Apply v -> p. update: 0 none, 1 unlocked neighbours, 2 all neighbours + own row."""
        K = self.K
        s = self.phi[v]
        if s == p:
            return 0
        before = self.total
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
            for x in (s, p):
                if self.rec_cnt[e * K + x] > 0 and self.root_cnt[e * K + x] == 0:
                    c |= 1 << x
                else:
                    c &= ~(1 << x)
            self.cfg[e] = c
            nc = c.bit_count()
            self.total += nc - self.ecost[e]
            self.ecost[e] = nc
            if update:
                self._edge_gain_pass(e, v, 1)
        self.phi[v] = p
        lay = v // self.n_q
        self.occ[lay * K + s] -= 1
        self.occ[lay * K + p] += 1
        if update == 2:
            self._refresh_row(v)
        return self.total - before

    def _edge_gain_pass(self, e: int, moved: int, sign: int):
        """Add ``sign`` times edge e's contribution to each other member's gains."""
        K = self.K
        for role, ptr, idx in ((0, self.root_ptr, self.root_idx), (1, self.rec_ptr, self.rec_idx)):
            for i in range(ptr[e], ptr[e + 1]):
                u = idx[i]
                if u == moved or self.locked[u] or not self.movable[u]:
                    continue
                su = self.phi[u]
                for p in range(K):
                    if p != su:
                        mv = u * K + p
                        self._set_gain(mv, self.gains[mv] + sign * self._delta(e, role, su, p))

    def move(self, v: int, p: int) -> int:
        """External move with full gain maintenance; returns the cost change."""
        s = self.phi[v]
        d = self._raw_move(v, p, 2)
        if s != p:
            self._unpark((v // self.n_q) * self.K + s)
        return d

    def fm_pass(self, move_cap: int, explore: bool):
        """One pass; returns (accepted cumulative gain, number of moves kept)."""
        K = self.K
        self.locked = [False] * self.N
        self.build_buckets()
        undo: list[tuple[int, int]] = []
        gcum = best = best_i = 0
        while len(undo) < move_cap:
            v, p = self.best_move()
            if v < 0:
                break
            g = self.gains[v * K + p]
            s = self.phi[v]
            self._lock(v)
            self._raw_move(v, p, 1)
            self._unpark((v // self.n_q) * K + s)
            undo.append((v, s))
            gcum += g
            if gcum < best:
                best, best_i = gcum, len(undo)
        if explore:
            kept, result = len(undo), gcum
        else:
            while len(undo) > best_i:
                v, s = undo.pop()
                self._raw_move(v, s, 0)
            kept, result = best_i, best
        self.clear_buckets()
        self.locked = [False] * self.N
        self.recompute_gains()
        return result, kept
