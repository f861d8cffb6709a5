"""Exact minimal circuit sizes for every function of n <= 4 inputs.

Depth-first search over gate sequences. Three prunings keep it exact:

* a gate whose function is already present (an input, a constant or an
  earlier gate) is never placed, since a minimal circuit has no such gate;
* consecutive independent gates must appear in strictly increasing key
  order, which picks one topological order per circuit;
* a partial circuit with more dangling gates than can still be merged into
  a single output is abandoned.

Node numbering inside the kernel: inputs are 0..n-1, gate k is node n+k.
Operation codes: 0 NOT, 1 AND, 2 OR, 3 XOR.
"""

import numba as nb
import numpy as np

OP_NOT = 0
OP_AND = 1
OP_OR = 2
OP_XOR = 3

UNREACHED = 127


@nb.njit(cache=True)
def _pair(r, size):
    a = 0
    while r >= size - 1 - a:
        r -= size - 1 - a
        a += 1
    return a, a + 1 + r


@nb.njit(cache=True)
def _dfs(n, depth, use_not, binops, best, wit, node_cap):
    N = 1 << n
    full = (1 << N) - 1
    nb_ops = binops.shape[0]
    funcs = np.zeros(n + depth + 1, np.int64)
    uses = np.zeros(n + depth + 1, np.int64)
    keys = np.zeros(depth + 1, np.int64)
    ops = np.zeros(depth + 1, np.int64)
    arg_a = np.zeros(depth + 1, np.int64)
    arg_b = np.zeros(depth + 1, np.int64)
    cur = np.zeros(depth + 2, np.int64)
    present = np.zeros(1 << N, np.bool_)
    for j in range(n):
        t = 0
        for y in range(N):
            if (y >> j) & 1:
                t |= 1 << y
        funcs[j] = t
        present[t] = True
    present[0] = True
    present[full] = True

    nodes = 0
    k = 0
    sinks = 0
    while True:
        size = n + k
        n_not = size if use_not else 0
        ncand = n_not + nb_ops * (size * (size - 1) // 2)
        c = cur[k]
        placed = False
        while c < ncand:
            if c < n_not:
                op = OP_NOT
                a = c
                b = c
                f = full ^ funcs[a]
            else:
                r = c - n_not
                op = binops[r % nb_ops]
                a, b = _pair(r // nb_ops, size)
                if op == OP_AND:
                    f = funcs[a] & funcs[b]
                elif op == OP_OR:
                    f = funcs[a] | funcs[b]
                else:
                    f = funcs[a] ^ funcs[b]
            c += 1
            if present[f]:
                continue
            fa = funcs[a]
            fb = funcs[b]
            if fa > fb:
                fa, fb = fb, fa
            key = (op << (2 * N)) | (fa << N) | fb
            uses_last = k > 0 and (a == size - 1 or b == size - 1)
            if k > 0 and not uses_last and key <= keys[k - 1]:
                continue
            ns = sinks + 1
            if a >= n and uses[a] == 0:
                ns -= 1
            if b != a and b >= n and uses[b] == 0:
                ns -= 1
            if ns - 1 > depth - (k + 1):
                continue
            cur[k] = c
            funcs[size] = f
            present[f] = True
            uses[a] += 1
            if b != a:
                uses[b] += 1
            keys[k] = key
            ops[k] = op
            arg_a[k] = a
            arg_b[k] = b
            sinks = ns
            nodes += 1
            if best[f] > k + 1:
                best[f] = k + 1
                for g in range(k + 1):
                    wit[f, g, 0] = ops[g]
                    wit[f, g, 1] = arg_a[g]
                    wit[f, g, 2] = arg_b[g]
            k += 1
            placed = True
            break
        if node_cap > 0 and nodes > node_cap:
            return nodes, False
        if placed:
            if k < depth:
                cur[k] = 0
                continue
        elif k == 0:
            break
        k -= 1
        size = n + k
        present[funcs[size]] = False
        uses[arg_a[k]] -= 1
        if arg_b[k] != arg_a[k]:
            uses[arg_b[k]] -= 1
        s = 0
        for g in range(n, size):
            if uses[g] == 0:
                s += 1
        sinks = s
    return nodes, True


def minimal_sizes(n, max_size, use_not, binops, node_cap):
    """Minimal gate counts (capped at ``max_size``) plus witness gate lists.

    Returns ``(best, wit, complete)``. ``best[f]`` is the minimal size of the
    function with table integer ``f`` or ``UNREACHED`` when it exceeds
    ``max_size``. ``wit[f, :best[f]]`` holds (op, a, b) rows in kernel node
    numbering. ``complete`` is False when the node cap stopped the search.
    """
    N = 1 << n
    full = (1 << N) - 1
    best = np.full(1 << N, UNREACHED, np.int64)
    wit = np.zeros((1 << N, max(max_size, 1), 3), np.int64)
    best[0] = 0
    best[full] = 0
    for j in range(n):
        best[sum(1 << y for y in range(N) if (y >> j) & 1)] = 0
    ops = np.asarray(binops, np.int64)
    for depth in range(1, max_size + 1):
        if (best < UNREACHED).all():
            break
        _, ok = _dfs(n, depth, use_not, ops, best, wit, node_cap)
        if not ok:
            return best, wit, False
    return best, wit, True
