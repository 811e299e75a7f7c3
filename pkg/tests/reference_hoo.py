"""Plain single-sample HOO written node-by-node, used as an oracle.

Deliberately shares no code with the package: cells are lists of floats, nodes
are objects, the backup is recursive.  Draws come from ``sample(point, rng)``.
"""

import math


class Node:
    def __init__(self, h, i, lower, upper):
        self.h, self.i = h, i
        self.lower, self.upper = lower, upper
        self.t = 0
        self.f = 0.0
        self.U = math.inf
        self.B = math.inf
        self.kids = [None, None]

    def midpoint(self):
        return [0.5 * (lo + hi) for lo, hi in zip(self.lower, self.upper)]

    def make_child(self, side):
        widths = [hi - lo for lo, hi in zip(self.lower, self.upper)]
        d = widths.index(max(widths))
        cut = 0.5 * (self.lower[d] + self.upper[d])
        lower, upper = list(self.lower), list(self.upper)
        if side == 0:
            upper[d] = cut
        else:
            lower[d] = cut
        child = Node(self.h + 1, 2 * self.i - 1 + side, lower, upper)
        self.kids[side] = child
        return child


def _b(node):
    return math.inf if node is None else node.B


def _backup(node, m, sigma, nu, rho):
    for kid in node.kids:
        if kid is not None:
            _backup(kid, m, sigma, nu, rho)
    if node.t > 0:
        node.U = node.f + math.sqrt(2.0 * sigma ** 2 * math.log(m) / (1 * node.t)) + nu * rho ** node.h
    node.B = min(node.U, max(_b(node.kids[0]), _b(node.kids[1])))


def _walk(node):
    yield node
    for kid in node.kids:
        if kid is not None:
            yield from _walk(kid)


def reference_hoo(sample, lower, upper, n, sigma, nu, rho, rng):
    """Run ``n`` single-sample iterations; return (insertion labels, answer point)."""
    root = Node(0, 1, [float(v) for v in lower], [float(v) for v in upper])
    inserted = []
    for m in range(1, n + 1):
        node, path = root, [root]
        while True:
            side = 0 if _b(node.kids[0]) >= _b(node.kids[1]) else 1
            if node.kids[side] is None:
                leaf = node.make_child(side)
                break
            node = node.kids[side]
            path.append(node)
        inserted.append((leaf.h, leaf.i))
        y = sample(leaf.midpoint(), rng)
        path.append(leaf)
        for p in path:
            p.t += 1
            p.f = (1 - 1 / p.t) * p.f + y / p.t
        _backup(root, m, sigma, nu, rho)

    nodes = list(_walk(root))
    deepest = max(nd.h for nd in nodes)
    level = [nd for nd in nodes if nd.h == deepest]
    best = max(nd.B for nd in level)
    winner = min((nd for nd in level if nd.B == best), key=lambda nd: nd.i)
    return inserted, winner.midpoint()
