"""Shared test utilities: finite-difference, GAE, and simplex-grid oracles."""

import numpy as np


def fd_grad(fn, x, h=1e-5):
    """Central-difference gradient of scalar ``fn`` at array ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat, gflat = x.ravel(), g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = fn(x)
        flat[i] = orig - h
        fm = fn(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def fd_grad_params(loss_fn, params, h=1e-5):
    """Central differences of ``loss_fn(params)`` w.r.t. every named array."""
    grads = {}
    for name, arr in params.items():
        g = np.zeros_like(arr)
        # arr.flat writes through even for non-contiguous arrays, unlike ravel()
        for i in range(arr.size):
            orig = arr.flat[i]
            arr.flat[i] = orig + h
            fp = loss_fn(params)
            arr.flat[i] = orig - h
            fm = loss_fn(params)
            arr.flat[i] = orig
            g.flat[i] = (fp - fm) / (2.0 * h)
        grads[name] = g
    return grads


def max_rel_err(analytic, numeric, floor=1e-8):
    """max |a-n| / max(|a|,|n|,floor) over all entries."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))


def brute_force_gae(rewards, values, bootstrap, terminal, cut, gamma, lam):
    """Literal double-sum advantage oracle: A_t = sum_l (gamma*lam)^l delta_{t+l},
    with the sum stopping at episode boundaries and the TD residual using the
    stored bootstrap value on truncation."""
    n, d = rewards.shape
    deltas = np.zeros((n, d))
    for t in range(n):
        if terminal[t]:
            next_v = np.zeros(d)
        elif cut[t]:
            next_v = bootstrap[t]
        else:
            next_v = values[t + 1]
        deltas[t] = rewards[t] + gamma * next_v - values[t]
    adv = np.zeros((n, d))
    for t in range(n):
        decay = 1.0
        for l in range(t, n):
            adv[t] += decay * deltas[l]
            if terminal[l] or cut[l]:
                break
            decay *= gamma * lam
    return adv


# --------------------------------------------------------------------------
# simplex-grid corner oracle: find every weight where the argmax over a set
# of value vectors switches, by dense scanning (independent of the linear-
# system enumeration under test)

def _cluster_points(points, radius):
    points = [np.asarray(p, dtype=np.float64) for p in points]
    unused = list(range(len(points)))
    clusters = []
    while unused:
        queue = [unused.pop(0)]
        members = []
        while queue:
            i = queue.pop()
            members.append(points[i])
            near = [j for j in unused
                    if np.max(np.abs(points[j] - points[i])) <= radius]
            for j in near:
                unused.remove(j)
            queue.extend(near)
        clusters.append(np.mean(members, axis=0))
    return clusters


def grid_corner_oracle_2d(values, resolution=1000):
    """Label switches along the 1-simplex plus the two extreme points."""
    v = np.asarray(values, dtype=np.float64)
    t = np.arange(resolution + 1) / resolution
    w = np.stack([t, 1.0 - t], axis=1)
    labels = np.argmax(w @ v.T, axis=1)
    corners = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    for i in range(resolution):
        if labels[i] != labels[i + 1]:
            corners.append(0.5 * (w[i] + w[i + 1]))
    return _cluster_points(corners, 2.5 / resolution)


def grid_corner_oracle_3d(values, resolution=1000):
    """Vertices of the upper envelope on the 2-simplex, located by scanning
    a triangular lattice: a lattice triangle whose three vertices carry
    three distinct argmax labels brackets an interior envelope vertex; a
    label switch along a simplex edge brackets a boundary vertex."""
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[0]
    r = resolution
    a = np.arange(r + 1, dtype=np.float64)[:, None]
    b = np.arange(r + 1, dtype=np.float64)[None, :]
    c = r - a - b
    best = np.full((r + 1, r + 1), -np.inf)
    labels = np.full((r + 1, r + 1), -1, dtype=np.int16)
    for k in range(n):
        score = a * v[k, 0] + b * v[k, 1] + c * v[k, 2]
        better = score > best
        best[better] = score[better]
        labels[better] = k
    valid = (a + b) <= r

    def to_weight(ai, bi, offset):
        return np.stack([(ai + offset[0]) / r, (bi + offset[1]) / r,
                         (r - ai - bi - offset[0] - offset[1]) / r], axis=1)

    flags = []
    up0, up1, up2 = labels[:-1, :-1], labels[1:, :-1], labels[:-1, 1:]
    up_ok = valid[:-1, :-1] & valid[1:, :-1] & valid[:-1, 1:]
    tri = up_ok & (up0 != up1) & (up0 != up2) & (up1 != up2)
    ai, bi = np.nonzero(tri)
    flags.extend(to_weight(ai, bi, (1 / 3, 1 / 3)))
    dn0, dn1, dn2 = labels[1:, :-1], labels[:-1, 1:], labels[1:, 1:]
    dn_ok = valid[1:, :-1] & valid[:-1, 1:] & valid[1:, 1:]
    tri = dn_ok & (dn0 != dn1) & (dn0 != dn2) & (dn1 != dn2)
    ai, bi = np.nonzero(tri)
    flags.extend(to_weight(ai, bi, (2 / 3, 2 / 3)))

    # simplex edges: w2 = 0 (a + b = r), w0 = 0, and w1 = 0
    edges = [
        [np.array([i / r, (r - i) / r, 0.0]) for i in range(r + 1)],
        [np.array([0.0, i / r, (r - i) / r]) for i in range(r + 1)],
        [np.array([i / r, 0.0, (r - i) / r]) for i in range(r + 1)],
    ]
    edge_labels = [
        [labels[i, r - i] for i in range(r + 1)],
        [labels[0, i] for i in range(r + 1)],
        [labels[i, 0] for i in range(r + 1)],
    ]
    for pts, labs in zip(edges, edge_labels):
        for i in range(r):
            if labs[i] != labs[i + 1]:
                flags.append(0.5 * (pts[i] + pts[i + 1]))

    corners = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
               np.array([0.0, 0.0, 1.0])]
    return corners + _cluster_points(flags, 2.5 / resolution)


def grid_corner_oracle(values, resolution=1000):
    d = np.asarray(values).shape[1]
    if d == 2:
        return grid_corner_oracle_2d(values, resolution)
    if d == 3:
        return grid_corner_oracle_3d(values, resolution)
    raise ValueError(f"oracle supports d in {{2, 3}}, got {d}")


def match_corner_sets(returned, expected, tol=1e-2):
    """(missed, spurious): expected points with no returned match, and
    returned points matching nothing expected (component-wise distance)."""
    missed = [e for e in expected
              if not any(np.max(np.abs(e - r)) <= tol for r in returned)]
    spurious = [r for r in returned
                if not any(np.max(np.abs(r - e)) <= tol for e in expected)]
    return missed, spurious
