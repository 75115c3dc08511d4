"""Compiled event loops for the lattice and zero-range simulators.

Event selection uses a binary sum tree over the event slots, so each event
costs O(log N). Statistics are accumulated per batch: occupancy time
integrals through per-site "last touched" stamps, and hop counts per bond
(bond 0 is the entry, bond k the move leaving site k).

Every loop returns ``(occupancy, hops, batch_times, time, events, status)``
where ``status`` is 0 on completion and 1 if no event was enabled.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_ABSORBING = 1


@njit(cache=True)
def _tree_size(n_slots):
    size = 1
    while size < n_slots:
        size *= 2
    return size


@njit(cache=True)
def _tree_set(tree, size, slot, value):
    node = slot + size
    tree[node] = value
    node //= 2
    while node >= 1:
        tree[node] = tree[2 * node] + tree[2 * node + 1]
        node //= 2


@njit(cache=True)
def _tree_pick(tree, size, target):
    node = 1
    while node < size:
        left = 2 * node
        if tree[left + 1] <= 0.0 or target < tree[left]:
            node = left
        else:
            target -= tree[left]
            node = left + 1
    return node - size


@njit(cache=True)
def _wrap(site, n):
    return (site - 1) % n + 1


@njit(cache=True)
def _flip(site, value, t, tau, last, occupancy, batch):
    if batch >= 0 and tau[site] != 0:
        occupancy[batch, site] += t - last[site]
    last[site] = t
    tau[site] = value


@njit(cache=True)
def _flush(t, n, tau, last, occupancy, batch):
    for site in range(1, n + 1):
        if tau[site] != 0:
            occupancy[batch, site] += t - last[site]
        last[site] = t


@njit(cache=True)
def _batch_boundary(done, per_batch, n_batches, batch, t, batch_start, n, tau, last, occupancy, times):
    """Open the first batch or rotate to the next one; returns (batch, batch_start)."""
    if done == 0:
        for site in range(1, n + 1):
            last[site] = t
        return 0, t
    if done % per_batch == 0 and batch < n_batches - 1:
        _flush(t, n, tau, last, occupancy, batch)
        times[batch] = t - batch_start
        return batch + 1, t
    return batch, batch_start


# --- Open lattice ------------------------------------------------------------


@njit(cache=True)
def _open_rate(slot, tau, rates, n, ell, alpha, beta):
    if slot == 0:
        for site in range(1, ell + 1):
            if tau[site] != 0:
                return 0.0
        return alpha
    if tau[slot] == 0:
        return 0.0
    if slot == n:
        return beta
    if tau[slot + ell] != 0:
        return 0.0
    return rates[slot]


@njit(cache=True)
def _open_refresh(site, tree, size, tau, rates, n, ell, alpha, beta):
    _tree_set(tree, size, site, _open_rate(site, tau, rates, n, ell, alpha, beta))
    behind = site - ell
    if behind >= 1:
        _tree_set(tree, size, behind, _open_rate(behind, tau, rates, n, ell, alpha, beta))
    if site <= ell:
        _tree_set(tree, size, 0, _open_rate(0, tau, rates, n, ell, alpha, beta))


@njit(cache=True)
def run_open(n, ell, alpha, beta, rates, tau, burn_in, samples, n_batches, seed):
    """
    Open-boundary lattice.

    ``rates[1..n]`` are the site rates and ``tau`` the 0/1 occupancy padded to
    length ``n + ell + 1`` (index 0 unused). ``tau`` is updated in place.
    """
    np.random.seed(seed)
    size = _tree_size(n + 1)
    tree = np.zeros(2 * size)
    for slot in range(n + 1):
        _tree_set(tree, size, slot, _open_rate(slot, tau, rates, n, ell, alpha, beta))

    occupancy = np.zeros((n_batches, n + 1))
    hops = np.zeros((n_batches, n + 1), dtype=np.int64)
    times = np.zeros(n_batches)
    last = np.zeros(n + 1)
    per_batch = samples // n_batches
    total = burn_in + samples
    batch = -1
    batch_start = 0.0
    t = 0.0

    for event in range(total):
        if event >= burn_in:
            batch, batch_start = _batch_boundary(
                event - burn_in, per_batch, n_batches, batch, t, batch_start, n, tau, last, occupancy, times
            )
        rate = tree[1]
        if rate <= 0.0:
            return occupancy, hops, times, t, event, STATUS_ABSORBING
        t += np.random.exponential(1.0 / rate)
        slot = _tree_pick(tree, size, np.random.random() * rate)

        if slot == 0:
            _flip(1, 1, t, tau, last, occupancy, batch)
            _open_refresh(1, tree, size, tau, rates, n, ell, alpha, beta)
        elif slot == n:
            _flip(n, 0, t, tau, last, occupancy, batch)
            _open_refresh(n, tree, size, tau, rates, n, ell, alpha, beta)
        else:
            _flip(slot, 0, t, tau, last, occupancy, batch)
            _flip(slot + 1, 1, t, tau, last, occupancy, batch)
            _open_refresh(slot, tree, size, tau, rates, n, ell, alpha, beta)
            _open_refresh(slot + 1, tree, size, tau, rates, n, ell, alpha, beta)
        if batch >= 0:
            hops[batch, slot] += 1

    if batch >= 0:
        _flush(t, n, tau, last, occupancy, batch)
        times[batch] = t - batch_start
    return occupancy, hops, times, t, total, STATUS_OK


# --- Ring --------------------------------------------------------------------


@njit(cache=True)
def _ring_rate(site, tau, rates, n, ell):
    if tau[site] == 0:
        return 0.0
    if tau[_wrap(site + ell, n)] != 0:
        return 0.0
    return rates[site]


@njit(cache=True)
def _ring_refresh(site, tree, size, tau, rates, n, ell):
    _tree_set(tree, size, site, _ring_rate(site, tau, rates, n, ell))
    behind = _wrap(site - ell, n)
    _tree_set(tree, size, behind, _ring_rate(behind, tau, rates, n, ell))


@njit(cache=True)
def run_ring(n, ell, rates, tau, burn_in, samples, n_batches, seed):
    """Periodic lattice; ``tau`` has length ``n + 1`` (index 0 unused)."""
    np.random.seed(seed)
    size = _tree_size(n + 1)
    tree = np.zeros(2 * size)
    for site in range(1, n + 1):
        _tree_set(tree, size, site, _ring_rate(site, tau, rates, n, ell))

    occupancy = np.zeros((n_batches, n + 1))
    hops = np.zeros((n_batches, n + 1), dtype=np.int64)
    times = np.zeros(n_batches)
    last = np.zeros(n + 1)
    per_batch = samples // n_batches
    total = burn_in + samples
    batch = -1
    batch_start = 0.0
    t = 0.0

    for event in range(total):
        if event >= burn_in:
            batch, batch_start = _batch_boundary(
                event - burn_in, per_batch, n_batches, batch, t, batch_start, n, tau, last, occupancy, times
            )
        rate = tree[1]
        if rate <= 0.0:
            return occupancy, hops, times, t, event, STATUS_ABSORBING
        t += np.random.exponential(1.0 / rate)
        site = _tree_pick(tree, size, np.random.random() * rate)
        target = _wrap(site + 1, n)
        _flip(site, 0, t, tau, last, occupancy, batch)
        _flip(target, 1, t, tau, last, occupancy, batch)
        _ring_refresh(site, tree, size, tau, rates, n, ell)
        _ring_refresh(target, tree, size, tau, rates, n, ell)
        if batch >= 0:
            hops[batch, site] += 1

    if batch >= 0:
        _flush(t, n, tau, last, occupancy, batch)
        times[batch] = t - batch_start
    return occupancy, hops, times, t, total, STATUS_OK


# --- Zero-range process ------------------------------------------------------


@njit(cache=True)
def run_zrp(n, rates, gaps, positions, burn_in, samples, n_batches, seed):
    """
    Zero-range dynamics on M sites (``gaps[1..M]``, ``positions[1..M]``).

    ZRP site i loses one unit to site i-1 (cyclically) at rate
    ``rates[positions[i]]`` whenever ``gaps[i] > 0``; the TASEP particle i
    advances one site. Occupancy and hop statistics are recorded in TASEP
    coordinates. ``gaps`` and ``positions`` are updated in place.
    """
    np.random.seed(seed)
    m = gaps.shape[0] - 1
    tau = np.zeros(n + 1, dtype=np.int8)
    for i in range(1, m + 1):
        tau[positions[i]] = 1

    size = _tree_size(m + 1)
    tree = np.zeros(2 * size)
    for i in range(1, m + 1):
        _tree_set(tree, size, i, rates[positions[i]] if gaps[i] > 0 else 0.0)

    occupancy = np.zeros((n_batches, n + 1))
    hops = np.zeros((n_batches, n + 1), dtype=np.int64)
    times = np.zeros(n_batches)
    last = np.zeros(n + 1)
    per_batch = samples // n_batches
    total = burn_in + samples
    batch = -1
    batch_start = 0.0
    t = 0.0

    for event in range(total):
        if event >= burn_in:
            batch, batch_start = _batch_boundary(
                event - burn_in, per_batch, n_batches, batch, t, batch_start, n, tau, last, occupancy, times
            )
        rate = tree[1]
        if rate <= 0.0:
            return occupancy, hops, times, t, event, STATUS_ABSORBING
        t += np.random.exponential(1.0 / rate)
        i = _tree_pick(tree, size, np.random.random() * rate)
        behind = i - 1 if i > 1 else m
        site = positions[i]
        target = _wrap(site + 1, n)

        gaps[i] -= 1
        gaps[behind] += 1
        positions[i] = target
        _flip(site, 0, t, tau, last, occupancy, batch)
        _flip(target, 1, t, tau, last, occupancy, batch)

        _tree_set(tree, size, i, rates[target] if gaps[i] > 0 else 0.0)
        _tree_set(tree, size, behind, rates[positions[behind]] if gaps[behind] > 0 else 0.0)
        if batch >= 0:
            hops[batch, site] += 1

    if batch >= 0:
        _flush(t, n, tau, last, occupancy, batch)
        times[batch] = t - batch_start
    return occupancy, hops, times, t, total, STATUS_OK
