"""Independent reference implementations used only to cross-check results.

Nothing here shares code with the package: the queue oracle is an event
loop over a heap, the KS/energy oracles are direct transcriptions of the
definitions, and integrals come from adaptive quadrature.
"""

import heapq

import numpy as np


def busy_servers_event_driven(sample_interarrival, sample_service, t_obs, rng):
    """Occupancy of an infinite-server queue at ``t_obs``.

    Customers arrive at renewal epochs (the first one at time 0) and each
    holds a server for an independent service draw; the event loop replays
    arrivals and departures in time order.
    """
    events = []
    t = 0.0
    while t <= t_obs:
        heapq.heappush(events, (t, 1))
        heapq.heappush(events, (t + sample_service(rng), -1))
        t += sample_interarrival(rng)
    busy = 0
    while events:
        when, delta = heapq.heappop(events)
        if when > t_obs:
            break
        busy += delta
    return busy


def brute_force_ks(a, b):
    """Two-sample KS distance straight from the definition."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = 0.0
    for x in np.concatenate([a, b]):
        fa = np.count_nonzero(a <= x) / len(a)
        fb = np.count_nonzero(b <= x) / len(b)
        d = max(d, abs(fa - fb))
    return d


def brute_force_energy(a, b):
    """Energy statistic with explicit all-pairs loops (plug-in means)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 1 and a.ndim == 2 and a.shape[1] != b.shape[1]:
        a = a.T
        b = b.T

    def mean_dist(x, y):
        total = 0.0
        for ix in range(len(x)):
            for iy in range(len(y)):
                total += float(np.linalg.norm(x[ix] - y[iy]))
        return total / (len(x) * len(y))

    return 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b)
