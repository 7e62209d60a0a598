#!/usr/bin/env python3
"""Independent reference computations for constants frozen in the C++ tests.

Each function recomputes a value from first principles with exact fractions,
without sharing any code with the simulator. Run it to print the table.
"""
from fractions import Fraction as F
from itertools import permutations, product


def timer_expiry_under_drift(now, duration, rate_before_gst, gst, step=F(1, 64)):
    """Walk the local clock forward in small exact steps until `duration` has elapsed."""
    t, local = F(now), F(0)
    while True:
        rate = rate_before_gst if t < gst else F(1)
        if local + rate * step >= duration:
            return t + (duration - local) / rate
        local += rate * step
        t += step


def view_duration(delta=F(1), epsilon=F(1, 100)):
    big_delta = 8 * delta
    return big_delta + 2 * delta + epsilon


def leader(v, n):
    return v % n + 1


def global_view(epoch, index, f):
    return (epoch - 1) * (f + 1) + index


def sync_time_by_scan(intervals, big_delta, gst, grid=F(1, 2)):
    """Earliest grid point t >= gst with every interval covering [t, t + big_delta]."""
    t = gst
    horizon = max(hi for _, hi in intervals)
    while t <= horizon:
        if all(lo <= t and t + big_delta <= hi for lo, hi in intervals):
            return t
        t += grid
    return None


def doubling_sync_latency(beta, gst, big_delta, n_views=40):
    """Process A starts at 0, laggard L at gst; view v lasts beta*2^(v-1) local time.
    Latency of the first view (by scan over views) where both overlap for big_delta."""
    def start(origin, v):
        return origin + beta * (2 ** (v - 1) - 1)

    best = None
    for w in range(1, n_views):
        lo = max(start(0, w), start(gst, w))
        hi = min(start(0, w + 1), start(gst, w + 1))
        if hi - lo >= big_delta:
            best = lo
            break
    return best - gst


def allow_any_orders():
    """Correct proposals 1,2,3 at n=4, f=1: for every delivery order of the three
    DISCLOSE messages, does any value reach f+1=2 before the third arrives?"""
    results = set()
    for order in permutations([1, 2, 3]):
        tally = {}
        reached = False
        for v in order:
            tally[v] = tally.get(v, 0) + 1
            reached |= tally[v] >= 2
        results.add(reached)
    return results


def equivocation_quorums():
    """Leader sends A or B to each of the 3 correct replicas and votes both ways
    itself. Largest number of splits where both A and B reach 2f+1=3 votes."""
    both = 0
    for split in product("AB", repeat=3):
        a = split.count("A") + 1
        b = split.count("B") + 1
        both += a >= 3 and b >= 3
    return both


def main():
    rows = [
        ("timer expiry, rate 1/2, duration 10", timer_expiry_under_drift(0, F(10), F(1, 2), F(100))),
        ("view_duration (delta=1, eps=1/100)", view_duration()),
        ("leader(1), n=4", leader(1, 4)),
        ("leader(4), n=4", leader(4, 4)),
        ("global view of epoch 1 index 3, f=2", global_view(1, 3, 2)),
        ("global view of epoch 2 index 1, f=2", global_view(2, 1, 2)),
        ("t_s for enters {100,101,101.5}, exits >= 112", sync_time_by_scan([(F(100), F(112)), (F(101), F(112)),
                                                                          (F(203, 2), F(112))], F(8), F(0))),
        ("doubling laggard latency, gst=2^19-1/2", doubling_sync_latency(F(1), F(2**19) - F(1, 2), F(8))),
        ("some value reaches 2 of 3 disclosures", allow_any_orders()),
        ("equivocation splits with two quorums", equivocation_quorums()),
        ("highQC of views {3,7,5}", max([3, 7, 5])),
    ]
    for name, value in rows:
        print(f"{name}: {value}")


if __name__ == "__main__":
    main()
