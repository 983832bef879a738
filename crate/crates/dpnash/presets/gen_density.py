"""Regenerates the 10-player density topologies.

Each schedule has period 4. A directed Hamiltonian cycle is spread over the
four phases so the union of any full period is strongly connected; the rest
of every phase is filled with random distinct edges up to its edge count.
"""

import random
from pathlib import Path

N = 10
TARGETS = {
    "density-10p-low": [20, 20, 20, 20],
    "density-10p-mid": [36, 42, 49, 45],
    "density-10p-high": [50, 64, 79, 71],
}


def build(name, counts, rng):
    order = list(range(1, N + 1))
    rng.shuffle(order)
    cycle = [(order[k], order[(k + 1) % N]) for k in range(N)]
    phases = [set() for _ in counts]
    for k, e in enumerate(cycle):
        phases[k % len(counts)].add(e)
    all_edges = [(j, i) for j in range(1, N + 1) for i in range(1, N + 1) if i != j]
    for phase, count in zip(phases, counts):
        pool = [e for e in all_edges if e not in phase]
        rng.shuffle(pool)
        phase.update(pool[: count - len(phase)])
    lines = [
        f"# {name}: generated by gen_density.py",
        f"n {N} period {len(counts)} D {len(counts)}",
    ]
    for k, phase in enumerate(phases, start=1):
        lines.append(f"graph {k}")
        lines.extend(f"edge {j} {i}" for j, i in sorted(phase))
    return "\n".join(lines) + "\n"


def main():
    rng = random.Random(20)
    out = Path(__file__).parent / "topologies"
    for name, counts in TARGETS.items():
        (out / f"{name}.topo").write_text(build(name, counts, rng))


if __name__ == "__main__":
    main()
