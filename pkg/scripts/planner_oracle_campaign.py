#!/usr/bin/env python3
"""Stress the planner against the BFS / min-crowded oracles on random maps.

Usage: python scripts/planner_oracle_campaign.py [--maps 3000] [--seed 0]
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import bfs_shortest_moves, min_crowded_entries, random_grid  # noqa: E402

from xplain import Objective, build_mdp, extract_route, plan_policy, route_metrics  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--maps", type=int, default=3000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-size", type=int, default=6)
    args = parser.parse_args()

    started = time.perf_counter()
    mismatches = []
    for offset in range(args.maps):
        seed = args.seed + offset
        grid = random_grid(
            random.Random(seed), max_width=args.max_size, max_height=args.max_size
        )
        mdp = build_mdp(grid)
        shortest = route_metrics(
            extract_route(plan_policy(mdp, Objective.SHORTEST), mdp), mdp
        )
        if shortest.moves != bfs_shortest_moves(grid):
            mismatches.append(("shortest", seed))
        safest = route_metrics(
            extract_route(plan_policy(mdp, Objective.SAFEST), mdp), mdp
        )
        if safest.crowded_entries != min_crowded_entries(grid):
            mismatches.append(("safest", seed))
    elapsed = time.perf_counter() - started
    print(f"{args.maps} maps in {elapsed:.1f} s; mismatches: {mismatches or 'none'}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
