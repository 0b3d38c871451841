#!/usr/bin/env python3
"""Replay the bundled one-event script and print what the model did.

Shows the lead handoff: one human touch at t=0, the model takes over at
t=0.1 and starts filling in its own control stream.
"""

import argparse

from dualloop.core import Rng
from dualloop.engine import load_user_script, run_simulation
from dualloop.interaction import InteractionConfig
from dualloop.mdrnn import MdrnnConfig, init_mdrnn, load_mdrnn


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--script", default="configs/idle_after_one_event.jsonl")
    ap.add_argument("--model", default=None, help="trained model JSON (seeded init if omitted)")
    ap.add_argument("--duration", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=1234)
    args = ap.parse_args()

    model = load_mdrnn(args.model) if args.model else init_mdrnn(MdrnnConfig(), Rng(args.seed))
    script = load_user_script(args.script)
    log = run_simulation(model, InteractionConfig(), script, args.duration, args.seed)

    for entry in log:
        kind = entry.get("kind")
        if kind == "header":
            print(f"# seed={entry['seed']} tick={entry['tick']} switchover={entry['switchover']}")
        elif kind == "mode":
            print(f"{entry['t']:8.3f}  lead -> {entry['mode'].upper()}")
        elif kind == "user":
            print(f"{entry['t']:8.3f}  human ch{entry['channel']} = {entry['value']:.3f}")
        elif kind == "model" and entry["channel"] == 0:
            print(f"{entry['t']:8.3f}  model step (ch0 = {entry['value']:.3f}, 8 channels)")


if __name__ == "__main__":
    main()
