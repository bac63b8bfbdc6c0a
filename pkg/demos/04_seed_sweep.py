"""
Sweeping seed pairs
===================

Every run is fixed by its two seeds, so a sweep is a grid of pairs.  Results
go to a JSON-lines file, one run per line, identical for any worker count.
"""

# %%
import tempfile
from pathlib import Path

from neteconomy import artifacts
from neteconomy.runner import seed_grid, sweep
from neteconomy.scenario import ScenarioConfig

out = Path(tempfile.mkdtemp()) / "runs.jsonl"
pairs = seed_grid(range(1, 5), range(100, 104))
rows = sweep(pairs, ScenarioConfig(), jobs=2, out_path=out)
print(len(rows), "runs written to", out)

# %%
# Outcome counts and per-outcome means.
runs, bad = artifacts.read_runs(out)
print(artifacts.format_summary(artifacts.summarize_runs(runs)))

# %%
# A variant configuration: firms keep half their profit.
short = ScenarioConfig(profit_reinvestment_ratio=0.5)
for row in sweep(pairs[:4], short, jobs=1, out_path=out.with_name("short.jsonl")):
    print(row["s1"], row["s2"], row["outcome"], round(row["gini_consumers"], 3))
