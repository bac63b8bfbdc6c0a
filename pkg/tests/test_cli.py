import json

import networkx as nx
import pytest

from neteconomy import artifacts
from neteconomy.cli import main
from neteconomy.runner import simulate
from neteconomy.scenario import ScenarioConfig

OUTCOME_LABELS = {"Equilibrium", "Disequilibrium", "ConsumerWealthZero", "SingleProducerLeft"}


@pytest.fixture(scope="module")
def seeded_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run78")
    assert main(["run", "--s1", "78", "--s2", "178", "--out", str(out)]) == 0
    return out


def test_run_writes_outputs(seeded_run):
    summary = json.loads((seeded_run / "summary.json").read_text())
    assert summary["outcome"] in OUTCOME_LABELS
    assert (summary["s1"], summary["s2"]) == (78, 178)
    assert summary["config_hash"] == ScenarioConfig().digest()
    header = (seeded_run / "prices.csv").read_text().splitlines()[0]
    assert header == "period,producer_id,price,inventory,demand,price_adjust"


def test_rerun_is_byte_identical(seeded_run, tmp_path):
    assert main(["run", "--s1", "78", "--s2", "178", "--out", str(tmp_path)]) == 0
    for name in ("timeseries.csv", "prices.csv"):
        assert (tmp_path / name).read_bytes() == (seeded_run / name).read_bytes()


def test_invalid_config_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"profit_reinvestment_ratio": 2.0}))
    out = tmp_path / "out"
    assert main(["run", "--s1", "1", "--s2", "1", "--config", str(cfg), "--out", str(out)]) != 0
    assert not out.exists()
    assert "profit_reinvestment_ratio" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", "--s1", "1", "--s2", "1", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) != 0


@pytest.fixture(scope="module")
def short_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    ScenarioConfig(horizon=40).to_json(path)
    return path


def test_sweep_grid(tmp_path, short_config):
    argv = ["sweep", "--s1-range", "1:3", "--s2-range", "7:9", "--config", str(short_config)]
    assert main(argv + ["--jobs", "4", "--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--jobs", "1", "--out", str(tmp_path / "b")]) == 0
    lines = (tmp_path / "a" / "runs.jsonl").read_text().splitlines()
    assert len(lines) == 4
    assert (tmp_path / "a" / "runs.jsonl").read_bytes() == (tmp_path / "b" / "runs.jsonl").read_bytes()


def test_bad_seed_range(tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--s1-range", "3:1", "--s2-range", "1:2", "--out", str(tmp_path)])


# --------------------------------------------------------------------------
# summarize
# --------------------------------------------------------------------------


def fake_run(outcome, **values):
    row = {c: 0.0 for c in artifacts.SUMMARY_COLUMNS}
    row.update(values, outcome=outcome, s1=0, s2=0)
    return json.dumps(row)


def test_summarize_empty(tmp_path, capsys):
    path = tmp_path / "runs.jsonl"
    path.write_text("")
    assert main(["summarize", str(path), "--out", str(tmp_path / "t.csv")]) == 0
    table = artifacts.summarize_runs(artifacts.read_runs(path)[0])
    assert [r["count"] for r in table] == [0, 0, 0, 0]
    assert "Disequilibrium" in capsys.readouterr().out


def test_summarize_means(tmp_path):
    path = tmp_path / "runs.jsonl"
    path.write_text(
        "\n".join(
            [
                fake_run("Disequilibrium", shut_firms=6, wage=10.0, gini_consumers=0.5),
                fake_run("Disequilibrium", shut_firms=7, wage=30.0, gini_consumers=0.3),
                fake_run("Equilibrium", shut_firms=8, wage=93.0, total_utility=1.5e6),
                "{not json",
                '{"s1": 1}',
            ]
        )
        + "\n"
    )
    runs, bad = artifacts.read_runs(path)
    assert bad == 2
    table = {r["outcome"]: r for r in artifacts.summarize_runs(runs)}
    assert table["Disequilibrium"]["count"] == 2
    assert table["Disequilibrium"]["shut_firms"] == 6.5
    assert table["Disequilibrium"]["wage"] == 20.0
    assert table["Disequilibrium"]["gini_consumers"] == pytest.approx(0.4)
    assert table["Equilibrium"]["total_utility"] == 1.5e6
    assert sum(r["count"] for r in table.values()) == len(runs)

    csv_path = tmp_path / "table.csv"
    assert main(["summarize", str(path), "--out", str(csv_path)]) == 0
    rows = csv_path.read_text().splitlines()
    assert rows[0].startswith("outcome,count,total_producer_wealth")
    assert rows[1].startswith("Equilibrium,1,")


def test_summary_counts_match_sweep(tmp_path, short_config):
    main(["sweep", "--s1-range", "1:4", "--s2-range", "1:3", "--config", str(short_config), "--out", str(tmp_path)])
    runs, bad = artifacts.read_runs(tmp_path / "runs.jsonl")
    assert bad == 0
    assert sum(r["count"] for r in artifacts.summarize_runs(runs)) == 6


# --------------------------------------------------------------------------
# exports and round trips
# --------------------------------------------------------------------------


def test_export_graph_initial(seeded_run):
    assert main(["export-graph", str(seeded_run), "--period", "0"]) == 0
    g = nx.read_graphml(seeded_run / "graph_t0000.graphml")
    roles = nx.get_node_attributes(g, "role")
    assert sum(r == "producer" for r in roles.values()) == 10
    assert sum(r == "consumer" for r in roles.values()) == 80
    assert all(roles[a] == "producer" for a, _ in g.edges)


def test_export_graph_wealth_matches_summary(seeded_run, tmp_path):
    summary = json.loads((seeded_run / "summary.json").read_text())
    out = tmp_path / "final.graphml"
    assert main(["export-graph", str(seeded_run), "--period", str(summary["periods"]), "--out", str(out)]) == 0
    g = nx.read_graphml(out)
    wealth = nx.get_node_attributes(g, "wealth")
    expected = {**summary["producer_wealth"], **summary["consumer_wealth"]}
    assert wealth == pytest.approx(expected, rel=1e-15)


def test_export_graph_missing_snapshot(seeded_run):
    assert main(["export-graph", str(seeded_run), "--period", "3"]) != 0


def test_csv_round_trip(tmp_path):
    result = simulate(ScenarioConfig(horizon=30), 5, 9)
    artifacts.write_run(result, tmp_path)
    assert artifacts.read_timeseries(tmp_path / "timeseries.csv") == result.records
    assert artifacts.read_prices(tmp_path / "prices.csv") == result.prices


def test_snapshot_round_trip(tmp_path):
    result = simulate(ScenarioConfig(horizon=30), 5, 9)
    artifacts.write_run(result, tmp_path)
    for t, state in result.snapshots.items():
        assert artifacts.load_snapshot(tmp_path, t) == state
