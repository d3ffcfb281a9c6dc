import json
from pathlib import Path

import pytest

from hybrid_sched.cli import build_parser, cmd_certify_plan, main
from hybrid_sched.formats import (
    dump_graph,
    dump_instance,
    dump_schedule,
    load_instance,
    load_schedule,
)
from hybrid_sched.genlab.qpartite import ReductionParams, qpartite_yes_graph
from hybrid_sched.genlab.random_dag import random_layered_dag
from hybrid_sched.models import Assignment, Schedule, Side

from .utils import assert_valid_schedule, chain, make_instance


@pytest.fixture
def one_task(tmp_path: Path) -> Path:
    path = tmp_path / "one_task.json"
    path.write_text(dump_instance(make_instance([4], [2])))
    return path


def write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def error_line(capsys: pytest.CaptureFixture) -> str:
    return capsys.readouterr().err.strip().splitlines()[-1]


def test_solve_writes_schedule_and_diagnostics(one_task: Path, tmp_path: Path) -> None:
    out, diagnostics = tmp_path / "schedule.json", tmp_path / "diagnostics.json"

    code = main(
        [
            "solve",
            "--instance", str(one_task),
            "--rounding", "hlpb",
            "--b", "auto",
            "--out", str(out),
            "--diagnostics", str(diagnostics),
        ]
    )  # fmt: skip

    assert code == 0
    assert load_schedule(out).makespan == 2.0
    report = json.loads(diagnostics.read_text())
    assert report["makespan"] == 2.0
    assert report["b"] == "inf"
    assert report["ratio"] == pytest.approx(1.0)


def test_solve_to_stdout(one_task: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(["solve", "--instance", str(one_task)]) == 0

    schedule, diagnostics = capsys.readouterr().out.splitlines()
    assert json.loads(schedule)["assignments"][0]["pool"] == "gpu"
    assert json.loads(diagnostics)["rounding"] == "hlpb"


def test_solve_empty_instance(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write(tmp_path / "empty.json", '{"m":1,"k":1,"tasks":[],"edges":[]}')

    assert main(["solve", "--instance", str(path)]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[0])["makespan"] == 0


def test_solve_rejects_small_b(one_task: Path, capsys: pytest.CaptureFixture) -> None:
    code = main(["solve", "--instance", str(one_task), "--b", "1.5"])

    assert code == 2
    assert error_line(capsys) == 'error=invalid-input exit=2 reason="b must be ≥ 2"'


def test_solve_reports_invalid_instances(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write(tmp_path / "bad.json", '{"m":1,"k":2,"tasks":[],"edges":[]}')

    assert main(["solve", "--instance", str(path)]) == 2
    assert error_line(capsys) == 'error=invalid-input exit=2 reason="m < k"'


def test_solve_reports_lp_failures(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write(
        tmp_path / "inc.json",
        '{"m":1,"k":1,"tasks":[{"id":0,"cpu":"inc","gpu":1}],"edges":[]}',
    )

    assert main(["solve", "--instance", str(path)]) == 3
    assert error_line(capsys).startswith("error=lp-infinite-time exit=3")

    assert main(["solve", "--instance", str(path), "--rounding", "fastest"]) == 0


def test_solve_missing_file(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(["solve", "--instance", str(tmp_path / "nope.json")]) == 2
    assert error_line(capsys).startswith("error=invalid-input exit=2")


def test_solve_extra_outputs(tmp_path: Path) -> None:
    instance = random_layered_dag(12, 3, 0.4, m=2, k=1, seed=3)
    path = write(tmp_path / "random.json", dump_instance(instance))
    out, gantt, lp = tmp_path / "s.json", tmp_path / "g.csv", tmp_path / "a.lp"

    code = main(
        [
            "solve",
            "--instance", str(path),
            "--rounding", "half",
            "--out", str(out),
            "--diagnostics", str(tmp_path / "d.json"),
            "--gantt", str(gantt),
            "--lp-dump", str(lp),
        ]
    )  # fmt: skip

    assert code == 0
    assert_valid_schedule(instance, load_schedule(out))
    rows = gantt.read_text().splitlines()
    assert rows[0] == "machine,task,start,end"
    assert len(rows) == 13
    assert lp.read_text().startswith("Minimize\n obj: Cmax\n")


def test_verify(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    instance = chain(2)
    instance_path = write(tmp_path / "chain.json", dump_instance(instance))
    first = Assignment(id=0, pool=Side.CPU, machine=0, start=0.0)
    good = Schedule.build(
        instance, [first, Assignment(id=1, pool=Side.CPU, machine=0, start=1.0)]
    )
    broken = Schedule.build(
        instance, [first, Assignment(id=1, pool=Side.CPU, machine=0, start=0.5)]
    )

    good_path = write(tmp_path / "good.json", dump_schedule(good))
    broken_path = write(tmp_path / "broken.json", dump_schedule(broken))

    assert main(["verify", "--instance", str(instance_path), "--schedule", str(good_path)]) == 0
    assert json.loads(capsys.readouterr().out) == {"ok": True, "violations": []}

    code = main(["verify", "--instance", str(instance_path), "--schedule", str(broken_path)])
    captured = capsys.readouterr()
    assert code == 1
    kinds = {v["kind"] for v in json.loads(captured.out)["violations"]}
    assert kinds == {"overlap", "precedence"}
    assert captured.err.strip().startswith("error=verification exit=1")


def test_oracle(tmp_path: Path, capsys: pytest.CaptureFixture, one_task: Path) -> None:
    path = write(tmp_path / "chain.json", dump_instance(chain(3)))

    assert main(["oracle", "--instance", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["exact_opt"] == 3

    assert main(["oracle", "--instance", str(one_task)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["exact_opt"] == 2
    assert report["lp_bound"] == pytest.approx(2)


def test_oracle_caps(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write(tmp_path / "chain.json", dump_instance(chain(5)))

    assert main(["oracle", "--instance", str(path), "--max-tasks", "4"]) == 4
    assert error_line(capsys).startswith("error=caps exit=4")


def test_bench_generated_is_deterministic(tmp_path: Path) -> None:
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    arguments = ["bench", "--generate", "3", "--seed", "17", "--workers", "2"]

    assert main([*arguments, "--csv", str(first)]) == 0
    assert main([*arguments, "--csv", str(second)]) == 0

    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert len(lines) == 4
    assert all(",ok," in line for line in lines[1:])


def test_bench_empty_directory(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    corpus = tmp_path / "corpus"
    corpus.mkdir()

    assert main(["bench", "--dir", str(corpus)]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "instance_id,status,n,m,k,b,lp_bound,makespan_hlpb,makespan_half,"
        "ratio_hlpb,ratio_half,theoretical_ratio,wall_ms"
    ]


def test_generate_random(tmp_path: Path) -> None:
    out = tmp_path / "random.json"

    code = main(
        [
            "generate", "random",
            "--tasks", "20", "--layers", "4", "--edge-prob", "0.3",
            "--m", "3", "--k", "2", "--seed", "5",
            "--out", str(out),
        ]
    )  # fmt: skip

    assert code == 0
    assert load_instance(out) == random_layered_dag(20, 4, 0.3, m=3, k=2, seed=5)


def test_generate_and_certify_qpartite(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    instance_path, graph_path = tmp_path / "reduction.json", tmp_path / "graph.json"
    schedule_path = tmp_path / "certificate.json"

    code = main(
        [
            "generate", "qpartite",
            "--q", "3", "--Q", "2", "--n", "4", "--epsilon", "1/16",
            "--edge-prob", "0.4", "--seed", "2",
            "--out", str(instance_path), "--graph-out", str(graph_path),
        ]
    )  # fmt: skip
    assert code == 0
    assert load_instance(instance_path).m == 288

    code = main(
        [
            "certify", "yes-schedule",
            "--instance", str(instance_path), "--graph", str(graph_path),
            "--epsilon", "1/16", "--out", str(schedule_path),
        ]
    )  # fmt: skip
    assert code == 0
    assert load_schedule(schedule_path).makespan == 3

    assert main(["certify", "yes-plan", "--graph", str(graph_path)]) == 0
    assert json.loads(capsys.readouterr().out)["makespan"] == 3


def test_generate_qpartite_errors(capsys: pytest.CaptureFixture) -> None:
    base = ["generate", "qpartite", "--q", "3", "--Q", "4", "--n", "5"]

    assert main([*base, "--epsilon", "1/16", "--max-tasks", "100"]) == 2
    assert "fall below the floor" in error_line(capsys)

    assert main(["generate", "qpartite", "--q", "4", "--Q", "2", "--n", "4"]) == 2
    assert "multiple of 3" in error_line(capsys)

    assert main(["generate", "qpartite", "--q", "3", "--Q", "2", "--n", "4", "--corollary"]) == 2
    assert "--m-target" in error_line(capsys)

    tiny = ["generate", "qpartite", "--q", "3", "--Q", "2", "--n", "4", "--max-tasks", "10"]
    assert main(tiny) == 4
    assert error_line(capsys).startswith("error=caps exit=4")


def test_gap(capsys: pytest.CaptureFixture) -> None:
    assert main(["gap", "--q", "3", "--Q", "4"]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["yes_upper"] == 8
    assert report["no_lower"] == pytest.approx(4.476, abs=1e-3)


def test_bad_log_level(one_task: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(["--log-level", "chatty", "solve", "--instance", str(one_task)]) == 2
    assert "unknown log level" in error_line(capsys)


@pytest.mark.parametrize("workers", ["0", "-1"])
def test_bench_rejects_non_positive_workers(workers: str, capsys: pytest.CaptureFixture) -> None:
    assert main(["bench", "--generate", "1", "--workers", workers]) == 2
    assert error_line(capsys).startswith('error=invalid-input exit=2 reason="--workers: ')


def test_certify_reads_the_shape_from_the_graph(
    tmp_path: Path, capsys: pytest.CaptureFixture
) -> None:
    params = ReductionParams(q=3, Q=2, n=4, epsilon=1 / 4, delta=1 / 4)
    graph_path = write(tmp_path / "graph.json", dump_graph(qpartite_yes_graph(params)))
    args = build_parser().parse_args(["certify", "yes-plan", "--graph", str(graph_path)])

    assert cmd_certify_plan(args) == 0
    assert json.loads(capsys.readouterr().out)["makespan"] == 3
    assert not hasattr(args, "q") and not hasattr(args, "Q")
