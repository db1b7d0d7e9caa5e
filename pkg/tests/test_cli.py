import json

import pytest

from app.tool import FileSaver, ToolFailure, command_tools
from main import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK, run

from tests.conftest import TABLE_ALPHA


def _write_constant_log(path, n: int, rating: int = 3) -> str:
    lines = ["item_id,user_id,rating,timestamp"]
    lines.extend(f"a,u{j},{rating},{j}" for j in range(n))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


async def _json(capsys, argv) -> dict:
    assert await run(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


@pytest.mark.asyncio
async def test_bound_prints_report(capsys):
    report = await _json(capsys, ["bound", "--alpha", TABLE_ALPHA, "--delta", "0.3"])
    assert report["result"]["n_prime"] == 67
    assert report["config"]["delta"] == 0.3
    assert report["config"]["command"] == "bound"
    assert "workers" not in report["config"]


@pytest.mark.asyncio
async def test_threshold(capsys):
    report = await _json(capsys, ["threshold", "--alpha", TABLE_ALPHA, "--target", "5"])
    assert [row["target"] for row in report["result"]] == [5]
    assert round(report["result"][0]["threshold"], 3) == 0.407


@pytest.mark.asyncio
async def test_threshold_lists_every_other_level(capsys):
    report = await _json(capsys, ["threshold", "--alpha", TABLE_ALPHA])
    assert [row["target"] for row in report["result"]] == [1, 3, 4, 5]


@pytest.mark.asyncio
async def test_verification_is_reproducible(capsys):
    argv = ["mc-verify", "--alpha", TABLE_ALPHA, "--trials", "2000", "--seed", "3"]
    await run(argv)
    first = capsys.readouterr().out
    await run(argv)
    second = capsys.readouterr().out
    await run(argv + ["--workers", "4", "--block-size", "100"])
    threaded = capsys.readouterr().out
    assert first == second
    assert json.loads(first)["result"]["n"] == 77
    # the block size is part of the stream layout, so only compare across workers
    await run(argv + ["--block-size", "100"])
    assert capsys.readouterr().out == threaded


@pytest.mark.asyncio
async def test_failed_check_exits_one(capsys):
    argv = ["mc-verify", "--alpha", "0.55,0.45", "--n", "5", "--trials", "2000", "--seed", "1"]
    assert await run(argv) == EXIT_CHECK_FAILED
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False


@pytest.mark.asyncio
@pytest.mark.parametrize(
    "argv, error",
    [
        (["bound", "--alpha", TABLE_ALPHA, "--dataset", "ratings.csv"], "InvalidInputs"),
        (["bound", "--alpha", TABLE_ALPHA, "--delta", "1.5"], "InvalidDelta"),
        (["bound", "--alpha", TABLE_ALPHA, "--f", "1.5"], "InvalidFraction"),
        (
            ["bound", "--alpha", TABLE_ALPHA, "--f-prime", "1.5", "--target", "5"],
            "InvalidFraction",
        ),
        (["bound", "--alpha", TABLE_ALPHA, "--f-prime", "0.1"], "InvalidInputs"),
        (
            ["bound", "--alpha", TABLE_ALPHA, "--f-prime", "0.3", "--target", "5", "--win"],
            "BelowThreshold",
        ),
        (["bound", "--alpha", "1/2,1/2"], "DegenerateMajority"),
        (["threshold", "--m", "5"], "ToolError"),
        (["validate", "--dataset", "missing.csv", "--m", "5"], "ToolError"),
    ],
)
async def test_input_errors_exit_two(capsys, argv, error):
    assert await run(argv) == EXIT_INPUT_ERROR
    captured = capsys.readouterr()
    assert captured.out == ""
    assert f"error: {error}" in captured.err


@pytest.mark.asyncio
@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--delta", "abc"],
        ["bound", "--rule", "median"],
        ["no-such-command"],
        [],
    ],
)
async def test_malformed_command_lines(argv):
    with pytest.raises(SystemExit) as e:
        await run(argv)
    assert e.value.code == 2


@pytest.mark.asyncio
async def test_config_file_and_flag_precedence(capsys, tmp_path):
    overrides = tmp_path / "run.toml"
    overrides.write_text(f'alpha = "{TABLE_ALPHA}"\ndelta = 0.3\n', encoding="utf-8")
    from_file = await _json(capsys, ["bound", "--config", str(overrides)])
    assert from_file["result"]["n_prime"] == 67
    assert from_file["config"]["config"] == str(overrides)

    flagged = await _json(capsys, ["bound", "--config", str(overrides), "--delta", "0.1"])
    assert flagged["result"]["n_prime"] == 93


@pytest.mark.asyncio
async def test_unreadable_config_file(capsys, tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text("delta = = 0.3\n", encoding="utf-8")
    assert await run(["bound", "--alpha", TABLE_ALPHA, "--config", str(broken)]) == EXIT_INPUT_ERROR
    assert "not valid TOML" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_csv_and_table_formats(capsys):
    argv = ["bound", "--alpha", TABLE_ALPHA, "--delta", "0.2"]
    await run(argv + ["--format", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# config {")
    assert lines[1] == "rule,misbehavior,fraction,delta,raw,n_prime"
    assert lines[2].startswith("majority,honest,0,0.2,")
    assert lines[2].endswith(",77")

    await run(argv + ["--format", "table"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split()[-1] == "n_prime"
    assert lines[3].split()[-1] == "77"


@pytest.mark.asyncio
async def test_report_written_to_output(capsys, tmp_path):
    output = tmp_path / "reports" / "bound.json"
    argv = ["bound", "--alpha", TABLE_ALPHA, "--output", str(output)]
    assert await run(argv) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(output.read_text(encoding="utf-8"))["result"]["n_prime"] == 77


@pytest.mark.asyncio
async def test_synth_is_byte_identical(capsys, tmp_path):
    argv = ["synth", "--items", "3", "--ratings-per-item", "20", "--seed", "5", "--output"]
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    report = await _json(capsys, argv + [str(first)])
    await _json(capsys, argv + [str(second)])

    assert report["result"]["items"] == 3
    assert report["result"]["ratings"] == 60
    assert report["result"]["truth"] == str(tmp_path / "first.truth.jsonl")
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "first.truth.jsonl").read_bytes() == (
        tmp_path / "second.truth.jsonl"
    ).read_bytes()
    assert first.read_text(encoding="utf-8").count("\n") == 61


@pytest.mark.asyncio
async def test_synth_feeds_infer_min(capsys, tmp_path):
    dataset = tmp_path / "synthetic.jsonl"
    await _json(
        capsys,
        ["synth", "--items", "4", "--ratings-per-item", "50", "--seed", "1", "--output", str(dataset)],
    )
    report = await _json(capsys, ["infer-min", "--dataset", str(dataset), "--m", "5"])
    assert [row["item_id"] for row in report["result"]] == [
        "item00000",
        "item00001",
        "item00002",
        "item00003",
    ]
    assert all(row["n"] == 50 for row in report["result"])


@pytest.mark.asyncio
async def test_infer_alpha_reports_exact_fractions(capsys):
    report = await _json(capsys, ["infer-alpha", "--ratings", "2,2,5", "--m", "5"])
    assert report["result"]["alpha_exact"] == ["0", "2/3", "0", "0", "1/3"]
    assert report["result"]["n"] == 3


@pytest.mark.asyncio
async def test_infer_min_from_counts(capsys):
    report = await _json(capsys, ["infer-min", "--counts", "4,25,3,2,1"])
    assert report["result"]["n_prime"] == 77


@pytest.mark.asyncio
async def test_validate_both_rules(capsys, tmp_path):
    dataset = _write_constant_log(tmp_path / "ratings.csv", 1500)
    report = await _json(capsys, ["validate", "--dataset", dataset, "--m", "5", "--rule", "both"])
    result = report["result"]
    majority, average = result["majority"], result["average"]
    assert majority["n_test"] == 1500 - 39 + 1
    assert average["n_test"] > 0
    assert result["n_test_ratio"] == pytest.approx(majority["n_test"] / average["n_test"])
    assert result["n_test_ratio"] > 1
    assert majority["f_reliable"] == average["f_reliable"] == 1.0


@pytest.mark.asyncio
async def test_survival_writes_curves(capsys, tmp_path):
    dataset = _write_constant_log(tmp_path / "ratings.csv", 100)
    output = tmp_path / "out" / "survival.json"
    argv = [
        "survival",
        "--dataset",
        dataset,
        "--m",
        "5",
        "--rule",
        "both",
        "--thresholds",
        "0,39,40",
        "--output",
        str(output),
    ]
    assert await run(argv) == EXIT_OK
    report = json.loads(output.read_text(encoding="utf-8"))
    assert report["result"]["majority"]["survival"] == [1.0, 1.0, 0.0]
    assert report["result"]["average"]["survival"] == [1.0, 1.0, 1.0]

    curve = (tmp_path / "out" / "survival.majority.survival.csv").read_text(encoding="utf-8")
    assert curve.splitlines() == ["n,survival", "0,1.0", "39,1.0", "40,0.0"]
    assert (tmp_path / "out" / "survival.average.survival.csv").exists()


@pytest.mark.asyncio
async def test_unknown_tool_is_a_failure():
    result = await command_tools().execute(name="nope", tool_input={})
    assert isinstance(result, ToolFailure)
    assert "nope" in result.error


def test_every_command_has_a_schema():
    names = [tool.name for tool in command_tools()]
    assert names == [
        "bound",
        "threshold",
        "mc-verify",
        "infer-alpha",
        "infer-min",
        "validate",
        "validate-online",
        "survival",
        "synth",
        "sweep",
        "compare",
    ]
    for param in command_tools().to_params():
        assert param["parameters"]["type"] == "object"
        assert {"output", "format", "config"} <= set(param["parameters"]["properties"])


@pytest.mark.asyncio
async def test_file_saver_overwrites(tmp_path):
    saver = FileSaver()
    assert set(saver.parameters["properties"]) == {"content", "file_path"}

    path = tmp_path / "nested" / "report.json"
    assert await saver.execute(content="first\n", file_path=str(path)) == str(path)
    await saver.execute(content="second\n", file_path=str(path))
    assert path.read_bytes() == b"second\n"
