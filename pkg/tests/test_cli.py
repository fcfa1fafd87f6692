import json

import pytest

from ordervc.cli import run
from ordervc.config import RunConfig, resolve_threads
from ordervc.errors import OutOfRange, ParseError


def _value(out, key):
    for line in out.splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[0] == key:
            return parts[1]
    raise AssertionError(f"{key} not in output:\n{out}")


class TestCommands:
    def test_vc_three(self, run_cli):
        code, out, _ = run_cli("vc", "--ground", "total", "--witness", "partial", "--n", "3")
        assert code == 0
        assert _value(out, "dimension") == "3"
        assert _value(out, "search_complete") == "true"

    def test_vc_json(self, run_cli):
        code, out, _ = run_cli("vc", "--ground", "partial", "--witness", "total", "--n", "3", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data["dimension"] == 2
        assert len(data["certificate"]) == 2

    def test_vc_truncated(self, run_cli):
        code, out, _ = run_cli("vc", "--n", "3", "--max-candidates", "0")
        assert code == 3
        assert _value(out, "search_complete") == "false"

    def test_compat(self, run_cli):
        code, out, _ = run_cli("compat", "--a", '{"n":2,"relations":[[1,2]]}', "--b", '{"n":2,"relations":[[2,1]]}')
        assert (code, out) == (0, "false\n")

    def test_compat_bad_input(self, run_cli):
        code, _, err = run_cli("compat", "--a", '{"n":2,"relations":[[1,2],[2,1]]}', "--b", '{"n":2,"seq":[1,2]}')
        assert code == 2
        assert err.startswith("ordervc: error:")
        assert len(err.strip().splitlines()) == 1

    def test_enumerate(self, run_cli):
        assert run_cli("enumerate", "--kind", "partial", "--n", "3", "--count-only")[:2] == (0, "19\n")
        code, out, _ = run_cli("enumerate", "--kind", "partial", "--n", "2")
        assert code == 0
        assert [json.loads(line) for line in out.splitlines()] == [
            {"n": 2, "relations": []},
            {"n": 2, "relations": [[1, 2]]},
            {"n": 2, "relations": [[2, 1]]},
        ]

    def test_enumerate_cap(self, run_cli):
        code, _, err = run_cli("enumerate", "--kind", "partial", "--n", "7", "--count-only")
        assert code == 2
        assert "capped" in err

    def test_certificate_round_trip(self, run_cli, tmp_path):
        cert = tmp_path / "cert.json"
        assert run_cli("vc", "--n", "3", "--emit-cert", str(cert))[0] == 0
        code, out, _ = run_cli("check-cert", "--cert", str(cert))
        assert (code, out) == (0, "verified\n")

    def test_tampered_certificate(self, run_cli, tmp_path):
        cert = tmp_path / "cert.json"
        run_cli("vc", "--n", "2", "--emit-cert", str(cert))
        data = json.loads(cert.read_text())
        data["witnesses"]["0"], data["witnesses"]["1"] = data["witnesses"]["1"], data["witnesses"]["0"]
        cert.write_text(json.dumps(data))
        code, out, _ = run_cli("check-cert", "--cert", str(cert))
        assert code == 1
        assert out.startswith("rejected:")

    def test_construct(self, run_cli, tmp_path):
        dot, data = tmp_path / "g.dot", tmp_path / "g.json"
        code, out, _ = run_cli(
            "construct", "--which", "thm2g", "--n", "6", "--emit-dot", str(dot), "--emit-json", str(data)
        )
        assert code == 0
        assert out.startswith("thm2g n=6: 6 parts")
        assert dot.read_text().startswith("digraph")
        assert len(json.loads(data.read_text())["parts"]) == 6

    def test_construct_too_small(self, run_cli):
        assert run_cli("construct", "--which", "thm1", "--n", "3")[0] == 2

    def test_verify_star_h(self, run_cli):
        code, out, _ = run_cli("verify-star", "--which", "thm2h", "--n", "8", "--mode", "exhaustive")
        assert code == 0
        assert _value(out, "tested") == "1024"
        assert _value(out, "fallbacks") == "0"

    def test_verify_star_strict(self, run_cli):
        assert run_cli("verify-star", "--which", "thm2g", "--n", "6")[0] == 0
        assert run_cli("verify-star", "--which", "thm2g", "--n", "6", "--strict")[0] == 1
        assert run_cli("verify-star", "--which", "thm2g", "--n", "6", "--strategy", "window", "--strict")[0] == 0

    def test_verify_star_sampled(self, run_cli):
        code, out, _ = run_cli(
            "verify-star", "--which", "thm1", "--n", "8", "--mode", "sampled", "--count", "50", "--seed", "4"
        )
        assert code == 0
        assert _value(out, "tested") == "50"

    def test_proofcheck(self, run_cli, tmp_path):
        path = tmp_path / "set.json"
        path.write_text(json.dumps([{"n": 4, "seq": s} for s in ([2, 3, 1, 4], [2, 4, 1, 3], [1, 3, 2, 4], [1, 4, 2, 3])]))
        code, out, _ = run_cli("proofcheck", "--set", str(path), "--n", "4")
        assert code == 0
        assert _value(out, "edge_count") == "4"
        assert _value(out, "acyclic") == "true"

    def test_proofcheck_not_shattered(self, run_cli, tmp_path):
        path = tmp_path / "set.jsonl"
        path.write_text("\n".join(json.dumps({"n": 2, "seq": s}) for s in ([1, 2], [2, 1])))
        assert run_cli("proofcheck", "--set", str(path))[0] == 1

    def test_usage_error_exits_two(self, run_cli):
        with pytest.raises(SystemExit) as exc:
            run_cli("vc", "--ground", "nope")
        assert exc.value.code == 2


class TestConfiguration:
    def test_yaml_defaults(self, run_cli, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("n: 3\nground: total\nwitness: partial\n")
        code, out, _ = run_cli("vc", "--config", str(path))
        assert code == 0
        assert _value(out, "dimension") == "3"

    def test_flags_override_yaml(self, run_cli, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("n: 3\n")
        code, out, _ = run_cli("vc", "--config", str(path), "--n", "2")
        assert code == 0
        assert _value(out, "dimension") == "1"

    def test_unknown_yaml_key(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("colour: blue\n")
        with pytest.raises(ParseError):
            RunConfig.from_yaml(path)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("n: [1\n")
        with pytest.raises(ParseError):
            RunConfig.from_yaml(path)

    @pytest.mark.parametrize(
        "values",
        [{"n": 0}, {"budget": -1.0}, {"mode": "sampled", "count": 0}, {"format": "xml"}, {"which": "thm3"}],
    )
    def test_validate(self, values):
        with pytest.raises(OutOfRange):
            RunConfig.from_mapping({"command": "vc", **values}).validate()

    def test_thread_resolution(self, monkeypatch):
        monkeypatch.setenv("ORDERVC_THREADS", "3")
        assert resolve_threads(None) == 3
        assert resolve_threads(5) == 5
        monkeypatch.delenv("ORDERVC_THREADS")
        assert resolve_threads(None) >= 1

    def test_bad_thread_env(self, run_cli, monkeypatch):
        monkeypatch.setenv("ORDERVC_THREADS", "zero")
        code, _, err = run_cli("vc", "--n", "2")
        assert code == 2
        assert "ORDERVC_THREADS" in err

    def test_run_returns_exit_code(self, stream):
        config = RunConfig(command="enumerate", kind="total", n=3, count_only=True)
        assert run(config, stream) == 0
        assert stream.getvalue() == "6\n"
