import subprocess
import sys
from pathlib import Path


from reclab.cli import main


def run_cli(args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "reclab.cli", *args],
        capture_output=True,
        text=True,
        **kwargs,
    )


class TestSolveLemma:
    def test_k2_output(self, capsys):
        assert main(["solve-lemma", "--k", "2"]) == 0
        out = capsys.readouterr().out
        assert out == "l: -2 1\nm: 2\nM: 3\n"

    def test_k3_output(self, capsys):
        assert main(["solve-lemma", "--k", "3"]) == 0
        assert capsys.readouterr().out == "l: 3 -3 1\nm: 6\nM: 7\n"


class TestGenSet:
    def test_plain_small(self, capsys):
        assert main([
            "gen-set", "--kind", "sk", "--k", "2",
            "--alpha", "surd:0,1,1,2", "--nmax", "5",
        ]) == 0
        assert capsys.readouterr().out == "1\n2\n3\n4\n5\n"

    def test_csv_format(self, tmp_path):
        out = tmp_path / "set.csv"
        assert main([
            "gen-set", "--kind", "sk", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--nmax", "3", "--format", "csv", "--out", str(out),
        ]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config: cmd=gen-set")
        assert lines[1] == "n,frac"
        n, frac = lines[2].split(",")
        assert n == "1" and frac.startswith("0.4142135623") and len(frac) == 32

    def test_skprime(self, capsys):
        assert main([
            "gen-set", "--kind", "skprime", "--k", "2",
            "--alpha", "surd:0,1,1,2", "--jmax", "4",
        ]) == 0
        values = [int(x) for x in capsys.readouterr().out.split()]
        assert values == sorted(values)
        assert all(2 <= v <= 32 for v in values)


class TestSimulate:
    def test_orbit_decimals(self, capsys):
        assert main([
            "simulate", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--point", "0,0", "--n", "3",
        ]) == 0
        lines = capsys.readouterr().out.splitlines()
        # R^3(0,0) = ({3 sqrt2}, {9 sqrt2})
        assert lines[0].startswith("0.2426406871")
        assert lines[1].startswith("0.7279220613")
        assert all(len(line) == 32 for line in lines)

    def test_point_arity_checked(self, capsys):
        assert main([
            "simulate", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--point", "0", "--n", "1",
        ]) == 1


class TestCertify:
    def test_small_run_passes(self, tmp_path):
        out = tmp_path / "cert.txt"
        code = main([
            "certify", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--eps", "1/10", "--nmax", "100", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert all(line.endswith(" OK") for line in lines[:-1])
        assert lines[-1].startswith("# certified")


class TestFindAp:
    def test_notfound_and_found(self, tmp_path, capsys):
        witness_file = tmp_path / "witness.txt"
        assert main([
            "build-witness", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--delta", "1/32", "--nmax", "4000", "--out", str(witness_file),
        ]) == 0
        capsys.readouterr()
        assert main([
            "find-ap", "--set-file", str(witness_file), "--diff-kind", "sk",
            "--k", "2", "--alpha", "surd:0,1,1,2",
        ]) == 0
        assert capsys.readouterr().out == "NOTFOUND\n"

        full = tmp_path / "full.txt"
        full.write_text("1-100\n")
        assert main([
            "find-ap", "--set-file", str(full), "--diff-kind", "sk",
            "--k", "2", "--alpha", "surd:0,1,1,2",
        ]) == 0
        assert capsys.readouterr().out == "FOUND 1 1\n"

    def test_delta_bound_usage_error(self, capsys):
        assert main([
            "build-witness", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--delta", "1/8", "--nmax", "100",
        ]) == 1


class TestExitCodes:
    def test_unknown_subcommand_is_usage(self):
        proc = run_cli(["definitely-not-a-command"])
        assert proc.returncode == 1

    def test_malformed_alpha(self, capsys):
        assert main(["gen-set", "--kind", "sk", "--alpha", "surd:1,0,1,2",
                     "--nmax", "10"]) == 1

    def test_precision_below_policy(self, capsys):
        assert main([
            "gen-set", "--kind", "sk", "--k", "2", "--alpha", "surd:0,1,1,2",
            "--nmax", "1000", "--precision-bits", "64",
        ]) == 1

    def test_env_override_below_policy(self, tmp_path):
        proc = run_cli(
            ["gen-set", "--kind", "sk", "--k", "2", "--alpha", "surd:0,1,1,2",
             "--nmax", "1000"],
            env={"RECLAB_PRECISION_BITS": "64", "PATH": "/usr/bin:/bin"},
        )
        assert proc.returncode == 1

    def test_assertion_failure_exit_2(self, tmp_path):
        cfg = tmp_path / "impossible.cfg"
        cfg.write_text("density_tol=0\nnmax=2000\nrec_nmax=500\n")
        report = tmp_path / "rep.txt"
        code = main([
            "reproduce", "thmA", "--config", str(cfg), "--out", str(report),
        ])
        assert code == 2
        text = report.read_text()
        assert "FAIL density_half" in text and "RESULT FAIL" in text


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nkind=sk\nk=2\nalpha=surd:0,1,1,2\nnmax=5\n")
        assert main(["gen-set", "--config", str(cfg)]) == 0
        assert capsys.readouterr().out == "1\n2\n3\n4\n5\n"

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax=5\n")
        assert main([
            "gen-set", "--config", str(cfg), "--kind", "sk", "--k", "2",
            "--alpha", "surd:0,1,1,2", "--nmax", "3",
        ]) == 0
        assert capsys.readouterr().out == "1\n2\n3\n"


class TestReproduce:
    def test_intersective_small(self, tmp_path, capsys):
        report = tmp_path / "rep.txt"
        code = main([
            "reproduce", "intersective", "--nmax", "4000", "--out", str(report),
        ])
        assert code == 0
        text = report.read_text()
        assert "PASS witness_density" in text
        assert "PASS no_progression NOTFOUND" in text
        assert text.rstrip().endswith("RESULT PASS")

    def test_worker_counts_byte_identical(self, tmp_path):
        outs = []
        for w in (1, 2):
            path = tmp_path / f"rep_w{w}.txt"
            code = main([
                "reproduce", "thmB", "--jmax", "12",
                "--workers", str(w), "--out", str(path),
            ])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestPlotEmission:
    def test_gnuplot_sidecar(self, tmp_path):
        out = tmp_path / "weyl.csv"
        assert main([
            "weyl-sum", "--k", "2", "--alpha", "surd:0,1,1,2", "--nmax", "256",
            "--seq", "range", "--out", str(out), "--plot",
        ]) == 0
        gp = Path(str(out) + ".gp")
        assert gp.exists()
        assert str(out) in gp.read_text()
