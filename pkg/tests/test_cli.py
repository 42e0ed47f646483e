"""Command line behavior: exit codes, verdict lines, certificate files, serve."""

from __future__ import annotations

import re
import subprocess
import sys
import urllib.request

import pytest

from conftest import FIXTURES


def run_cli(*args: str, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "hypergames.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=180,
    )


def fx(name: str) -> str:
    return str(FIXTURES / name)


def test_version_lists_format_grammars():
    r = run_cli("--version")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0].startswith("hypergames ")
    for grammar in ("kripke-format: 1", "formula-format: 1", "prophecy-format: 1",
                    "certificate-format: 1", "mpg-format: 1"):
        assert grammar in lines


def test_check_disproven_exits_1():
    r = run_cli("check", fx("fig1.ks"), fx("ex2.hltl"))
    assert r.returncode == 1
    assert r.stdout.splitlines()[0] == "verdict: disproven"
    assert "guarantee: semantic" in r.stdout


def test_check_missing_file_exits_3(tmp_path):
    r = run_cli("check", str(tmp_path / "nope.ks"), fx("ex2.hltl"))
    assert r.returncode == 3
    assert "error:" in r.stderr


def test_check_unparseable_formula_exits_3(tmp_path):
    bad = tmp_path / "bad.hltl"
    bad.write_text("forall p1. (")
    r = run_cli("check", fx("fig1.ks"), str(bad))
    assert r.returncode == 3


def test_check_writes_certificate_next_to_formula_by_default(tmp_path):
    formula = tmp_path / "prop.hltl"
    formula.write_text((FIXTURES / "ex4.hltl").read_text())
    r = run_cli(
        "check", fx("fig1.ks"), str(formula),
        "--prophecy", fx("ex5.proph"), "--mode", "zielonka",
        cwd=tmp_path,
    )
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "verdict: proven"
    assert (tmp_path / "prop.cert").exists()


@pytest.fixture(scope="module")
def proven_cert(tmp_path_factory):
    out = tmp_path_factory.mktemp("certs") / "ex4.cert"
    r = run_cli(
        "check", fx("fig1.ks"), fx("ex4.hltl"),
        "--prophecy", fx("ex5.proph"), "--mode", "zielonka", "--out", str(out),
    )
    assert r.returncode == 0 and out.exists()
    return out


def test_certify_roundtrip_exits_0(proven_cert):
    r = run_cli("certify", str(proven_cert))
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "verdict: pass"


def test_certify_against_original_inputs(proven_cert):
    r = run_cli(
        "certify", str(proven_cert),
        "--ks", fx("fig1.ks"), "--formula", fx("ex4.hltl"), "--prophecy", fx("ex5.proph"),
    )
    assert r.returncode == 0


def test_certify_flipped_entries_exit_1(proven_cert, tmp_path):
    text = proven_cert.read_text()
    flipped = re.sub(
        r" move ([AB])(\S*) next",
        lambda m: f" move {'B' if m.group(1) == 'A' else 'A'}{m.group(2)} next",
        text,
    )
    assert flipped != text
    bad = tmp_path / "flipped.cert"
    bad.write_text(flipped)
    r = run_cli("certify", str(bad))
    assert r.returncode == 1
    assert r.stdout.splitlines()[0] == "verdict: fail"


def test_certify_hash_mismatch_exits_3(proven_cert):
    r = run_cli("certify", str(proven_cert), "--ks", fx("k.ks"), "--formula", fx("ex4.hltl"))
    assert r.returncode == 3
    assert "hash mismatch" in r.stderr


def test_certify_missing_file_exits_3(tmp_path):
    r = run_cli("certify", str(tmp_path / "nope.cert"))
    assert r.returncode == 3


def test_full_prophecy_pipeline_proves_and_certifies(tmp_path):
    out = tmp_path / "big.cert"
    r = run_cli(
        "check", fx("fig1.ks"), fx("ex6.hltl"), "--prophecy", fx("ex7.proph"),
        "--out", str(out),
    )
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "verdict: proven"
    assert "guarantee: game" in r.stdout
    assert out.exists()
    r = run_cli("certify", str(out))
    assert r.returncode == 0


def test_oracle_exit_codes():
    r = run_cli("oracle", fx("fig1.ks"), fx("ex2.hltl"), "--stem", "4", "--loop", "4")
    assert r.returncode == 1
    assert r.stdout.splitlines()[0] == "verdict: false stem=4 loop=4"
    r = run_cli("oracle", fx("fig1.ks"), fx("ex4.hltl"), "--stem", "4", "--loop", "4")
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "verdict: true stem=4 loop=4"
    r = run_cli("oracle", fx("fig1.ks"), fx("ex4.hltl"), "--stem", "0", "--loop", "4")
    assert r.returncode == 3


def test_serve_reports_port_and_answers_health():
    proc = subprocess.Popen(
        [sys.executable, "-m", "hypergames.cli", "serve", "--port", "0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        bufsize=1,
    )
    try:
        line = proc.stdout.readline().strip()
        m = re.fullmatch(r"listening on 127\.0\.0\.1:(\d+)", line)
        assert m, f"unexpected first line {line!r}"
        port = int(m.group(1))
        deadline_exc = None
        for _ in range(50):
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz", timeout=2) as resp:
                    assert resp.status == 200
                    break
            except OSError as exc:
                deadline_exc = exc
                import time

                time.sleep(0.1)
        else:
            raise AssertionError(f"service never became healthy: {deadline_exc}")
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_serve_bad_bind_exits_3():
    r = run_cli("serve", "--bind", "999.999.1.1", "--port", "0")
    assert r.returncode == 3
    assert "cannot bind" in r.stderr
