import hashlib
import itertools
import os
import re

import numpy as np
import pytest

from pmrc import fileio
from pmrc.cli import main
from pmrc.linalg import MatrixFq, vandermonde
from pmrc.gf import GF
from pmrc.secure import build_code

MBR = ["--mode", "mbr", "--n", "6", "--k", "3", "--d", "4"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    return dict(re.split(r"\s{2,}", line.strip(), maxsplit=1) for line in text.splitlines())


@pytest.fixture
def encoded(tmp_path, capsys):
    data = os.urandom(1000) + b"tail"
    src = tmp_path / "in.bin"
    src.write_bytes(data)
    out = tmp_path / "shares"
    assert run(capsys, "encode", src, "--out-dir", out, *MBR, "--ell", 1, "--seed", 5)[0] == 0
    return data, out


def shares(d, *ids):
    return [d / fileio.share_filename(i) for i in ids]


def test_params_example(capsys):
    code, out, _ = run(capsys, "params", *MBR, "--ell", 1)
    t = table(out)
    assert code == 0
    assert (t["B"], t["B_s"], t["R"], t["q"], t["alpha"]) == ("9", "5", "4", "7", "4")
    assert t["secrecy bound"] == t["achieved B_s"] == "5"


def test_params_msr_plain(capsys):
    t = table(run(capsys, "params", "--mode", "msr", "--n", 6, "--k", 3, "--d", 4, "--ell", 0)[1])
    assert (t["B"], t["B_s"], t["R"], t["q"]) == ("6", "6", "0", "11")


def test_params_shortened(capsys):
    t = table(run(capsys, "params", "--mode", "msr", "--n", 8, "--k", 3, "--d", 6, "--ell", 1)[1])
    assert t["B_s"] == "8" and t["shortened from"] == "[10, 5, 8]"


def test_params_regime_error(capsys):
    code, _, err = run(capsys, "params", "--mode", "msr", "--n", 6, "--k", 3, "--d", 3)
    assert code == 2 and "d ≥ 2k−2 required" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["params", "--mode", "mbr"])
    assert exc.value.code == 2


def test_round_trip_all_subsets(encoded, tmp_path, capsys):
    data, d = encoded
    for ids in itertools.combinations(range(1, 7), 3):
        out = tmp_path / "out.bin"
        assert run(capsys, "reconstruct", "--manifest", d / "manifest.txt", "--out", out, *shares(d, *ids))[0] == 0
        assert out.read_bytes() == data


def test_manifest_has_no_message_material(encoded):
    data, d = encoded
    text = (d / "manifest.txt").read_text()
    keys = [line.split("=")[0] for line in text.splitlines()]
    assert keys == ["version", "mode", "n", "k", "d", "beta", "q", "ell", "ell_prime", "stripes", "length",
                    "payload", "points", "share_digests", "checksum"]
    assert data.hex()[:16] not in text


def test_empty_file(tmp_path, capsys):
    src = tmp_path / "empty"
    src.write_bytes(b"")
    out = tmp_path / "s"
    run(capsys, "encode", src, "--out-dir", out, *MBR, "--ell", 1, "--seed", 1)
    m = fileio.Manifest.load(out / "manifest.txt")
    assert m.stripes == 1 and len(list(out.glob("share_*.pmrc"))) == 6
    back = tmp_path / "back"
    assert run(capsys, "reconstruct", "--manifest", out / "manifest.txt", "--out", back, *shares(out, 4, 5, 6))[0] == 0
    assert back.read_bytes() == b""


@pytest.mark.parametrize("flags", [["--mode", "msr", "--n", 6, "--k", 3, "--d", 4, "--ell", 1, "--ell-prime", 1],
                                   ["--mode", "msr", "--n", 8, "--k", 3, "--d", 6, "--ell", 1, "--q", 65537],
                                   MBR + ["--q", 7, "--payload", "digits"],
                                   MBR + ["--beta", 3]])
def test_round_trip_other_codes(flags, tmp_path, capsys):
    data = os.urandom(333)
    (tmp_path / "in").write_bytes(data)
    assert run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "s", *flags, "--seed", 2)[0] == 0
    m = fileio.Manifest.load(tmp_path / "s" / "manifest.txt")
    assert m.stripes % m.beta == 0
    picked = sorted(tmp_path.joinpath("s").glob("share_*.pmrc"))[-m.k:]
    assert run(capsys, "reconstruct", "--manifest", tmp_path / "s" / "manifest.txt", "--out", tmp_path / "o", *picked)[0] == 0
    assert (tmp_path / "o").read_bytes() == data


def test_bytes_payload_needs_large_field(tmp_path, capsys):
    (tmp_path / "in").write_bytes(b"x")
    code, _, err = run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "s", *MBR, "--q", 7, "--payload", "bytes")
    assert code == 2 and "q >= 257" in err


def test_encode_is_deterministic(tmp_path, capsys, monkeypatch):
    (tmp_path / "in").write_bytes(b"hello world" * 10)
    run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "a", *MBR, "--ell", 1, "--seed", 3)
    monkeypatch.setenv("PMRC_SEED", "3")
    run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "b", *MBR, "--ell", 1)
    monkeypatch.setenv("PMRC_SEED", "4")
    run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "c", *MBR, "--ell", 1)
    for i in range(1, 7):
        name = fileio.share_filename(i)
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert (tmp_path / "a" / name).read_bytes() != (tmp_path / "c" / name).read_bytes()


def test_secure_mbr634_shares_are_psi_times_m(tmp_path, capsys):
    # digits mode over GF(7); the first stripe carries the first 5 base-7 digits of block 0
    (tmp_path / "in").write_bytes(bytes(range(1, 9)))
    run(capsys, "encode", tmp_path / "in", "--out-dir", tmp_path / "s", *MBR, "--ell", 1, "--q", 7, "--seed", 8)
    m = fileio.Manifest.load(tmp_path / "s" / "manifest.txt")
    code = build_code("mbr", 6, 3, 4, 1, q=7)
    stored = {}
    for i in range(1, 7):
        node, arr = fileio.parse_share(m, (tmp_path / "s" / fileio.share_filename(i)).read_bytes(), 4)
        stored[node] = arr[0]
    message = fileio.bytes_to_symbols(bytes(range(1, 9)), 7, "digits")[:5]
    z = code.decode_batch([1, 2, 3], np.stack([stored[i] for i in (1, 2, 3)])[:, :, None])[:, 0]
    assert z[:5].tolist() == message.tolist()
    # hand layout: randoms in row/col 0, message u4 u5 u6 u8 u9 elsewhere
    r1, r2, r3, r7 = z[5:]
    u4, u5, u6, u8, u9 = message
    ms = MatrixFq([[r1, r2, r3, r7], [r2, u4, u5, u8], [r3, u5, u6, u9], [r7, u8, u9, 0]], GF(7))
    psi = vandermonde([1, 2, 3, 4, 5, 6], 4, GF(7))
    assert (psi @ ms).tolist() == [stored[i].tolist() for i in range(1, 7)]


def test_repair_byte_identical(encoded, tmp_path, capsys):
    _, d = encoded
    original = (d / "share_001.pmrc").read_bytes()
    for helpers in [(2, 3, 4, 5), (3, 4, 5, 6)]:
        out = tmp_path / "r.pmrc"
        code, text, _ = run(capsys, "repair", "--manifest", d / "manifest.txt", "--node", 1, "--out", out,
                            *shares(d, *helpers))
        assert code == 0 and out.read_bytes() == original
        assert "sent 4 symbols/stripe" in text


def test_repair_errors(encoded, tmp_path, capsys):
    _, d = encoded
    m = d / "manifest.txt"
    assert run(capsys, "repair", "--manifest", m, "--node", 1, "--out", tmp_path / "x", *shares(d, 2, 3, 4))[0] == 2
    assert run(capsys, "repair", "--manifest", m, "--node", 1, "--out", tmp_path / "x", *shares(d, 1, 3, 4, 5))[0] == 2
    bad = tmp_path / "bad.pmrc"
    raw = bytearray((d / "share_002.pmrc").read_bytes())
    raw[-1] ^= 1
    bad.write_bytes(bytes(raw))
    code, _, err = run(capsys, "repair", "--manifest", m, "--node", 1, "--out", tmp_path / "x", bad, *shares(d, 3, 4, 5))
    assert code == 3 and "checksum" in err
    assert run(capsys, "repair", "--manifest", tmp_path / "missing", "--node", 1, *shares(d, 2, 3, 4, 5))[0] == 3


def test_reconstruct_too_few(encoded, tmp_path, capsys):
    _, d = encoded
    code, _, err = run(capsys, "reconstruct", "--manifest", d / "manifest.txt", "--out", tmp_path / "o", *shares(d, 1, 2))
    assert code == 2 and "needs 3" in err


def test_audit_exit_codes(capsys):
    code, out, _ = run(capsys, "audit", *MBR, "--ell", 1, "--q", 7)
    assert code == 0 and out.count("spec {") == 6 and "step1=ok step2=ok" in out
    code, _, err = run(capsys, "audit", *MBR, "--ell", 1, "--plain")
    assert code == 1 and "{storage: 1; repair: -}" in err


def test_audit_brute_force(capsys):
    code, out, _ = run(capsys, "audit", "--mode", "mbr", "--n", 3, "--k", 2, "--d", 2, "--q", 3, "--ell", 1, "--brute-force")
    assert code == 0 and "brute-force result=AGREE" in out
    code, out, _ = run(capsys, "audit", *MBR, "--ell", 1, "--brute-force", "--budget", 10)
    assert code == 0 and "brute-force skipped" in out


def _script(tmp_path, text):
    p = tmp_path / "scenario.txt"
    p.write_text(text)
    return p


def test_simulate_fail_repair_all(encoded, tmp_path, capsys):
    data, d = encoded
    script = _script(tmp_path, "".join(f"FAIL {i}\nREPAIR {i}\n" for i in range(1, 7)) + "COLLECT 2,4,6\n")
    code, out, _ = run(capsys, "simulate", "--manifest", d / "manifest.txt", "--shares", d, "--script", script,
                       "--observe", "1")
    assert code == 0
    assert "repairs=6 repair traffic=24 symbols/stripe" in out
    assert hashlib.sha256(data).hexdigest() in out
    assert "leakage=0" in out


def test_simulate_empty_and_missing_shares(encoded, tmp_path, capsys):
    _, d = encoded
    code, out, _ = run(capsys, "simulate", "--manifest", d / "manifest.txt", "--shares", *shares(d, 1, 2, 3, 4, 5))
    assert code == 0 and "repairs=0 repair traffic=0" in out
    script = _script(tmp_path, "REPAIR 6\n")
    code, out, _ = run(capsys, "simulate", "--manifest", d / "manifest.txt", "--shares", *shares(d, 1, 2, 3, 4, 5),
                       "--script", script)
    assert code == 0 and "repairs=1" in out and "match the originals: yes" in out


def test_simulate_beyond_design(encoded, capsys):
    _, d = encoded
    code, out, err = run(capsys, "simulate", "--manifest", d / "manifest.txt", "--shares", d, "--observe", "1,2")
    assert code == 4 and "by design" in err and "leakage=3" in out


def test_simulate_bad_script(encoded, tmp_path, capsys):
    _, d = encoded
    code, _, err = run(capsys, "simulate", "--manifest", d / "manifest.txt", "--shares", d,
                       "--script", _script(tmp_path, "EXPLODE 1\n"))
    assert code == 2 and "cannot parse" in err
