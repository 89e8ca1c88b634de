# Copyright 2026 The lfmrp Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
import subprocess
import zlib

import pytest

CLI = os.environ.get("LFMRP_CLI", "lfmrp")


def run(*args, cwd):
    return subprocess.run([CLI, *map(str, args)], cwd=cwd, capture_output=True, text=True)


def kv(stdout):
    out = {}
    for line in stdout.splitlines():
        if line.startswith("#kv "):
            k, _, v = line[4:].partition("=")
            out[k] = v
    return out


@pytest.mark.parametrize("mode", ["4d", "dt", "2d"])
def test_synth_encode_decode_roundtrip(tmp_path, mode):
    assert run("synth", "a.lf4d", "--dims", "3,2,12,10", "--planes", "3", cwd=tmp_path).returncode == 0
    enc = run("encode", "a.lf4d", "a.mr4d", "--mode", mode, "--set", "classes=4", cwd=tmp_path)
    assert enc.returncode == 0, enc.stderr
    fields = kv(enc.stdout)
    assert fields["mode"] == mode
    assert int(fields["bytes"]) == (tmp_path / "a.mr4d").stat().st_size
    dec = run("decode", "a.mr4d", "b.lf4d", cwd=tmp_path)
    assert dec.returncode == 0, dec.stderr
    original = (tmp_path / "a.lf4d").read_bytes()
    assert (tmp_path / "b.lf4d").read_bytes() == original


def test_decode_reports_sample_crc(tmp_path):
    run("synth", "a.lf4d", "--dims", "2,2,8,8", "--bit-depth", "10", cwd=tmp_path)
    run("encode", "a.lf4d", "a.mr4d", cwd=tmp_path)
    dec = run("decode", "a.mr4d", "b.lf4d", cwd=tmp_path)
    payload = (tmp_path / "b.lf4d").read_bytes()[23:]  # magic, version, 4 x u32, planes, depth
    assert len(payload) == 2 * 2 * 2 * 8 * 8
    assert kv(dec.stdout)["crc32"] == format(zlib.crc32(payload), "08x")


def test_sai_grid_input_and_output(tmp_path):
    run("synth", "a.lf4d", "--dims", "2,3,8,6", "--planes", "3", cwd=tmp_path)
    assert run("convert", "a.lf4d", "grid", "--layout", "sai-grid", cwd=tmp_path).returncode == 0
    assert len(list((tmp_path / "grid").iterdir())) == 6
    assert run("encode", "grid", "g.mr4d", cwd=tmp_path).returncode == 0
    assert run("decode", "g.mr4d", "g.lf4d", cwd=tmp_path).returncode == 0
    assert (tmp_path / "g.lf4d").read_bytes() == (tmp_path / "a.lf4d").read_bytes()


def test_inspect_matches_encode(tmp_path):
    run("synth", "a.lf4d", "--dims", "2,2,8,8", cwd=tmp_path)
    enc = kv(run("encode", "a.lf4d", "a.mr4d", "--mode", "2d", cwd=tmp_path).stdout)
    info = kv(run("inspect", "a.mr4d", cwd=tmp_path).stdout)
    for key in ("dims", "planes", "bit_depth", "mode", "bytes", "plane0.kind", "plane0.bytes"):
        assert info[key] == enc[key]


def test_compare_writes_csv(tmp_path):
    run("synth", "a.lf4d", "--dims", "2,2,8,8", cwd=tmp_path)
    res = run("compare", "a.lf4d", "missing.lf4d", "--modes", "4d,2d", "--intra", "--csv", "o.csv",
              cwd=tmp_path)
    assert res.returncode == 1  # the missing input fails its cells
    rows = (tmp_path / "o.csv").read_text().splitlines()
    assert rows[0].startswith("input,mode,ok,bpp")
    assert len(rows) == 1 + 2 * 3
    assert sum(r.split(",")[2] == "1" for r in rows[1:]) == 3


def test_exit_codes(tmp_path):
    assert run(cwd=tmp_path).returncode == 2
    assert run("encode", "nope.lf4d", "x.mr4d", cwd=tmp_path).returncode == 2
    assert not (tmp_path / "x.mr4d").exists()
    (tmp_path / "junk.mr4d").write_bytes(b"not a bitstream at all")
    assert run("decode", "junk.mr4d", "y.lf4d", cwd=tmp_path).returncode == 3
    assert run("encode", "junk.mr4d", "z.mr4d", cwd=tmp_path).returncode == 3
    run("synth", "a.lf4d", "--dims", "2,2,8,8", cwd=tmp_path)
    assert run("encode", "a.lf4d", "b.mr4d", "--set", "bogus=1", cwd=tmp_path).returncode == 2


def test_corrupted_stream_fails_with_integrity_code(tmp_path):
    run("synth", "a.lf4d", "--dims", "2,2,8,8", cwd=tmp_path)
    run("encode", "a.lf4d", "a.mr4d", cwd=tmp_path)
    data = bytearray((tmp_path / "a.mr4d").read_bytes())
    data[len(data) // 2] ^= 0x10
    (tmp_path / "bad.mr4d").write_bytes(bytes(data))
    assert run("decode", "bad.mr4d", "o.lf4d", cwd=tmp_path).returncode == 3
    assert not (tmp_path / "o.lf4d").exists()
