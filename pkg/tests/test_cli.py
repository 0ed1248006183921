import io
import json
import subprocess
import sys

import pytest

from scenarios import GOLDEN_DOC, SQL_INJECTION, XML_INJECTION, benign_corpus
from xvpa.cli import main, read_length_records, read_line_records, unescape_record
from xvpa.events import XmlInputError


def cli(*args, stdin=b""):
    return subprocess.run(
        [sys.executable, "-m", "xvpa.cli", *args], input=stdin, capture_output=True, timeout=60
    )


@pytest.fixture
def corpus_dir(tmp_path):
    d = tmp_path / "train"
    (d / "sub").mkdir(parents=True)
    for i, doc in enumerate(benign_corpus()):
        (d / ("sub" if i % 2 else "") / f"t{i}.xml").write_text(doc)
    (d / "notes.txt").write_text("ignored")
    return d


@pytest.fixture
def model(tmp_path, corpus_dir):
    path = tmp_path / "m.json"
    assert main(["learn", str(corpus_dir), "--model", str(path)]) == 0
    return path


def test_learn_summary(tmp_path, corpus_dir, capsys):
    path = tmp_path / "m.json"
    assert main(["learn", str(corpus_dir), "--model", str(path), "--k", "1", "--l", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("learned from 5 documents: |sigma|=")
    assert "k=1 l=2" in out
    assert json.loads(path.read_bytes())["format_version"] == 1


def test_learn_is_deterministic(tmp_path, corpus_dir):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["learn", str(corpus_dir), "--model", str(a)])
    main(["learn", str(corpus_dir), "--model", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_validate_exit_codes(tmp_path, model, capsys):
    good = tmp_path / "good.xml"
    good.write_text(benign_corpus()[0])
    sql = tmp_path / "sql.xml"
    sql.write_text(SQL_INJECTION)
    xml = tmp_path / "xml.xml"
    xml.write_text(XML_INJECTION)
    broken = tmp_path / "broken.xml"
    broken.write_text("<transaction><total>")
    assert main(["validate", str(good), "--model", str(model)]) == 0
    assert main(["validate", str(good), str(sql), "--model", str(model)]) == 1
    assert main(["validate", str(xml), "--model", str(model)]) == 1
    capsys.readouterr()
    assert main(["validate", str(sql), str(broken), str(good), "--model", str(model)]) == 2
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "3 documents: 1 accepted, 0 structural, 1 datatype, 1 malformed"
    assert lines[-2] == f"{good}: accepted"


def test_validate_ndjson(tmp_path, model, capsys):
    sql = tmp_path / "sql.xml"
    sql.write_text(SQL_INJECTION)
    xml = tmp_path / "xml.xml"
    xml.write_text(XML_INJECTION)
    assert main(["validate", str(sql), str(xml), "--model", str(model), "--format", "ndjson"]) == 1
    recs = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [r["accepted"] for r in recs[:2]] == [False, False]
    assert recs[0]["anomalies"][0]["category"] == "datatype"
    assert recs[0]["anomalies"][0]["position"] == 6
    assert recs[1]["anomalies"][0]["category"] == "structural"
    assert recs[1]["anomalies"][0]["expected"] == ["</transaction>"]
    assert recs[2] == {"summary": {"documents": 2, "accepted": 0, "structural": 1, "datatype": 1, "malformed": 0}}


def test_missing_file_is_malformed_and_batch_continues(tmp_path, model, capsys):
    good = tmp_path / "good.xml"
    good.write_text(benign_corpus()[1])
    assert main(["validate", str(tmp_path / "nope.xml"), str(good), "--model", str(model)]) == 2
    out = capsys.readouterr().out
    assert f"{good}: accepted" in out and "1 malformed" in out


def test_corrupted_model(tmp_path, model, capsys):
    bad = tmp_path / "bad.json"
    bad.write_bytes(model.read_bytes()[:50])
    doc = tmp_path / "d.xml"
    doc.write_text(GOLDEN_DOC)
    assert main(["validate", str(doc), "--model", str(bad)]) == 2
    assert "ParseError" in capsys.readouterr().err
    assert main(["inspect", "--model", str(tmp_path / "missing.json")]) == 2


def test_learn_errors(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "m.json"
    assert main(["learn", str(empty), "--model", str(out)]) == 2
    assert "EmptyCorpus" in capsys.readouterr().err
    bad = tmp_path / "bad.xml"
    bad.write_text("<a><b></a>")
    assert main(["learn", str(bad), "--model", str(out)]) == 2
    assert str(bad) in capsys.readouterr().err
    r1, r2 = tmp_path / "r1.xml", tmp_path / "r2.xml"
    r1.write_text("<a/>")
    r2.write_text("<b/>")
    assert main(["learn", str(r1), str(r2), "--model", str(out)]) == 2
    assert "InconsistentRoot" in capsys.readouterr().err
    assert not out.exists()


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["learn", "--model", "m", "--k", "0"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 3
    assert main(["validate", "-", "--model", "-"]) == 3


def test_inspect(model, capsys):
    assert main(["inspect", "--model", str(model)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].endswith("m0=transaction")
    assert out[2] == "parameters: k=1 l=2"
    assert out[3] == "module\ttag\tstates\texits"
    assert main(["inspect", "--model", str(model), "--dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph xvpa {")


def test_datatype_command(capsys):
    assert main(["datatype", "10.0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "minimal: {decimal}"
    assert out[1] == "first: decimal"
    closure = out[2][len("closure: {") : -1].split(", ")
    assert closure[-1] == "decimal" and "integer" in closure and "string" not in closure


def test_trace_files(tmp_path, corpus_dir):
    prefix = tmp_path / "tr"
    assert main(["learn", str(corpus_dir), "--model", str(tmp_path / "m.json"), "--trace", str(prefix)]) == 0
    assert (tmp_path / "tr.vppa.dot").read_text().startswith("digraph vppa {")
    assert (tmp_path / "tr.merged.dot").read_text().startswith("digraph merged {")


def test_stdin_lines_end_to_end():
    learn = cli("learn", "-", "--model", "-", stdin=GOLDEN_DOC.encode() + b"\n")
    assert learn.returncode == 0, learn.stderr
    assert learn.stderr.startswith(b"learned from 1 documents")
    model_bytes = learn.stdout
    # doubles as a check that the model written to stdout is complete
    json.loads(model_bytes)


def test_stdin_validate_with_framings(tmp_path):
    path = tmp_path / "m.json"
    assert main(["learn", "--model", str(path), str(_write(tmp_path, "f.xml", GOLDEN_DOC))]) == 0
    docs = [GOLDEN_DOC, "<a><b>X</b></a>", "<a>\n<a>1</a><b/></a>"]
    lines = b"\n".join(d.replace("\n", "\\n").encode() for d in docs) + b"\n"
    r = cli("validate", "-", "--model", str(path), "--format", "ndjson", stdin=lines)
    recs = [json.loads(x) for x in r.stdout.splitlines()]
    assert [x.get("source") for x in recs[:3]] == ["<stdin>#1", "<stdin>#2", "<stdin>#3"]
    assert [x.get("accepted") for x in recs[:3]] == [True, False, True]
    assert r.returncode == 1
    framed = b"".join(b"%d\n%s" % (len(d.encode()), d.encode()) for d in docs)
    r2 = cli("validate", "-", "--model", str(path), "--framing", "length", "--format", "ndjson", stdin=framed)
    assert r2.stdout.splitlines()[:3] == r.stdout.splitlines()[:3]
    r3 = cli("validate", "-", "--model", str(path), "--framing", "length", stdin=b"99\n<a/>")
    assert r3.returncode == 2


def test_console_script_version():
    r = subprocess.run([sys.executable, "-m", "xvpa.cli", "--version"], capture_output=True)
    assert r.returncode == 0 and r.stdout.startswith(b"xvpa ")


def test_record_readers():
    assert unescape_record(b"a\\nb\\\\n\\r\\q") == b"a\nb\\n\r\\q"
    assert list(read_line_records(io.BytesIO(b"<a/>\n\n  \n<b/>\r\n"))) == [b"<a/>", b"<b/>"]
    assert list(read_length_records(io.BytesIO(b"4\n<a/>\n3\nxyz"))) == [b"<a/>", b"xyz"]
    for bad in [b"x\n", b"5\n<a/>", b"1" * 25 + b"\n"]:
        with pytest.raises(XmlInputError):
            list(read_length_records(io.BytesIO(bad)))


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p
