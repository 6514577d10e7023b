import json

import numpy as np
import pytest

from rolecluster.errors import InputError
from rolecluster.io import (
    Segment,
    load_bundles,
    predictions_from_segments,
    read_constraints_csv,
    read_embeddings_csv,
    read_segments_jsonl,
    sha256_file,
    write_embeddings_csv,
    write_manifest,
    write_segments_jsonl,
)
from rolecluster.synthesis import SynthConfig, generate_session


def test_segments_roundtrip(tmp_path):
    s = generate_session(SynthConfig(seed=1, segments_per_speaker=3))
    path = tmp_path / "seg.jsonl"
    write_segments_jsonl(path, s.segments)
    assert read_segments_jsonl(path) == s.segments
    first = json.loads(path.read_text().splitlines()[0])
    assert "role" in first and first["session_id"] == "session"


def test_optional_fields_and_missing_word_count():
    seg = Segment("s", "a", 0.0, 1.0, role="host", role_confidence=0.99)
    assert seg.to_json() == {"session_id": "s", "segment_id": "a", "start_s": 0.0, "end_s": 1.0,
                             "role": "host", "role_confidence": 0.99}
    (pred,) = predictions_from_segments([seg])
    assert pred.word_count == 0


@pytest.mark.parametrize("line, msg", [
    ("{not json", "invalid JSON"),
    ('{"session_id": "s", "segment_id": "b", "start_s": 0}', "missing key"),
    ('{"session_id": "s", "segment_id": "b", "start_s": 2, "end_s": 1}', "end_s"),
    ('{"session_id": "s", "segment_id": "b", "start_s": 0, "end_s": 1, "role_confidence": 2}',
     "role_confidence"),
])
def test_bad_segment_line_reports_location(tmp_path, line, msg):
    path = tmp_path / "seg.jsonl"
    path.write_text('{"session_id": "s", "segment_id": "a", "start_s": 0, "end_s": 1}\n' + line + "\n")
    with pytest.raises(InputError, match=rf"seg.jsonl:2: .*{msg}|seg.jsonl:2: {msg}"):
        read_segments_jsonl(path)


def test_embeddings_roundtrip_and_normalized(tmp_path):
    x = np.array([[3.0, 4.0], [0.0, 2.0]])
    path = tmp_path / "e.csv"
    write_embeddings_csv(path, ["a", "b"], x)
    ids, back = read_embeddings_csv(path)
    assert ids == ["a", "b"]
    np.testing.assert_allclose(back, [[0.6, 0.8], [0.0, 1.0]])
    write_embeddings_csv(path, ids, back)
    assert read_embeddings_csv(path)[1].tobytes() == back.tobytes()


@pytest.mark.parametrize("body, msg", [
    ("a,1,0\nb,1\n", "dimension"),
    ("a,1,0\nb,0,0\n", "zero-norm"),
    ("a,1,0\na,0,1\n", "duplicate"),
    ("a,1,x\n", "could not convert"),
])
def test_bad_embeddings(tmp_path, body, msg):
    path = tmp_path / "e.csv"
    path.write_text(body)
    with pytest.raises(InputError, match=msg):
        read_embeddings_csv(path)


def test_constraints_csv(tmp_path):
    idx = {"a": 0, "b": 1, "c": 2}
    path = tmp_path / "c.csv"
    path.write_text("segment_i,segment_j,kind\na,b,ML\nc,a,CL\nx,y,ML\n")
    z = read_constraints_csv(path, idx, other_ids=frozenset({"x", "y"}))
    np.testing.assert_array_equal(z, [[0, 1, -1], [1, 0, 0], [-1, 0, 0]])


@pytest.mark.parametrize("body, msg", [
    ("a,b,ML\nb,a,CL\n", "both ML and CL"),
    ("a,a,ML\n", "self"),
    ("a,q,ML\n", "unknown"),
    ("a,x,ML\n", "spans two sessions"),
    ("a,b,maybe\n", "ML or CL"),
])
def test_bad_constraints(tmp_path, body, msg):
    path = tmp_path / "c.csv"
    path.write_text(body)
    with pytest.raises(InputError, match=msg):
        read_constraints_csv(path, {"a": 0, "b": 1}, other_ids=frozenset({"x"}))


def test_load_bundles_groups_sessions(tmp_path):
    segs, rows, ids = [], [], []
    for sid in ("s2", "s1"):
        s = generate_session(SynthConfig(seed=3, segments_per_speaker=2, session_id=sid))
        segs += s.segments
        rows.append(s.embeddings)
        ids += [x.segment_id for x in s.segments]
    write_segments_jsonl(tmp_path / "seg.jsonl", segs)
    write_embeddings_csv(tmp_path / "e.csv", ids, np.vstack(rows))
    bundles = load_bundles(tmp_path / "seg.jsonl", tmp_path / "e.csv")
    assert [b.session_id for b in bundles] == ["s1", "s2"]
    np.testing.assert_allclose(bundles[1].embeddings, rows[0])
    assert len(bundles[0].predictions) == 4 and bundles[0].reference is not None

    write_embeddings_csv(tmp_path / "e.csv", ids[:-1], np.vstack(rows)[:-1])
    with pytest.raises(InputError, match="no embedding"):
        load_bundles(tmp_path / "seg.jsonl", tmp_path / "e.csv")


def test_manifest_digests(tmp_path):
    (tmp_path / "in.txt").write_text("hello")
    out = tmp_path / "out"
    out.mkdir()
    (out / "r.txt").write_text("world")
    m = write_manifest(out / "manifest.json", command="x", config={"a": 1}, seed=3,
                       inputs=[tmp_path / "in.txt"], outputs=[out / "r.txt"], sessions=[], version="0")
    assert m["outputs"] == {"r.txt": sha256_file(out / "r.txt")}
    assert json.loads((out / "manifest.json").read_text()) == m
