import json

import pytest

import biopatch


def test_oracles():
    assert biopatch.mscore(1974) == 252
    assert biopatch.ascore(2017) == 10
    assert biopatch.parity(1974) == "NO"
    assert biopatch.anniversary(2017, 10) == 2027
    assert biopatch.year_diff(1974, 1858) == 116
    assert biopatch.odd_letters("Dentistry") == "DNITY"
    assert biopatch.first_last("Zhejiang University") == "ZGUY"
    assert biopatch.field_of("Dentistry") == "Medicine"


def test_parse_and_match():
    assert biopatch.parse_final_answer("so. The answer is: 116", "CR") == "116"
    assert biopatch.parse_final_answer(" Medicine ", "QA") == "Medicine"
    assert biopatch.exact_match(" 116", "116") == 1
    assert biopatch.exact_match("medicine", "Medicine") == 0


def test_similarity():
    assert biopatch.tokenize("Hello, World") == ["hello", "world"]
    assert biopatch.context_similarity("the cat", "the dog") == 0.5
    with pytest.raises(ValueError):
        biopatch.context_similarity("a", "...")


def test_gen_people(tmp_path):
    code, out, err = biopatch.run(["gen-people", "--seed", "2", "--n", "30", "--out", str(tmp_path)])
    assert code == 0, err
    lines = (tmp_path / "people.jsonl").read_text().splitlines()
    assert len(lines) == 30
    pools = json.loads((tmp_path / "pools.json").read_text())
    assert len(pools["known"]) == 10
    code, _, err = biopatch.run(["gen-people", "--nope"])
    assert code == 1


def test_attdump_roundtrip(tmp_path):
    dump = tmp_path / "d.attdump"
    biopatch.write_attdump(
        str(dump),
        2,
        [
            {"sample_id": "a", "name_span": (1, 3), "rows": [[0.1, 0.1, 0.1, 0.7], [0.2, 0.3, 0.1, 0.4]]},
            {"sample_id": "b", "name_span": (0, 1), "rows": [[1.0, 0.0], [0.5, 0.5]]},
        ],
    )
    biopatch.validate_attdump(str(dump))
    code, out, err = biopatch.run(["attn", "score", "--dump", str(dump), "--window", "0:1"])
    assert code == 0, err
    res = json.loads(out)
    assert res["mean"] == pytest.approx((0.3 + 0.75) / 2, abs=1e-6)
    with pytest.raises(ValueError):
        biopatch.write_attdump(str(tmp_path / "bad"), 1, [{"sample_id": "x", "name_span": (0, 1), "rows": [[-1.0]]}])
