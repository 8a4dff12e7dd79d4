import json

import pytest

from lodestar.catalog import (
    AnalysisBlock,
    DataRequirements,
    check_graph_integrity,
    jaccard,
    load_catalog,
    lookup_by_tags,
    parse_catalog,
    validate_block,
)
from lodestar.errors import DuplicateId, InvalidBlock
from lodestar.graph import build_graph
from lodestar.mining import BlockSequence

GOOD_CODE = "def analyze(df):\n    return df.head(10)\n"


def block(block_id="b1", tags=("statistical-sampling",), code=GOOD_CODE, origin="expert"):
    return AnalysisBlock(
        block_id=block_id,
        name=block_id,
        description="test block",
        code=code,
        tags=frozenset(tags),
        advisor_origin=origin,
    )


def catalog_doc(*blocks):
    return {
        "blocks": [
            {
                "id": b.block_id,
                "name": b.name,
                "description": b.description,
                "tags": sorted(b.tags),
                "origin": b.advisor_origin,
                "requirements": {},
                "code": b.code,
            }
            for b in blocks
        ]
    }


def test_compliant_block_has_no_violations():
    assert validate_block(block()) == []


def test_missing_import_detected():
    code = "def analyze(df):\n    return pd.get_dummies(df)\n"
    violations = validate_block(block(code=code))
    assert violations == ["missing import: pandas"]


def test_print_statement_flagged():
    code = "def analyze(df):\n    print(df)\n    return df\n"
    assert "print statement present" in validate_block(block(code=code))


def test_two_functions_flagged():
    code = "def helper(x):\n    return x\n\n\ndef analyze(df):\n    return helper(df)\n"
    violations = validate_block(block(code=code))
    assert any("exactly one entry function" in v for v in violations)


def test_wrong_entry_name_flagged():
    code = "def run(df):\n    return df\n"
    assert any("analyze" in v for v in validate_block(block(code=code)))


def test_wrong_arity_flagged():
    code = "def analyze(df, other):\n    return df\n"
    assert any("one required argument" in v for v in validate_block(block(code=code)))


def test_missing_return_flagged():
    code = "def analyze(df):\n    df.head()\n"
    assert any("return" in v for v in validate_block(block(code=code)))


def test_unparseable_code_flagged():
    violations = validate_block(block(code="def analyze(df:\n"))
    assert any("does not parse" in v for v in violations)


def test_empty_tags_flagged():
    assert "tags must be non-empty" in validate_block(block(tags=()))


def test_unknown_tag_flagged():
    assert "unknown tag: mystery" in validate_block(block(tags=("mystery",)))


def test_kernel_provided_names_allowed():
    code = (
        "import os\n\n\ndef analyze(df):\n"
        '    path = os.path.join(ARTIFACT_DIR, "fig.png")\n'
        "    return df\n"
    )
    assert validate_block(block(code=code)) == []


# -- catalog loading ---------------------------------------------------------


def test_empty_catalog_file(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"blocks": []}))
    assert len(load_catalog(path)) == 0


def test_seed_catalog_has_twelve_expert_and_ten_crowd(seed_catalog):
    assert len(seed_catalog) == 22
    origins = [b.advisor_origin for b in seed_catalog]
    assert origins.count("expert") == 12
    assert origins.count("crowd") == 10


def test_two_function_block_rejected_on_load():
    bad = block(code="def a(x):\n    return x\n\n\ndef analyze(df):\n    return a(df)\n")
    with pytest.raises(InvalidBlock) as excinfo:
        parse_catalog(catalog_doc(bad))
    assert excinfo.value.block_id == "b1"


def test_duplicate_ids_rejected():
    with pytest.raises(DuplicateId):
        parse_catalog(catalog_doc(block("dup"), block("dup")))


def test_extra_tags_extend_vocabulary():
    extra = block(tags=("bio-sequencing",))
    catalog = parse_catalog(catalog_doc(extra), extra_tags=frozenset({"bio-sequencing"}))
    assert "bio-sequencing" in catalog.get("b1").tags


# -- tag lookup ---------------------------------------------------------------


def test_lookup_single_match(seed_catalog):
    hits = lookup_by_tags(seed_catalog, {"train-model", "test-model"})
    assert [b.block_id for b in hits][:2] == ["crowd-fit-model", "linear-regression"]
    assert all(jaccard(b.tags, {"train-model", "test-model"}) > 0 for b in hits)


def test_lookup_partial_overlap_included():
    b = block(tags=("train-model",))
    catalog = parse_catalog(catalog_doc(b))
    hits = lookup_by_tags(catalog, {"train-model", "test-model"})
    assert [h.block_id for h in hits] == ["b1"]
    assert jaccard(b.tags, {"train-model", "test-model"}) == 0.5


def test_lookup_matches_brute_force(seed_catalog):
    tags = {"visualization", "statistical-summary"}
    scored = sorted(
        (
            (-jaccard(b.tags, tags), b.block_id)
            for b in seed_catalog
            if jaccard(b.tags, tags) > 0
        ),
    )
    expected = [block_id for _, block_id in scored]
    assert [b.block_id for b in lookup_by_tags(seed_catalog, tags)] == expected


def test_lookup_zero_overlap_excluded(seed_catalog):
    assert lookup_by_tags(seed_catalog, set()) == []


# -- requirements -------------------------------------------------------------


def test_requirements_check():
    req = DataRequirements(min_numeric_columns=2, min_categorical_columns=1, min_rows=10)
    schema = [("a", "numeric"), ("b", "numeric"), ("c", "categorical")]
    assert req.satisfied_by(schema, 10)
    assert not req.satisfied_by(schema, 9)
    assert not req.satisfied_by(schema[:2], 100)


# -- integrity ----------------------------------------------------------------


def test_seed_graphs_resolve_to_catalog(seed_catalog, seed_advisors):
    for graph in seed_advisors.values():
        assert check_graph_integrity(graph, seed_catalog) == []


def test_missing_states_reported(seed_catalog):
    graph = build_graph(
        [BlockSequence("s", ("first-10-samples", "not-a-block"))], advisor_id="x"
    )
    assert check_graph_integrity(graph, seed_catalog) == ["not-a-block"]
