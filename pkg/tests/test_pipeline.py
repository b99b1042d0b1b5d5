import json
from pathlib import Path

import pytest

from tabdistill import pipeline as pl
from tabdistill.client import BackendConfig, MockBackend
from tabdistill.corpus import Corpus, load_corpus
from tabdistill.errors import (
    GenerationFailed,
    MissingTable,
    PairParseFailure,
    ResumeConfigMismatch,
    UnknownMode,
)

from conftest import make_record, write_jsonl

BACKEND_CFG = BackendConfig(backoff_base_s=0.001, max_retries=1)
PIPE_CFG = pl.PipelineConfig(checkpoint_every=3)


def no_sleep(_s):
    pass


def teacher_output(tid):
    return (
        f"Reasoning 1: first reasoning for {tid}\n"
        f"Description 1: first description for {tid}\n"
        f"Reasoning 2: second reasoning for {tid}\n"
        f"Description 2: second description for {tid}"
    )


def build_script(table_ids, no_answers=()):
    """Sequential mock script: per table one generation response and two
    verification answers; (table_id, pair_index) in no_answers answer No."""
    script = []
    for tid in table_ids:
        script.append(teacher_output(tid))
        for k in (1, 2):
            script.append("No." if (tid, k) in no_answers else "Yes.")
    return script


@pytest.fixture
def ten_table_corpus(tmp_path):
    path = write_jsonl(
        tmp_path / "ten.jsonl", [make_record(f"t{i:02d}", "train") for i in range(10)]
    )
    return load_corpus(path)


class TestParsePairs:
    def test_well_formed(self):
        raw = "Reasoning 1: a\nDescription 1: b\nReasoning 2: c\nDescription 2: d"
        assert pl.parse_pairs(raw, 2) == [("a", "b"), ("c", "d")]

    def test_single_pair_expected_two(self):
        with pytest.raises(PairParseFailure) as exc:
            pl.parse_pairs("Reasoning 1: a\nDescription 1: b", 2)
        assert exc.value.label == "Reasoning 2"

    def test_empty_body(self):
        raw = "Reasoning 1:\nDescription 1: b"
        with pytest.raises(PairParseFailure):
            pl.parse_pairs(raw, 1)

    MUTATIONS = [
        "Reasoning 1: a\nDescription 1: b\nReasoning 2: c\nDescription 2: d",
        "reasoning 1: a\ndescription 1: b\nreasoning 2: c\ndescription 2: d",
        "REASONING 1: a\nDESCRIPTION 1: b\nREASONING 2: c\nDESCRIPTION 2: d",
        "Sure! Here you go.\nReasoning 1: a\nDescription 1: b\nReasoning 2: c\nDescription 2: d",
        "Reasoning 1: a\nDescription 1: b\nReasoning 2: c\nDescription 2: d\nHope that helps!",
        "Reasoning 1: a\n\n\nDescription 1: b\n\nReasoning 2: c\n\n\nDescription 2: d",
        "Reasoning 1 : a\nDescription 1 : b\nReasoning 2 : c\nDescription 2 : d",
        "Reasoning1: a\nDescription1: b\nReasoning2: c\nDescription2: d",
        "  Reasoning 1: a\n  Description 1: b\n  Reasoning 2: c\n  Description 2: d",
        "Reasoning 1: a has\nmultiple lines\nDescription 1: b\nReasoning 2: c\nDescription 2: d",
        "Reasoning 1: a\nDescription 1: b spans\ntwo lines\nReasoning 2: c\nDescription 2: d",
        "reasoning 1: a\nDescription 1: b\nREASONING 2: c\ndescription 2: d",
        "Reasoning 1:a\nDescription 1:b\nReasoning 2:c\nDescription 2:d",
        "Reasoning: a\nDescription: b\nReasoning: c\nDescription: d",
        "Here are two pairs.\n\nReasoning 1: a\nDescription 1: b\n\nReasoning 2: c\nDescription 2: d",
        "Reasoning 1: a.\nDescription 1: b.\nReasoning 2: c.\nDescription 2: d.",
        "Reasoning 1: a\nDescription 1: b\n---\nReasoning 2: c\nDescription 2: d",
        "Reasoning  1: a\nDescription  1: b\nReasoning  2: c\nDescription  2: d",
        "Reasoning 1: a\ndescription 1: b\nreasoning 2: c\nDescription 2: d\nThanks for asking!",
        "Pair one:\nReasoning 1: a\nDescription 1: b\nPair two:\nReasoning 2: c\nDescription 2: d",
    ]

    @pytest.mark.parametrize("raw", MUTATIONS)
    def test_mutated_formats_parse(self, raw):
        pairs = pl.parse_pairs(raw, 2)
        assert len(pairs) == 2
        assert all(r and d for r, d in pairs)


class TestVerificationAnswer:
    @pytest.mark.parametrize(
        "answer,verdict",
        [
            ("Yes.", "entailed"),
            ("yes, it is supported", "entailed"),
            ("No, the value is wrong.", "refuted"),
            ("NO", "refuted"),
            ("Maybe.", "verify_failed"),
            ("", "verify_failed"),
            ("I think yes", "verify_failed"),
        ],
    )
    def test_first_token_rule(self, answer, verdict):
        assert pl.classify_verification_answer(answer) == verdict


class TestGenerateForTable:
    def test_well_formed_response(self, demo, tiny_table):
        backend = MockBackend(script=[teacher_output("tiny")])
        pairs = pl.generate_for_table(tiny_table, demo, backend, PIPE_CFG, BACKEND_CFG,
                                      sleeper=no_sleep)
        assert [p.pair_index for p in pairs] == [1, 2]
        assert all(p.verdict == "pending" for p in pairs)
        assert all(p.table_id == "tiny" for p in pairs)

    def test_garbage_then_well_formed(self, demo, tiny_table):
        backend = MockBackend(script=["garbage", teacher_output("tiny")])
        pairs = pl.generate_for_table(tiny_table, demo, backend, PIPE_CFG, BACKEND_CFG,
                                      sleeper=no_sleep)
        assert len(pairs) == 2
        assert len(backend.requests) == 2

    def test_always_garbage(self, demo, tiny_table):
        backend = MockBackend(script=["garbage"] * 10)
        cfg = pl.PipelineConfig(parse_retry_limit=2)
        with pytest.raises(GenerationFailed):
            pl.generate_for_table(tiny_table, demo, backend, cfg, BACKEND_CFG,
                                  sleeper=no_sleep)
        assert len(backend.requests) == 3


class TestVerifyPair:
    def pending_pair(self):
        return pl.GeneratedPair(table_id="tiny", pair_index=1,
                                reasoning="r", description="d")

    def test_yes(self, tiny_table):
        backend = MockBackend(script=["Yes."])
        out = pl.verify_pair(self.pending_pair(), tiny_table, backend, PIPE_CFG,
                             BACKEND_CFG, sleeper=no_sleep)
        assert out.verdict == "entailed"

    def test_no(self, tiny_table):
        backend = MockBackend(script=["No, the value is wrong."])
        out = pl.verify_pair(self.pending_pair(), tiny_table, backend, PIPE_CFG,
                             BACKEND_CFG, sleeper=no_sleep)
        assert out.verdict == "refuted"

    def test_backend_failure_is_not_fatal(self, tiny_table):
        backend = MockBackend(script=[{"status": 500}] * 5)
        out = pl.verify_pair(self.pending_pair(), tiny_table, backend, PIPE_CFG,
                             BACKEND_CFG, sleeper=no_sleep)
        assert out.verdict == "verify_failed"


NO_ANSWERS = {("t02", 2), ("t05", 1), ("t08", 2)}  # 17 of 20 verify Yes


def run_ten(corpus, demo, tmp_path, state_name, script, interrupt_after=None, resume=False):
    backend = MockBackend(script=script)
    return pl.run_pipeline(
        corpus, demo, backend, PIPE_CFG, BACKEND_CFG,
        tmp_path / state_name, resume=resume, sleeper=no_sleep,
        interrupt_after=interrupt_after,
    )


class TestRunPipeline:
    def test_retention_rate(self, ten_table_corpus, demo, tmp_path):
        ids = [f"t{i:02d}" for i in range(10)]
        state, stats = run_ten(ten_table_corpus, demo, tmp_path, "s1",
                               build_script(ids, NO_ANSWERS))
        assert stats.pairs_generated == 20
        assert stats.pairs_entailed == 17
        assert stats.pairs_refuted == 3
        assert stats.retention_rate == pytest.approx(0.85)

    def test_conservation(self, ten_table_corpus, demo, tmp_path):
        ids = [f"t{i:02d}" for i in range(10)]
        _state, stats = run_ten(ten_table_corpus, demo, tmp_path, "s2",
                                build_script(ids, NO_ANSWERS))
        assert (stats.pairs_entailed + stats.pairs_refuted
                + stats.pairs_verify_failed) == stats.pairs_generated

    def test_interrupt_and_resume_identical(self, ten_table_corpus, demo, tmp_path):
        ids = [f"t{i:02d}" for i in range(10)]
        script = build_script(ids, NO_ANSWERS)

        run_ten(ten_table_corpus, demo, tmp_path, "full", script)
        run_ten(ten_table_corpus, demo, tmp_path, "split", script, interrupt_after=5)
        run_ten(ten_table_corpus, demo, tmp_path, "split", script[15:], resume=True)

        for name in ("state.header", "pairs.log", "failed.log"):
            full, split = tmp_path / "full" / name, tmp_path / "split" / name
            assert full.exists() == split.exists()
            if full.exists():
                assert full.read_bytes() == split.read_bytes()

    def test_resume_config_mismatch(self, ten_table_corpus, demo, tmp_path):
        ids = [f"t{i:02d}" for i in range(10)]
        run_ten(ten_table_corpus, demo, tmp_path, "s3", build_script(ids))
        other_cfg = pl.PipelineConfig(model_name="other-model")
        with pytest.raises(ResumeConfigMismatch):
            pl.run_pipeline(ten_table_corpus, demo, MockBackend(script=["x"]),
                            other_cfg, BACKEND_CFG, tmp_path / "s3", resume=True,
                            sleeper=no_sleep)

    def test_empty_corpus(self, demo, tmp_path):
        state, stats = pl.run_pipeline(
            Corpus(records=()), demo, MockBackend(script=["never used"]),
            PIPE_CFG, BACKEND_CFG, tmp_path / "empty", sleeper=no_sleep,
        )
        assert stats.pairs_generated == 0
        assert stats.tables_processed == 0
        assert stats.retention_rate == 0.0

    def test_failed_table_recorded_and_skipped(self, tmp_path, demo):
        path = write_jsonl(tmp_path / "two.jsonl",
                           [make_record("a", "train"), make_record("b", "train")])
        corpus = load_corpus(path)
        # table a: generation always garbage; table b: fine
        script = ["junk"] * (PIPE_CFG.parse_retry_limit + 1) + build_script(["b"])
        state, stats = pl.run_pipeline(
            corpus, demo, MockBackend(script=script), PIPE_CFG, BACKEND_CFG,
            tmp_path / "sf", sleeper=no_sleep,
        )
        assert "a" in state.failed_table_ids
        assert state.completed_table_ids == {"b"}
        assert stats.tables_processed == 2
        assert not set(state.failed_table_ids) & state.completed_table_ids


class TestEmitTrainingFile:
    @pytest.fixture
    def finished(self, ten_table_corpus, demo, tmp_path):
        ids = [f"t{i:02d}" for i in range(10)]
        state, _ = run_ten(ten_table_corpus, demo, tmp_path, "emit",
                           build_script(ids, NO_ANSWERS))
        return state, ten_table_corpus, tmp_path

    def read(self, path):
        return [json.loads(l) for l in Path(path).read_text().splitlines()]

    def test_cot_input(self, finished):
        state, corpus, tmp_path = finished
        out = tmp_path / "cot_input.jsonl"
        count = pl.emit_training_file(state, corpus, "cot_input", out)
        lines = self.read(out)
        assert count == len(lines) == 17
        assert all(l["input"].count("<CoT>") == 1 for l in lines)
        assert all("<CoT>" not in l["target"] for l in lines)

    def test_traditional(self, finished):
        state, corpus, tmp_path = finished
        out = tmp_path / "trad.jsonl"
        count = pl.emit_training_file(state, corpus, "traditional", out)
        lines = self.read(out)
        assert count == 10
        assert all("<CoT>" not in l["input"] + l["target"] for l in lines)

    def test_cot_target(self, finished):
        state, corpus, tmp_path = finished
        out = tmp_path / "ct.jsonl"
        count = pl.emit_training_file(state, corpus, "cot_target", out)
        lines = self.read(out)
        assert count == 17
        assert all("<CoT>" not in l["input"] for l in lines)
        assert all(l["target"].count("<CoT>") == 1 for l in lines)

    def test_only_entailed_emitted(self, finished):
        state, corpus, tmp_path = finished
        out = tmp_path / "cot_input2.jsonl"
        pl.emit_training_file(state, corpus, "cot_input", out)
        emitted_ids = {l["example_id"] for l in self.read(out)}
        for pair in state.pairs:
            key = f"{pair.table_id}#p{pair.pair_index}"
            assert (key in emitted_ids) == (pair.verdict == "entailed")

    def test_unknown_mode(self, finished):
        state, corpus, tmp_path = finished
        with pytest.raises(UnknownMode):
            pl.emit_training_file(state, corpus, "nope", tmp_path / "x.jsonl")

    def test_missing_table(self, finished, demo):
        state, _corpus, tmp_path = finished
        with pytest.raises(MissingTable):
            pl.emit_training_file(state, Corpus(records=()), "cot_input",
                                  tmp_path / "y.jsonl")
