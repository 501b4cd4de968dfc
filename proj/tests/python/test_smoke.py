"""Smoke tests for the python module: the core operations work end to end."""

import math

import pytest

import tracelens as tl


def test_lcs_and_nlcs():
    a = [0, 1, 2, 1, 3, 0, 1]  # ABCBDAB
    b = [1, 3, 2, 0, 1, 0]     # BDCABA
    result = tl.lcs(a, b)
    assert len(result.matches) == 4
    assert len(result.matches) + len(result.only_in_a) == len(a)
    assert tl.nlcs([0, 0, 1], [0, 1]) == pytest.approx(2.0 / math.sqrt(6.0), abs=1e-12)
    with pytest.raises(tl.DataError):
        tl.nlcs([], [0])


def test_ppm_model_basics():
    model = tl.PpmModel.train([[0, 0, 1]], 1, 2)
    assert model.predict([0], 0) == pytest.approx(0.5, abs=1e-12)
    assert model.predict([1], 0) == pytest.approx(2.0 / 3.0, abs=1e-12)
    dist = model.predict_distribution([0, 1, 0])
    assert sum(dist) == pytest.approx(1.0, abs=1e-9)
    assert all(p > 0 for p in dist)
    assert model.log_loss([0, 1, 0]) >= 0.0


def test_generate_and_classify_roundtrip():
    tmpl = tl.preset("sto")
    table = tl.SymbolTable()
    corpus = tl.make_fault_free_corpus(tmpl, 6, 11, 0.05, table)
    idle = tl.make_idle_corpus(tmpl, 2, 11, 3.0, table)

    fault = tl.FaultSpec()
    fault.type = tl.FaultType.ThrowException
    fault.block = 1
    fault.event = 4
    experiment = tl.inject_fault(tmpl, fault, 99, 0.05, table, "exp-py")
    assert experiment.truth.failure_manifested
    assert len(experiment.truth.missing) > 0

    dictionary = tl.build_background_dictionary(idle)
    training = [tl.filter_background(t, dictionary) for t in corpus]
    injected = tl.filter_background(experiment.trace, dictionary)

    options = tl.ClassifyOptions()
    options.alphabet_size = len(table)
    report = tl.classify(injected, training, options)
    assert report.experiment_id == "exp-py"
    assert report.summary.spurious >= 1
    assert report.summary.missing >= 1

    data = tl.report_dict(report)
    assert data["format"] == "tracelens-report"
    assert len(data["injected_events"]) == len(injected)


def test_report_rendering():
    tmpl = tl.preset("sto")
    table = tl.SymbolTable()
    corpus = tl.make_fault_free_corpus(tmpl, 4, 21, 0.0, table)
    options = tl.ClassifyOptions()
    options.alphabet_size = len(table)
    report = tl.classify(corpus[0], corpus, options)
    assert report.summary.spurious == 0

    text = report.render_text()
    assert "experiment" in text
    svg = report.render_svg()
    import xml.etree.ElementTree as ET

    ET.fromstring(svg)  # well-formed XML


def test_span_file_roundtrip(tmp_path):
    tmpl = tl.preset("net")
    table = tl.SymbolTable()
    gen = tl.generate_fault_free(tmpl, 5, 0.1, table, "rt")
    path = tmp_path / "trace.spans.jsonl"
    tl.write_spans(path, gen.trace)

    table2 = tl.SymbolTable()
    again = tl.ingest_spans(path, tl.TraceLabel.FaultFree, table2)
    assert len(again) == len(gen.trace)
    assert [table2.pair_of(s) for s in again.symbols] == [
        table.pair_of(s) for s in gen.trace.symbols
    ]


def test_estimate_order_and_selection():
    tmpl = tl.preset("depl")
    table = tl.SymbolTable()
    corpus = tl.make_fault_free_corpus(tmpl, 3, 31, 0.0, table)
    est = tl.estimate_order(corpus)
    assert est.order >= 10
    sel = tl.select_reference(corpus[0], corpus)
    assert sel.index == 0
    assert sel.alignment.nlcs == pytest.approx(1.0)
