#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tracelens/alignment.hpp"
#include "tracelens/classifier.hpp"
#include "tracelens/evaluation.hpp"
#include "tracelens/errors.hpp"
#include "tracelens/pipeline.hpp"
#include "tracelens/preprocess.hpp"
#include "tracelens/report.hpp"
#include "tracelens/synthgen.hpp"
#include "tracelens/trace_model.hpp"
#include "tracelens/vmm.hpp"

namespace py = pybind11;
using namespace tracelens;

namespace {

std::string report_json(const ClassificationReport& report) {
    return report.to_json().dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trace alignment and sequence-model anomaly detection for "
              "fault-injection experiments";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");

    py::enum_<Layer>(m, "Layer")
        .value("Client", Layer::Client)
        .value("Internal", Layer::Internal);
    py::enum_<TraceLabel>(m, "TraceLabel")
        .value("FaultFree", TraceLabel::FaultFree)
        .value("FaultInjected", TraceLabel::FaultInjected)
        .value("Idle", TraceLabel::Idle);
    py::enum_<Mode>(m, "Mode")
        .value("LcsOnly", Mode::LcsOnly)
        .value("LcsWithVmm", Mode::LcsWithVmm);
    py::enum_<FaultType>(m, "FaultType")
        .value("ThrowException", FaultType::ThrowException)
        .value("WrongReturnValue", FaultType::WrongReturnValue)
        .value("WrongParameterValue", FaultType::WrongParameterValue)
        .value("Delay", FaultType::Delay);

    py::class_<Event>(m, "Event")
        .def_readonly("sender", &Event::sender)
        .def_readonly("service", &Event::service)
        .def_readonly("start_us", &Event::start_us)
        .def_readonly("duration_us", &Event::duration_us)
        .def_readonly("layer", &Event::layer)
        .def_readonly("trace_id", &Event::trace_id);

    py::class_<SymbolTable>(m, "SymbolTable")
        .def(py::init<>())
        .def("intern",
             py::overload_cast<const std::string&, const std::string&>(&SymbolTable::intern))
        .def("lookup", &SymbolTable::lookup)
        .def("pair_of", &SymbolTable::pair_of)
        .def("__len__", &SymbolTable::size);

    py::class_<EventSequence>(m, "EventSequence")
        .def_readonly("symbols", &EventSequence::symbols)
        .def_readonly("events", &EventSequence::events)
        .def_readonly("label", &EventSequence::label)
        .def_readonly("trace_id", &EventSequence::trace_id)
        .def("__len__", &EventSequence::size);

    m.def("ingest_spans", &ingest_spans, py::arg("file"), py::arg("label"), py::arg("table"),
          "Read a JSON-Lines span file into an ordered, symbolized sequence");
    m.def("encode", &encode, py::arg("pairs"), py::arg("table"));
    m.def("write_spans", &write_spans, py::arg("file"), py::arg("sequence"));

    py::class_<BackgroundDictionary>(m, "BackgroundDictionary")
        .def(py::init<>())
        .def_readonly("symbols", &BackgroundDictionary::symbols)
        .def("contains", &BackgroundDictionary::contains)
        .def("__len__", &BackgroundDictionary::size);
    m.def("build_background_dictionary", &build_background_dictionary, py::arg("idle"));
    m.def("filter_background",
          py::overload_cast<const EventSequence&, const BackgroundDictionary&>(&filter_background),
          py::arg("sequence"), py::arg("dictionary"));

    py::class_<AlignmentResult>(m, "AlignmentResult")
        .def_readonly("matches", &AlignmentResult::matches)
        .def_readonly("only_in_a", &AlignmentResult::only_in_a)
        .def_readonly("only_in_b", &AlignmentResult::only_in_b)
        .def_readonly("nlcs", &AlignmentResult::nlcs);
    m.def(
        "lcs",
        [](const std::vector<Symbol>& a, const std::vector<Symbol>& b) { return lcs(a, b); },
        py::arg("a"), py::arg("b"), "Myers diff; returns the matched index pairs and per-side leftovers");
    m.def(
        "nlcs",
        [](const std::vector<Symbol>& a, const std::vector<Symbol>& b) { return nlcs(a, b); },
        py::arg("a"), py::arg("b"));

    py::class_<ReferenceSelection>(m, "ReferenceSelection")
        .def_readonly("index", &ReferenceSelection::index)
        .def_readonly("alignment", &ReferenceSelection::alignment);
    m.def("select_reference", &select_reference, py::arg("test"), py::arg("training"));

    py::class_<OrderEstimate>(m, "OrderEstimate")
        .def_readonly("order", &OrderEstimate::order)
        .def_readonly("request_lengths", &OrderEstimate::request_lengths);
    m.def("estimate_order", &estimate_order, py::arg("traces"));

    py::class_<PpmModel>(m, "PpmModel")
        .def_static("train", &PpmModel::train, py::arg("sequences"), py::arg("max_order"),
                    py::arg("alphabet_size"), py::arg("exclusion") = true)
        .def("predict",
             [](const PpmModel& model, const std::vector<Symbol>& ctx, Symbol symbol) {
                 return model.predict(ctx, symbol);
             },
             py::arg("context"), py::arg("symbol"))
        .def("predict_distribution",
             [](const PpmModel& model, const std::vector<Symbol>& ctx) {
                 return model.predict_distribution(ctx);
             },
             py::arg("context"))
        .def("log_loss",
             [](const PpmModel& model, const std::vector<Symbol>& test) {
                 return model.log_loss(test);
             },
             py::arg("test"))
        .def_property_readonly("max_order", &PpmModel::max_order)
        .def_property_readonly("alphabet_size", &PpmModel::alphabet_size)
        .def("to_json", [](const PpmModel& model) { return model.to_json().dump(); });

    py::class_<Thresholds>(m, "Thresholds")
        .def(py::init<>())
        .def_readwrite("eps_spurious", &Thresholds::eps_spurious)
        .def_readwrite("eps_missing", &Thresholds::eps_missing);

    py::class_<ClassifyOptions>(m, "ClassifyOptions")
        .def(py::init<>())
        .def_readwrite("thresholds", &ClassifyOptions::thresholds)
        .def_readwrite("order", &ClassifyOptions::order)
        .def_readwrite("order_cap", &ClassifyOptions::order_cap)
        .def_readwrite("mode", &ClassifyOptions::mode)
        .def_readwrite("ppm_exclusion", &ClassifyOptions::ppm_exclusion)
        .def_readwrite("common_context_only", &ClassifyOptions::common_context_only)
        .def_readwrite("alphabet_size", &ClassifyOptions::alphabet_size);

    py::class_<ReportSummary>(m, "ReportSummary")
        .def_readonly("common", &ReportSummary::common)
        .def_readonly("spurious", &ReportSummary::spurious)
        .def_readonly("missing", &ReportSummary::missing)
        .def_readonly("non_anomalous", &ReportSummary::non_anomalous)
        .def_readonly("omitted_non_anomalous", &ReportSummary::omitted_non_anomalous);

    py::class_<ClassificationReport>(m, "ClassificationReport")
        .def_readonly("experiment_id", &ClassificationReport::experiment_id)
        .def_readonly("reference_index", &ClassificationReport::reference_index)
        .def_readonly("order", &ClassificationReport::order)
        .def_readonly("nlcs", &ClassificationReport::nlcs)
        .def_readonly("summary", &ClassificationReport::summary)
        .def("to_json", &report_json)
        .def("render_text", [](const ClassificationReport& r) { return render_text(r); })
        .def("render_svg", [](const ClassificationReport& r) { return render_svg(r); });

    py::class_<Classifier>(m, "Classifier")
        .def(py::init<std::vector<EventSequence>, ClassifyOptions>(), py::arg("training"),
             py::arg("options"))
        .def("classify",
             [](const Classifier& c, const EventSequence& injected) { return c.classify(injected); })
        .def("classify_mode",
             [](const Classifier& c, const EventSequence& injected, Mode mode) {
                 return c.classify(injected, mode);
             })
        .def_property_readonly("order", &Classifier::order);
    m.def("classify", &classify, py::arg("injected"), py::arg("training"), py::arg("options"));

    py::class_<WorkloadTemplate>(m, "WorkloadTemplate")
        .def_property_readonly("name", [](const WorkloadTemplate& t) { return t.name; })
        .def("canonical_size", &WorkloadTemplate::canonical_size)
        .def("unique_pairs", &WorkloadTemplate::unique_pairs)
        .def("to_json", [](const WorkloadTemplate& t) { return t.to_json().dump(); });
    m.def("preset", &preset, py::arg("name"));
    m.def("preset_names", &preset_names);

    py::class_<FaultSpec>(m, "FaultSpec")
        .def(py::init<>())
        .def_readwrite("type", &FaultSpec::type)
        .def_readwrite("block", &FaultSpec::block)
        .def_readwrite("event", &FaultSpec::event)
        .def_readwrite("manifests", &FaultSpec::manifests)
        .def_readwrite("truncation_length", &FaultSpec::truncation_length)
        .def_readwrite("substitution_span", &FaultSpec::substitution_span)
        .def_readwrite("propagate", &FaultSpec::propagate)
        .def_readwrite("propagation_blocks", &FaultSpec::propagation_blocks)
        .def_readwrite("delay_us", &FaultSpec::delay_us)
        .def_readwrite("reorder_window", &FaultSpec::reorder_window);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("failure_manifested", &GroundTruth::failure_manifested)
        .def_readonly("background_positions", &GroundTruth::background_positions)
        .def_readonly("spurious", &GroundTruth::spurious)
        .def_readonly("missing", &GroundTruth::missing)
        .def("symbol_invariant", &GroundTruth::symbol_invariant)
        .def("to_json", [](const GroundTruth& t) { return t.to_json().dump(); });

    py::class_<GeneratedTrace>(m, "GeneratedTrace")
        .def_readonly("trace", &GeneratedTrace::trace)
        .def_readonly("truth", &GeneratedTrace::truth);

    m.def("generate_fault_free", &generate_fault_free, py::arg("template"), py::arg("seed"),
          py::arg("noise"), py::arg("table"), py::arg("trace_id") = "fault-free");
    m.def("generate_idle", &generate_idle, py::arg("template"), py::arg("seed"),
          py::arg("duration"), py::arg("table"), py::arg("trace_id") = "idle");
    m.def("inject_fault", &inject_fault, py::arg("template"), py::arg("fault"), py::arg("seed"),
          py::arg("noise"), py::arg("table"), py::arg("trace_id") = "fault-injected");
    m.def("make_fault_free_corpus", &make_fault_free_corpus, py::arg("template"), py::arg("count"),
          py::arg("seed"), py::arg("noise"), py::arg("table"));
    m.def("make_idle_corpus", &make_idle_corpus, py::arg("template"), py::arg("count"),
          py::arg("seed"), py::arg("duration"), py::arg("table"));
}
