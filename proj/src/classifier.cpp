#include "tracelens/classifier.hpp"

#include <algorithm>

#include "tracelens/errors.hpp"
#include "tracelens/log.hpp"

namespace tracelens {

const char* mode_name(Mode mode) {
    return mode == Mode::LcsOnly ? "lcs" : "vmm";
}

Mode mode_from_name(const std::string& name) {
    if (name == "lcs") return Mode::LcsOnly;
    if (name == "vmm") return Mode::LcsWithVmm;
    throw ConfigError("unknown mode '" + name + "' (expected \"lcs\" or \"vmm\")");
}

void validate(const Thresholds& t) {
    if (t.eps_spurious < 0.0 || t.eps_spurious > 1.0 || t.eps_missing < 0.0 || t.eps_missing > 1.0) {
        throw ConfigError("thresholds must lie in [0, 1]");
    }
    if (t.eps_spurious > t.eps_missing) {
        log::warn("eps_spurious > eps_missing; the same difference may be both confirmed and cleared");
    }
}

const char* label_name(EventLabel label) {
    switch (label) {
        case EventLabel::Common: return "common";
        case EventLabel::Spurious: return "spurious";
        case EventLabel::Missing: return "missing";
        case EventLabel::NonAnomalous: return "non_anomalous";
    }
    return "?";
}

namespace {

EventLabel label_from_name(const std::string& name) {
    if (name == "common") return EventLabel::Common;
    if (name == "spurious") return EventLabel::Spurious;
    if (name == "missing") return EventLabel::Missing;
    if (name == "non_anomalous") return EventLabel::NonAnomalous;
    throw ParseError("unknown event label '" + name + "'");
}

// Last `order` predecessors of `pos`, optionally restricted to positions
// marked in `keep`.
std::vector<Symbol> context_window(const std::vector<Symbol>& symbols, std::size_t pos,
                                   std::size_t order, const std::vector<char>* keep) {
    std::vector<Symbol> out;
    out.reserve(std::min(pos, order));
    for (std::size_t q = pos; q > 0 && out.size() < order;) {
        --q;
        if (keep != nullptr && !(*keep)[q]) continue;
        out.push_back(symbols[q]);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

LabeledEvent make_event(EventOrigin origin, std::int32_t position, const EventSequence& seq) {
    LabeledEvent ev;
    ev.origin = origin;
    ev.position = position;
    ev.symbol = seq.symbols[static_cast<std::size_t>(position)];
    const Event& src = seq.events[static_cast<std::size_t>(position)];
    ev.sender = src.sender;
    ev.service = src.service;
    ev.start_us = src.start_us;
    ev.duration_us = src.duration_us;
    return ev;
}

} // namespace

Classifier::Classifier(std::vector<EventSequence> training, ClassifyOptions options)
    : training_(std::move(training)), opts_(options) {
    if (training_.size() < 2) {
        throw ConfigError("classification needs at least two training traces "
                          "(one reference, at least one for the model); got " +
                          std::to_string(training_.size()));
    }
    validate(opts_.thresholds);
    if (training_.size() == 2) {
        log::warn("only two training traces: the model trains on a single trace and "
                  "degenerates toward the alignment-only baseline");
    }

    if (opts_.order > 0) {
        order_ = opts_.order; // explicit override, taken verbatim
    } else {
        const OrderEstimate est = estimate_order(training_);
        order_ = std::min(est.order, opts_.order_cap);
    }

    alphabet_ = opts_.alphabet_size;
    if (alphabet_ == 0) {
        Symbol max_sym = 0;
        for (const auto& seq : training_) {
            for (Symbol s : seq.symbols) max_sym = std::max(max_sym, s);
        }
        alphabet_ = max_sym + 1;
    }
}

const PpmModel& Classifier::model_excluding(std::size_t reference_index) const {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = model_cache_.find(reference_index);
    if (it != model_cache_.end()) return it->second;

    std::vector<std::vector<Symbol>> sequences;
    sequences.reserve(training_.size() - 1);
    for (std::size_t i = 0; i < training_.size(); ++i) {
        if (i == reference_index) continue;
        sequences.push_back(training_[i].symbols);
    }
    PpmModel model = PpmModel::train(sequences, order_, alphabet_, opts_.ppm_exclusion);
    return model_cache_.emplace(reference_index, std::move(model)).first->second;
}

void Classifier::warm_models() const {
    for (std::size_t i = 0; i < training_.size(); ++i) model_excluding(i);
}

std::vector<ClassificationReport> Classifier::classify_modes(const EventSequence& injected,
                                                             const std::vector<Mode>& modes) const {
    for (Symbol s : injected.symbols) {
        if (s >= alphabet_) {
            throw DataError("injected trace contains symbol " + std::to_string(s) +
                            " outside the configured alphabet (" + std::to_string(alphabet_) +
                            "); size the alphabet from the shared symbol table");
        }
    }

    const ReferenceSelection sel = select_reference(injected, training_);
    const EventSequence& reference = training_[sel.index];
    const AlignmentResult& align = sel.alignment;

    const bool needs_model =
        std::any_of(modes.begin(), modes.end(), [](Mode m) { return m == Mode::LcsWithVmm; });
    const PpmModel* model = needs_model ? &model_excluding(sel.index) : nullptr;

    // Masks of LCS-matched positions, used when contexts are restricted to
    // common predecessors.
    std::vector<char> injected_matched(injected.size(), 0);
    std::vector<char> reference_matched(reference.size(), 0);
    for (const auto& [i, j] : align.matches) {
        injected_matched[static_cast<std::size_t>(i)] = 1;
        reference_matched[static_cast<std::size_t>(j)] = 1;
    }
    const std::vector<char>* inj_keep = opts_.common_context_only ? &injected_matched : nullptr;
    const std::vector<char>* ref_keep = opts_.common_context_only ? &reference_matched : nullptr;

    std::vector<ClassificationReport> reports;
    reports.reserve(modes.size());
    for (const Mode mode : modes) {
        ClassificationReport report;
        report.experiment_id = injected.trace_id;
        report.mode = mode;
        report.reference_index = sel.index;
        report.order = order_;
        report.thresholds = opts_.thresholds;
        report.nlcs = align.nlcs;
        report.injected_events.reserve(injected.size());

        std::size_t next_match = 0;
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(injected.size()); ++i) {
            LabeledEvent ev = make_event(EventOrigin::Injected, i, injected);
            if (injected_matched[static_cast<std::size_t>(i)]) {
                ev.label = EventLabel::Common;
                while (align.matches[next_match].first != i) ++next_match;
                ev.ref_position = align.matches[next_match].second;
                ++report.summary.common;
            } else if (mode == Mode::LcsOnly) {
                ev.label = EventLabel::Spurious;
                ++report.summary.spurious;
            } else {
                ev.context = context_window(injected.symbols, static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(order_), inj_keep);
                const double p = model->predict(ev.context, ev.symbol);
                ev.probability = p;
                if (p < opts_.thresholds.eps_spurious) {
                    ev.label = EventLabel::Spurious;
                    ++report.summary.spurious;
                } else {
                    ev.label = EventLabel::NonAnomalous;
                    ++report.summary.non_anomalous;
                }
            }
            report.injected_events.push_back(std::move(ev));
        }

        report.reference_only_events.reserve(align.only_in_b.size());
        for (const std::int32_t j : align.only_in_b) {
            LabeledEvent ev = make_event(EventOrigin::Reference, j, reference);
            if (mode == Mode::LcsOnly) {
                ev.label = EventLabel::Missing;
                ++report.summary.missing;
            } else {
                ev.context = context_window(reference.symbols, static_cast<std::size_t>(j),
                                            static_cast<std::size_t>(order_), ref_keep);
                const double p = model->predict(ev.context, ev.symbol);
                ev.probability = p;
                if (p > opts_.thresholds.eps_missing) {
                    ev.label = EventLabel::Missing;
                    ++report.summary.missing;
                } else {
                    ev.label = EventLabel::NonAnomalous;
                    ++report.summary.omitted_non_anomalous;
                }
            }
            report.reference_only_events.push_back(std::move(ev));
        }

        reports.push_back(std::move(report));
    }
    return reports;
}

ClassificationReport Classifier::classify(const EventSequence& injected, Mode mode) const {
    return classify_modes(injected, {mode}).front();
}

ClassificationReport Classifier::classify(const EventSequence& injected) const {
    return classify(injected, opts_.mode);
}

ClassificationReport classify(const EventSequence& injected,
                              const std::vector<EventSequence>& training,
                              const ClassifyOptions& options) {
    Classifier classifier(training, options);
    return classifier.classify(injected);
}

namespace {

nlohmann::json event_to_json(const LabeledEvent& ev) {
    nlohmann::json j{
        {"origin", ev.origin == EventOrigin::Injected ? "injected" : "reference"},
        {"position", ev.position},
        {"symbol", ev.symbol},
        {"sender", ev.sender},
        {"service", ev.service},
        {"start_us", ev.start_us},
        {"duration_us", ev.duration_us},
        {"label", label_name(ev.label)},
    };
    if (ev.probability) {
        j["probability"] = *ev.probability;
        j["context"] = ev.context;
    }
    if (ev.ref_position) j["ref_position"] = *ev.ref_position;
    return j;
}

LabeledEvent event_from_json(const nlohmann::json& j) {
    LabeledEvent ev;
    ev.origin = j.at("origin").get<std::string>() == "injected" ? EventOrigin::Injected
                                                                : EventOrigin::Reference;
    ev.position = j.at("position").get<std::int32_t>();
    ev.symbol = j.at("symbol").get<Symbol>();
    ev.sender = j.at("sender").get<std::string>();
    ev.service = j.at("service").get<std::string>();
    ev.start_us = j.at("start_us").get<std::int64_t>();
    ev.duration_us = j.at("duration_us").get<std::int64_t>();
    ev.label = label_from_name(j.at("label").get<std::string>());
    if (j.contains("probability")) {
        ev.probability = j.at("probability").get<double>();
        ev.context = j.at("context").get<std::vector<Symbol>>();
    }
    if (j.contains("ref_position")) ev.ref_position = j.at("ref_position").get<std::int32_t>();
    return ev;
}

} // namespace

nlohmann::json ClassificationReport::to_json() const {
    nlohmann::json injected = nlohmann::json::array();
    for (const auto& ev : injected_events) injected.push_back(event_to_json(ev));
    nlohmann::json reference = nlohmann::json::array();
    for (const auto& ev : reference_only_events) reference.push_back(event_to_json(ev));
    return nlohmann::json{
        {"format", "tracelens-report"},
        {"version", 1},
        {"experiment_id", experiment_id},
        {"mode", mode_name(mode)},
        {"reference_index", reference_index},
        {"order", order},
        {"thresholds", {{"eps_spurious", thresholds.eps_spurious}, {"eps_missing", thresholds.eps_missing}}},
        {"nlcs", nlcs},
        {"injected_events", std::move(injected)},
        {"reference_only_events", std::move(reference)},
        {"summary",
         {{"common", summary.common},
          {"spurious", summary.spurious},
          {"missing", summary.missing},
          {"non_anomalous", summary.non_anomalous},
          {"omitted_non_anomalous", summary.omitted_non_anomalous}}},
    };
}

ClassificationReport ClassificationReport::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "tracelens-report") {
        throw ParseError("report file: missing tracelens-report format marker");
    }
    ClassificationReport report;
    report.experiment_id = j.at("experiment_id").get<std::string>();
    report.mode = mode_from_name(j.at("mode").get<std::string>());
    report.reference_index = j.at("reference_index").get<std::size_t>();
    report.order = j.at("order").get<int>();
    report.thresholds.eps_spurious = j.at("thresholds").at("eps_spurious").get<double>();
    report.thresholds.eps_missing = j.at("thresholds").at("eps_missing").get<double>();
    report.nlcs = j.at("nlcs").get<double>();
    for (const auto& ev : j.at("injected_events")) report.injected_events.push_back(event_from_json(ev));
    for (const auto& ev : j.at("reference_only_events")) {
        report.reference_only_events.push_back(event_from_json(ev));
    }
    const auto& s = j.at("summary");
    report.summary.common = s.at("common").get<int>();
    report.summary.spurious = s.at("spurious").get<int>();
    report.summary.missing = s.at("missing").get<int>();
    report.summary.non_anomalous = s.at("non_anomalous").get<int>();
    report.summary.omitted_non_anomalous = s.at("omitted_non_anomalous").get<int>();
    return report;
}

} // namespace tracelens
