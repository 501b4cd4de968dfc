#include "tracelens/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tracelens/errors.hpp"

namespace tracelens {

namespace {

std::string event_text(const LabeledEvent& ev) {
    std::string out = ev.sender + " -> " + ev.service + " [" + std::to_string(ev.position) + "]";
    if (ev.probability) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " (p=%.4f)", *ev.probability);
        out += buf;
    }
    return out;
}

const char* marker_for(const LabeledEvent& ev) {
    if (ev.origin == EventOrigin::Injected) {
        switch (ev.label) {
            case EventLabel::Common: return "= ";
            case EventLabel::Spurious: return "+!";
            default: return "+?";
        }
    }
    return ev.label == EventLabel::Missing ? "-!" : "-?";
}

} // namespace

std::string render_text(const ClassificationReport& report) {
    std::ostringstream out;
    out << "experiment " << report.experiment_id << "  mode " << mode_name(report.mode)
        << "  reference " << report.reference_index << "  order " << report.order << "  nlcs ";
    char nbuf[32];
    std::snprintf(nbuf, sizeof(nbuf), "%.4f", report.nlcs);
    out << nbuf << "\n";
    out << "events: common " << report.summary.common << "  spurious " << report.summary.spurious
        << "  missing " << report.summary.missing << "  non-anomalous "
        << report.summary.non_anomalous << "  omitted-non-anomalous "
        << report.summary.omitted_non_anomalous << "\n";

    // Interleave: reference-only events are emitted before the injected event
    // whose aligned reference position passes them (standard diff order).
    std::size_t width = 0;
    for (const auto& ev : report.injected_events) width = std::max(width, event_text(ev).size());

    auto ref_it = report.reference_only_events.begin();
    const auto ref_end = report.reference_only_events.end();
    auto emit_ref_before = [&](std::int32_t ref_position) {
        while (ref_it != ref_end && ref_it->position < ref_position) {
            out << marker_for(*ref_it) << ' ' << std::string(width, ' ') << " | "
                << event_text(*ref_it) << "\n";
            ++ref_it;
        }
    };

    for (const auto& ev : report.injected_events) {
        if (ev.label == EventLabel::Common && ev.ref_position) {
            emit_ref_before(*ev.ref_position);
            std::string left = event_text(ev);
            left.resize(width, ' ');
            out << marker_for(ev) << ' ' << left << " | " << event_text(ev) << "\n";
        } else {
            std::string left = event_text(ev);
            left.resize(width, ' ');
            out << marker_for(ev) << ' ' << left << " |\n";
        }
    }
    emit_ref_before(std::numeric_limits<std::int32_t>::max());
    return out.str();
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* fill_for(const LabeledEvent& ev) {
    switch (ev.label) {
        case EventLabel::Common: return "#9aa0a6";
        case EventLabel::Spurious: return "#d93025";
        case EventLabel::Missing: return "#e8710a";
        case EventLabel::NonAnomalous: return "#f9ab00";
    }
    return "#9aa0a6";
}

} // namespace

std::string render_svg(const ClassificationReport& report) {
    std::int64_t min_start = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_end = 0;
    auto widen = [&](const LabeledEvent& ev) {
        min_start = std::min(min_start, ev.start_us);
        max_end = std::max(max_end, ev.start_us + std::max<std::int64_t>(ev.duration_us, 1));
    };
    for (const auto& ev : report.injected_events) widen(ev);
    for (const auto& ev : report.reference_only_events) widen(ev);
    if (max_end <= min_start) {
        min_start = 0;
        max_end = 1;
    }

    const double plot_width = 1100.0;
    const double left_margin = 80.0;
    const double span = static_cast<double>(max_end - min_start);
    auto x_of = [&](std::int64_t t) {
        return left_margin + plot_width * static_cast<double>(t - min_start) / span;
    };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1200\" height=\"240\" "
           "viewBox=\"0 0 1200 240\">\n"
        << "<title>" << xml_escape(report.experiment_id) << " (" << mode_name(report.mode)
        << ")</title>\n"
        << "<text x=\"10\" y=\"70\" font-size=\"12\">reference</text>\n"
        << "<text x=\"10\" y=\"160\" font-size=\"12\">injected</text>\n";

    auto emit_rect = [&](const LabeledEvent& ev, double y) {
        const double x = x_of(ev.start_us);
        const double w =
            std::max(2.0, x_of(ev.start_us + std::max<std::int64_t>(ev.duration_us, 1)) - x);
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
            << "\" height=\"30\" fill=\"" << fill_for(ev) << "\"><title>"
            << xml_escape(ev.sender + " -> " + ev.service) << " [" << label_name(ev.label) << "]";
        if (ev.probability) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), " p=%.4f", *ev.probability);
            out << buf;
        }
        out << "</title></rect>\n";
    };

    // Reference lane: common events (via their aligned position) plus the
    // reference-only ones.
    for (const auto& ev : report.injected_events) {
        if (ev.label == EventLabel::Common) emit_rect(ev, 50.0);
    }
    for (const auto& ev : report.reference_only_events) emit_rect(ev, 50.0);
    for (const auto& ev : report.injected_events) emit_rect(ev, 140.0);

    out << "</svg>\n";
    return out.str();
}

std::string render_report(const ClassificationReport& report, const std::string& format) {
    if (format == "text") return render_text(report);
    if (format == "json") return report.to_json().dump(2) + "\n";
    if (format == "svg") return render_svg(report);
    throw ConfigError("unknown report format '" + format + "' (expected text, json, or svg)");
}

} // namespace tracelens
