#pragma once

#include <string>

#include "tracelens/classifier.hpp"

namespace tracelens {

// Aligned two-column diff of the injected trace (left) against the selected
// reference (right). Line markers:
//   =   common event
//   +?  injected-only, cleared as non-anomalous
//   +!  injected-only, confirmed spurious
//   -?  reference-only, omission cleared as non-anomalous
//   -!  reference-only, confirmed missing
// Model-decided lines carry their probability.
std::string render_text(const ClassificationReport& report);

// Two-lane timeline (reference above, injected below) with anomalies
// highlighted; plain standalone SVG.
std::string render_svg(const ClassificationReport& report);

// format is one of "text", "json", "svg".
std::string render_report(const ClassificationReport& report, const std::string& format);

} // namespace tracelens
