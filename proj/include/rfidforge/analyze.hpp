#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rfidforge/demod.hpp"
#include "rfidforge/fdxb.hpp"
#include "rfidforge/hid.hpp"
#include "rfidforge/linecode.hpp"
#include "rfidforge/stdkb.hpp"
#include "rfidforge/trace.hpp"

namespace rfidforge::analyze {

// One pipeline stage outcome; the report is the ordered list of these plus
// whatever fields the stages managed to fill.
struct StageLog {
    std::string stage;    // operation that ran, e.g. "estimate_carrier"
    std::string outcome;  // what it concluded
    bool ok = true;
};

struct AnalysisOptions {
    // Markings on the tag body; identification by inspection ends the
    // analysis before any signal stage runs.
    std::optional<std::string> label;
    // FCC ID printed on the tag; same early exit through the registry.
    std::optional<std::string> fcc_id;
    std::vector<std::pair<int, int>> fsk_divisor_guesses{{8, 10}};
};

struct AnalysisReport {
    std::optional<stdkb::BandClass> band;
    std::optional<double> carrier_hz;
    demod::Modulation modulation = demod::Modulation::UNKNOWN;
    double modulation_confidence = 0.0;

    // Winning coding hypothesis: a line code, or the HID pulse-count scheme.
    std::optional<linecode::LineCodeId> line_code;
    bool hid_pulse_coding = false;

    std::vector<stdkb::StandardRecord> matched_standards;
    std::optional<hid::HidFrame> hid_frame;
    std::optional<fdxb::FdxbReadReport> fdxb_report;

    std::vector<StageLog> log;
    bool complete = false;
    std::string failure;  // first stage that stopped the pipeline, when any
};

// Band/carrier -> modulation -> coding trials -> standard match -> frame
// decode. Stage errors land in the report instead of escaping.
AnalysisReport analyze(const SampleTrace& trace,
                       const AnalysisOptions& opt = {});

std::string render_report(const AnalysisReport& r);

// CSV with header "index,value", one row per sample.
void export_plot_data(const SampleTrace& trace, const std::string& path);

}  // namespace rfidforge::analyze
