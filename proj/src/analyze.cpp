#include "rfidforge/analyze.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rfidforge/dsp.hpp"

namespace rfidforge::analyze {

namespace {

void log_stage(AnalysisReport& r, const std::string& stage,
               const std::string& outcome, bool ok = true) {
    r.log.push_back({stage, outcome, ok});
}

std::string khz(double hz) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.1f kHz", hz / 1000.0);
    return buf;
}

stdkb::CodingId to_kb_coding(linecode::LineCodeId c) {
    switch (c) {
        case linecode::LineCodeId::MANCHESTER:
            return stdkb::CodingId::MANCHESTER;
        case linecode::LineCodeId::DBP:
            return stdkb::CodingId::DBP;
        case linecode::LineCodeId::NRZ:
            return stdkb::CodingId::NRZ;
    }
    return stdkb::CodingId::NONE;
}

std::string standard_names(const std::vector<stdkb::StandardRecord>& recs) {
    std::string out;
    std::string last;
    for (const auto& rec : recs) {
        if (rec.standard == last)
            continue;
        if (!out.empty())
            out += ", ";
        out += rec.standard;
        last = rec.standard;
    }
    return out;
}

// Shortest typical envelope run, in carrier cycles: the half-bit (or bit,
// for NRZ) quantum everything else is a multiple of.
double base_run(const LevelStream& env) {
    double m = 0.0;
    for (double d : env.durations)
        if (d > 0.5 && (m == 0.0 || d < m))
            m = d;
    if (m == 0.0)
        return 0.0;
    double sum = 0.0;
    int n = 0;
    for (double d : env.durations)
        if (d <= 1.5 * m) {
            sum += d;
            ++n;
        }
    return sum / n;
}

struct CodingTrial {
    linecode::LineCodeId code;
    double bit_period;
    bool complemented;
    int score = 0;
    std::optional<fdxb::FdxbReadReport> fdxb;
};

// A hypothesis scores by protocol-header hits: one point for a located
// frame header, one more when its checksum closes.
void score_trial(CodingTrial& t, const LevelStream& env) {
    BitStream bits;
    try {
        bits = linecode::decode(env, t.code, t.bit_period);
    } catch (const linecode::SyncError&) {
        return;
    }
    if (t.complemented)
        for (auto& b : bits.bits)
            b ^= 1;
    try {
        fdxb::FdxbReadReport rep = fdxb::decode_fdxb(bits);
        t.score = 1 + (rep.crc_ok ? 1 : 0);
        t.fdxb = rep;
    } catch (const std::exception&) {
    }
}

}  // namespace

AnalysisReport analyze(const SampleTrace& trace, const AnalysisOptions& opt) {
    AnalysisReport r;

    if (opt.label) {
        log_stage(r, "visual_inspection",
                  "tag identified from its markings: " + *opt.label);
        r.complete = true;
        return r;
    }
    if (opt.fcc_id) {
        try {
            stdkb::FccId id = stdkb::parse_fcc_id(*opt.fcc_id);
            log_stage(r, "fcc_id_lookup", "grantee " + id.grantee_code +
                                              ", product " + id.product_code);
            r.complete = true;
        } catch (const std::exception& e) {
            log_stage(r, "fcc_id_lookup", e.what(), false);
            r.failure = "fcc_id_lookup";
        }
        return r;
    }

    try {
        trace.validate();
    } catch (const std::exception& e) {
        log_stage(r, "trace_validate", e.what(), false);
        r.failure = "trace_validate";
        return r;
    }

    double carrier = 0.0;
    try {
        carrier = dsp::estimate_carrier(trace);
    } catch (const std::exception& e) {
        log_stage(r, "estimate_carrier", e.what(), false);
        r.failure = "estimate_carrier";
        return r;
    }
    r.carrier_hz = carrier;
    r.band = stdkb::classify_band(carrier);
    log_stage(r, "estimate_carrier",
              khz(carrier) + " -> band " + stdkb::to_string(*r.band));

    demod::ModulationGuess mg = demod::detect_modulation(trace, carrier);
    r.modulation = mg.kind;
    r.modulation_confidence = mg.confidence;
    if (mg.kind == demod::Modulation::UNKNOWN) {
        log_stage(r, "detect_modulation", "UNKNOWN", false);
        r.failure = "detect_modulation";
        return r;
    }
    char conf[64];
    snprintf(conf, sizeof conf, "%s (confidence %.2f)",
             mg.kind == demod::Modulation::ASK ? "ASK" : "FSK", mg.confidence);
    log_stage(r, "detect_modulation", conf);

    if (mg.kind == demod::Modulation::FSK) {
        // The trace oscillates at the divided-down rates, so the crossing
        // estimate above is f_c/divisor; recover the carrier per guess.
        for (auto div : opt.fsk_divisor_guesses) {
            double fc = demod::infer_fsk_carrier(trace, div);
            if (fc <= 0.0)
                continue;
            demod::FskOutcome fo = demod::fsk_demod(trace, fc, div);
            if (fo.status != demod::DemodStatus::OK)
                continue;
            try {
                hid::HidDecodeDetail d = hid::decode_hid_detail(fo.pulses);
                r.hid_pulse_coding = true;
                r.hid_frame = d.frame;
                r.carrier_hz = fc;
                r.band = stdkb::classify_band(fc);
                char line[120];
                snprintf(line, sizeof line,
                         "pulse-count symbols at f_c/%d and f_c/%d, carrier %s "
                         "-> band %s",
                         div.first, div.second, khz(fc).c_str(),
                         stdkb::to_string(*r.band).c_str());
                log_stage(r, "coding_trials", line);
                std::string id = hid::render_tag_id(d.frame);
                while (!id.empty() && id.back() == '\n')
                    id.pop_back();
                log_stage(r, "decode_hid", id);
                r.matched_standards = stdkb::identify_standard(
                    fc, stdkb::ModulationId::FSK, stdkb::CodingId::NONE);
                log_stage(r, "identify_standard",
                          r.matched_standards.empty()
                              ? "no table row: proprietary HID Prox format"
                              : standard_names(r.matched_standards));
                r.complete = true;
                return r;
            } catch (const std::exception&) {
            }
        }
        log_stage(r, "coding_trials",
                  "no FSK divisor pair produced a recognizable frame", false);
        r.failure = "coding_trials";
        return r;
    }

    // ASK: run every line-code hypothesis over the envelope and keep the
    // best-scoring reading.
    LevelStream env = dsp::envelope(trace, carrier);
    double base = base_run(env);
    if (base <= 0.0) {
        log_stage(r, "coding_trials", "no amplitude runs to decode", false);
        r.failure = "coding_trials";
        return r;
    }

    std::vector<CodingTrial> trials;
    for (linecode::LineCodeId code :
         {linecode::LineCodeId::MANCHESTER, linecode::LineCodeId::DBP,
          linecode::LineCodeId::NRZ}) {
        std::vector<double> periods = code == linecode::LineCodeId::NRZ
                                          ? std::vector<double>{base, 2 * base}
                                          : std::vector<double>{2 * base, base};
        for (double p : periods)
            for (bool comp : {false, true})
                trials.push_back({code, p, comp});
    }
    for (CodingTrial& t : trials)
        score_trial(t, env);

    auto best = std::max_element(
        trials.begin(), trials.end(),
        [](const CodingTrial& a, const CodingTrial& b) {
            return a.score < b.score;
        });
    if (best == trials.end() || best->score == 0) {
        log_stage(r, "coding_trials",
                  "no line code produced a recognizable frame", false);
        r.failure = "coding_trials";
        return r;
    }

    r.line_code = best->code;
    r.fdxb_report = best->fdxb;
    stdkb::CodingId kb_coding = to_kb_coding(best->code);
    char line[96];
    snprintf(line, sizeof line, "%s at %.0f carrier cycles per bit%s",
             stdkb::to_string(kb_coding).c_str(), best->bit_period,
             best->complemented ? " (inverted polarity)" : "");
    log_stage(r, "coding_trials", line);

    r.matched_standards =
        stdkb::identify_standard(carrier, stdkb::ModulationId::ASK, kb_coding);
    log_stage(r, "identify_standard",
              r.matched_standards.empty() ? "no table row matched"
                                          : standard_names(r.matched_standards),
              !r.matched_standards.empty());

    log_stage(r, "decode_fdxb",
              best->fdxb->crc_ok ? "frame decoded, CRC ok"
                                 : "frame decoded, CRC mismatch");
    r.complete = true;
    return r;
}

std::string render_report(const AnalysisReport& r) {
    std::string out;
    out += "analysis " + std::string(r.complete ? "complete" : "stopped") +
           (r.failure.empty() ? "" : " at " + r.failure) + "\n";
    if (r.band)
        out += "band: " + stdkb::to_string(*r.band) + "\n";
    if (r.carrier_hz) {
        char buf[48];
        snprintf(buf, sizeof buf, "carrier: %.1f Hz\n", *r.carrier_hz);
        out += buf;
    }
    if (r.modulation != demod::Modulation::UNKNOWN) {
        char buf[64];
        snprintf(buf, sizeof buf, "modulation: %s (confidence %.2f)\n",
                 r.modulation == demod::Modulation::ASK ? "ASK" : "FSK",
                 r.modulation_confidence);
        out += buf;
    }
    if (r.line_code)
        out += "coding: " + stdkb::to_string(to_kb_coding(*r.line_code)) + "\n";
    if (r.hid_pulse_coding)
        out += "coding: FSK pulse count\n";
    if (!r.matched_standards.empty())
        out += "standards:\n" + stdkb::render_records(r.matched_standards);
    if (r.hid_frame)
        out += hid::render_tag_id(*r.hid_frame);
    if (r.fdxb_report)
        out += fdxb::render_report(*r.fdxb_report);
    out += "steps:\n";
    for (const StageLog& s : r.log)
        out += "  " + s.stage + ": " + (s.ok ? "" : "FAILED: ") + s.outcome +
               "\n";
    return out;
}

void export_plot_data(const SampleTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write plot data: " + path);
    out << "index,value\n";
    for (size_t i = 0; i < trace.samples.size(); ++i)
        out << i << ',' << (int)trace.samples[i] << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

}  // namespace rfidforge::analyze
