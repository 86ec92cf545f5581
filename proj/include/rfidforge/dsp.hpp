#pragma once

#include "rfidforge/streams.hpp"
#include "rfidforge/trace.hpp"

#include <string>
#include <vector>

namespace rfidforge::dsp {

struct TuneReport {
    double v_lf_125 = 0.0;
    double v_lf_134 = 0.0;
    double v_lf_optimal_volts = 0.0;
    double v_lf_optimal_khz = 0.0;
    double v_hf_1356 = 0.0;
};

enum class AntennaBand { LF, HF, NONE };

struct VirtualAntennaLoad {
    AntennaBand band = AntennaBand::NONE;
    double coupling = 0.0;  // 0..1, fraction of voltage the tag steals
    double baseline_v_lf_125 = 0.0;
    double baseline_v_lf_134 = 0.0;
    double baseline_v_hf = 0.0;
};

enum class DetectedBand { LF, HF, UNKNOWN };

// Thomson equation, f_r = 1 / (2*pi*sqrt(L*C)).
double resonant_frequency(double inductance_henry, double capacitance_farad);

// Simulated antenna sweep. The loaded band's voltages scale by (1 - coupling);
// the other band sees a small leakage fraction of the same coupling (an LF
// tag parked on an HF antenna still steals a few percent). The LF optimal
// point is the peak of a resonance curve fitted through the two LF baselines,
// evaluated over the 12 MHz / (divisor + 1) sweep grid.
TuneReport hw_tune(const VirtualAntennaLoad& load);

DetectedBand detect_band(const TuneReport& no_tag, const TuneReport& with_tag,
                         double drop_threshold = 0.25);

// Dominant periodicity from zero-crossing interval statistics. Needs at
// least 16 full cycles; throws on DC or too-short input.
double estimate_carrier(const SampleTrace& trace);

// Windowed-sinc FIR (zero phase). Same length and rate; >= 20 dB down at
// twice the cutoff. The double-precision core is exposed separately since
// the uint8 path clips on the way out.
std::vector<double> lowpass_real(const std::vector<double>& x,
                                 double sample_rate_hz, double cutoff_hz);
SampleTrace lowpass(const SampleTrace& trace, double cutoff_hz);

// Rectified + carrier-period-averaged amplitude, one value per sample.
std::vector<double> envelope_curve(const SampleTrace& trace, double carrier_hz);

// Thresholded envelope as alternating level runs; durations in carrier
// cycles. A trace without amplitude structure comes back as a single run.
LevelStream envelope(const SampleTrace& trace, double carrier_hz);

// Two-class histogram split (Otsu). score is the fraction of total variance
// explained by the split, 0..1; unimodal data scores low. The class means
// let callers reject statistically "good" splits of physically flat data.
struct OtsuSplit {
    double threshold = 0.0;
    double score = 0.0;
    double mean_low = 0.0;
    double mean_high = 0.0;
};
OtsuSplit otsu_split(const std::vector<double>& v);

// Text block in the firmware's antenna-report layout.
std::string render_tune_report(const TuneReport& r);

}  // namespace rfidforge::dsp
