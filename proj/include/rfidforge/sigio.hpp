#pragma once

#include "rfidforge/linecode.hpp"
#include "rfidforge/streams.hpp"
#include "rfidforge/trace.hpp"

#include <optional>
#include <string>
#include <utility>

namespace rfidforge::sigio {

enum class Modulation { ASK, FSK };

struct SynthesisSpec {
    double carrier_hz = 125000.0;
    Modulation modulation = Modulation::ASK;
    std::optional<std::pair<int, int>> fsk_divisors;  // required iff FSK
    double ask_depth = 1.0;                           // 1.0 = on/off keying
    std::optional<double> snr_db;                     // absent = noiseless
    int samples_per_carrier_cycle = 32;

    void validate() const;
};

// Coding layer applied before modulation. The first three map through the
// linecode module; HID_PULSE is the f_c/8-f_c/10 pulse-count scheme handled
// by the hid module.
enum class SynthCoding { MANCHESTER, DBP, NRZ, HID_PULSE };

SampleTrace read_trace(const std::string& path);
void write_trace(const SampleTrace& trace, const std::string& path);

// Pure carrier burst, mostly for calibration tests.
SampleTrace synthesize_carrier(const SynthesisSpec& spec, int cycles);

// Full bits -> levels -> waveform chain. cycles_per_bit applies to the
// line-coded (ASK) path; FDX-B uses the default 32 carrier cycles per bit.
SampleTrace synthesize_bits(const BitStream& bits, const SynthesisSpec& spec,
                            SynthCoding coding, int cycles_per_bit = 32);

// Direct level-sequence synthesis (durations in carrier cycles).
SampleTrace synthesize_levels(const LevelStream& levels, const SynthesisSpec& spec);

// FSK pulse-run synthesis: each pulse is one full period of carrier/divisor.
SampleTrace synthesize_pulses(const PulseStream& pulses, const SynthesisSpec& spec);

// Additive white Gaussian noise at the requested SNR (relative to the signal
// power about ADC midscale), clipped to ADC range. Deterministic per seed.
// An infinite snr_db returns the trace unchanged.
SampleTrace add_noise(const SampleTrace& trace, double snr_db, uint64_t seed);

}  // namespace rfidforge::sigio
