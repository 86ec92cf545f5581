#include "rfidforge/sigio.hpp"

#include "rfidforge/hid.hpp"
#include "rfidforge/linecode.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rfidforge::sigio {

namespace {

constexpr uint64_t kSynthNoiseSeed = 0x52464944;  // fixed seed for SynthesisSpec noise

double sample_rate(const SynthesisSpec& spec) {
    return spec.carrier_hz * spec.samples_per_carrier_cycle;
}

SampleTrace blank_trace(const SynthesisSpec& spec, size_t n, std::string label) {
    SampleTrace t;
    t.sample_rate_hz = sample_rate(spec);
    t.adc_bits = 8;
    t.samples.assign(n, 0);
    t.label = std::move(label);
    return t;
}

uint8_t quantize(double v) {
    return (uint8_t)std::clamp(std::lround(v), 0L, 255L);
}

SampleTrace maybe_noise(SampleTrace t, const SynthesisSpec& spec) {
    if (spec.snr_db)
        return add_noise(t, *spec.snr_db, kSynthNoiseSeed);
    return t;
}

}  // namespace

void SynthesisSpec::validate() const {
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("synthesis: carrier_hz must be positive");
    if (samples_per_carrier_cycle < 4)
        throw std::invalid_argument("synthesis: need >= 4 samples per carrier cycle");
    if (ask_depth <= 0.0 || ask_depth > 1.0)
        throw std::invalid_argument("synthesis: ask_depth must be in (0, 1]");
    if (modulation == Modulation::FSK) {
        if (!fsk_divisors)
            throw std::invalid_argument("synthesis: FSK requires fsk_divisors");
        auto [a, b] = *fsk_divisors;
        if (a < 2 || b < 2 || a == b)
            throw std::invalid_argument("synthesis: FSK divisors must be distinct and >= 2");
    } else if (fsk_divisors) {
        throw std::invalid_argument("synthesis: fsk_divisors only apply to FSK");
    }
}

void write_trace(const SampleTrace& trace, const std::string& path) {
    trace.validate();
    std::string label_json = nlohmann::json(trace.label).dump();
    char header[256];
    std::snprintf(header, sizeof header,
                  "RFIDTRACE v1 {\"sample_rate_hz\":%lld,\"adc_bits\":%d,"
                  "\"sample_count\":%zu,\"label\":",
                  (long long)std::llround(trace.sample_rate_hz), trace.adc_bits,
                  trace.samples.size());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("write_trace: cannot open " + path);
    f << header << label_json << "}\n";
    f.write((const char*)trace.samples.data(), (std::streamsize)trace.samples.size());
    if (!f)
        throw std::runtime_error("write_trace: short write to " + path);
}

SampleTrace read_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("read_trace: cannot open " + path);
    std::string header;
    if (!std::getline(f, header))
        throw std::runtime_error("read_trace: missing header");
    const std::string magic = "RFIDTRACE v1 ";
    if (header.rfind(magic, 0) != 0)
        throw std::runtime_error("read_trace: bad magic");

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header.substr(magic.size()));
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("read_trace: malformed header");
    }

    SampleTrace t;
    t.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    t.adc_bits = j.at("adc_bits").get<int>();
    t.label = j.at("label").get<std::string>();
    size_t count = j.at("sample_count").get<size_t>();

    t.samples.resize(count);
    f.read((char*)t.samples.data(), (std::streamsize)count);
    if ((size_t)f.gcount() != count)
        throw std::runtime_error("read_trace: truncated sample data");
    if (f.peek() != std::ifstream::traits_type::eof())
        throw std::runtime_error("read_trace: trailing bytes after sample data");
    t.validate();
    return t;
}

SampleTrace synthesize_carrier(const SynthesisSpec& spec, int cycles) {
    spec.validate();
    if (cycles <= 0)
        throw std::invalid_argument("synthesize_carrier: cycles must be positive");
    int spc = spec.samples_per_carrier_cycle;
    SampleTrace t = blank_trace(spec, (size_t)cycles * spc, "carrier");
    for (size_t n = 0; n < t.samples.size(); ++n)
        t.samples[n] = quantize(
            127.5 + 127.0 * std::sin(2.0 * std::numbers::pi * (double)n / spc));
    return maybe_noise(std::move(t), spec);
}

SampleTrace synthesize_levels(const LevelStream& levels, const SynthesisSpec& spec) {
    spec.validate();
    if (spec.modulation != Modulation::ASK)
        throw std::invalid_argument("synthesize_levels: level streams are ASK");
    if (levels.levels.empty())
        throw std::invalid_argument("synthesize_levels: empty stream");

    int spc = spec.samples_per_carrier_cycle;
    double total_cycles = 0.0;
    for (double d : levels.durations)
        total_cycles += d;
    size_t n_total = (size_t)std::llround(total_cycles * spc);
    SampleTrace t = blank_trace(spec, n_total, "ask");

    double cum = 0.0;
    size_t s0 = 0;
    for (size_t i = 0; i < levels.levels.size(); ++i) {
        cum += levels.durations[i];
        size_t s1 = (size_t)std::llround(cum * spc);
        double amp = levels.levels[i] == Level::HIGH
                         ? 127.0
                         : 127.0 * (1.0 - spec.ask_depth);
        for (size_t n = s0; n < s1 && n < n_total; ++n)
            t.samples[n] = quantize(
                127.5 + amp * std::sin(2.0 * std::numbers::pi * (double)n / spc));
        s0 = s1;
    }
    return maybe_noise(std::move(t), spec);
}

SampleTrace synthesize_pulses(const PulseStream& pulses, const SynthesisSpec& spec) {
    spec.validate();
    if (spec.modulation != Modulation::FSK)
        throw std::invalid_argument("synthesize_pulses: pulse streams are FSK");
    if (pulses.pulse_classes.size() != pulses.run_lengths.size())
        throw std::invalid_argument("synthesize_pulses: run-length arrays disagree");
    if (pulses.pulse_classes.empty())
        throw std::invalid_argument("synthesize_pulses: empty stream");

    auto [da, db] = *spec.fsk_divisors;
    int d_fast = std::min(da, db), d_slow = std::max(da, db);
    int spc = spec.samples_per_carrier_cycle;

    size_t n_total = 0;
    for (size_t i = 0; i < pulses.run_lengths.size(); ++i) {
        if (pulses.run_lengths[i] <= 0)
            throw std::invalid_argument("synthesize_pulses: run lengths must be positive");
        int d = pulses.pulse_classes[i] == PulseClass::FAST ? d_fast : d_slow;
        n_total += (size_t)pulses.run_lengths[i] * d * spc;
    }

    // Each pulse starts at its minimum (phase -pi/2): the waveform stays
    // continuous across pulse boundaries and every pulse contains one rising
    // midscale crossing, so a crossing demodulator loses only the last pulse
    // of the stream (the tolerance decode_hid already grants).
    SampleTrace t = blank_trace(spec, n_total, "fsk");
    size_t n = 0;
    for (size_t i = 0; i < pulses.pulse_classes.size(); ++i) {
        int d = pulses.pulse_classes[i] == PulseClass::FAST ? d_fast : d_slow;
        size_t period = (size_t)d * spc;
        for (int k = 0; k < pulses.run_lengths[i]; ++k)
            for (size_t j = 0; j < period; ++j, ++n)
                t.samples[n] = quantize(
                    127.5 -
                    127.0 * std::cos(2.0 * std::numbers::pi * (double)j / period));
    }
    return maybe_noise(std::move(t), spec);
}

SampleTrace synthesize_bits(const BitStream& bits, const SynthesisSpec& spec,
                            SynthCoding coding, int cycles_per_bit) {
    spec.validate();
    if (bits.bits.empty())
        throw std::invalid_argument("synthesize_bits: empty bit stream");
    if (cycles_per_bit < 1)
        throw std::invalid_argument("synthesize_bits: cycles_per_bit must be positive");

    if (coding == SynthCoding::HID_PULSE) {
        if (spec.modulation != Modulation::FSK)
            throw std::invalid_argument("synthesize_bits: HID_PULSE requires FSK");
        return synthesize_pulses(hid::frame_pulses(bits), spec);
    }

    if (spec.modulation != Modulation::ASK)
        throw std::invalid_argument("synthesize_bits: line codes ride on ASK");
    linecode::LineCodeId code;
    switch (coding) {
        case SynthCoding::MANCHESTER: code = linecode::LineCodeId::MANCHESTER; break;
        case SynthCoding::DBP: code = linecode::LineCodeId::DBP; break;
        default: code = linecode::LineCodeId::NRZ; break;
    }
    LevelStream levels = linecode::encode(bits, code);
    for (double& d : levels.durations)
        d *= cycles_per_bit;
    return synthesize_levels(levels, spec);
}

SampleTrace add_noise(const SampleTrace& trace, double snr_db, uint64_t seed) {
    trace.validate();
    if (std::isinf(snr_db) && snr_db > 0)
        return trace;
    if (std::isnan(snr_db))
        throw std::invalid_argument("add_noise: snr_db is NaN");

    double mid = trace.max_value() / 2.0;
    double p_sig = 0.0;
    for (uint8_t s : trace.samples) {
        double d = s - mid;
        p_sig += d * d;
    }
    p_sig /= (double)trace.samples.size();
    double sigma = std::sqrt(p_sig / std::pow(10.0, snr_db / 10.0));

    // Box-Muller on a fixed-width engine keeps output identical across
    // platforms; std::normal_distribution does not guarantee that.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
        return (double)(rng() >> 11) * 0x1.0p-53;
    };
    SampleTrace out = trace;
    long maxv = trace.max_value();
    for (size_t i = 0; i < out.samples.size(); ++i) {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
        long v = std::lround(trace.samples[i] + sigma * z);
        out.samples[i] = (uint8_t)std::clamp(v, 0L, maxv);
    }
    return out;
}

}  // namespace rfidforge::sigio
