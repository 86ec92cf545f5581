#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rfidforge/dsp.hpp"
#include "rfidforge/sigio.hpp"

using namespace rfidforge;

namespace {

SampleTrace tone(double carrier_hz, int cycles) {
    sigio::SynthesisSpec s;
    s.carrier_hz = carrier_hz;
    s.modulation = sigio::Modulation::ASK;
    return sigio::synthesize_carrier(s, cycles);
}

dsp::TuneReport report(double v125, double v134, double vhf) {
    dsp::TuneReport r;
    r.v_lf_125 = v125;
    r.v_lf_134 = v134;
    r.v_hf_1356 = vhf;
    return r;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("thomson equation at the unit point") {
    double f = dsp::resonant_frequency(1.0, 1.0);
    CHECK(std::abs(f - 1.0 / (2.0 * std::numbers::pi)) / f < 1e-12);
    CHECK_THROWS(dsp::resonant_frequency(0.0, 1.0));
    CHECK_THROWS(dsp::resonant_frequency(1.0, -2.0));
}

TEST_CASE("resonant frequency is monotone and scales as 1/k") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(1e-9, 1e-3);
    for (int i = 0; i < 1000; ++i) {
        double L = d(rng), C = d(rng);
        double f = dsp::resonant_frequency(L, C);
        CHECK(dsp::resonant_frequency(L * 1.5, C) < f);
        CHECK(dsp::resonant_frequency(L, C * 1.5) < f);
        double k = 3.0;
        CHECK(dsp::resonant_frequency(L * k, C * k) ==
              doctest::Approx(f / k).epsilon(1e-12));
    }
}

TEST_CASE("band detection on the measured voltage pairs") {
    // LF antenna: 134 kHz drops 22.61 -> 14.34 V when the tag is present,
    // while the HF antenna only moves 9.24 -> 8.87 V.
    dsp::TuneReport no_tag = report(11.34, 22.61, 9.24);
    dsp::TuneReport with_tag = report(10.20, 14.34, 8.87);
    CHECK(dsp::detect_band(no_tag, with_tag, 0.25) == dsp::DetectedBand::LF);

    CHECK(dsp::detect_band(no_tag, no_tag, 0.25) == dsp::DetectedBand::UNKNOWN);

    dsp::TuneReport hf_loaded = report(11.34, 22.61, 4.0);
    CHECK(dsp::detect_band(no_tag, hf_loaded, 0.25) == dsp::DetectedBand::HF);
}

TEST_CASE("band detection is scale invariant") {
    dsp::TuneReport no_tag = report(11.34, 22.61, 9.24);
    dsp::TuneReport with_tag = report(10.20, 14.34, 8.87);
    dsp::TuneReport no2 = report(113.4, 226.1, 92.4);
    dsp::TuneReport with2 = report(102.0, 143.4, 88.7);
    CHECK(dsp::detect_band(no_tag, with_tag, 0.25) ==
          dsp::detect_band(no2, with2, 0.25));
}

TEST_CASE("hw_tune reproduces the cross-band leak on an hf-only antenna") {
    dsp::VirtualAntennaLoad load;
    load.baseline_v_hf = 9.24;
    load.band = dsp::AntennaBand::LF;
    load.coupling = 0.36;
    dsp::TuneReport r = dsp::hw_tune(load);
    CHECK(r.v_hf_1356 == doctest::Approx(8.87).epsilon(0.01));
    CHECK(r.v_lf_125 == 0.0);
    CHECK(r.v_lf_optimal_khz == doctest::Approx(12000.0));
}

TEST_CASE("carrier estimate within 2 percent for the band frequencies") {
    for (double f : {125000.0, 134200.0, 13560000.0}) {
        SampleTrace t = tone(f, 64);
        double est = dsp::estimate_carrier(t);
        CHECK(est > 0.98 * f);
        CHECK(est < 1.02 * f);
    }
}

TEST_CASE("carrier estimate rejects a dc trace") {
    SampleTrace t;
    t.sample_rate_hz = 1e6;
    t.samples.assign(4096, 128);
    CHECK_THROWS(dsp::estimate_carrier(t));
}

TEST_CASE("lowpass attenuates by 20 dB an octave above cutoff") {
    double rate = 4.0e6;
    size_t n = 16384;
    double f_pass = 100e3, f_stop = 400e3, cutoff = 200e3;
    SampleTrace t;
    t.sample_rate_hz = rate;
    t.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double x = std::sin(2 * std::numbers::pi * f_pass * i / rate) +
                   std::sin(2 * std::numbers::pi * f_stop * i / rate);
        t.samples[i] = (uint8_t)std::lround(127.5 + 60.0 * x);
    }
    SampleTrace f = dsp::lowpass(t, cutoff);
    REQUIRE(f.samples.size() == t.samples.size());
    // Goertzel-style single-bin power at both frequencies.
    auto power = [&](const SampleTrace& tr, double freq) {
        double re = 0, im = 0;
        for (size_t i = 0; i < tr.samples.size(); ++i) {
            double ph = 2 * std::numbers::pi * freq * i / rate;
            re += (tr.samples[i] - 127.5) * std::cos(ph);
            im += (tr.samples[i] - 127.5) * std::sin(ph);
        }
        return re * re + im * im;
    };
    double pass_ratio = power(f, f_pass) / power(t, f_pass);
    double stop_ratio = power(f, f_stop) / power(t, f_stop);
    CHECK(pass_ratio > 0.5);
    CHECK(stop_ratio < 0.01);  // -20 dB
    CHECK_THROWS(dsp::lowpass(t, rate));
}

TEST_CASE("envelope of an ook burst segments high and low runs") {
    LevelStream pattern;
    pattern.levels = {Level::HIGH, Level::LOW, Level::HIGH, Level::LOW};
    pattern.durations = {32.0, 32.0, 64.0, 32.0};
    sigio::SynthesisSpec s;
    s.carrier_hz = 125000.0;
    s.modulation = sigio::Modulation::ASK;
    SampleTrace t = sigio::synthesize_levels(pattern, s);
    LevelStream env = dsp::envelope(t, 125000.0);
    REQUIRE(env.levels.size() >= 3);
    CHECK(env.levels[0] == Level::HIGH);
    CHECK(env.durations[0] == doctest::Approx(32.0).epsilon(0.08));
    CHECK(env.durations[2] == doctest::Approx(64.0).epsilon(0.08));
}

TEST_CASE("otsu split separates a two-point distribution") {
    std::vector<double> v;
    for (int i = 0; i < 50; ++i) {
        v.push_back(10.0);
        v.push_back(200.0);
    }
    dsp::OtsuSplit s = dsp::otsu_split(v);
    CHECK(s.score > 0.9);
    CHECK(s.threshold > 10.0);
    CHECK(s.threshold <= 200.0);
    // Means come back at histogram-bin resolution, (200-10)/256 per bin.
    CHECK(s.mean_low == doctest::Approx(10.0).epsilon(0.1));
    CHECK(s.mean_high == doctest::Approx(200.0).epsilon(0.01));
}

TEST_CASE("tune report renders in the device layout") {
    dsp::TuneReport r = report(11.34, 22.61, 0.62);
    r.v_lf_optimal_volts = 18.27;
    r.v_lf_optimal_khz = 153.85;
    std::string out = dsp::render_tune_report(r);
    CHECK(out.find("# LF antenna: 11.34 V @ 125.00 kHz") != std::string::npos);
    CHECK(out.find("# LF antenna: 22.61 V @ 134.00 kHz") != std::string::npos);
    CHECK(out.find("# HF antenna: 0.62 V @ 13.56 MHz") != std::string::npos);
    CHECK(out.find("# Your HF antenna is unusable.") != std::string::npos);
}

}
