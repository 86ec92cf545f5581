#include "rfidforge/demod.hpp"

#include "rfidforge/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rfidforge::demod {

namespace {

constexpr double kBimodalScore = 0.7;
constexpr double kMinAmpSeparation = 2.0;   // ADC counts
constexpr double kPeriodTolerance = 0.25;   // fraction of nominal

// Interpolated rising crossings of the trace about ADC midscale.
std::vector<double> rising_crossings(const SampleTrace& trace) {
    double mid = trace.max_value() / 2.0;
    std::vector<double> t;
    for (size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        double a = trace.samples[i] - mid;
        double b = trace.samples[i + 1] - mid;
        if (a < 0.0 && b >= 0.0)
            t.push_back(i + (-a) / (b - a));
    }
    return t;
}

bool looks_dead(const std::vector<double>& env, double max_value) {
    double mean = std::accumulate(env.begin(), env.end(), 0.0) / env.size();
    return mean < 0.05 * max_value;
}

// Turn alternating level runs into a bit per base symbol period. The base
// period estimate starts from the shortest run and is refined against every
// run's nearest integer multiple.
BitLevelOutcome runs_to_bits(const LevelStream& runs) {
    BitLevelOutcome out;
    double base = *std::min_element(runs.durations.begin(), runs.durations.end());
    if (base <= 0.0) {
        out.status = DemodStatus::NOT_ASK;
        return out;
    }
    double num = 0.0, den = 0.0;
    for (double d : runs.durations) {
        long k = std::lround(d / base);
        if (k >= 1) {
            num += d;
            den += k;
        }
    }
    if (den > 0.0)
        base = num / den;

    for (size_t i = 0; i < runs.levels.size(); ++i) {
        long k = std::lround(runs.durations[i] / base);
        k = std::max(k, 1L);
        uint8_t bit = runs.levels[i] == Level::HIGH ? 1 : 0;
        out.stream.bits.insert(out.stream.bits.end(), (size_t)k, bit);
    }
    out.stream.start_sample = (long)runs.start_offset;
    return out;
}

}  // namespace

BitLevelOutcome ask_demod(const SampleTrace& trace, double carrier_hz) {
    std::vector<double> env = dsp::envelope_curve(trace, carrier_hz);
    BitLevelOutcome out;
    if (looks_dead(env, trace.max_value())) {
        out.status = DemodStatus::NO_SIGNAL;
        return out;
    }
    dsp::OtsuSplit split = dsp::otsu_split(env);
    if (split.score < kBimodalScore ||
        split.mean_high - split.mean_low < kMinAmpSeparation) {
        out.status = DemodStatus::NOT_ASK;
        return out;
    }
    return ask_demod(dsp::envelope(trace, carrier_hz));
}

BitLevelOutcome ask_demod(const LevelStream& env) {
    BitLevelOutcome out;
    if (env.levels.empty()) {
        out.status = DemodStatus::NO_SIGNAL;
        return out;
    }
    if (env.levels.size() < 2) {
        out.status = env.levels[0] == Level::LOW ? DemodStatus::NO_SIGNAL
                                                 : DemodStatus::NOT_ASK;
        return out;
    }
    return runs_to_bits(env);
}

FskOutcome fsk_demod(const SampleTrace& trace, double carrier_hz,
                     std::pair<int, int> divisors) {
    trace.validate();
    auto [da, db] = divisors;
    if (da < 2 || db < 2 || da == db)
        throw std::invalid_argument("fsk_demod: divisors must be distinct and >= 2");
    int d_fast = std::min(da, db), d_slow = std::max(da, db);

    FskOutcome out;
    std::vector<double> env = dsp::envelope_curve(trace, carrier_hz);
    if (looks_dead(env, trace.max_value())) {
        out.status = DemodStatus::NO_SIGNAL;
        return out;
    }

    std::vector<double> t = rising_crossings(trace);
    if (t.size() < 5) {
        out.status = DemodStatus::NOT_FSK;
        return out;
    }

    double cycles_per_sample = carrier_hz / trace.sample_rate_hz;
    double boundary = std::sqrt((double)d_fast * d_slow);
    size_t outliers = 0;
    std::vector<PulseClass> classes;
    for (size_t i = 0; i + 1 < t.size(); ++i) {
        double p = (t[i + 1] - t[i]) * cycles_per_sample;  // carrier cycles
        PulseClass c = p < boundary ? PulseClass::FAST : PulseClass::SLOW;
        double nominal = c == PulseClass::FAST ? d_fast : d_slow;
        if (std::abs(p - nominal) / nominal > kPeriodTolerance) {
            outliers++;
            continue;
        }
        classes.push_back(c);
    }
    if (classes.size() < 4 ||
        (double)outliers / (classes.size() + outliers) > 0.2) {
        out.status = DemodStatus::NOT_FSK;
        return out;
    }
    bool has_fast = std::count(classes.begin(), classes.end(), PulseClass::FAST) > 0;
    bool has_slow = std::count(classes.begin(), classes.end(), PulseClass::SLOW) > 0;
    if (!has_fast || !has_slow) {
        out.status = DemodStatus::NOT_FSK;
        return out;
    }

    out.pulses.start_offset = std::lround(t.front());
    for (PulseClass c : classes) {
        if (!out.pulses.pulse_classes.empty() &&
            out.pulses.pulse_classes.back() == c) {
            out.pulses.run_lengths.back()++;
        } else {
            out.pulses.pulse_classes.push_back(c);
            out.pulses.run_lengths.push_back(1);
        }
    }
    return out;
}

double infer_fsk_carrier(const SampleTrace& trace, std::pair<int, int> divisors) {
    trace.validate();
    auto [da, db] = divisors;
    if (da < 2 || db < 2 || da == db)
        throw std::invalid_argument("infer_fsk_carrier: divisors must be distinct and >= 2");
    int d_fast = std::min(da, db), d_slow = std::max(da, db);
    std::vector<double> t = rising_crossings(trace);
    std::vector<double> periods;
    for (size_t i = 0; i + 1 < t.size(); ++i)
        periods.push_back(t[i + 1] - t[i]);
    if (periods.size() < 8)
        return 0.0;
    dsp::OtsuSplit per = dsp::otsu_split(periods);
    if (per.score < kBimodalScore || per.mean_low <= 0.0 || per.mean_high <= 0.0)
        return 0.0;
    double f_fast = d_fast * trace.sample_rate_hz / per.mean_low;
    double f_slow = d_slow * trace.sample_rate_hz / per.mean_high;
    if (std::abs(f_fast - f_slow) > 0.1 * f_fast)
        return 0.0;
    return 0.5 * (f_fast + f_slow);
}

ModulationGuess detect_modulation(const SampleTrace& trace, double carrier_hz) {
    trace.validate();
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("detect_modulation: bad carrier");
    double cycles = trace.samples.size() * carrier_hz / trace.sample_rate_hz;
    if (cycles < 32.0)
        throw std::invalid_argument("detect_modulation: need >= 32 carrier cycles");

    ModulationGuess g;
    std::vector<double> env = dsp::envelope_curve(trace, carrier_hz);
    if (looks_dead(env, trace.max_value()))
        return g;

    dsp::OtsuSplit amp = dsp::otsu_split(env);
    if (amp.score >= kBimodalScore &&
        amp.mean_high - amp.mean_low >= kMinAmpSeparation) {
        g.kind = Modulation::ASK;
        g.confidence = amp.score;
        return g;
    }

    std::vector<double> t = rising_crossings(trace);
    std::vector<double> periods;
    for (size_t i = 0; i + 1 < t.size(); ++i)
        periods.push_back(t[i + 1] - t[i]);
    if (periods.size() >= 8) {
        dsp::OtsuSplit per = dsp::otsu_split(periods);
        size_t lo = 0;
        for (double p : periods)
            if (p < per.threshold)
                lo++;
        double minority = (double)std::min(lo, periods.size() - lo) / periods.size();
        double sep = (per.mean_high - per.mean_low) /
                     (0.5 * (per.mean_high + per.mean_low));
        if (per.score >= kBimodalScore && minority >= 0.10 && sep >= 0.15) {
            g.kind = Modulation::FSK;
            g.confidence = per.score;
            return g;
        }
        g.confidence = std::max(amp.score, per.score);
        return g;
    }
    g.confidence = amp.score;
    return g;
}

}  // namespace rfidforge::demod
