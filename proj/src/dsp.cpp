#include "rfidforge/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rfidforge::dsp {

namespace {

constexpr double kCrossBandLeak = 0.11;  // a tag loads the other band ~11% as hard
constexpr double kAntennaQ = 3.0;

// Series-resonance voltage shape used for the LF sweep model.
double resonance(double f, double f_peak, double v_peak) {
    if (f_peak <= 0 || v_peak <= 0)
        return 0.0;
    double g = f / f_peak - f_peak / f;
    return v_peak / std::sqrt(1.0 + kAntennaQ * kAntennaQ * g * g);
}

// Fit (v_peak, f_peak) through the two measured LF points.
void fit_lf_curve(double v125, double v134, double& v_peak, double& f_peak) {
    if (v125 <= 0.0 && v134 <= 0.0) {
        v_peak = 0.0;
        f_peak = 0.0;
        return;
    }
    if (v125 <= 0.0 || v134 <= 0.0) {
        f_peak = v125 > v134 ? 125.0e3 : 134.0e3;
        v_peak = std::max(v125, v134);
        return;
    }
    double best_err = 1e300;
    for (double fr = 80.0e3; fr <= 300.0e3; fr += 50.0) {
        double g1 = 125.0e3 / fr - fr / 125.0e3;
        double g2 = 134.0e3 / fr - fr / 134.0e3;
        double ratio = std::sqrt((1.0 + kAntennaQ * kAntennaQ * g2 * g2) /
                                 (1.0 + kAntennaQ * kAntennaQ * g1 * g1));
        double err = std::abs(ratio - v125 / v134);
        if (err < best_err) {
            best_err = err;
            f_peak = fr;
        }
    }
    double g1 = 125.0e3 / f_peak - f_peak / 125.0e3;
    v_peak = v125 * std::sqrt(1.0 + kAntennaQ * kAntennaQ * g1 * g1);
}

double relative_drop(double before, double after) {
    if (before <= 0.0)
        return 0.0;
    return (before - after) / before;
}

}  // namespace

double resonant_frequency(double inductance_henry, double capacitance_farad) {
    if (inductance_henry <= 0.0 || capacitance_farad <= 0.0)
        throw std::domain_error("resonant_frequency: L and C must be positive");
    return 1.0 / (2.0 * std::numbers::pi *
                  std::sqrt(inductance_henry * capacitance_farad));
}

TuneReport hw_tune(const VirtualAntennaLoad& load) {
    double c = load.band == AntennaBand::NONE ? 0.0 : load.coupling;
    double lf_scale = 1.0, hf_scale = 1.0;
    if (load.band == AntennaBand::LF) {
        lf_scale = 1.0 - c;
        hf_scale = 1.0 - kCrossBandLeak * c;
    } else if (load.band == AntennaBand::HF) {
        hf_scale = 1.0 - c;
        lf_scale = 1.0 - kCrossBandLeak * c;
    }

    TuneReport r;
    r.v_lf_125 = load.baseline_v_lf_125 * lf_scale;
    r.v_lf_134 = load.baseline_v_lf_134 * lf_scale;
    r.v_hf_1356 = load.baseline_v_hf * hf_scale;

    // Peak of the fitted LF curve over the divisor sweep grid
    // f_d = 12 MHz / (d + 1). An all-zero curve argmaxes at d = 0, which
    // reports "0.00 V @ 12000.00 kHz" exactly like a missing LF antenna.
    double v_peak, f_peak;
    fit_lf_curve(load.baseline_v_lf_125, load.baseline_v_lf_134, v_peak, f_peak);
    double best_v = -1.0, best_f = 0.0;
    for (int d = 0; d <= 255; ++d) {
        double f = 12.0e6 / (d + 1);
        double v = resonance(f, f_peak, v_peak) * lf_scale;
        if (v > best_v) {
            best_v = v;
            best_f = f;
        }
    }
    r.v_lf_optimal_volts = best_v;
    r.v_lf_optimal_khz = best_f / 1000.0;
    return r;
}

DetectedBand detect_band(const TuneReport& no_tag, const TuneReport& with_tag,
                         double drop_threshold) {
    double lf_drop = std::max(relative_drop(no_tag.v_lf_125, with_tag.v_lf_125),
                              relative_drop(no_tag.v_lf_134, with_tag.v_lf_134));
    double hf_drop = relative_drop(no_tag.v_hf_1356, with_tag.v_hf_1356);
    bool lf = lf_drop >= drop_threshold;
    bool hf = hf_drop >= drop_threshold;
    if (lf && !hf)
        return DetectedBand::LF;
    if (hf && !lf)
        return DetectedBand::HF;
    return DetectedBand::UNKNOWN;
}

double estimate_carrier(const SampleTrace& trace) {
    trace.validate();
    double mid = trace.max_value() / 2.0;
    std::vector<double> t;  // interpolated rising-crossing instants
    for (size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        double a = trace.samples[i] - mid;
        double b = trace.samples[i + 1] - mid;
        if (a < 0.0 && b >= 0.0)
            t.push_back(i + (-a) / (b - a));
    }
    if (t.size() < 17)
        throw std::runtime_error("estimate_carrier: fewer than 16 cycles");
    std::vector<double> periods(t.size() - 1);
    for (size_t i = 0; i + 1 < t.size(); ++i)
        periods[i] = t[i + 1] - t[i];
    std::nth_element(periods.begin(), periods.begin() + periods.size() / 2,
                     periods.end());
    double med = periods[periods.size() / 2];
    if (med <= 0.0)
        throw std::runtime_error("estimate_carrier: degenerate periodicity");
    return trace.sample_rate_hz / med;
}

std::vector<double> lowpass_real(const std::vector<double>& x,
                                 double sample_rate_hz, double cutoff_hz) {
    if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
        throw std::invalid_argument("lowpass: cutoff outside (0, Nyquist)");

    // Blackman-windowed sinc, designed halfway up the transition band so the
    // response is still flat at the nominal cutoff and well down by 2x.
    double ft = 1.5 * cutoff_hz / sample_rate_hz;
    int n = (int)std::ceil(6.0 * sample_rate_hz / cutoff_hz);
    n = std::min(n | 1, 4001);
    int m = n / 2;
    std::vector<double> taps(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        int k = i - m;
        double s = k == 0 ? 2.0 * ft
                          : std::sin(2.0 * std::numbers::pi * ft * k) /
                                (std::numbers::pi * k);
        double w = 0.42 -
                   0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1)) +
                   0.08 * std::cos(4.0 * std::numbers::pi * i / (n - 1));
        taps[i] = s * w;
        sum += taps[i];
    }
    for (double& t : taps)
        t /= sum;

    std::vector<double> y(x.size());
    long len = (long)x.size();
    for (long i = 0; i < len; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            long idx = i + j - m;
            if (idx < 0)
                idx = -idx;  // reflect at the edges
            if (idx >= len)
                idx = 2 * (len - 1) - idx;
            acc += taps[j] * x[idx];
        }
        y[i] = acc;
    }
    return y;
}

SampleTrace lowpass(const SampleTrace& trace, double cutoff_hz) {
    trace.validate();
    std::vector<double> x(trace.samples.begin(), trace.samples.end());
    std::vector<double> y = lowpass_real(x, trace.sample_rate_hz, cutoff_hz);
    SampleTrace out = trace;
    for (size_t i = 0; i < y.size(); ++i) {
        long v = std::lround(y[i]);
        out.samples[i] = (uint8_t)std::clamp(v, 0L, (long)trace.max_value());
    }
    return out;
}

std::vector<double> envelope_curve(const SampleTrace& trace, double carrier_hz) {
    trace.validate();
    if (carrier_hz <= 0.0 || carrier_hz >= trace.sample_rate_hz / 2.0)
        throw std::invalid_argument("envelope: carrier outside trace bandwidth");
    double mid = trace.max_value() / 2.0;
    size_t len = trace.samples.size();
    int w = std::max(1, (int)std::lround(trace.sample_rate_hz / carrier_hz));

    std::vector<double> prefix(len + 1, 0.0);
    for (size_t i = 0; i < len; ++i)
        prefix[i + 1] = prefix[i] + std::abs(trace.samples[i] - mid);

    // mean(|x - mid|) over a sine period is amplitude * 2/pi; undo that
    std::vector<double> env(len);
    for (size_t i = 0; i < len; ++i) {
        long lo = (long)i - w / 2;
        long hi = lo + w;
        lo = std::max(lo, 0L);
        hi = std::min(hi, (long)len);
        env[i] = (prefix[hi] - prefix[lo]) / (hi - lo) * (std::numbers::pi / 2.0);
    }
    return env;
}

OtsuSplit otsu_split(const std::vector<double>& v) {
    OtsuSplit r{0.0, 0.0};
    if (v.size() < 2)
        return r;
    auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
    double mn = *mn_it, mx = *mx_it;
    if (mx - mn <= 0.0)
        return r;

    constexpr int kBins = 256;
    std::vector<long> hist(kBins, 0);
    for (double x : v) {
        int b = (int)((x - mn) / (mx - mn) * (kBins - 1));
        hist[std::clamp(b, 0, kBins - 1)]++;
    }
    double total = (double)v.size();
    double mean_all = std::accumulate(v.begin(), v.end(), 0.0) / total;
    double var_all = 0.0;
    for (double x : v)
        var_all += (x - mean_all) * (x - mean_all);
    var_all /= total;
    if (var_all <= 0.0)
        return r;

    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b)
        sum_all += hist[b] * (mn + (b + 0.5) * (mx - mn) / kBins);
    for (int b = 0; b < kBins - 1; ++b) {
        double center = mn + (b + 0.5) * (mx - mn) / kBins;
        w0 += hist[b];
        sum0 += hist[b] * center;
        if (w0 == 0.0 || w0 == total)
            continue;
        double w1 = total - w0;
        double mu0 = sum0 / w0, mu1 = (sum_all - sum0) / w1;
        double between = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            r.threshold = mn + (b + 1) * (mx - mn) / kBins;
            r.mean_low = mu0;
            r.mean_high = mu1;
        }
    }
    r.score = best / var_all;
    return r;
}

LevelStream envelope(const SampleTrace& trace, double carrier_hz) {
    std::vector<double> env = envelope_curve(trace, carrier_hz);
    double cycles_per_sample = carrier_hz / trace.sample_rate_hz;

    OtsuSplit split = otsu_split(env);
    LevelStream out;
    if (split.score < 0.7 || split.mean_high - split.mean_low < 2.0) {
        // no amplitude structure: one run covering everything
        double mean = std::accumulate(env.begin(), env.end(), 0.0) / env.size();
        out.levels.push_back(mean > 0.1 * trace.max_value() ? Level::HIGH
                                                            : Level::LOW);
        out.durations.push_back(env.size() * cycles_per_sample);
        return out;
    }

    size_t run_start = 0;
    Level run_level = env[0] >= split.threshold ? Level::HIGH : Level::LOW;
    for (size_t i = 1; i <= env.size(); ++i) {
        Level l = i < env.size() && env[i] >= split.threshold ? Level::HIGH
                                                              : Level::LOW;
        if (i == env.size() || l != run_level) {
            out.levels.push_back(run_level);
            out.durations.push_back((i - run_start) * cycles_per_sample);
            run_start = i;
            run_level = l;
        }
    }
    return out;
}

std::string render_tune_report(const TuneReport& r) {
    char buf[512];
    double lf_best = std::max({r.v_lf_125, r.v_lf_134, r.v_lf_optimal_volts});
    std::string s =
        "#db# Measuring antenna characteristics, please wait..\n"
        "#db# Measuring complete, sending report back to host\n\n";
    std::snprintf(buf, sizeof buf,
                  "# LF antenna: %.2f V @ 125.00 kHz\n"
                  "# LF antenna: %.2f V @ 134.00 kHz\n"
                  "# LF optimal: %.2f V @ %.2f kHz\n"
                  "# HF antenna: %.2f V @ 13.56 MHz\n",
                  r.v_lf_125, r.v_lf_134, r.v_lf_optimal_volts,
                  r.v_lf_optimal_khz, r.v_hf_1356);
    s += buf;
    if (lf_best < 2.95)
        s += "# Your LF antenna is unusable.\n";
    if (r.v_hf_1356 < 3.2)
        s += "# Your HF antenna is unusable.\n";
    return s;
}

}  // namespace rfidforge::dsp
