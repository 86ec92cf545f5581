#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfidforge {

// Raw capture buffer. Matches the Proxmark-style acquisition model: one
// unsigned ADC value per sample, 8-bit by default.
struct SampleTrace {
    double sample_rate_hz = 0.0;
    int adc_bits = 8;
    std::vector<uint8_t> samples;
    std::string label;

    int max_value() const { return (1 << adc_bits) - 1; }

    void validate() const {
        if (sample_rate_hz <= 0.0)
            throw std::invalid_argument("trace: sample_rate_hz must be positive");
        if (adc_bits < 1 || adc_bits > 8)
            throw std::invalid_argument("trace: adc_bits out of range");
        if (samples.empty())
            throw std::invalid_argument("trace: empty sample sequence");
        for (uint8_t s : samples)
            if (s > max_value())
                throw std::out_of_range("trace: sample exceeds ADC range");
    }

    bool operator==(const SampleTrace&) const = default;
};

}  // namespace rfidforge
