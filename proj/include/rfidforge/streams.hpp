#pragma once

#include <cstdint>
#include <vector>

namespace rfidforge {

enum class Level : uint8_t { LOW = 0, HIGH = 1 };

// Run-length view of a demodulated waveform. Durations are expressed in
// whatever unit the producer used (carrier cycles for envelope output,
// bit periods for line-code encoder output); consumers receive the matching
// bit_period in the same unit.
struct LevelStream {
    std::vector<Level> levels;
    std::vector<double> durations;
    double start_offset = 0.0;

    size_t size() const { return levels.size(); }
};

enum class PulseClass : uint8_t { FAST = 0, SLOW = 1 };

// FSK demodulator output: run-length-compressed pulse classes
// (FAST = shorter period, e.g. f_c/8; SLOW = longer, e.g. f_c/10).
struct PulseStream {
    std::vector<PulseClass> pulse_classes;
    std::vector<int> run_lengths;
    long start_offset = 0;
};

struct BitStream {
    std::vector<uint8_t> bits;  // 0/1
    long start_sample = 0;

    bool operator==(const BitStream& o) const { return bits == o.bits; }
};

}  // namespace rfidforge
