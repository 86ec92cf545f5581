#pragma once

#include "rfidforge/streams.hpp"

#include <stdexcept>

namespace rfidforge::linecode {

enum class LineCodeId { MANCHESTER, DBP, NRZ };

struct SyncError : std::runtime_error {
    size_t index;  // offending level-run index
    SyncError(const std::string& what, size_t idx)
        : std::runtime_error(what), index(idx) {}
};

// Durations of the returned stream are in bit periods (so a Manchester
// half-level is 0.5). Adjacent equal levels are merged.
LevelStream encode(const BitStream& bits, LineCodeId code);

// bit_period in the same unit as levels.durations. Tolerates 25% jitter on
// each half-bit; anything between the legal multiples raises SyncError.
// Phase/polarity ambiguity is left to the protocol layer: callers that know
// a header retry on the complemented or half-bit-shifted reading.
BitStream decode(const LevelStream& levels, LineCodeId code, double bit_period);

}  // namespace rfidforge::linecode
