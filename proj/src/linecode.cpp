#include "rfidforge/linecode.hpp"

#include <cmath>
#include <string>

namespace rfidforge::linecode {

namespace {

void append_run(LevelStream& out, Level level, double duration) {
    if (!out.levels.empty() && out.levels.back() == level)
        out.durations.back() += duration;
    else {
        out.levels.push_back(level);
        out.durations.push_back(duration);
    }
}

constexpr double kJitter = 0.25;  // of one half-bit

// Quantize run durations into half-bit counts. max_halves = 2 for the
// bi-phase codes (a longer run cannot occur in a legal stream), unlimited
// for NRZ. Runs that quantize to zero are treated as glitches and dropped.
std::vector<Level> to_half_bits(const LevelStream& levels, double half,
                                int max_halves) {
    std::vector<Level> halves;
    for (size_t i = 0; i < levels.size(); ++i) {
        double units = levels.durations[i] / half;
        int k = (int)std::lround(units);
        if (std::abs(units - k) > kJitter)
            throw SyncError("line code: run of " + std::to_string(units) +
                                " half-bits is off-grid",
                            i);
        if (max_halves > 0 && k > max_halves)
            throw SyncError("line code: run of " + std::to_string(units) +
                                " half-bits too long for this code",
                            i);
        for (int j = 0; j < k; ++j)
            halves.push_back(levels.levels[i]);
    }
    return halves;
}

// Manchester, G.E. Thomas convention: 1 = HIGH then LOW, 0 = LOW then HIGH.
bool manchester_try(const std::vector<Level>& h, size_t offset, BitStream& out) {
    out.bits.clear();
    for (size_t i = offset; i + 1 < h.size(); i += 2) {
        if (h[i] == h[i + 1])
            return false;  // missing mid-bit transition
        out.bits.push_back(h[i] == Level::HIGH ? 1 : 0);
    }
    return !out.bits.empty();
}

// Differential bi-phase: transition at every bit boundary, mid-bit
// transition encodes 0. Level polarity carries no information.
bool dbp_try(const std::vector<Level>& h, size_t offset, BitStream& out) {
    out.bits.clear();
    for (size_t i = offset; i + 1 < h.size(); i += 2) {
        if (i + 2 < h.size() && h[i + 1] == h[i + 2])
            return false;  // boundary transition missing
        out.bits.push_back(h[i] == h[i + 1] ? 1 : 0);
    }
    return !out.bits.empty();
}

}  // namespace

LevelStream encode(const BitStream& bits, LineCodeId code) {
    if (bits.bits.empty())
        throw std::invalid_argument("line code: empty bit stream");
    LevelStream out;
    switch (code) {
        case LineCodeId::NRZ:
            for (uint8_t b : bits.bits)
                append_run(out, b ? Level::HIGH : Level::LOW, 1.0);
            break;
        case LineCodeId::MANCHESTER:
            for (uint8_t b : bits.bits) {
                append_run(out, b ? Level::HIGH : Level::LOW, 0.5);
                append_run(out, b ? Level::LOW : Level::HIGH, 0.5);
            }
            break;
        case LineCodeId::DBP: {
            Level level = Level::LOW;  // free choice; the code is differential
            for (uint8_t b : bits.bits) {
                if (b) {
                    append_run(out, level, 1.0);
                } else {
                    append_run(out, level, 0.5);
                    level = level == Level::HIGH ? Level::LOW : Level::HIGH;
                    append_run(out, level, 0.5);
                }
                level = level == Level::HIGH ? Level::LOW : Level::HIGH;
            }
            break;
        }
        default:
            throw std::invalid_argument("line code: unsupported code id");
    }
    return out;
}

BitStream decode(const LevelStream& levels, LineCodeId code, double bit_period) {
    if (levels.size() == 0)
        throw std::invalid_argument("line code: empty level stream");
    if (bit_period <= 0)
        throw std::invalid_argument("line code: non-positive bit period");

    if (code == LineCodeId::NRZ) {
        BitStream out;
        for (size_t i = 0; i < levels.size(); ++i) {
            double units = levels.durations[i] / bit_period;
            int k = (int)std::lround(units);
            if (std::abs(units - k) > kJitter)
                throw SyncError("line code: NRZ run off-grid", i);
            for (int j = 0; j < k; ++j)
                out.bits.push_back(levels.levels[i] == Level::HIGH ? 1 : 0);
        }
        return out;
    }

    std::vector<Level> halves = to_half_bits(levels, bit_period / 2.0, 2);
    if (halves.size() < 2)
        throw SyncError("line code: stream shorter than one bit", 0);

    BitStream out;
    bool (*try_decode)(const std::vector<Level>&, size_t, BitStream&) =
        code == LineCodeId::MANCHESTER ? manchester_try : dbp_try;
    if (try_decode(halves, 0, out))
        return out;
    if (try_decode(halves, 1, out))
        return out;
    throw SyncError("line code: no consistent half-bit phase", 0);
}

}  // namespace rfidforge::linecode
