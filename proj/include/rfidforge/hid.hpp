#pragma once

#include "rfidforge/streams.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rfidforge::hid {

// 44-bit frame, transmitted MSB-first:
//
//   43       37          26   25       17           1    0
//   +---------+-----------+---+---------+-----------+----+
//   |   mfr   | card fmt  |fc | facility|  card id  |ic  |
//   |  7 bits |  11 bits  | 1 |  8 bits |  16 bits  | 1  |
//   +---------+-----------+---+---------+-----------+----+
//
// The two control bits are carried verbatim; no parity rule is enforced.
struct HidFrame {
    uint8_t manufacturer_code = 0;   // 7 bits
    uint16_t card_format = 0;        // 11 bits
    uint8_t format_control_bit = 0;  // 1 bit
    uint8_t facility_code = 0;       // 8 bits
    uint16_t card_id = 0;            // 16 bits
    uint8_t id_control_bit = 0;      // 1 bit

    void validate() const;
    uint64_t raw() const;  // 44-bit value
    static HidFrame from_raw(uint64_t raw44);
    BitStream bits() const;  // 44 bits, index 0 = first transmitted
    static HidFrame from_bits(const BitStream& bits44);
    bool operator==(const HidFrame&) const = default;
};

struct HidEmulationProfile {
    double carrier_hz = 125000.0;
    std::pair<int, int> divisors{8, 10};
    PulseStream pulses;
    uint64_t payload_raw44 = 0;
};

struct SymbolError : std::runtime_error {
    size_t bit_index;
    SymbolError(const std::string& what, size_t index)
        : std::runtime_error(what), bit_index(index) {}
};

struct HidDecodeDetail {
    HidFrame frame;
    size_t header_pulse_index = 0;  // flat pulse index of the 12-FAST start
    size_t data_pulse_index = 0;    // flat pulse index of the first data pulse
};

// Header: 12 FAST, a SLOW separator, 10 SLOW, a FAST separator. Data: 44
// symbols, 0 = 5 SLOW + 5 FAST, 1 = 6 FAST + 6 SLOW, with one FAST separator
// pulse after every 4 bits. A stream that ends cleanly right after the 44th
// symbol is accepted without the final separator (acquisition eats the last
// pulse's closing edge).
PulseStream encode_hid(const HidFrame& frame);
HidDecodeDetail decode_hid_detail(const PulseStream& pulses);
HidFrame decode_hid(const PulseStream& pulses);

// encode_hid for a raw 44-bit stream; the hook synthesize_bits uses.
PulseStream frame_pulses(const BitStream& bits44);

// The 44 bits shifted left once into the display register, rendered with
// %011llx. The readout's hex line pairs the same value as two %08x words.
std::string hid_tag_id(const HidFrame& frame);
uint64_t display_value(const HidFrame& frame);

// Sample index where the data bits begin, for readout rendering.
long data_start_sample(const PulseStream& pulses, const HidDecodeDetail& d,
                       std::pair<int, int> divisors, int samples_per_cycle);

// The demod-transcript block: start sample, length, bits, hex words.
std::string render_fskdemod(const PulseStream& pulses, const HidDecodeDetail& d,
                            std::pair<int, int> divisors, int samples_per_cycle);
// "#db# TAG ID: <hex> (<decimal card id>)"
std::string render_tag_id(const HidFrame& frame);

// 2^26-candidate search space around a known facility/site code: the frame
// prefix (manufacturer + card format) stays fixed, everything else varies.
// Enumeration starts at the given site code and walks neighbouring codes.
struct BruteSpace {
    uint8_t site_code = 0;
    uint8_t manufacturer_code = 0;
    uint16_t card_format = 0;

    uint64_t size() const { return 1ull << 26; }
    HidFrame at(uint64_t i) const;  // i in [0, size())

    struct Range {
        uint64_t begin, end;
    };
    std::vector<Range> partition(int parts) const;
};

BruteSpace brute_space(uint8_t site_code, const HidFrame& fixed_prefix);

HidEmulationProfile emulation_profile(const HidFrame& frame);

}  // namespace rfidforge::hid
