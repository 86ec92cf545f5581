#pragma once

#include "rfidforge/streams.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfidforge::fdxb {

// 128-bit frame: 11-bit header 10000000000, then 13 bytes each transmitted
// LSB-first and chased by an always-1 control bit.
//
//   byte 0..3   national code bits 0..31
//   byte 4      national bits 32..37 (low 6) | country bits 0..1 (high 2)
//   byte 5      country bits 2..9
//   byte 6      data-block flag | animal flag << 1 | reserved bits 0..5 << 2
//   byte 7      reserved bits 6..13
//   byte 8..9   CRC-16 (Kermit form: poly 0x8408 reflected, init 0), low first
//   byte 10..12 extra data block, zeros when the data-block flag is clear
struct FdxbFrame {
    uint64_t national_code = 0;  // 38 bits
    uint16_t country_code = 0;   // 10 bits
    uint8_t data_block_flag = 0;
    uint8_t animal_flag = 0;
    uint16_t reserved = 0;  // 14 bits
    uint16_t crc = 0;       // set by encode/decode, never trusted on input
    std::optional<uint32_t> extra_data;  // 24 bits, present iff data_block_flag

    void validate() const;
    bool operator==(const FdxbFrame&) const = default;
};

struct FdxbReadReport {
    long header_position = -1;  // bit index where the payload starts
    std::vector<long> control_bit_errors;  // absolute bit indices
    std::optional<FdxbFrame> frame;
    uint16_t obtained_crc = 0;
    uint16_t calculated_crc = 0;
    bool crc_ok = false;
};

uint16_t crc16_fdxb(const uint8_t* data, size_t len);
uint16_t crc16_fdxb(const std::vector<uint8_t>& data);

std::array<uint8_t, 8> payload_bytes(const FdxbFrame& frame);
uint16_t frame_crc(const FdxbFrame& frame);

// Frame with its crc field filled in; what decode hands back for this input.
FdxbFrame normalized(FdxbFrame frame);

// Always 128 bits; the crc is recomputed from the payload fields.
BitStream encode_fdxb(const FdxbFrame& frame);

// Locates the header anywhere in the stream, checks every control bit, and
// decodes the payload regardless of control or CRC failures (the report says
// what went wrong). Throws only when no complete frame fits.
FdxbReadReport decode_fdxb(const BitStream& bits);

std::string render_report(const FdxbReadReport& report);

}  // namespace rfidforge::fdxb
