#include "rfidforge/fdxb.hpp"

#include <cstdio>
#include <stdexcept>

namespace rfidforge::fdxb {

namespace {

constexpr int kHeaderBits = 11;
constexpr int kFrameBytes = 13;  // 8 payload + 2 crc + 3 extra
constexpr int kBodyBits = kFrameBytes * 9;

std::array<uint8_t, kFrameBytes> frame_bytes(const FdxbFrame& f) {
    std::array<uint8_t, 8> p = payload_bytes(f);
    uint16_t crc = crc16_fdxb(p.data(), p.size());
    uint32_t extra = f.extra_data.value_or(0);
    return {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7],
            (uint8_t)(crc & 0xFF), (uint8_t)(crc >> 8),
            (uint8_t)(extra & 0xFF), (uint8_t)(extra >> 8 & 0xFF),
            (uint8_t)(extra >> 16 & 0xFF)};
}

}  // namespace

void FdxbFrame::validate() const {
    if (national_code >> 38)
        throw std::invalid_argument("fdxb: national code field overflow (38 bits)");
    if (country_code >> 10)
        throw std::invalid_argument("fdxb: country code field overflow (10 bits)");
    if (data_block_flag > 1 || animal_flag > 1)
        throw std::invalid_argument("fdxb: flags must be 0 or 1");
    if (reserved >> 14)
        throw std::invalid_argument("fdxb: reserved field overflow (14 bits)");
    if (extra_data.has_value() != (data_block_flag == 1))
        throw std::invalid_argument(
            "fdxb: extra data present exactly when the data block flag is set");
    if (extra_data && *extra_data >> 24)
        throw std::invalid_argument("fdxb: extra data field overflow (24 bits)");
}

uint16_t crc16_fdxb(const uint8_t* data, size_t len) {
    uint16_t crc = 0x0000;
    for (size_t i = 0; i < len; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b)
            crc = crc & 1 ? (uint16_t)(crc >> 1 ^ 0x8408) : (uint16_t)(crc >> 1);
    }
    return crc;
}

uint16_t crc16_fdxb(const std::vector<uint8_t>& data) {
    return crc16_fdxb(data.data(), data.size());
}

std::array<uint8_t, 8> payload_bytes(const FdxbFrame& f) {
    f.validate();
    return {(uint8_t)(f.national_code & 0xFF),
            (uint8_t)(f.national_code >> 8 & 0xFF),
            (uint8_t)(f.national_code >> 16 & 0xFF),
            (uint8_t)(f.national_code >> 24 & 0xFF),
            (uint8_t)((f.national_code >> 32 & 0x3F) | (f.country_code & 0x3) << 6),
            (uint8_t)(f.country_code >> 2 & 0xFF),
            (uint8_t)(f.data_block_flag | f.animal_flag << 1 |
                      (f.reserved & 0x3F) << 2),
            (uint8_t)(f.reserved >> 6 & 0xFF)};
}

uint16_t frame_crc(const FdxbFrame& frame) {
    std::array<uint8_t, 8> p = payload_bytes(frame);
    return crc16_fdxb(p.data(), p.size());
}

FdxbFrame normalized(FdxbFrame frame) {
    frame.crc = frame_crc(frame);
    return frame;
}

BitStream encode_fdxb(const FdxbFrame& frame) {
    std::array<uint8_t, kFrameBytes> bytes = frame_bytes(frame);
    BitStream out;
    out.bits.reserve(kHeaderBits + kBodyBits);
    out.bits.push_back(1);
    out.bits.insert(out.bits.end(), 10, 0);
    for (uint8_t byte : bytes) {
        for (int b = 0; b < 8; ++b)
            out.bits.push_back((uint8_t)(byte >> b & 1));
        out.bits.push_back(1);
    }
    return out;
}

FdxbReadReport decode_fdxb(const BitStream& bits) {
    const std::vector<uint8_t>& v = bits.bits;
    long data_pos = -1;
    for (size_t i = 0; i + kHeaderBits + kBodyBits <= v.size(); ++i) {
        if (v[i] != 1)
            continue;
        bool zeros = true;
        for (size_t j = i + 1; j < i + kHeaderBits; ++j)
            if (v[j] != 0) {
                zeros = false;
                break;
            }
        if (zeros) {
            data_pos = (long)(i + kHeaderBits);
            break;
        }
    }
    if (data_pos < 0)
        throw std::runtime_error("fdxb: header not found");

    FdxbReadReport r;
    r.header_position = data_pos;

    std::array<uint8_t, kFrameBytes> bytes{};
    for (int k = 0; k < kFrameBytes; ++k) {
        uint8_t byte = 0;
        for (int b = 0; b < 8; ++b)
            byte |= (uint8_t)(v[data_pos + 9 * k + b] << b);
        bytes[k] = byte;
        if (v[data_pos + 9 * k + 8] != 1)
            r.control_bit_errors.push_back(data_pos + 9 * k + 8);
    }

    FdxbFrame f;
    f.national_code = (uint64_t)bytes[0] | (uint64_t)bytes[1] << 8 |
                      (uint64_t)bytes[2] << 16 | (uint64_t)bytes[3] << 24 |
                      (uint64_t)(bytes[4] & 0x3F) << 32;
    f.country_code = (uint16_t)(bytes[4] >> 6 | bytes[5] << 2);
    f.data_block_flag = bytes[6] & 1;
    f.animal_flag = bytes[6] >> 1 & 1;
    f.reserved = (uint16_t)(bytes[6] >> 2 | bytes[7] << 6);
    if (f.data_block_flag)
        f.extra_data = (uint32_t)bytes[10] | (uint32_t)bytes[11] << 8 |
                       (uint32_t)bytes[12] << 16;

    r.obtained_crc = (uint16_t)(bytes[8] | bytes[9] << 8);
    r.calculated_crc = crc16_fdxb(bytes.data(), 8);
    r.crc_ok = r.obtained_crc == r.calculated_crc;
    f.crc = r.obtained_crc;
    r.frame = f;
    return r;
}

std::string render_report(const FdxbReadReport& r) {
    char buf[96];
    std::string out;
    std::snprintf(buf, sizeof buf, "Header found, starting data in pos %ld\n",
                  r.header_position);
    out += buf;
    for (long e : r.control_bit_errors) {
        std::snprintf(buf, sizeof buf, "Bit control error in bit %ld\n", e);
        out += buf;
    }
    if (r.frame) {
        if (r.frame->animal_flag)
            out += "Animal APP\n";
        std::snprintf(buf, sizeof buf, "National code: %012llu\n",
                      (unsigned long long)r.frame->national_code);
        out += buf;
        std::snprintf(buf, sizeof buf, "Country code: %u\n",
                      (unsigned)r.frame->country_code);
        out += buf;
        if (r.frame->extra_data) {
            std::snprintf(buf, sizeof buf, "Extra data: %06x\n",
                          (unsigned)*r.frame->extra_data);
            out += buf;
        }
    }
    std::snprintf(buf, sizeof buf, "Obtained CRC: %04x\n", r.obtained_crc);
    out += buf;
    std::snprintf(buf, sizeof buf, "Calculated CRC: %04x\n", r.calculated_crc);
    out += buf;
    return out;
}

}  // namespace rfidforge::fdxb
