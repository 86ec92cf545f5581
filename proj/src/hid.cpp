#include "rfidforge/hid.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace rfidforge::hid {

namespace {

std::vector<PulseClass> flatten(const PulseStream& pulses) {
    if (pulses.pulse_classes.size() != pulses.run_lengths.size())
        throw std::invalid_argument("hid: run-length arrays disagree");
    std::vector<PulseClass> flat;
    for (size_t i = 0; i < pulses.pulse_classes.size(); ++i) {
        if (pulses.run_lengths[i] <= 0)
            throw std::invalid_argument("hid: run lengths must be positive");
        flat.insert(flat.end(), (size_t)pulses.run_lengths[i],
                    pulses.pulse_classes[i]);
    }
    return flat;
}

PulseStream compress(const std::vector<PulseClass>& flat) {
    PulseStream out;
    for (PulseClass c : flat) {
        if (!out.pulse_classes.empty() && out.pulse_classes.back() == c) {
            out.run_lengths.back()++;
        } else {
            out.pulse_classes.push_back(c);
            out.run_lengths.push_back(1);
        }
    }
    return out;
}

bool all_of_class(const std::vector<PulseClass>& flat, size_t begin,
                  size_t count, PulseClass c) {
    if (begin + count > flat.size())
        return false;
    for (size_t i = begin; i < begin + count; ++i)
        if (flat[i] != c)
            return false;
    return true;
}

struct Run {
    PulseClass cls;
    size_t start;  // flat index
    size_t len;
};

std::vector<Run> runs_of(const std::vector<PulseClass>& flat) {
    std::vector<Run> runs;
    for (size_t i = 0; i < flat.size(); ++i) {
        if (!runs.empty() && runs.back().cls == flat[i])
            runs.back().len++;
        else
            runs.push_back({flat[i], i, 1});
    }
    return runs;
}

// Header = the last 12 pulses of a >= 12 FAST run (leading junk such as a
// previous frame's separator merges into it), exactly 11 SLOW, then a FAST
// separator. Returns (header_start, data_start) flat indices.
bool find_header(const std::vector<PulseClass>& flat, size_t& header_start,
                 size_t& data_start) {
    std::vector<Run> runs = runs_of(flat);
    for (size_t j = 0; j + 2 < runs.size(); ++j) {
        if (runs[j].cls == PulseClass::FAST && runs[j].len >= 12 &&
            runs[j + 1].cls == PulseClass::SLOW && runs[j + 1].len == 11 &&
            runs[j + 2].cls == PulseClass::FAST) {
            header_start = runs[j].start + runs[j].len - 12;
            data_start = runs[j + 2].start + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

void HidFrame::validate() const {
    if (manufacturer_code >> 7)
        throw std::invalid_argument("hid: manufacturer code exceeds 7 bits");
    if (card_format >> 11)
        throw std::invalid_argument("hid: card format exceeds 11 bits");
    if (format_control_bit >> 1 || id_control_bit >> 1)
        throw std::invalid_argument("hid: control bits must be 0 or 1");
}

uint64_t HidFrame::raw() const {
    validate();
    return (uint64_t)manufacturer_code << 37 | (uint64_t)card_format << 26 |
           (uint64_t)format_control_bit << 25 | (uint64_t)facility_code << 17 |
           (uint64_t)card_id << 1 | id_control_bit;
}

HidFrame HidFrame::from_raw(uint64_t raw44) {
    if (raw44 >> 44)
        throw std::invalid_argument("hid: raw value exceeds 44 bits");
    HidFrame f;
    f.manufacturer_code = (uint8_t)(raw44 >> 37 & 0x7F);
    f.card_format = (uint16_t)(raw44 >> 26 & 0x7FF);
    f.format_control_bit = (uint8_t)(raw44 >> 25 & 1);
    f.facility_code = (uint8_t)(raw44 >> 17 & 0xFF);
    f.card_id = (uint16_t)(raw44 >> 1 & 0xFFFF);
    f.id_control_bit = (uint8_t)(raw44 & 1);
    return f;
}

BitStream HidFrame::bits() const {
    uint64_t r = raw();
    BitStream b;
    b.bits.resize(44);
    for (int i = 0; i < 44; ++i)
        b.bits[i] = (uint8_t)(r >> (43 - i) & 1);
    return b;
}

HidFrame HidFrame::from_bits(const BitStream& bits44) {
    if (bits44.bits.size() != 44)
        throw std::invalid_argument("hid: frame must be exactly 44 bits");
    uint64_t r = 0;
    for (uint8_t bit : bits44.bits) {
        if (bit > 1)
            throw std::invalid_argument("hid: bits must be 0 or 1");
        r = r << 1 | bit;
    }
    return from_raw(r);
}

PulseStream encode_hid(const HidFrame& frame) {
    return frame_pulses(frame.bits());
}

PulseStream frame_pulses(const BitStream& bits44) {
    if (bits44.bits.size() != 44)
        throw std::invalid_argument("hid: frame must be exactly 44 bits");
    std::vector<PulseClass> flat;
    flat.insert(flat.end(), 12, PulseClass::FAST);
    flat.insert(flat.end(), 11, PulseClass::SLOW);  // separator + 10
    flat.push_back(PulseClass::FAST);               // separator

    for (size_t i = 0; i < 44; ++i) {
        if (bits44.bits[i] > 1)
            throw std::invalid_argument("hid: bits must be 0 or 1");
        if (bits44.bits[i]) {
            flat.insert(flat.end(), 6, PulseClass::FAST);
            flat.insert(flat.end(), 6, PulseClass::SLOW);
        } else {
            flat.insert(flat.end(), 5, PulseClass::SLOW);
            flat.insert(flat.end(), 5, PulseClass::FAST);
        }
        if (i % 4 == 3)
            flat.push_back(PulseClass::FAST);
    }
    return compress(flat);
}

HidDecodeDetail decode_hid_detail(const PulseStream& pulses) {
    std::vector<PulseClass> flat = flatten(pulses);

    size_t header_start = 0, data_start = 0;
    if (!find_header(flat, header_start, data_start))
        throw std::runtime_error("hid: header not found");

    HidDecodeDetail d;
    d.header_pulse_index = header_start;
    d.data_pulse_index = data_start;

    BitStream bits;
    size_t p = d.data_pulse_index;
    for (size_t bit = 0; bit < 44; ++bit) {
        if (p >= flat.size())
            throw std::runtime_error("hid: truncated frame, fewer than 44 symbols");
        if (flat[p] == PulseClass::SLOW) {
            if (!all_of_class(flat, p, 5, PulseClass::SLOW) ||
                !all_of_class(flat, p + 5, 5, PulseClass::FAST)) {
                if (p + 10 > flat.size())
                    throw std::runtime_error(
                        "hid: truncated frame, fewer than 44 symbols");
                throw SymbolError("hid: run pattern matches neither symbol", bit);
            }
            bits.bits.push_back(0);
            p += 10;
        } else {
            if (!all_of_class(flat, p, 6, PulseClass::FAST) ||
                !all_of_class(flat, p + 6, 6, PulseClass::SLOW)) {
                if (p + 12 > flat.size())
                    throw std::runtime_error(
                        "hid: truncated frame, fewer than 44 symbols");
                throw SymbolError("hid: run pattern matches neither symbol", bit);
            }
            bits.bits.push_back(1);
            p += 12;
        }
        if (bit % 4 == 3 && p < flat.size()) {
            if (flat[p] != PulseClass::FAST)
                throw SymbolError("hid: missing separator pulse", bit);
            p++;
        }
    }
    d.frame = HidFrame::from_bits(bits);
    return d;
}

HidFrame decode_hid(const PulseStream& pulses) {
    return decode_hid_detail(pulses).frame;
}

uint64_t display_value(const HidFrame& frame) {
    return frame.raw() << 1;
}

std::string hid_tag_id(const HidFrame& frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%011llx",
                  (unsigned long long)display_value(frame));
    return buf;
}

long data_start_sample(const PulseStream& pulses, const HidDecodeDetail& d,
                       std::pair<int, int> divisors, int samples_per_cycle) {
    std::vector<PulseClass> flat = flatten(pulses);
    int d_fast = std::min(divisors.first, divisors.second);
    int d_slow = std::max(divisors.first, divisors.second);
    long s = pulses.start_offset;
    for (size_t i = 0; i < d.data_pulse_index && i < flat.size(); ++i)
        s += (flat[i] == PulseClass::FAST ? d_fast : d_slow) * samples_per_cycle;
    return s;
}

std::string render_fskdemod(const PulseStream& pulses, const HidDecodeDetail& d,
                            std::pair<int, int> divisors,
                            int samples_per_cycle) {
    BitStream bits = d.frame.bits();
    std::string bit_text;
    for (uint8_t b : bits.bits)
        bit_text += (char)('0' + b);

    uint64_t disp = display_value(d.frame);
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "actual data bits start at sample %ld\n",
                  data_start_sample(pulses, d, divisors, samples_per_cycle));
    out += buf;
    std::snprintf(buf, sizeof buf, "length %zu/%zu\n", bits.bits.size(),
                  bits.bits.size());
    out += buf;
    out += "bits: '" + bit_text + "'\n";
    std::snprintf(buf, sizeof buf, "hex: %08x %08x\n",
                  (unsigned)(disp >> 32), (unsigned)(disp & 0xFFFFFFFF));
    out += buf;
    return out;
}

std::string render_tag_id(const HidFrame& frame) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "#db# TAG ID: %s (%u)\n",
                  hid_tag_id(frame).c_str(), (unsigned)frame.card_id);
    return buf;
}

HidFrame BruteSpace::at(uint64_t i) const {
    if (i >= size())
        throw std::out_of_range("brute_space: candidate index out of range");
    HidFrame f;
    f.manufacturer_code = manufacturer_code;
    f.card_format = card_format;
    f.facility_code = (uint8_t)((site_code + (i >> 18)) & 0xFF);
    f.format_control_bit = (uint8_t)(i >> 17 & 1);
    f.card_id = (uint16_t)(i >> 1 & 0xFFFF);
    f.id_control_bit = (uint8_t)(i & 1);
    return f;
}

std::vector<BruteSpace::Range> BruteSpace::partition(int parts) const {
    if (parts <= 0)
        throw std::invalid_argument("brute_space: parts must be positive");
    std::vector<Range> out;
    uint64_t n = size();
    uint64_t chunk = n / parts, rem = n % parts;
    uint64_t begin = 0;
    for (int p = 0; p < parts; ++p) {
        uint64_t len = chunk + (p < (int)rem ? 1 : 0);
        out.push_back({begin, begin + len});
        begin += len;
    }
    return out;
}

BruteSpace brute_space(uint8_t site_code, const HidFrame& fixed_prefix) {
    fixed_prefix.validate();
    return {site_code, fixed_prefix.manufacturer_code, fixed_prefix.card_format};
}

HidEmulationProfile emulation_profile(const HidFrame& frame) {
    HidEmulationProfile p;
    p.pulses = encode_hid(frame);
    p.payload_raw44 = frame.raw();
    return p;
}

}  // namespace rfidforge::hid
