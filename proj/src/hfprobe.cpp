#include "rfidforge/hfprobe.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rfidforge::hfprobe {

namespace {

std::string hex_join(const std::vector<uint8_t>& v) {
    std::string out;
    char buf[4];
    for (size_t i = 0; i < v.size(); ++i) {
        snprintf(buf, sizeof buf, "%02x", v[i]);
        if (i)
            out += ' ';
        out += buf;
    }
    return out;
}

std::vector<uint8_t> parse_hex_string(const std::string& s) {
    std::string digits;
    for (char c : s)
        if (!isspace((unsigned char)c))
            digits += c;
    if (digits.size() % 2)
        throw std::invalid_argument("hex string has odd length: " + s);
    std::vector<uint8_t> out;
    for (size_t i = 0; i < digits.size(); i += 2) {
        auto nib = [&](char c) -> unsigned {
            if (c >= '0' && c <= '9')
                return (unsigned)(c - '0');
            if (c >= 'a' && c <= 'f')
                return (unsigned)(c - 'a' + 10);
            if (c >= 'A' && c <= 'F')
                return (unsigned)(c - 'A' + 10);
            throw std::invalid_argument("bad hex digit in: " + s);
        };
        out.push_back((uint8_t)(nib(digits[i]) << 4 | nib(digits[i + 1])));
    }
    return out;
}

}  // namespace

std::string standard_name(HfStandard s) {
    switch (s) {
        case HfStandard::ISO15693:
            return "ISO/IEC 15693";
        case HfStandard::ISO14443A:
            return "ISO/IEC 14443-A";
        case HfStandard::ISO14443B:
            return "ISO/IEC 14443-B";
        case HfStandard::MIFARE_CLASSIC:
            return "MIFARE Classic 1K";
        case HfStandard::NONE:
            break;
    }
    return "UNIDENTIFIED";
}

HfStandard parse_standard(const std::string& name) {
    if (name == "NONE")
        return HfStandard::NONE;
    if (name == "ISO15693")
        return HfStandard::ISO15693;
    if (name == "ISO14443A")
        return HfStandard::ISO14443A;
    if (name == "ISO14443B")
        return HfStandard::ISO14443B;
    if (name == "MIFARE_CLASSIC")
        return HfStandard::MIFARE_CLASSIC;
    throw std::invalid_argument("unknown HF standard: " + name);
}

ProbeResult probe(const VirtualHfTag& tag) {
    ProbeResult r;

    {  // ISO/IEC 15693 IDENTIFY
        ProbeAttempt a;
        a.command = "hf 15 reader";
        a.sent = {0x26, 0x01, 0x00};  // flags, IDENTIFY, no data
        a.answered = tag.standard == HfStandard::ISO15693;
        if (a.answered) {
            a.output = "#db# " + std::to_string(tag.response_payload.size()) +
                       " octects read from IDENTIFY request: " +
                       hex_join(tag.response_payload) + "\n";
            r.identified = HfStandard::ISO15693;
        } else {
            a.output =
                "#db# 0 octects read from IDENTIFY request:\n"
                "#db# 0 octects read from SELECT request:\n"
                "#db# 0 octects read from XXX request:\n";
        }
        r.transcript += "proxmark3> " + a.command + "\n" + a.output;
        r.attempts.push_back(std::move(a));
    }

    if (r.identified == HfStandard::NONE) {  // ISO/IEC 14443-A select
        ProbeAttempt a;
        a.command = "hf 14a reader";
        a.sent = {0x26};  // REQA
        a.answered = tag.standard == HfStandard::ISO14443A ||
                     tag.standard == HfStandard::MIFARE_CLASSIC;
        if (a.answered) {
            bool mifare = tag.standard == HfStandard::MIFARE_CLASSIC;
            a.output = "ATQA : 00 04\n UID : " + hex_join(tag.uid_or_pupi) +
                       "\n SAK : " + (mifare ? "08" : "20") + " [2]\n";
            if (mifare)
                a.output += "TYPE : NXP MIFARE CLASSIC 1k | Plus 2k SL1\n";
            r.identified = tag.standard;
        } else {
            a.output = "iso14443a card select failed\n";
        }
        r.transcript += "\nproxmark3> " + a.command + "\n" + a.output;
        r.attempts.push_back(std::move(a));
    }

    if (r.identified == HfStandard::NONE) {  // ISO/IEC 14443-B ATQB
        ProbeAttempt a;
        a.command = "hf 14b read";
        a.sent.assign(kAtqbProbe.begin(), kAtqbProbe.end());
        a.answered = tag.standard == HfStandard::ISO14443B;
        if (a.answered) {
            r.status_14b = {3, 1, 0xe};
            r.identified = HfStandard::ISO14443B;
        } else {
            r.status_14b = {0, 0, 0};
        }
        char buf[32];
        snprintf(buf, sizeof buf, "#db# %x %x %x\n", r.status_14b[0],
                 r.status_14b[1], r.status_14b[2]);
        a.output = buf;
        r.transcript += "\nproxmark3> " + a.command + "\n" + a.output;
        r.attempts.push_back(std::move(a));
    }

    return r;
}

std::string render_hexdump(const std::vector<uint8_t>& bytes) {
    std::string out;
    char buf[4];
    for (size_t i = 0; i < bytes.size(); ++i) {
        snprintf(buf, sizeof buf, "%02x", bytes[i]);
        out += buf;
        out += (i % 8 == 7 || i + 1 == bytes.size()) ? '\n' : ' ';
    }
    return out;
}

std::vector<uint8_t> parse_hexdump(const std::string& text) {
    return parse_hex_string(text);
}

const ProbeResult& ProbeSession::run_probe() {
    last_ = probe(tag_);
    return *last_;
}

std::string ProbeSession::hexsamples() const {
    if (!last_ || last_->identified == HfStandard::NONE)
        throw std::logic_error("hexsamples requires a successful probe first");
    return render_hexdump(tag_.response_payload);
}

VirtualHfTag load_tag_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open tag spec: " + path);
    nlohmann::json j;
    in >> j;
    VirtualHfTag tag;
    tag.standard = parse_standard(j.at("standard").get<std::string>());
    if (j.contains("uid"))
        tag.uid_or_pupi = parse_hex_string(j["uid"].get<std::string>());
    if (j.contains("payload"))
        tag.response_payload = parse_hex_string(j["payload"].get<std::string>());
    return tag;
}

void save_tag_spec(const std::string& path, const VirtualHfTag& tag) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write tag spec: " + path);
    nlohmann::json j;
    switch (tag.standard) {
        case HfStandard::NONE: j["standard"] = "NONE"; break;
        case HfStandard::ISO15693: j["standard"] = "ISO15693"; break;
        case HfStandard::ISO14443A: j["standard"] = "ISO14443A"; break;
        case HfStandard::ISO14443B: j["standard"] = "ISO14443B"; break;
        case HfStandard::MIFARE_CLASSIC: j["standard"] = "MIFARE_CLASSIC"; break;
    }
    std::string hex;
    char buf[4];
    for (uint8_t b : tag.uid_or_pupi) {
        snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    j["uid"] = hex;
    hex.clear();
    for (uint8_t b : tag.response_payload) {
        snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    j["payload"] = hex;
    out << j.dump(2) << "\n";
}

}  // namespace rfidforge::hfprobe
