#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfidforge::hfprobe {

enum class HfStandard { NONE, ISO15693, ISO14443A, ISO14443B, MIFARE_CLASSIC };

std::string standard_name(HfStandard s);
HfStandard parse_standard(const std::string& name);  // throws on unknown name

// Command-level model of an HF tag; it answers only its own standard's
// probe (MIFARE Classic answers the 14443-A select, being built on it).
struct VirtualHfTag {
    HfStandard standard = HfStandard::NONE;
    std::vector<uint8_t> uid_or_pupi;
    std::vector<uint8_t> response_payload;
};

// The 14443-B read probe sends exactly these five bytes.
constexpr std::array<uint8_t, 5> kAtqbProbe = {0x05, 0x00, 0x08, 0x39, 0x73};

struct ProbeAttempt {
    std::string command;        // reader command issued
    std::vector<uint8_t> sent;  // bytes put on the air
    bool answered = false;
    std::string output;         // console block for this command
};

// Status triple reported by the 14443-B read: (length, received_ok,
// checksum_nibble). Only the middle value carries defined meaning: 1 means
// the reply arrived complete.
struct ProbeResult {
    HfStandard identified = HfStandard::NONE;
    std::array<uint32_t, 3> status_14b{};
    std::vector<ProbeAttempt> attempts;
    std::string transcript;  // all command blocks joined
};

// Runs the 15693 -> 14443-A -> 14443-B sequence, stopping at the first
// probe the tag answers.
ProbeResult probe(const VirtualHfTag& tag);

// Space-separated lowercase hex, 8 bytes per line.
std::string render_hexdump(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> parse_hexdump(const std::string& text);

// Holds the reader-side state between commands: hexsamples is only
// meaningful once a probe has identified the tag.
class ProbeSession {
public:
    explicit ProbeSession(VirtualHfTag tag) : tag_(std::move(tag)) {}
    const ProbeResult& run_probe();
    // throws std::logic_error before a successful probe
    std::string hexsamples() const;

private:
    VirtualHfTag tag_;
    std::optional<ProbeResult> last_;
};

// JSON tag description: {"standard": "...", "uid": "<hex>", "payload": "<hex>"}
VirtualHfTag load_tag_spec(const std::string& path);
void save_tag_spec(const std::string& path, const VirtualHfTag& tag);

}  // namespace rfidforge::hfprobe
