#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfidforge/crypto1.hpp"

namespace rfidforge::mifare {

enum class KeyType { A, B };

constexpr uint8_t kNackValue = 0x5;  // plaintext of the 4-bit refusal reply
constexpr int kSectorCount = 16;
constexpr int kBlocksPerSector = 4;
constexpr int kBlockSize = 16;

// Tag reply to the 8-byte encrypted reader answer. A transmission with bad
// parity is dropped silently; valid parity with a wrong answer draws the
// encrypted NACK; a correct answer draws {suc3(nT)}.
struct ReaderResponseResult {
    enum class Kind { SILENT, NACK, TAG_AUTH };
    Kind kind = Kind::SILENT;
    uint8_t nack_ct = 0;  // 4 bits, NACK only
    uint32_t at_ct = 0;   // TAG_AUTH only
};

struct NestedNonce {
    uint32_t nt_ct = 0;  // {nT'} under the target sector's cipher
    uint8_t parity = 0;  // encrypted parity bits, bit j follows byte j
};

// Air interface of a card. Attacks operate exclusively through this.
class CardOracle {
public:
    virtual ~CardOracle() = default;
    virtual uint32_t uid() = 0;
    // Power cycle: the nonce generator restarts from its power-on state.
    virtual void reset_field() = 0;
    // Select + auth request from idle; returns the plaintext tag nonce.
    virtual uint32_t start_auth(int sector, KeyType type) = 0;
    virtual ReaderResponseResult reader_response(
        const std::array<uint8_t, 8>& ct, uint8_t parity) = 0;
    // Follow-up auth inside a live session; the new nonce arrives encrypted.
    virtual std::optional<NestedNonce> nested_auth(int sector,
                                                   KeyType type) = 0;
    // Encrypted block read inside a live session (absolute block 0..63).
    virtual std::optional<std::array<uint8_t, 16>> read_block_ct(
        int block) = 0;
};

/* 1K layout: 16 sectors x 4 blocks x 16 bytes.  Sector trailer:
 *
 *    0           5 6        9 10          15
 *   +-------------+----------+-------------+
 *   |    key A    |  access  |    key B    |
 *   +-------------+----------+-------------+
 *
 * Block 0 of sector 0 carries uid/BCC/manufacturer bytes and is read-only.
 */
class MifareCard final : public CardOracle {
public:
    explicit MifareCard(uint32_t uid, uint16_t nonce_seed = 0x2A1B);

    void set_key(int sector, KeyType type, uint64_t key);
    uint64_t key(int sector, KeyType type) const;
    void set_block(int sector, int block, const std::array<uint8_t, 16>& v);
    std::array<uint8_t, 16> block(int sector, int block) const;
    const std::array<uint8_t, 1024>& contents() const { return data_; }
    // Idle shifts applied to the nonce generator before each auth (except the
    // first one after a field reset): base + uniform[0, spread).
    void set_nonce_jitter(uint16_t base, uint16_t spread);

    uint32_t uid() override { return uid_; }
    void reset_field() override;
    uint32_t start_auth(int sector, KeyType type) override;
    ReaderResponseResult reader_response(const std::array<uint8_t, 8>& ct,
                                         uint8_t parity) override;
    std::optional<NestedNonce> nested_auth(int sector, KeyType type) override;
    std::optional<std::array<uint8_t, 16>> read_block_ct(int block) override;

private:
    uint32_t draw_nonce();
    void advance_idle();
    void begin_auth(int sector, KeyType type, uint32_t nt);

    uint32_t uid_ = 0;
    std::array<uint8_t, 1024> data_{};
    uint16_t nonce_state_ = 1, nonce_seed_ = 1;
    uint16_t jitter_base_ = 160, jitter_spread_ = 40;
    uint32_t jitter_rng_ = 0x6C078965;
    bool just_reset_ = true;

    struct Pending {
        bool active = false;
        int sector = 0;
        Crypto1State cipher;  // after the uid^nT feed
        uint32_t nt = 0;
    } pending_;
    struct Session {
        bool live = false;
        int sector = 0;
        Crypto1State cipher;
    } session_;
};

// One full handshake as seen on the air.
struct AuthTranscript {
    uint32_t uid = 0;
    int sector = 0;
    KeyType type = KeyType::A;
    uint32_t nt = 0;            // plaintext tag nonce
    uint32_t nr_ct = 0;         // nR ^ ks1
    uint32_t ar_ct = 0;         // suc2(nT) ^ ks2
    uint8_t reader_parity = 0;  // encrypted parity bits, bit j after byte j
    bool success = false;
    uint32_t at_ct = 0;    // suc3(nT) ^ ks3 on success
    bool nacked = false;   // 4-bit refusal seen instead of silence
    uint8_t nack_ct = 0;
};

// Reader-side session state for encrypted reads after a successful auth.
struct AuthSession {
    bool live = false;
    int sector = 0;
    Crypto1State cipher;
};

AuthTranscript authenticate(CardOracle& card, int sector, KeyType type,
                            uint64_t key, uint32_t nr = 0x52E55EED,
                            AuthSession* session = nullptr);

// Decrypted block read through a live session; advances the session cipher.
std::optional<std::array<uint8_t, 16>> read_block(CardOracle& card,
                                                  AuthSession& session,
                                                  int block);

// Single refusal-probe: fixed-nonce auth attempt with a guessed response.
// Returns the 4-bit encrypted NACK when every guessed parity bit was valid.
std::optional<uint8_t> darkside_leak(CardOracle& card, int sector,
                                     KeyType type,
                                     const std::array<uint8_t, 8>& response_ct,
                                     uint8_t parity_guess);

struct DarksideOptions {
    uint64_t max_oracle_calls = 1000000;
    uint32_t rng_seed = 0x0D06F00D;
};

struct DarksideResult {
    uint64_t key = 0;
    uint64_t oracle_calls = 0;
    int tables = 0;  // refusal tables collected, including retried ones
    std::string log;
};

// Fixed-nonce key recovery from 4-bit refusals. Collects an 8-row table of
// last-byte variants, inverts the nibble keystream offline, and confirms the
// surviving key on the air. Throws std::runtime_error when the call budget
// runs out before a key is confirmed.
DarksideResult darkside_attack(CardOracle& card, int sector, KeyType type,
                               const DarksideOptions& opt = {});

struct NestedOptions {
    uint32_t max_distance_window = 1000;  // nonce-shift search bound
    int max_attempts_per_key = 5;
    uint32_t rng_seed = 0x0BADC0DE;
};

struct NestedSectorKeys {
    uint64_t key_a = 0, key_b = 0;
    bool res_a = false, res_b = false;
};

struct NestedResult {
    std::array<NestedSectorKeys, kSectorCount> sectors{};
    uint64_t oracle_calls = 0;
    uint32_t iterations = 0;  // per-key recovery rounds run
};

// Recovers every sector key from one known key: authenticates with the known
// key, requests a follow-up auth for the target sector, guesses the nonce
// distance, and inverts the 32 keystream bits covering the encrypted nonce.
// Throws std::invalid_argument when the supposedly known key is rejected.
NestedResult nested_attack(CardOracle& card, int known_sector,
                           KeyType known_type, uint64_t known_key,
                           const NestedOptions& opt = {});

struct KeyTable {
    std::array<uint64_t, kSectorCount> key_a{};
    std::array<uint64_t, kSectorCount> key_b{};
};

KeyTable key_table(const NestedResult& r);
// 32 lines of 12 hex digits: sector 0 key A, sector 0 key B, sector 1 key A...
KeyTable load_key_file(const std::string& path);
void save_key_file(const std::string& path, const KeyTable& t);

struct CardDump {
    std::array<uint8_t, 1024> bytes{};
    std::array<bool, kSectorCount> sector_ok{};
};

// Reads all 64 blocks over the air with the given keys; sectors whose keys
// fail are zero-filled and flagged, the rest are unaffected.
CardDump dump_card(CardOracle& card, const KeyTable& keys);

std::string render_nested_log(const NestedResult& r, int known_sector,
                              KeyType known_type, uint64_t known_key);
std::string render_key_table(const NestedResult& r);

}  // namespace rfidforge::mifare
