#pragma once

#include <cstdint>
#include <vector>

namespace rfidforge::mifare {

// 48-bit LFSR split into interleaved halves: odd bit j holds register bit
// 47-2j, even bit j holds 46-2j (register bit 47 is the newest). The filter
// reads only odd positions 9..47; the feedback taps are
// {0,5,9,10,12,14,15,17,19,24,25,27,29,35,39,41,42,43}.
struct Crypto1State {
    uint32_t odd = 0;
    uint32_t even = 0;
    bool operator==(const Crypto1State&) const = default;
};

constexpr uint32_t kLfsrPolyOdd = 0x29CE5C;
constexpr uint32_t kLfsrPolyEven = 0x870804;

inline uint32_t parity32(uint32_t x) { return __builtin_parity(x); }

// Output filter over the odd half; layered two-level boolean network packed
// into per-nibble tables. Reads bits 0..19 only.
inline uint32_t crypto1_filter(uint32_t x) {
    uint32_t f;
    f = 0xf22c0 >> (x & 0xf) & 16;
    f |= 0x6c9c0 >> (x >> 4 & 0xf) & 8;
    f |= 0x3c8b0 >> (x >> 8 & 0xf) & 4;
    f |= 0x1e458 >> (x >> 12 & 0xf) & 2;
    f |= 0x0d938 >> (x >> 16 & 0xf) & 1;
    return 0xEC57E80A >> f & 1;
}

// Key bytes load in hex order, LSB of each byte first.
Crypto1State crypto1_init(uint64_t key);
uint64_t crypto1_key(const Crypto1State& s);  // inverse of crypto1_init

// One cipher step: emits the filter bit, then shifts in
// feedback ^ in ^ (ret when is_encrypted).
uint8_t crypto1_bit(Crypto1State& s, uint8_t in, int is_encrypted);
uint8_t crypto1_byte(Crypto1State& s, uint8_t in, int is_encrypted);

// 32 steps over a wire word. Wire words carry the first transmitted byte in
// bits 31..24 and transmit each byte LSB-first, so step t uses bit t^24.
uint32_t crypto1_word(Crypto1State& s, uint32_t in, int is_encrypted);

// Inverse steps; `in`/words are replayed newest-first internally.
uint8_t crypto1_rollback_bit(Crypto1State& s, uint8_t in, int is_encrypted);
uint32_t crypto1_rollback_word(Crypto1State& s, uint32_t in, int is_encrypted);

// (ks1, ks2, ks3) for the handshake: init with key, feed uid^nT, then ks1
// covers nR, ks2 covers suc2(nT), ks3 covers the tag answer.
struct Keystream96 {
    uint32_t ks1 = 0, ks2 = 0, ks3 = 0;
};
Keystream96 crypto1_keystream(uint64_t key, uint32_t uid, uint32_t nt,
                              uint32_t nr);

// 16-bit tag nonce generator, s[i+16] = s[i] ^ s[i+2] ^ s[i+3] ^ s[i+5].
// step16 advances a 16-bit MSB-first window by one shift; prng_successor
// advances a 32-bit wire-packed nonce by n shifts; suc = 32 shifts.
uint16_t step16(uint16_t x);
uint32_t prng_successor(uint32_t x, uint32_t n);
uint32_t suc(uint32_t n);
uint32_t suc2(uint32_t n);
uint32_t suc3(uint32_t n);

// All cipher states which, starting just after key load, produce keystream
// word `ks` while `in` is fed unencrypted (meet-in-the-middle over the two
// register halves). Expected yield ~2^16 states.
std::vector<Crypto1State> recover_keystream32(uint32_t ks, uint32_t in);

// crypto1_filter precomputed over all 2^20 read positions.
const uint8_t* crypto1_filter_table();

}  // namespace rfidforge::mifare
