#include "rfidforge/crypto1.hpp"

#include <algorithm>
#include <array>

namespace rfidforge::mifare {

namespace {

inline uint32_t bebit(uint32_t x, int t) { return x >> (t ^ 24) & 1; }

// filter() reads bits 0..19 only, so one table covers every reachable input.
const uint8_t* filter_lut() {
    static const std::vector<uint8_t> lut = [] {
        std::vector<uint8_t> t(1u << 20);
        for (uint32_t x = 0; x < (1u << 20); ++x)
            t[x] = (uint8_t)crypto1_filter(x);
        return t;
    }();
    return lut.data();
}

}  // namespace

const uint8_t* crypto1_filter_table() { return filter_lut(); }

Crypto1State crypto1_init(uint64_t key) {
    Crypto1State s;
    for (int i = 47; i > 0; i -= 2) {
        s.odd = s.odd << 1 | (uint32_t)(key >> ((i - 1) ^ 7) & 1);
        s.even = s.even << 1 | (uint32_t)(key >> (i ^ 7) & 1);
    }
    return s;
}

uint64_t crypto1_key(const Crypto1State& s) {
    uint64_t key = 0;
    for (int n = 0; n < 24; ++n) {
        key |= (uint64_t)(s.odd >> (23 - n) & 1) << ((46 - 2 * n) ^ 7);
        key |= (uint64_t)(s.even >> (23 - n) & 1) << ((47 - 2 * n) ^ 7);
    }
    return key;
}

uint8_t crypto1_bit(Crypto1State& s, uint8_t in, int is_encrypted) {
    uint8_t ret = (uint8_t)crypto1_filter(s.odd);
    uint32_t feedin = (uint32_t)(ret & (is_encrypted ? 1 : 0));
    feedin ^= in & 1u;
    feedin ^= s.odd & kLfsrPolyOdd;
    feedin ^= s.even & kLfsrPolyEven;
    uint32_t odd = (s.even << 1 | parity32(feedin)) & 0xFFFFFF;
    s.even = s.odd;
    s.odd = odd;
    return ret;
}

uint8_t crypto1_byte(Crypto1State& s, uint8_t in, int is_encrypted) {
    uint8_t ret = 0;
    for (int t = 0; t < 8; ++t)
        ret |= (uint8_t)(crypto1_bit(s, in >> t & 1, is_encrypted) << t);
    return ret;
}

uint32_t crypto1_word(Crypto1State& s, uint32_t in, int is_encrypted) {
    uint32_t ret = 0;
    for (int t = 0; t < 32; ++t)
        ret |= (uint32_t)crypto1_bit(s, (uint8_t)bebit(in, t), is_encrypted)
               << (t ^ 24);
    return ret;
}

uint8_t crypto1_rollback_bit(Crypto1State& s, uint8_t in, int is_encrypted) {
    uint32_t nb = s.odd & 1;
    uint32_t prev_odd = s.even;
    uint32_t even_lo = s.odd >> 1;  // previous even half without its top bit
    uint8_t ret = (uint8_t)crypto1_filter(prev_odd);
    uint32_t top = nb ^ (uint32_t)(ret & (is_encrypted ? 1 : 0)) ^ (in & 1u)
                 ^ parity32(prev_odd & kLfsrPolyOdd)
                 ^ parity32(even_lo & kLfsrPolyEven);
    s.odd = prev_odd;
    s.even = even_lo | top << 23;
    return ret;
}

uint32_t crypto1_rollback_word(Crypto1State& s, uint32_t in, int is_encrypted) {
    uint32_t ret = 0;
    for (int t = 31; t >= 0; --t)
        ret |= (uint32_t)crypto1_rollback_bit(s, (uint8_t)bebit(in, t),
                                              is_encrypted)
               << (t ^ 24);
    return ret;
}

Keystream96 crypto1_keystream(uint64_t key, uint32_t uid, uint32_t nt,
                              uint32_t nr) {
    Crypto1State s = crypto1_init(key);
    crypto1_word(s, uid ^ nt, 0);
    Keystream96 ks;
    ks.ks1 = crypto1_word(s, nr, 0);
    ks.ks2 = crypto1_word(s, 0, 0);
    ks.ks3 = crypto1_word(s, 0, 0);
    return ks;
}

uint16_t step16(uint16_t x) {
    return (uint16_t)((x << 1 & 0xFFFF) | parity32(x & 0xB400));
}

uint32_t prng_successor(uint32_t x, uint32_t n) {
    x = __builtin_bswap32(x);
    while (n--)
        x = x >> 1 | ((x >> 16 ^ x >> 18 ^ x >> 19 ^ x >> 21) & 1) << 31;
    return __builtin_bswap32(x);
}

uint32_t suc(uint32_t n) { return prng_successor(n, 32); }
uint32_t suc2(uint32_t n) { return prng_successor(n, 64); }
uint32_t suc3(uint32_t n) { return prng_successor(n, 96); }

// --- keystream inversion -------------------------------------------------
//
// Outputs alternate between two shifting 24-bit words: with a_k = odd at
// step 2k and b_k = odd at step 2k+1,
//   a_{k+1} = a_k << 1 | fb(2k+1)     filter(a_k) = out(2k)
//   b_{k+1} = b_k << 1 | fb(2k+2)     filter(b_k) = out(2k+1)
// Each track is enumerated from its 20-bit filter window and extended one
// bit at a time. The inserted feedback bits couple the tracks:
//   fb(2k+1) = in(2k+1) ^ par(b_k & PO) ^ par(a_k & PE)
//   fb(2k+2) = in(2k+2) ^ par(a_{k+1} & PO) ^ par(b_k & PE)
// which is split into one per-track signature word each; candidates join on
// signature equality. Seed bits 20..23 of either track never reach the
// filter window, so they are resolved at join time from the few signature
// positions their parity contributions can touch.

namespace {

struct TrackCand {
    uint32_t word;  // current 24-bit window, seed high bits held at zero
    uint32_t seed;  // original 20-bit filter window
    uint16_t sig_po;
    uint16_t sig_pe;
};

std::vector<TrackCand> enumerate_track(const uint8_t o[32], const uint8_t in[32],
                                       bool a_track) {
    const uint8_t* lut = filter_lut();
    std::vector<TrackCand> cur;
    cur.reserve(1u << 20);
    uint8_t first = a_track ? o[0] : o[1];
    for (uint32_t x = 0; x < (1u << 20); ++x)
        if (lut[x] == first)
            cur.push_back({x, x, 0, 0});

    std::vector<TrackCand> next;
    next.reserve(cur.size() * 2);
    for (int k = 0; k <= 14; ++k) {
        uint8_t want = a_track ? o[2 * k + 2] : o[2 * k + 3];
        next.clear();
        for (const TrackCand& c : cur) {
            uint32_t po = parity32(c.word & kLfsrPolyOdd);
            uint32_t pe = parity32(c.word & kLfsrPolyEven);
            for (uint32_t nb = 0; nb < 2; ++nb) {
                uint32_t w2 = (c.word << 1 | nb) & 0xFFFFFF;
                if (lut[w2 & 0xFFFFF] != want)
                    continue;
                TrackCand n = c;
                n.word = w2;
                if (a_track) {
                    n.sig_po |= (uint16_t)((nb ^ in[2 * k + 1] ^ pe) << k);
                    n.sig_pe |= (uint16_t)(
                        (in[2 * k + 2] ^ parity32(w2 & kLfsrPolyOdd)) << k);
                } else {
                    n.sig_po |= (uint16_t)(po << k);
                    n.sig_pe |= (uint16_t)((pe ^ nb) << k);
                }
                next.push_back(n);
            }
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace

std::vector<Crypto1State> recover_keystream32(uint32_t ks, uint32_t in) {
    uint8_t o[32], ib[32];
    for (int t = 0; t < 32; ++t) {
        o[t] = (uint8_t)bebit(ks, t);
        ib[t] = (uint8_t)bebit(in, t);
    }

    std::vector<TrackCand> atr = enumerate_track(o, ib, true);
    std::vector<TrackCand> btr = enumerate_track(o, ib, false);

    // Signature positions 0..3 of either word are reachable by seed bits
    // 20..23 (via feedback taps 21 and 23 shifting through); positions 4..14
    // are not, and form the join key.
    auto clean_key = [](const TrackCand& c) {
        return (uint32_t)((c.sig_po >> 4) & 0x7FF) |
               (uint32_t)((c.sig_pe >> 4) & 0x7FF) << 11;
    };

    std::vector<uint64_t> bidx;
    bidx.reserve(btr.size());
    for (size_t i = 0; i < btr.size(); ++i)
        bidx.push_back((uint64_t)clean_key(btr[i]) << 24 | i);
    std::sort(bidx.begin(), bidx.end());

    std::vector<Crypto1State> found;
    for (const TrackCand& a : atr) {
        uint64_t lo = (uint64_t)clean_key(a) << 24;
        auto it = std::lower_bound(bidx.begin(), bidx.end(), lo);
        for (; it != bidx.end() && (*it >> 24) == (lo >> 24); ++it) {
            const TrackCand& b = btr[*it & 0xFFFFFF];
            uint32_t da = (uint32_t)((a.sig_po & 0xF) | (a.sig_pe & 0xF) << 4);
            uint32_t db = (uint32_t)((b.sig_po & 0xF) | (b.sig_pe & 0xF) << 4);
            uint32_t d = da ^ db;
            // Solve the seed high bits from the dirty signature positions.
            uint32_t fb0 = d >> 7 & 1, fb1 = d >> 6 & 1, fb2 = d >> 5 & 1;
            uint32_t fa0 = d >> 3 & 1, fa1 = d >> 2 & 1;
            uint32_t fa3 = (d & 1) ^ fb1;
            uint32_t fa2 = (d >> 1 & 1) ^ fb0;
            uint32_t fb3 = (d >> 4 & 1) ^ fa0;
            uint32_t fa = fa0 | fa1 << 1 | fa2 << 2 | fa3 << 3;
            uint32_t fb = fb0 | fb1 << 1 | fb2 << 2 | fb3 << 3;

            uint32_t odd0 = a.seed | fa << 20;
            uint32_t b0 = b.seed | fb << 20;
            uint32_t even0 = b0 >> 1;
            uint32_t want_fb0 = b0 & 1;
            uint32_t have = ib[0] ^ parity32(odd0 & kLfsrPolyOdd)
                          ^ parity32(even0 & kLfsrPolyEven);
            if (have != want_fb0)
                even0 |= 1u << 23;

            Crypto1State cand{odd0, even0};
            Crypto1State run = cand;
            bool ok = true;
            for (int t = 0; t < 32 && ok; ++t)
                ok = crypto1_bit(run, ib[t], 0) == o[t];
            if (ok)
                found.push_back(cand);
        }
    }
    return found;
}

}  // namespace rfidforge::mifare
