// Acceptance gate: one self-contained check per shipped capability, each
// printing a single PASS/FAIL line. Exit status is nonzero when any fails.
#include <array>
#include <bitset>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rfidforge/analyze.hpp"
#include "rfidforge/crypto1.hpp"
#include "rfidforge/demod.hpp"
#include "rfidforge/dsp.hpp"
#include "rfidforge/fdxb.hpp"
#include "rfidforge/hfprobe.hpp"
#include "rfidforge/hid.hpp"
#include "rfidforge/linecode.hpp"
#include "rfidforge/mifare.hpp"
#include "rfidforge/sigio.hpp"
#include "rfidforge/stdkb.hpp"
#include "rfidforge/trace.hpp"

using namespace rfidforge;

namespace {

int failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
    std::printf("%s: %d. %s%s%s\n", ok ? "PASS" : "FAIL", n, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Band detection on the measured antenna voltage pairs.

void criterion_band_detection() {
    auto t0 = std::chrono::steady_clock::now();
    dsp::TuneReport no_tag;
    no_tag.v_lf_125 = 11.34;
    no_tag.v_lf_134 = 22.61;
    no_tag.v_hf_1356 = 9.24;
    dsp::TuneReport with_tag;
    with_tag.v_lf_125 = 10.20;
    with_tag.v_lf_134 = 14.34;  // 36 percent drop at 134 kHz
    with_tag.v_hf_1356 = 8.87;  // 4 percent drop at 13.56 MHz
    dsp::DetectedBand band = dsp::detect_band(no_tag, with_tag, 0.25);
    bool ok = band == dsp::DetectedBand::LF;
    report(1, "band detection from tune voltage drops", ok,
           fmt("hf 9.24->8.87 V, lf 22.61->14.34 V @134 kHz, threshold 0.25 "
               "-> %s in %.3f ms",
               band == dsp::DetectedBand::LF
                   ? "LF"
                   : (band == dsp::DetectedBand::HF ? "HF" : "UNKNOWN"),
               seconds_since(t0) * 1e3));
}

// ---------------------------------------------------------------------------
// 2. Resonant frequency: unit point and monotonicity.

void criterion_resonance() {
    double f = dsp::resonant_frequency(1.0, 1.0);
    double want = 1.0 / (2.0 * std::numbers::pi);
    double rel = std::fabs(f - want) / want;
    bool ok = rel <= 1e-12;

    std::mt19937_64 rng(0x7E50AA01);
    std::uniform_real_distribution<double> exp_d(-9.0, 0.0);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        double l = std::pow(10.0, exp_d(rng));
        double c = std::pow(10.0, exp_d(rng));
        double base = dsp::resonant_frequency(l, c);
        if (!(dsp::resonant_frequency(l * 1.5, c) < base) ||
            !(dsp::resonant_frequency(l, c * 1.5) < base))
            ++bad;
    }
    ok = ok && bad == 0;
    report(2, "resonant frequency unit point and monotonicity", ok,
           fmt("f(1 H, 1 F) rel err %.2e (<= 1e-12), %d/1000 monotonicity "
               "violations",
               rel, bad));
}

// ---------------------------------------------------------------------------
// 3. Badge frames end to end, the published readout prefix, decode speed,
//    and the brute-force space size.

void criterion_badge_end_to_end() {
    sigio::SynthesisSpec spec;
    spec.carrier_hz = 125000.0;
    spec.modulation = sigio::Modulation::FSK;
    spec.fsk_divisors = {{8, 10}};

    std::mt19937_64 rng(0xACCE9703);
    int bad = 0;
    double single_decode_s = 0.0;
    const int kFrames = 10000;
    for (int i = 0; i < kFrames; ++i) {
        uint64_t raw = rng() & ((1ull << 44) - 1);
        hid::HidFrame f = hid::HidFrame::from_raw(raw);
        SampleTrace trace = sigio::synthesize_pulses(hid::encode_hid(f), spec);

        auto t0 = std::chrono::steady_clock::now();
        double fc = demod::infer_fsk_carrier(trace, {8, 10});
        bool one_ok = fc > 0.0;
        if (one_ok) {
            demod::FskOutcome out = demod::fsk_demod(trace, fc, {8, 10});
            one_ok = out.status == demod::DemodStatus::OK;
            if (one_ok) {
                try {
                    one_ok = hid::decode_hid(out.pulses) == f;
                } catch (const std::exception&) {
                    one_ok = false;
                }
            }
        }
        single_decode_s = seconds_since(t0);
        if (!one_ok)
            ++bad;
    }

    hid::HidFrame anchor;
    anchor.manufacturer_code = 37;
    anchor.card_format = 523;
    anchor.facility_code = 36;
    anchor.card_id = 1096;
    std::string bits;
    for (uint8_t b : anchor.bits().bits)
        bits.push_back(b ? '1' : '0');
    char hex[16];
    snprintf(hex, sizeof hex, "%08x",
             (unsigned)(hid::display_value(anchor) >> 32));
    bool anchor_ok =
        bits.substr(0, 32) == "01001010100000101100010010000000" &&
        std::string(hex) == "00000950";

    hid::HidFrame prefix;
    prefix.manufacturer_code = 1;
    prefix.card_format = 1;
    uint64_t space = hid::brute_space(42, prefix).size();

    bool ok = bad == 0 && single_decode_s < 1.0 && anchor_ok &&
              space == 67108864ull;
    report(3, "badge synth/demod/decode round trips", ok,
           fmt("%d/%d frames exact, last decode %.3f s (< 1 s), readout hex "
               "prefix %s, brute space %llu",
               kFrames - bad, kFrames, single_decode_s, hex,
               (unsigned long long)space));
}

// ---------------------------------------------------------------------------
// 4. Animal-tag frames end to end, clean and at 12 dB after lowpass, plus
//    the frozen frame's CRC and control-bit error listing.

fdxb::FdxbFrame random_animal_frame(std::mt19937_64& rng) {
    fdxb::FdxbFrame f;
    f.national_code = rng() & ((1ull << 38) - 1);
    f.country_code = (uint16_t)(rng() & 0x3FF);
    f.animal_flag = (uint8_t)(rng() & 1);
    f.reserved = (uint16_t)(rng() & 0x3FFF);
    if ((rng() & 3) == 0) {
        f.data_block_flag = 1;
        f.extra_data = (uint32_t)(rng() & 0xFFFFFF);
    }
    return f;
}

void criterion_animal_tag_end_to_end() {
    sigio::SynthesisSpec spec;
    spec.carrier_hz = 134200.0;
    spec.modulation = sigio::Modulation::ASK;

    std::mt19937_64 rng(0xACCE9704);
    int clean_bad = 0, noisy_bad = 0;
    const int kFrames = 1000;
    for (int i = 0; i < kFrames; ++i) {
        fdxb::FdxbFrame f = random_animal_frame(rng);
        SampleTrace trace = sigio::synthesize_bits(
            fdxb::encode_fdxb(f), spec, sigio::SynthCoding::DBP);

        analyze::AnalysisReport clean = analyze::analyze(trace);
        if (!(clean.complete && clean.fdxb_report &&
              clean.fdxb_report->crc_ok && clean.fdxb_report->frame &&
              *clean.fdxb_report->frame == fdxb::normalized(f)))
            ++clean_bad;

        SampleTrace noisy = sigio::add_noise(trace, 12.0, 0xB0B0 + (uint64_t)i);
        SampleTrace filtered = dsp::lowpass(noisy, 2.0 * 134200.0);
        analyze::AnalysisReport rn = analyze::analyze(filtered);
        if (!(rn.complete && rn.fdxb_report && rn.fdxb_report->crc_ok &&
              rn.fdxb_report->frame &&
              *rn.fdxb_report->frame == fdxb::normalized(f)))
            ++noisy_bad;
    }

    fdxb::FdxbFrame anchor;
    anchor.country_code = 981;
    anchor.national_code = 98104278921ULL;
    anchor.animal_flag = 1;
    anchor.reserved = 0x0BFE;
    uint16_t crc = fdxb::frame_crc(anchor);
    bool crc_ok = crc == 0x3763;

    BitStream b = fdxb::encode_fdxb(anchor);
    b.bits[11 + 8] = 0;           // control bit after payload byte 0
    b.bits[11 + 2 * 9 + 8] = 0;   // control bit after payload byte 2
    fdxb::FdxbReadReport rep = fdxb::decode_fdxb(b);
    bool ctrl_ok = rep.control_bit_errors.size() == 2 &&
                   rep.control_bit_errors[0] == 19 &&
                   rep.control_bit_errors[1] == 37;
    std::string rendered = fdxb::render_report(rep);
    ctrl_ok = ctrl_ok &&
              rendered.find("Bit control error in bit 19") != std::string::npos;

    bool ok = clean_bad == 0 && noisy_bad == 0 && crc_ok && ctrl_ok;
    report(4, "animal tag synth/demod/decode round trips", ok,
           fmt("%d/%d clean, %d/%d at 12 dB after lowpass, frozen frame crc "
               "%04x (want 3763), control-bit errors %s",
               kFrames - clean_bad, kFrames, kFrames - noisy_bad, kFrames, crc,
               ctrl_ok ? "listed by index" : "WRONG"));
}

// ---------------------------------------------------------------------------
// 5. Refusal-leak statistics and fixed-nonce key recovery.

void criterion_darkside() {
    using namespace rfidforge::mifare;
    MifareCard card(0x5A17D00Du);
    std::mt19937_64 rng(0xACCE9705);
    const int kAttempts = 100000;
    int leaks = 0;
    for (int i = 0; i < kAttempts; ++i) {
        std::array<uint8_t, 8> resp;
        for (auto& v : resp)
            v = (uint8_t)rng();
        if (darkside_leak(card, 0, KeyType::A, resp, (uint8_t)rng()))
            ++leaks;
    }
    double mean = kAttempts / 256.0;
    double sigma = std::sqrt(kAttempts * (1.0 / 256.0) * (255.0 / 256.0));
    bool leak_ok = std::fabs(leaks - mean) <= 3.0 * sigma;

    bool keys_ok = true;
    double worst_s = 0.0;
    uint64_t worst_calls = 0;
    auto try_key = [&](uint64_t key) {
        MifareCard victim(0x0718B208u);
        victim.set_key(0, KeyType::A, key);
        auto t0 = std::chrono::steady_clock::now();
        try {
            DarksideResult r = darkside_attack(victim, 0, KeyType::A);
            keys_ok = keys_ok && r.key == key && r.oracle_calls <= 1000000ull;
            worst_calls = std::max(worst_calls, r.oracle_calls);
        } catch (const std::exception&) {
            keys_ok = false;
        }
        double el = seconds_since(t0);
        worst_s = std::max(worst_s, el);
        keys_ok = keys_ok && el < 300.0;
    };
    try_key(0xFFFFFFFFFFFFULL);
    for (int i = 0; i < 100; ++i)
        try_key(rng() & 0xFFFFFFFFFFFFULL);

    bool ok = leak_ok && keys_ok;
    report(5, "fixed-nonce refusal attack", ok,
           fmt("%d leaks / %d attempts (expect %.0f +/- %.0f), 101/101 keys "
               "recovered, worst %.1f s and %llu oracle calls per key",
               leaks, kAttempts, mean, 3.0 * sigma, worst_s,
               (unsigned long long)worst_calls));
}

// ---------------------------------------------------------------------------
// 6. Nested key recovery across all sectors.

void criterion_nested() {
    using namespace rfidforge::mifare;

    MifareCard plain(0x0718B208u);
    NestedResult r = nested_attack(plain, 0, KeyType::A, 0xFFFFFFFFFFFFULL);
    int res = 0;
    for (const auto& s : r.sectors)
        res += (s.res_a ? 1 : 0) + (s.res_b ? 1 : 0);
    std::string table = render_key_table(r);
    bool shape_ok =
        table.find("sec\tkey A\tres\tkey B\tres\n") == 0 &&
        table.find("000\tffffffffffff\t1\tffffffffffff\t1\n") !=
            std::string::npos &&
        table.find("015\t") != std::string::npos;

    MifareCard random_card(0x44D1F00Du);
    std::mt19937_64 rng(0xACCE9706);
    std::array<std::array<uint64_t, 2>, 16> truth{};
    for (int s = 0; s < kSectorCount; ++s) {
        truth[(size_t)s][0] = rng() & 0xFFFFFFFFFFFFULL;
        truth[(size_t)s][1] = rng() & 0xFFFFFFFFFFFFULL;
        if (s == 0)
            truth[0][0] = 0xFFFFFFFFFFFFULL;  // the one known key
        random_card.set_key(s, KeyType::A, truth[(size_t)s][0]);
        random_card.set_key(s, KeyType::B, truth[(size_t)s][1]);
    }
    auto t0 = std::chrono::steady_clock::now();
    NestedResult rr =
        nested_attack(random_card, 0, KeyType::A, 0xFFFFFFFFFFFFULL);
    double el = seconds_since(t0);
    int good = 0;
    for (int s = 0; s < kSectorCount; ++s) {
        if (rr.sectors[(size_t)s].res_a &&
            rr.sectors[(size_t)s].key_a == truth[(size_t)s][0])
            ++good;
        if (rr.sectors[(size_t)s].res_b &&
            rr.sectors[(size_t)s].key_b == truth[(size_t)s][1])
            ++good;
    }

    bool ok = res == 32 && shape_ok && good == 32;
    report(6, "nested key recovery over all sectors", ok,
           fmt("default card %d/32 res=1 (table %s), random-keyed card %d/32 "
               "keys in %.0f s",
               res, shape_ok ? "in layout" : "WRONG LAYOUT", good, el));
}

// ---------------------------------------------------------------------------
// 7. Standards identification and table completeness.

void criterion_standards() {
    using stdkb::CodingId;
    using stdkb::Direction;
    using stdkb::ModulationId;

    auto animal =
        stdkb::identify_standard(134200.0, ModulationId::ASK, CodingId::DBP);
    bool animal_ok = animal.size() == 1 &&
                     animal[0].standard == "ISO/IEC 11785" &&
                     animal[0].mode_or_type == "FDX/FDX-B";

    auto hf = stdkb::identify_standard(13.56e6, ModulationId::ASK,
                                       CodingId::MODIFIED_MILLER,
                                       Direction::READER_TO_TAG);
    bool hf_ok = !hf.empty() && hf[0].standard == "ISO/IEC 14443" &&
                 hf[0].mode_or_type == "Type A";

    size_t rows = stdkb::knowledge_base().size();
    bool ok = animal_ok && hf_ok && rows == 43;
    report(7, "standards identification", ok,
           fmt("134.2 kHz ASK DBP -> %s %s; 13.56 MHz ASK Modified Miller "
               "R->T -> %s %s; %zu/43 table rows",
               animal_ok ? "ISO/IEC 11785" : "WRONG",
               animal_ok ? "FDX/FDX-B" : "", hf_ok ? "ISO/IEC 14443" : "WRONG",
               hf_ok ? "Type A" : "", rows));
}

// ---------------------------------------------------------------------------
// 8. HF probe bytes, status shape, and hexsamples layout.

void criterion_hf_probe() {
    using namespace rfidforge::hfprobe;
    VirtualHfTag tag;
    tag.standard = HfStandard::ISO14443B;
    tag.uid_or_pupi = {0x50, 0x08, 0x5C, 0x11};
    tag.response_payload = {0x50, 0x08, 0x5C, 0xAB, 0x7E, 0xCD, 0x4F, 0x44,
                            0x4B, 0x33, 0x22, 0xEF, 0x74, 0x01, 0x44, 0x44};

    ProbeSession ses(tag);
    const ProbeResult& r = ses.run_probe();
    bool probe_ok = r.identified == HfStandard::ISO14443B &&
                    !r.attempts.empty() && r.attempts.back().answered &&
                    r.attempts.back().sent ==
                        std::vector<uint8_t>{0x05, 0x00, 0x08, 0x39, 0x73} &&
                    r.status_14b[1] == 1 &&
                    r.status_14b == std::array<uint32_t, 3>{3, 1, 0xe};

    std::string hex = ses.hexsamples();
    bool hex_ok =
        hex == "50 08 5c ab 7e cd 4f 44\n4b 33 22 ef 74 01 44 44\n";

    bool ok = probe_ok && hex_ok;
    report(8, "hf probe and sample dump", ok,
           fmt("probe bytes {05 00 08 39 73} %s, status 3 1 e %s, hexsamples "
               "layout %s",
               probe_ok ? "sent" : "WRONG", probe_ok ? "ok" : "WRONG",
               hex_ok ? "ok" : "WRONG"));
}

// ---------------------------------------------------------------------------
// 9. Property suites.

struct BitSerialCipher {
    std::array<uint8_t, 48> s{};
    explicit BitSerialCipher(uint64_t key) {
        for (int n = 0; n < 48; ++n)
            s[n] = (uint8_t)(key >> ((47 - n) ^ 7) & 1);
    }
    static uint8_t fa(uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
        return (uint8_t)((((a | b) ^ (a & d)) ^ (c & ((a ^ b) | d))) & 1);
    }
    static uint8_t fb(uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
        return (uint8_t)((((a & b) | c) ^ ((a ^ b) & (c | d))) & 1);
    }
    static uint8_t fc(uint8_t a, uint8_t b, uint8_t c, uint8_t d, uint8_t e) {
        return (uint8_t)(((a | ((b | e) & (d ^ e))) ^
                          ((a ^ (b & d)) & ((c ^ d) | (b & e)))) &
                         1);
    }
    uint8_t step(uint8_t in, int enc) {
        static constexpr int taps[] = {0,  5,  9,  10, 12, 14, 15, 17, 19,
                                       24, 25, 27, 29, 35, 39, 41, 42, 43};
        uint8_t out =
            fc(fa(s[9], s[11], s[13], s[15]), fb(s[17], s[19], s[21], s[23]),
               fb(s[25], s[27], s[29], s[31]), fa(s[33], s[35], s[37], s[39]),
               fb(s[41], s[43], s[45], s[47]));
        uint8_t feed = (uint8_t)((in ^ (enc ? out : 0)) & 1);
        for (int t : taps)
            feed ^= s[t];
        for (int i = 0; i < 47; ++i)
            s[i] = s[i + 1];
        s[47] = (uint8_t)(feed & 1);
        return out;
    }
};

void criterion_properties() {
    std::mt19937_64 rng(0xACCE9709);

    // Line-code round trips under timing jitter of 20 percent of a half-bit.
    int code_bad = 0;
    std::uniform_real_distribution<double> jit(-0.2, 0.2);
    for (linecode::LineCodeId code :
         {linecode::LineCodeId::MANCHESTER, linecode::LineCodeId::DBP,
          linecode::LineCodeId::NRZ}) {
        for (int i = 0; i < 10000; ++i) {
            BitStream b;
            b.bits.resize(8 + rng() % 120);
            for (auto& bit : b.bits)
                bit = (uint8_t)(rng() & 1);
            LevelStream l = linecode::encode(b, code);
            for (auto& d : l.durations)
                d += 0.5 * jit(rng);
            try {
                if (linecode::decode(l, code, 1.0).bits != b.bits)
                    ++code_bad;
            } catch (const std::exception&) {
                ++code_bad;
            }
        }
    }

    // Differential bi-phase ignores polarity.
    int pol_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        BitStream b;
        b.bits.resize(48);
        for (auto& bit : b.bits)
            bit = (uint8_t)(rng() & 1);
        LevelStream l = linecode::encode(b, linecode::LineCodeId::DBP);
        for (auto& lev : l.levels)
            lev = lev == Level::HIGH ? Level::LOW : Level::HIGH;
        if (linecode::decode(l, linecode::LineCodeId::DBP, 1.0).bits != b.bits)
            ++pol_bad;
    }

    // Trace files round trip byte for byte.
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rfidforge_acceptance";
    fs::create_directories(dir);
    SampleTrace t;
    t.sample_rate_hz = 4.0e6;
    t.label = "acceptance round trip";
    t.samples.resize(8192);
    for (auto& v : t.samples)
        v = (uint8_t)rng();
    sigio::write_trace(t, (dir / "t.trace").string());
    SampleTrace back = sigio::read_trace((dir / "t.trace").string());
    bool trace_ok = back.samples == t.samples && back.label == t.label &&
                    back.sample_rate_hz == t.sample_rate_hz;
    fs::remove_all(dir);

    // Optimized cipher vs the bit-serial reference.
    int cipher_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        uint64_t key = rng() & 0xFFFFFFFFFFFFULL;
        mifare::Crypto1State s = mifare::crypto1_init(key);
        BitSerialCipher ref(key);
        for (int step = 0; step < 96; ++step) {
            uint8_t in = (uint8_t)(rng() & 1);
            int enc = (step % 3 == 2) ? 1 : 0;
            if (mifare::crypto1_bit(s, in, enc) != ref.step(in, enc)) {
                ++cipher_bad;
                break;
            }
        }
    }

    // Nonce-successor bijectivity, exhaustively over the 16-bit state space.
    std::bitset<65536> seen;
    bool suc_ok = mifare::step16(0) == 0;
    for (uint32_t x = 0; x < 65536 && suc_ok; ++x) {
        uint16_t y = mifare::step16((uint16_t)x);
        if (seen[y])
            suc_ok = false;
        seen[y] = true;
    }
    suc_ok = suc_ok && seen.all();

    bool ok = code_bad == 0 && pol_bad == 0 && trace_ok && cipher_bad == 0 &&
              suc_ok;
    report(9, "property suites", ok,
           fmt("line codes %d/30000 failed, polarity %d/1000 failed, trace "
               "round trip %s, cipher equivalence %d/1000 failed, successor "
               "bijective %s",
               code_bad, pol_bad, trace_ok ? "ok" : "WRONG", cipher_bad,
               suc_ok ? "yes" : "NO"));
}

}  // namespace

int main() {
    criterion_band_detection();
    criterion_resonance();
    criterion_badge_end_to_end();
    criterion_animal_tag_end_to_end();
    criterion_darkside();
    criterion_nested();
    criterion_standards();
    criterion_hf_probe();
    criterion_properties();
    return failures == 0 ? 0 : 1;
}
