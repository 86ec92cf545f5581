#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rfidforge/analyze.hpp"
#include "rfidforge/demod.hpp"
#include "rfidforge/dsp.hpp"
#include "rfidforge/fdxb.hpp"
#include "rfidforge/hfprobe.hpp"
#include "rfidforge/hid.hpp"
#include "rfidforge/mifare.hpp"
#include "rfidforge/sigio.hpp"
#include "rfidforge/stdkb.hpp"

namespace {

using namespace rfidforge;

uint64_t parse_hex64(const std::string& s) {
    if (s.empty() || s.size() > 16 ||
        s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
        throw CLI::ValidationError("hex value", "bad hex literal: " + s);
    return std::stoull(s, nullptr, 16);
}

mifare::KeyType parse_key_type(const std::string& s) {
    if (s == "a" || s == "A")
        return mifare::KeyType::A;
    if (s == "b" || s == "B")
        return mifare::KeyType::B;
    throw CLI::ValidationError("key type", "expected a or b, got: " + s);
}

// --- tune -------------------------------------------------------------------

struct TuneOpts {
    double lf125 = 11.34, lf134 = 22.61, hf = 0.62;  // LF antenna on the bench
    std::string tag_band = "none";
    double coupling = 0.36;
};

int run_tune(const TuneOpts& o) {
    dsp::VirtualAntennaLoad load;
    load.baseline_v_lf_125 = o.lf125;
    load.baseline_v_lf_134 = o.lf134;
    load.baseline_v_hf = o.hf;
    load.coupling = o.coupling;
    if (o.tag_band == "lf")
        load.band = dsp::AntennaBand::LF;
    else if (o.tag_band == "hf")
        load.band = dsp::AntennaBand::HF;
    else if (o.tag_band == "none")
        load.band = dsp::AntennaBand::NONE;
    else
        throw CLI::ValidationError("--tag-band", "expected none, lf or hf");
    std::cout << "proxmark3> hw tune\n"
              << dsp::render_tune_report(dsp::hw_tune(load));
    return 0;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeOpts {
    std::string trace_path;
    std::string label, fcc_id;
};

int run_analyze(const AnalyzeOpts& o) {
    analyze::AnalysisOptions opt;
    if (!o.label.empty())
        opt.label = o.label;
    if (!o.fcc_id.empty())
        opt.fcc_id = o.fcc_id;
    SampleTrace trace;
    if (!o.trace_path.empty())
        trace = sigio::read_trace(o.trace_path);
    else if (o.label.empty() && o.fcc_id.empty())
        throw CLI::ValidationError("analyze",
                                   "need --trace, --label or --fcc-id");
    analyze::AnalysisReport rep = analyze::analyze(trace, opt);
    std::cout << analyze::render_report(rep);
    return rep.complete ? 0 : 1;
}

// --- demod ------------------------------------------------------------------

int run_demod_ask(const std::string& path) {
    SampleTrace trace = sigio::read_trace(path);
    double carrier = dsp::estimate_carrier(trace);
    demod::BitLevelOutcome out = demod::ask_demod(trace, carrier);
    std::cout << "proxmark3> data askdemod\n";
    if (out.status != demod::DemodStatus::OK) {
        std::cout << "askdemod: no ASK modulation detected\n";
        return 1;
    }
    std::string bits;
    for (uint8_t b : out.stream.bits)
        bits += (char)('0' + b);
    std::cout << "bits: '" << bits << "'\n";
    return 0;
}

int run_demod_fsk(const std::string& path, int div_fast, int div_slow) {
    SampleTrace trace = sigio::read_trace(path);
    std::pair<int, int> div{div_fast, div_slow};
    double carrier = demod::infer_fsk_carrier(trace, div);
    if (carrier <= 0.0)
        carrier = dsp::estimate_carrier(trace);
    demod::FskOutcome out = demod::fsk_demod(trace, carrier, div);
    std::cout << "proxmark3> data fskdemod\n";
    if (out.status != demod::DemodStatus::OK) {
        std::cout << "fskdemod: no FSK modulation detected\n";
        return 1;
    }
    try {
        hid::HidDecodeDetail d = hid::decode_hid_detail(out.pulses);
        int spc = (int)(trace.sample_rate_hz / carrier + 0.5);
        std::cout << hid::render_fskdemod(out.pulses, d, div, spc);
    } catch (const std::exception& e) {
        std::cout << "fskdemod: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// --- decode / encode --------------------------------------------------------

int run_decode_hid(const std::string& path) {
    SampleTrace trace = sigio::read_trace(path);
    double carrier = demod::infer_fsk_carrier(trace, {8, 10});
    if (carrier <= 0.0)
        carrier = dsp::estimate_carrier(trace);
    demod::FskOutcome out = demod::fsk_demod(trace, carrier, {8, 10});
    std::cout << "proxmark3> lf hid fskdemod\n";
    if (out.status != demod::DemodStatus::OK) {
        std::cout << "no FSK modulation detected\n";
        return 1;
    }
    try {
        std::cout << hid::render_tag_id(hid::decode_hid(out.pulses));
    } catch (const std::exception& e) {
        std::cout << "decode failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_decode_fdxb(const std::string& path) {
    SampleTrace trace = sigio::read_trace(path);
    analyze::AnalysisReport rep = analyze::analyze(trace);
    if (!rep.fdxb_report) {
        std::cout << "no FDX-B frame found\n";
        return 1;
    }
    std::cout << fdxb::render_report(*rep.fdxb_report);
    return rep.fdxb_report->crc_ok ? 0 : 1;
}

struct HidFrameOpts {
    unsigned mfr = 1, fmt = 1, fc_bit = 0, facility = 0, ic_bit = 0;
    unsigned card = 0;
};

hid::HidFrame to_frame(const HidFrameOpts& o) {
    hid::HidFrame f;
    f.manufacturer_code = (uint8_t)o.mfr;
    f.card_format = (uint16_t)o.fmt;
    f.format_control_bit = (uint8_t)o.fc_bit;
    f.facility_code = (uint8_t)o.facility;
    f.card_id = (uint16_t)o.card;
    f.id_control_bit = (uint8_t)o.ic_bit;
    f.validate();
    return f;
}

int run_encode_hid(const HidFrameOpts& o) {
    hid::HidFrame f = to_frame(o);
    BitStream bits = f.bits();
    std::string text;
    for (uint8_t b : bits.bits)
        text += (char)('0' + b);
    uint64_t disp = hid::display_value(f);
    char buf[64];
    std::cout << "bits: '" << text << "'\n";
    snprintf(buf, sizeof buf, "hex: %08x %08x\n", (unsigned)(disp >> 32),
             (unsigned)(disp & 0xFFFFFFFF));
    std::cout << buf << hid::render_tag_id(f);
    return 0;
}

struct FdxbFrameOpts {
    uint64_t national = 0;
    unsigned country = 0, animal = 1, dbf = 0, reserved = 0;
    std::string extra;
};

fdxb::FdxbFrame to_frame(const FdxbFrameOpts& o) {
    fdxb::FdxbFrame f;
    f.national_code = o.national;
    f.country_code = (uint16_t)o.country;
    f.animal_flag = (uint8_t)o.animal;
    f.data_block_flag = (uint8_t)o.dbf;
    f.reserved = (uint16_t)o.reserved;
    if (!o.extra.empty()) {
        f.extra_data = (uint32_t)parse_hex64(o.extra);
        f.data_block_flag = 1;
    } else if (f.data_block_flag) {
        f.extra_data = 0;
    }
    f.validate();
    return f;
}

int run_encode_fdxb(const FdxbFrameOpts& o) {
    fdxb::FdxbFrame f = to_frame(o);
    BitStream bits = fdxb::encode_fdxb(f);
    std::string text;
    for (uint8_t b : bits.bits)
        text += (char)('0' + b);
    char buf[32];
    std::cout << "bits: '" << text << "'\n";
    snprintf(buf, sizeof buf, "crc: %04x\n", fdxb::frame_crc(f));
    std::cout << buf;
    return 0;
}

// --- identify ----------------------------------------------------------------

struct IdentifyOpts {
    double freq = 0.0;
    std::string modulation, coding, direction;
};

int run_identify(const IdentifyOpts& o) {
    stdkb::ModulationId mod = stdkb::parse_modulation(o.modulation);
    stdkb::CodingId cod = stdkb::parse_coding(o.coding);
    std::optional<stdkb::Direction> dir;
    if (o.direction == "r2t")
        dir = stdkb::Direction::READER_TO_TAG;
    else if (o.direction == "t2r")
        dir = stdkb::Direction::TAG_TO_READER;
    else if (!o.direction.empty())
        throw CLI::ValidationError("--direction", "expected r2t or t2r");
    auto rows = stdkb::identify_standard(o.freq, mod, cod, dir);
    if (rows.empty()) {
        std::cout << "no standard matched\n";
        return 1;
    }
    std::cout << stdkb::render_records(rows);
    return 0;
}

// --- hf probe ----------------------------------------------------------------

int run_hf_probe(const std::string& tag_path, bool hexsamples) {
    hfprobe::VirtualHfTag tag = hfprobe::load_tag_spec(tag_path);
    hfprobe::ProbeSession session(tag);
    const hfprobe::ProbeResult& r = session.run_probe();
    std::cout << r.transcript;
    if (r.identified == hfprobe::HfStandard::NONE) {
        std::cout << "\nno standard identified\n";
        return 1;
    }
    std::cout << "\nidentified: " << hfprobe::standard_name(r.identified)
              << "\n";
    if (hexsamples)
        std::cout << "\nproxmark3> data hexsamples\n" << session.hexsamples();
    return 0;
}

// --- mf ----------------------------------------------------------------------

struct CardOpts {
    std::string uid_hex = "0718b208";
    std::string card_keys;  // key file applied to the simulated card
    unsigned nonce_seed = 0x2A1B;
};

mifare::MifareCard make_card(const CardOpts& o) {
    mifare::MifareCard card((uint32_t)parse_hex64(o.uid_hex),
                            (uint16_t)o.nonce_seed);
    if (!o.card_keys.empty()) {
        mifare::KeyTable t = mifare::load_key_file(o.card_keys);
        for (int s = 0; s < mifare::kSectorCount; ++s) {
            card.set_key(s, mifare::KeyType::A, t.key_a[s]);
            card.set_key(s, mifare::KeyType::B, t.key_b[s]);
        }
    }
    return card;
}

int run_mf_auth(const CardOpts& c, int sector, const std::string& type,
                const std::string& key_hex) {
    mifare::MifareCard card = make_card(c);
    mifare::AuthTranscript t = mifare::authenticate(
        card, sector, parse_key_type(type), parse_hex64(key_hex));
    char buf[96];
    snprintf(buf, sizeof buf, "uid(%08x) nt(%08x) nr_ct(%08x) ar_ct(%08x)\n",
             t.uid, t.nt, t.nr_ct, t.ar_ct);
    std::cout << buf;
    if (t.success) {
        snprintf(buf, sizeof buf, "auth: success, at_ct(%08x)\n", t.at_ct);
        std::cout << buf;
        return 0;
    }
    std::cout << (t.nacked ? "auth: refused (NACK)\n"
                           : "auth: no response\n");
    return 1;
}

int run_mf_darkside(const CardOpts& c, int sector, const std::string& type,
                    uint64_t max_calls, unsigned seed) {
    mifare::MifareCard card = make_card(c);
    mifare::DarksideOptions opt;
    opt.max_oracle_calls = max_calls;
    opt.rng_seed = seed;
    std::cout << "proxmark3> hf mf mifare\n";
    try {
        mifare::DarksideResult r =
            mifare::darkside_attack(card, sector, parse_key_type(type), opt);
        std::cout << r.log;
    } catch (const std::runtime_error& e) {
        std::cout << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_mf_nested(const CardOpts& c, int known_sector,
                  const std::string& known_type,
                  const std::string& known_key_hex, unsigned window,
                  const std::string& save_keys) {
    mifare::MifareCard card = make_card(c);
    mifare::KeyType kt = parse_key_type(known_type);
    uint64_t key = parse_hex64(known_key_hex);
    char buf[96];
    snprintf(buf, sizeof buf, "proxmark3> hf nf nested 1 %d %c %012llx\n",
             known_sector * 4, kt == mifare::KeyType::A ? 'a' : 'b',
             (unsigned long long)key);
    std::cout << buf;
    mifare::NestedOptions opt;
    opt.max_distance_window = window;
    mifare::NestedResult r;
    try {
        r = mifare::nested_attack(card, known_sector, kt, key, opt);
    } catch (const std::invalid_argument& e) {
        std::cout << e.what() << "\n";
        return 1;
    }
    std::cout << mifare::render_nested_log(r, known_sector, kt, key);
    if (!save_keys.empty())
        mifare::save_key_file(save_keys, mifare::key_table(r));
    for (const auto& s : r.sectors)
        if (!s.res_a || !s.res_b)
            return 1;
    return 0;
}

int run_mf_dump(const CardOpts& c, const std::string& keys_path,
                const std::string& out_path) {
    mifare::MifareCard card = make_card(c);
    mifare::KeyTable keys = mifare::load_key_file(keys_path);
    mifare::CardDump d = mifare::dump_card(card, keys);
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write dump: " + out_path);
    out.write((const char*)d.bytes.data(), (std::streamsize)d.bytes.size());
    bool all = true;
    for (int s = 0; s < mifare::kSectorCount; ++s) {
        std::printf("sector %02d: %s\n", s,
                    d.sector_ok[s] ? "dumped" : "FAILED");
        all &= d.sector_ok[s];
    }
    return all ? 0 : 1;
}

// --- synth / plot-export ------------------------------------------------------

struct SynthOpts {
    std::string kind;  // hid | fdxb | carrier
    HidFrameOpts hid;
    FdxbFrameOpts fdxb;
    double carrier_hz = 0.0;  // 0 = kind default
    double snr_db = 0.0;      // 0 = noiseless
    unsigned seed = 1;
    int cycles_per_bit = 32;
    int spc = 32;
    int cycles = 512;
    std::string out;
};

int run_synth(const SynthOpts& o) {
    sigio::SynthesisSpec spec;
    spec.samples_per_carrier_cycle = o.spc;

    SampleTrace trace;
    if (o.kind == "hid") {
        spec.carrier_hz = o.carrier_hz > 0 ? o.carrier_hz : 125000.0;
        spec.modulation = sigio::Modulation::FSK;
        spec.fsk_divisors = {8, 10};
        trace = sigio::synthesize_pulses(hid::encode_hid(to_frame(o.hid)),
                                         spec);
    } else if (o.kind == "fdxb") {
        spec.carrier_hz = o.carrier_hz > 0 ? o.carrier_hz : 134200.0;
        spec.modulation = sigio::Modulation::ASK;
        trace = sigio::synthesize_bits(fdxb::encode_fdxb(to_frame(o.fdxb)),
                                       spec, sigio::SynthCoding::DBP,
                                       o.cycles_per_bit);
    } else if (o.kind == "carrier") {
        spec.carrier_hz = o.carrier_hz > 0 ? o.carrier_hz : 125000.0;
        spec.modulation = sigio::Modulation::ASK;
        trace = sigio::synthesize_carrier(spec, o.cycles);
    } else {
        throw CLI::ValidationError("--kind", "expected hid, fdxb or carrier");
    }
    if (o.snr_db > 0.0)
        trace = sigio::add_noise(trace, o.snr_db, o.seed);
    sigio::write_trace(trace, o.out);
    std::cout << "wrote " << trace.samples.size() << " samples to " << o.out
              << "\n";
    return 0;
}

int run_plot_export(const std::string& trace_path, const std::string& out) {
    analyze::export_plot_data(sigio::read_trace(trace_path), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RFID reverse-engineering toolkit (simulation)"};
    app.require_subcommand(1);
    int rc = 0;

    // tune
    TuneOpts tune;
    CLI::App* c_tune = app.add_subcommand("tune", "antenna sweep report");
    c_tune->add_option("--lf125", tune.lf125, "no-tag LF voltage at 125 kHz");
    c_tune->add_option("--lf134", tune.lf134, "no-tag LF voltage at 134 kHz");
    c_tune->add_option("--hf", tune.hf, "no-tag HF voltage at 13.56 MHz");
    c_tune->add_option("--tag-band", tune.tag_band, "tag in field: none|lf|hf");
    c_tune->add_option("--coupling", tune.coupling, "tag coupling 0..1");
    c_tune->callback([&] { rc = run_tune(tune); });

    // analyze
    AnalyzeOpts an;
    CLI::App* c_an = app.add_subcommand("analyze", "full methodology pipeline");
    c_an->add_option("--trace", an.trace_path, "trace file");
    c_an->add_option("--label", an.label, "markings found on the tag");
    c_an->add_option("--fcc-id", an.fcc_id, "FCC ID printed on the tag");
    c_an->callback([&] { rc = run_analyze(an); });

    // demod
    CLI::App* c_demod = app.add_subcommand("demod", "demodulate a trace");
    c_demod->require_subcommand(1);
    std::string demod_trace;
    int div_fast = 8, div_slow = 10;
    CLI::App* c_dask = c_demod->add_subcommand("ask", "threshold demodulation");
    c_dask->add_option("--trace", demod_trace, "trace file")->required();
    c_dask->callback([&] { rc = run_demod_ask(demod_trace); });
    CLI::App* c_dfsk = c_demod->add_subcommand("fsk", "period demodulation");
    c_dfsk->add_option("--trace", demod_trace, "trace file")->required();
    c_dfsk->add_option("--fast", div_fast, "fast divisor");
    c_dfsk->add_option("--slow", div_slow, "slow divisor");
    c_dfsk->callback([&] { rc = run_demod_fsk(demod_trace, div_fast, div_slow); });

    // decode
    CLI::App* c_dec = app.add_subcommand("decode", "decode a protocol frame");
    c_dec->require_subcommand(1);
    std::string dec_trace;
    CLI::App* c_dec_hid = c_dec->add_subcommand("hid", "HID Prox readout");
    c_dec_hid->add_option("--trace", dec_trace, "trace file")->required();
    c_dec_hid->callback([&] { rc = run_decode_hid(dec_trace); });
    CLI::App* c_dec_fdxb = c_dec->add_subcommand("fdxb", "FDX-B readout");
    c_dec_fdxb->add_option("--trace", dec_trace, "trace file")->required();
    c_dec_fdxb->callback([&] { rc = run_decode_fdxb(dec_trace); });

    // encode
    CLI::App* c_enc = app.add_subcommand("encode", "frame fields to bits");
    c_enc->require_subcommand(1);
    HidFrameOpts hid_opts;
    CLI::App* c_enc_hid = c_enc->add_subcommand("hid", "HID Prox frame");
    c_enc_hid->add_option("--facility", hid_opts.facility, "facility code");
    c_enc_hid->add_option("--card", hid_opts.card, "card id")->required();
    c_enc_hid->add_option("--mfr", hid_opts.mfr, "manufacturer code");
    c_enc_hid->add_option("--format", hid_opts.fmt, "card format");
    c_enc_hid->add_option("--fc-bit", hid_opts.fc_bit, "format control bit");
    c_enc_hid->add_option("--ic-bit", hid_opts.ic_bit, "id control bit");
    c_enc_hid->callback([&] { rc = run_encode_hid(hid_opts); });
    FdxbFrameOpts fdxb_opts;
    CLI::App* c_enc_fdxb = c_enc->add_subcommand("fdxb", "FDX-B frame");
    c_enc_fdxb->add_option("--national", fdxb_opts.national, "national code")
        ->required();
    c_enc_fdxb->add_option("--country", fdxb_opts.country, "country code")
        ->required();
    c_enc_fdxb->add_option("--animal", fdxb_opts.animal, "animal flag");
    c_enc_fdxb->add_option("--dbf", fdxb_opts.dbf, "data block flag");
    c_enc_fdxb->add_option("--reserved", fdxb_opts.reserved, "reserved field");
    c_enc_fdxb->add_option("--extra", fdxb_opts.extra, "extra data (hex)");
    c_enc_fdxb->callback([&] { rc = run_encode_fdxb(fdxb_opts); });

    // identify
    IdentifyOpts id;
    CLI::App* c_id = app.add_subcommand("identify", "match physical layer");
    c_id->add_option("--freq", id.freq, "carrier frequency in Hz")->required();
    c_id->add_option("--modulation", id.modulation, "modulation name")
        ->required();
    c_id->add_option("--coding", id.coding, "line code name")->required();
    c_id->add_option("--direction", id.direction, "r2t or t2r");
    c_id->callback([&] { rc = run_identify(id); });

    // hf probe
    CLI::App* c_hf = app.add_subcommand("hf", "HF commands");
    c_hf->require_subcommand(1);
    std::string tag_path;
    bool want_hex = false;
    CLI::App* c_probe = c_hf->add_subcommand("probe", "standard trial probe");
    c_probe->add_option("--tag", tag_path, "virtual tag spec (json)")
        ->required();
    c_probe->add_flag("--hexsamples", want_hex, "dump payload after probing");
    c_probe->callback([&] { rc = run_hf_probe(tag_path, want_hex); });

    // mf
    CLI::App* c_mf = app.add_subcommand("mf", "MIFARE Classic commands");
    c_mf->require_subcommand(1);
    CardOpts card;
    auto add_card_opts = [&](CLI::App* s) {
        s->add_option("--uid", card.uid_hex, "card uid (hex)");
        s->add_option("--card-keys", card.card_keys,
                      "key file applied to the simulated card");
        s->add_option("--nonce-seed", card.nonce_seed,
                      "nonce generator power-on state");
    };
    int mf_sector = 0;
    std::string mf_type = "a", mf_key = "ffffffffffff";
    CLI::App* c_auth = c_mf->add_subcommand("auth", "single authentication");
    add_card_opts(c_auth);
    c_auth->add_option("--sector", mf_sector, "sector 0-15");
    c_auth->add_option("--type", mf_type, "key type a|b");
    c_auth->add_option("--key", mf_key, "key (12 hex digits)");
    c_auth->callback([&] { rc = run_mf_auth(card, mf_sector, mf_type, mf_key); });

    uint64_t ds_max_calls = 1000000;
    unsigned ds_seed = 0x0D06F00D;
    CLI::App* c_dark = c_mf->add_subcommand("darkside", "refusal-leak attack");
    add_card_opts(c_dark);
    c_dark->add_option("--sector", mf_sector, "sector 0-15");
    c_dark->add_option("--type", mf_type, "key type a|b");
    c_dark->add_option("--max-calls", ds_max_calls, "oracle call budget");
    c_dark->add_option("--seed", ds_seed, "attacker rng seed");
    c_dark->callback([&] {
        rc = run_mf_darkside(card, mf_sector, mf_type, ds_max_calls, ds_seed);
    });

    unsigned nested_window = 1000;
    std::string save_keys;
    CLI::App* c_nested =
        c_mf->add_subcommand("nested", "follow-up auth attack");
    add_card_opts(c_nested);
    c_nested->add_option("--known-sector", mf_sector, "sector of known key");
    c_nested->add_option("--known-type", mf_type, "key type a|b");
    c_nested->add_option("--known-key", mf_key, "known key (12 hex digits)");
    c_nested->add_option("--window", nested_window, "nonce distance window");
    c_nested->add_option("--save-keys", save_keys, "write recovered key file");
    c_nested->callback([&] {
        rc = run_mf_nested(card, mf_sector, mf_type, mf_key, nested_window,
                           save_keys);
    });

    std::string dump_keys, dump_out;
    CLI::App* c_dump = c_mf->add_subcommand("dump", "read card with keys");
    add_card_opts(c_dump);
    c_dump->add_option("--keys", dump_keys, "key file")->required();
    c_dump->add_option("--out", dump_out, "output file (1024 bytes)")
        ->required();
    c_dump->callback([&] { rc = run_mf_dump(card, dump_keys, dump_out); });

    // synth
    SynthOpts sy;
    CLI::App* c_sy = app.add_subcommand("synth", "synthesize a trace");
    c_sy->add_option("--kind", sy.kind, "hid | fdxb | carrier")->required();
    c_sy->add_option("--out", sy.out, "trace output file")->required();
    c_sy->add_option("--carrier", sy.carrier_hz, "carrier Hz (kind default)");
    c_sy->add_option("--snr", sy.snr_db, "add noise at this SNR (dB)");
    c_sy->add_option("--seed", sy.seed, "noise seed");
    c_sy->add_option("--spc", sy.spc, "samples per carrier cycle");
    c_sy->add_option("--cycles-per-bit", sy.cycles_per_bit,
                     "carrier cycles per bit (ask kinds)");
    c_sy->add_option("--cycles", sy.cycles, "carrier burst length");
    c_sy->add_option("--facility", sy.hid.facility, "hid facility code");
    c_sy->add_option("--card", sy.hid.card, "hid card id");
    c_sy->add_option("--mfr", sy.hid.mfr, "hid manufacturer code");
    c_sy->add_option("--format", sy.hid.fmt, "hid card format");
    c_sy->add_option("--fc-bit", sy.hid.fc_bit, "hid format control bit");
    c_sy->add_option("--ic-bit", sy.hid.ic_bit, "hid id control bit");
    c_sy->add_option("--national", sy.fdxb.national, "fdxb national code");
    c_sy->add_option("--country", sy.fdxb.country, "fdxb country code");
    c_sy->add_option("--animal", sy.fdxb.animal, "fdxb animal flag");
    c_sy->add_option("--dbf", sy.fdxb.dbf, "fdxb data block flag");
    c_sy->add_option("--reserved", sy.fdxb.reserved, "fdxb reserved field");
    c_sy->add_option("--extra", sy.fdxb.extra, "fdxb extra data (hex)");
    c_sy->callback([&] { rc = run_synth(sy); });

    // plot-export
    std::string plot_trace, plot_out;
    CLI::App* c_plot = app.add_subcommand("plot-export", "trace to CSV");
    c_plot->add_option("--trace", plot_trace, "trace file")->required();
    c_plot->add_option("--out", plot_out, "CSV output path")->required();
    c_plot->callback([&] { rc = run_plot_export(plot_trace, plot_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
