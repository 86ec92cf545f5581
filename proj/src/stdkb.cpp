#include "rfidforge/stdkb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rfidforge::stdkb {

namespace {

constexpr double kPointTolerance = 0.01;  // +/-1% around point rows

using M = ModulationId;
using C = CodingId;
using D = Direction;

FreqSpan pt(double hz) { return {hz, hz}; }

StandardRecord rec(std::string standard, std::string mode, D dir,
                   std::string carrier_text, std::vector<FreqSpan> carrier,
                   std::vector<M> mods, std::vector<C> codings,
                   std::string apps) {
    return {std::move(standard), std::move(mode),     dir,
            std::move(carrier_text), std::move(carrier), std::move(mods),
            std::move(codings),  std::move(apps)};
}

std::vector<StandardRecord> build_table() {
    const std::string kAnimal = "Animal identification";
    const std::string kCards18000_2 =
        "Smart cards, ticketing, animal identification, factory data collection";
    const std::string kGas = "Identification of gas cylinders";
    const std::string k18000_3 =
        "Smart cards, small item management, libraries, transportation, "
        "supply chain, passports, anti-theft";
    const std::string kVicinity = "Vicinity cards and item management";
    const std::string kProximity = "Proximity cards, item management";
    const std::string kNfc = "Near-field communications";
    const std::string kPallet = "Container/pallet tracking and security";
    const std::string kSeals =
        "Electronic seals of freight containers and other supply chain "
        "applications";
    const std::string kLargeItem =
        "Large item management, vehicle identification, supply chain, "
        "access/security";
    const std::string kItem6c =
        "Item management, vehicle identification, supply chain, "
        "access/security";
    const std::string kFreight = "Identification of freight containers";
    const std::string kTolls =
        "Road tolls, large item management, supply chain, access/security";

    std::vector<StandardRecord> t;
    t.push_back(rec("ISO/IEC 11785", "FDX/FDX-B", D::UNSPECIFIED, "134.2 kHz",
                    {pt(134.2e3)}, {M::ASK}, {C::DBP}, kAnimal));
    t.push_back(rec("ISO/IEC 11785", "HDX", D::UNSPECIFIED, "134.2 kHz",
                    {pt(134.2e3)}, {M::FSK}, {C::NRZ}, kAnimal));

    t.push_back(rec("ISO/IEC 14223", "FDX/HDX-ADV", D::UNSPECIFIED, "134.2 kHz",
                    {pt(134.2e3)}, {M::ASK}, {C::PIE}, "Advanced animal tagging"));

    t.push_back(rec("ISO/IEC 18000-2", "Type A", D::READER_TO_TAG, "125 kHz",
                    {pt(125e3)}, {M::ASK}, {C::PIE}, kCards18000_2));
    t.push_back(rec("ISO/IEC 18000-2", "Type A", D::TAG_TO_READER, "125 kHz",
                    {pt(125e3)}, {M::ASK}, {C::MANCHESTER, C::DP}, kCards18000_2));
    t.push_back(rec("ISO/IEC 18000-2", "Type B", D::READER_TO_TAG,
                    "125 kHz or 134.2 kHz", {pt(125e3), pt(134.2e3)}, {M::ASK},
                    {C::PIE}, kCards18000_2));
    t.push_back(rec("ISO/IEC 18000-2", "Type B", D::TAG_TO_READER,
                    "125 kHz or 134.2 kHz", {pt(125e3), pt(134.2e3)}, {M::FSK},
                    {C::NRZ}, kCards18000_2));

    t.push_back(rec("ISO 21007 (LF)", "-", D::UNSPECIFIED, "125 kHz",
                    {pt(125e3)}, {M::ASK}, {C::MANCHESTER}, kGas));

    t.push_back(rec("ISO/IEC 18000-3", "Mode 1", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::DBPSK}, {C::PPM}, k18000_3));
    t.push_back(rec("ISO/IEC 18000-3", "Mode 1", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::DBPSK}, {C::MANCHESTER}, k18000_3));
    t.push_back(rec("ISO/IEC 18000-3", "Mode 2", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::PJM}, {C::MFM}, k18000_3));
    t.push_back(rec("ISO/IEC 18000-3", "Mode 2", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::BPSK}, {C::MFM}, k18000_3));
    t.push_back(rec("ISO/IEC 18000-3", "Mode 3", D::UNSPECIFIED,
                    "13.56 MHz", {pt(13.56e6)}, {M::ASK}, {C::PIE}, k18000_3));
    t.push_back(rec("ISO/IEC 18000-3", "Mode 3", D::UNSPECIFIED,
                    "13.56 MHz", {pt(13.56e6)}, {M::PJM}, {C::MFM}, k18000_3));

    t.push_back(rec("ISO/IEC 15693", "-", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::PPM}, kVicinity));
    t.push_back(rec("ISO/IEC 15693", "-", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK, M::FSK}, {C::MANCHESTER}, kVicinity));

    t.push_back(rec("ISO/IEC 14443", "Type A", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::MODIFIED_MILLER}, kProximity));
    t.push_back(rec("ISO/IEC 14443", "Type A", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::OOK}, {C::MANCHESTER}, kProximity));
    t.push_back(rec("ISO/IEC 14443", "Type B", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::NRZ}, kProximity));
    t.push_back(rec("ISO/IEC 14443", "Type B", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::BPSK}, {C::NRZ_L}, kProximity));

    t.push_back(rec("ISO/IEC 18092 (NFC)", "A", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::MODIFIED_MILLER}, kNfc));
    t.push_back(rec("ISO/IEC 18092 (NFC)", "A", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK, M::OOK}, {C::MANCHESTER}, kNfc));
    t.push_back(rec("ISO/IEC 18092 (NFC)", "B", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::NRZ}, kNfc));
    t.push_back(rec("ISO/IEC 18092 (NFC)", "B", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK, M::BPSK}, {C::NRZ}, kNfc));
    t.push_back(rec("ISO/IEC 18092 (NFC)", "V", D::READER_TO_TAG, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::PPM}, kNfc));
    t.push_back(rec("ISO/IEC 18092 (NFC)", "V", D::TAG_TO_READER, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK, M::OOK, M::FSK}, {C::MANCHESTER},
                    kNfc));

    t.push_back(rec("ISO 21007 (HF)", "-", D::UNSPECIFIED, "13.56 MHz",
                    {pt(13.56e6)}, {M::ASK}, {C::MILLER}, kGas));

    t.push_back(rec("ISO/IEC 18000-7", "-", D::UNSPECIFIED, "433.92 MHz",
                    {pt(433.92e6)}, {M::FSK}, {C::MANCHESTER}, kPallet));

    t.push_back(rec("ISO 18185-5", "Type A", D::UNSPECIFIED, "433 MHz",
                    {pt(433e6)}, {M::FSK}, {C::MANCHESTER}, kSeals));
    t.push_back(rec("ISO 18185-5", "Type A", D::UNSPECIFIED, "123-125 kHz",
                    {{123e3, 125e3}}, {M::OOK}, {C::MANCHESTER}, kSeals));
    t.push_back(rec("ISO 18185-5", "Type B", D::UNSPECIFIED, "2.45 GHz",
                    {pt(2.45e9)}, {M::BPSK}, {C::DIFFERENTIAL_MANCHESTER},
                    kSeals));
    t.push_back(rec("ISO 18185-5", "Type B", D::UNSPECIFIED, "114-126 kHz",
                    {{114e3, 126e3}}, {M::FSK}, {C::DIFFERENTIAL_MANCHESTER},
                    kSeals));

    t.push_back(rec("ISO/IEC 18000-6", "Type A", D::READER_TO_TAG, "860-960 MHz",
                    {{860e6, 960e6}}, {M::ASK}, {C::PIE}, kLargeItem));
    t.push_back(rec("ISO/IEC 18000-6", "Type A", D::TAG_TO_READER, "860-960 MHz",
                    {{860e6, 960e6}}, {M::ASK}, {C::FM0}, kLargeItem));
    t.push_back(rec("ISO/IEC 18000-6", "Type B", D::READER_TO_TAG, "860-960 MHz",
                    {{860e6, 960e6}}, {M::ASK}, {C::MANCHESTER}, kLargeItem));
    t.push_back(rec("ISO/IEC 18000-6", "Type B", D::TAG_TO_READER, "860-960 MHz",
                    {{860e6, 960e6}}, {M::ASK}, {C::FM0}, kLargeItem));

    t.push_back(rec("ISO 18000-6C (EPC Class 1 Gen 2)", "-", D::READER_TO_TAG,
                    "860-960 MHz", {{860e6, 960e6}},
                    {M::DSB_ASK, M::SSB_ASK, M::PR_ASK}, {C::PIE}, kItem6c));
    t.push_back(rec("ISO 18000-6C (EPC Class 1 Gen 2)", "-", D::TAG_TO_READER,
                    "860-960 MHz", {{860e6, 960e6}}, {M::ASK, M::PSK},
                    {C::FM0, C::MILLER}, kItem6c));

    t.push_back(rec("ISO 10374", "-", D::UNSPECIFIED, "860-960 MHz, 2.45 GHz",
                    {{860e6, 960e6}, pt(2.45e9)}, {M::FSK}, {C::MANCHESTER},
                    kFreight));

    t.push_back(rec("ISO/IEC 18000-4", "Mode 1", D::READER_TO_TAG, "2.45 GHz",
                    {pt(2.45e9)}, {M::ASK}, {C::MANCHESTER}, kTolls));
    t.push_back(rec("ISO/IEC 18000-4", "Mode 1", D::TAG_TO_READER, "2.45 GHz",
                    {pt(2.45e9)}, {M::ASK}, {C::FM0}, kTolls));
    t.push_back(rec("ISO/IEC 18000-4", "Mode 2", D::READER_TO_TAG, "2.45 GHz",
                    {pt(2.45e9)}, {M::GMSK}, {C::NONE}, kTolls));
    t.push_back(rec("ISO/IEC 18000-4", "Mode 2", D::TAG_TO_READER, "2.45 GHz",
                    {pt(2.45e9)}, {M::DBPSK, M::OOK}, {C::MANCHESTER}, kTolls));
    return t;
}

bool span_matches_freq(const FreqSpan& s, double freq_hz) {
    if (s.lo_hz == s.hi_hz)
        return std::abs(freq_hz - s.lo_hz) <= kPointTolerance * s.lo_hz;
    return freq_hz >= s.lo_hz && freq_hz <= s.hi_hz;
}

bool band_interval(BandClass b, double& lo, double& hi) {
    switch (b) {
        case BandClass::LF: lo = 30e3; hi = 300e3; return true;
        case BandClass::HF: lo = 3e6; hi = 30e6; return true;
        case BandClass::UHF: lo = 300e6; hi = 3e9; return true;
        default: return false;
    }
}

bool direction_matches(const StandardRecord& r, std::optional<Direction> q) {
    if (!q || *q == Direction::UNSPECIFIED)
        return true;
    return r.direction == *q || r.direction == Direction::UNSPECIFIED;
}

template <typename T>
bool contains(const std::vector<T>& v, T x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

std::string normalize(const std::string& s) {
    std::string out;
    for (char c : s)
        if (std::isalnum((unsigned char)c))
            out += (char)std::tolower((unsigned char)c);
    return out;
}

}  // namespace

BandClass classify_band(double freq_hz) {
    if (freq_hz <= 0.0)
        throw std::domain_error("classify_band: frequency must be positive");
    if (freq_hz >= 30e3 && freq_hz <= 300e3)
        return BandClass::LF;
    if (freq_hz >= 3e6 && freq_hz <= 30e6)
        return BandClass::HF;
    if (freq_hz >= 300e6 && freq_hz <= 3e9)
        return BandClass::UHF;
    return BandClass::OTHER;
}

const std::vector<StandardRecord>& knowledge_base() {
    static const std::vector<StandardRecord> table = build_table();
    return table;
}

std::vector<StandardRecord> identify_standard(double freq_hz, ModulationId mod,
                                              CodingId coding,
                                              std::optional<Direction> dir) {
    if (freq_hz <= 0.0)
        throw std::domain_error("identify_standard: frequency must be positive");
    std::vector<StandardRecord> out;
    for (const StandardRecord& r : knowledge_base()) {
        bool freq_ok = std::any_of(r.carrier.begin(), r.carrier.end(),
                                   [&](const FreqSpan& s) {
                                       return span_matches_freq(s, freq_hz);
                                   });
        if (freq_ok && contains(r.modulations, mod) &&
            contains(r.codings, coding) && direction_matches(r, dir))
            out.push_back(r);
    }
    return out;
}

std::vector<StandardRecord> identify_standard(BandClass band, ModulationId mod,
                                              CodingId coding,
                                              std::optional<Direction> dir) {
    double lo, hi;
    if (!band_interval(band, lo, hi))
        return {};
    std::vector<StandardRecord> out;
    for (const StandardRecord& r : knowledge_base()) {
        bool freq_ok = std::any_of(r.carrier.begin(), r.carrier.end(),
                                   [&](const FreqSpan& s) {
                                       return s.lo_hz <= hi && s.hi_hz >= lo;
                                   });
        if (freq_ok && contains(r.modulations, mod) &&
            contains(r.codings, coding) && direction_matches(r, dir))
            out.push_back(r);
    }
    return out;
}

FccId parse_fcc_id(const std::string& text) {
    if (text.size() < 4 || text.size() > 17)
        throw std::invalid_argument("FCC ID must be 4-17 characters");
    for (char c : text)
        if (!std::isalnum((unsigned char)c))
            throw std::invalid_argument("FCC ID must be alphanumeric");
    return {text.substr(0, 3), text.substr(3)};
}

ModulationId parse_modulation(const std::string& text) {
    std::string n = normalize(text);
    if (n == "ask") return ModulationId::ASK;
    if (n == "dsbask") return ModulationId::DSB_ASK;
    if (n == "ssbask") return ModulationId::SSB_ASK;
    if (n == "prask") return ModulationId::PR_ASK;
    if (n == "fsk") return ModulationId::FSK;
    if (n == "bpsk") return ModulationId::BPSK;
    if (n == "dbpsk") return ModulationId::DBPSK;
    if (n == "pjm") return ModulationId::PJM;
    if (n == "ook") return ModulationId::OOK;
    if (n == "gmsk") return ModulationId::GMSK;
    if (n == "psk") return ModulationId::PSK;
    throw std::invalid_argument("unknown modulation id: " + text);
}

CodingId parse_coding(const std::string& text) {
    std::string n = normalize(text);
    if (n == "dbp") return CodingId::DBP;
    if (n == "dp") return CodingId::DP;
    if (n == "nrz") return CodingId::NRZ;
    if (n == "nrzl") return CodingId::NRZ_L;
    if (n == "pie") return CodingId::PIE;
    if (n == "manchester") return CodingId::MANCHESTER;
    if (n == "ppm") return CodingId::PPM;
    if (n == "mfm") return CodingId::MFM;
    if (n == "modifiedmiller") return CodingId::MODIFIED_MILLER;
    if (n == "miller") return CodingId::MILLER;
    if (n == "fm0") return CodingId::FM0;
    if (n == "differentialmanchester") return CodingId::DIFFERENTIAL_MANCHESTER;
    if (n == "none") return CodingId::NONE;
    throw std::invalid_argument("unknown coding id: " + text);
}

std::string to_string(BandClass b) {
    switch (b) {
        case BandClass::LF: return "LF";
        case BandClass::HF: return "HF";
        case BandClass::UHF: return "UHF";
        default: return "OTHER";
    }
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::READER_TO_TAG: return "Reader to Tag";
        case Direction::TAG_TO_READER: return "Tag to Reader";
        default: return "-";
    }
}

std::string to_string(ModulationId m) {
    switch (m) {
        case ModulationId::ASK: return "ASK";
        case ModulationId::DSB_ASK: return "DSB-ASK";
        case ModulationId::SSB_ASK: return "SSB-ASK";
        case ModulationId::PR_ASK: return "PR-ASK";
        case ModulationId::FSK: return "FSK";
        case ModulationId::BPSK: return "BPSK";
        case ModulationId::DBPSK: return "DBPSK";
        case ModulationId::PJM: return "PJM";
        case ModulationId::OOK: return "OOK";
        case ModulationId::GMSK: return "GMSK";
        default: return "PSK";
    }
}

std::string to_string(CodingId c) {
    switch (c) {
        case CodingId::DBP: return "DBP";
        case CodingId::DP: return "DP";
        case CodingId::NRZ: return "NRZ";
        case CodingId::NRZ_L: return "NRZ-L";
        case CodingId::PIE: return "PIE";
        case CodingId::MANCHESTER: return "Manchester";
        case CodingId::PPM: return "PPM";
        case CodingId::MFM: return "MFM";
        case CodingId::MODIFIED_MILLER: return "Modified Miller";
        case CodingId::MILLER: return "Miller";
        case CodingId::FM0: return "FM0";
        case CodingId::DIFFERENTIAL_MANCHESTER: return "Differential Manchester";
        default: return "None";
    }
}

std::string render_records(const std::vector<StandardRecord>& records) {
    std::ostringstream os;
    for (const StandardRecord& r : records) {
        os << r.standard << " | " << r.mode_or_type << " | "
           << to_string(r.direction) << " | " << r.carrier_text << " | ";
        for (size_t i = 0; i < r.modulations.size(); ++i)
            os << (i ? ", " : "") << to_string(r.modulations[i]);
        os << " | ";
        for (size_t i = 0; i < r.codings.size(); ++i)
            os << (i ? ", " : "") << to_string(r.codings[i]);
        os << " | " << r.applications << "\n";
    }
    return os.str();
}

}  // namespace rfidforge::stdkb
