#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rfidforge::stdkb {

enum class BandClass { LF, HF, UHF, OTHER };

enum class Direction { READER_TO_TAG, TAG_TO_READER, UNSPECIFIED };

enum class ModulationId {
    ASK, DSB_ASK, SSB_ASK, PR_ASK, FSK, BPSK, DBPSK, PJM, OOK, GMSK, PSK
};

enum class CodingId {
    DBP, DP, NRZ, NRZ_L, PIE, MANCHESTER, PPM, MFM,
    MODIFIED_MILLER, MILLER, FM0, DIFFERENTIAL_MANCHESTER, NONE
};

struct FreqSpan {
    double lo_hz = 0.0;
    double hi_hz = 0.0;  // lo == hi for a point row
};

struct StandardRecord {
    std::string standard;
    std::string mode_or_type;
    Direction direction = Direction::UNSPECIFIED;
    std::string carrier_text;       // as printed, e.g. "860-960 MHz"
    std::vector<FreqSpan> carrier;  // parsed spans/points
    std::vector<ModulationId> modulations;
    std::vector<CodingId> codings;
    std::string applications;
};

struct FccId {
    std::string grantee_code;  // exactly 3 chars
    std::string product_code;  // 1-14 alphanumeric chars
};

// LF 30-300 kHz, HF 3-30 MHz, UHF 300 MHz - 3 GHz; the gaps are OTHER.
BandClass classify_band(double freq_hz);

// Embedded physical-layer table, one record per standard/mode/direction
// sub-row. Read-only after first use.
const std::vector<StandardRecord>& knowledge_base();

// Records whose carrier matches the frequency (inside a range row, or within
// +/-1% of a point row) and whose modulation/coding sets contain the query.
// A direction-specific query still matches direction-unspecified rows, so
// relaxing the direction never shrinks the result.
std::vector<StandardRecord> identify_standard(double freq_hz, ModulationId mod,
                                              CodingId coding,
                                              std::optional<Direction> dir = {});
std::vector<StandardRecord> identify_standard(BandClass band, ModulationId mod,
                                              CodingId coding,
                                              std::optional<Direction> dir = {});

// 4-17 alphanumeric chars; grantee is the first three.
FccId parse_fcc_id(const std::string& text);

ModulationId parse_modulation(const std::string& text);
CodingId parse_coding(const std::string& text);

std::string to_string(BandClass b);
std::string to_string(Direction d);
std::string to_string(ModulationId m);
std::string to_string(CodingId c);

// One line per record in the table's column order.
std::string render_records(const std::vector<StandardRecord>& records);

}  // namespace rfidforge::stdkb
