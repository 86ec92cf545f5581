#pragma once

#include "rfidforge/streams.hpp"
#include "rfidforge/trace.hpp"

#include <utility>

namespace rfidforge::demod {

enum class DemodStatus { OK, NOT_ASK, NOT_FSK, NO_SIGNAL };

struct BitLevelOutcome {
    DemodStatus status = DemodStatus::OK;
    BitStream stream;  // levels at the detected base symbol rate
};

struct FskOutcome {
    DemodStatus status = DemodStatus::OK;
    PulseStream pulses;
};

// Threshold demodulation gated on envelope bimodality; mirrors the askdemod
// command that refuses FSK input instead of mis-decoding it.
BitLevelOutcome ask_demod(const SampleTrace& trace, double carrier_hz);
BitLevelOutcome ask_demod(const LevelStream& env);

// Classifies each modulation cycle FAST/SLOW by its measured period, with
// the class boundary at the geometric mean of the two nominal periods
// (divisor * carrier period). Unimodal period histograms come back NOT_FSK.
FskOutcome fsk_demod(const SampleTrace& trace, double carrier_hz,
                     std::pair<int, int> divisors);

// Carrier estimate for an FSK trace, where the waveform oscillates at the
// divided-down rates and the carrier itself never appears: oscillation
// periods are clustered fast/slow and mapped back through the divisors (a
// divisor-d pulse spans d carrier cycles). Returns 0 when the period
// histogram is not bimodal or the two estimates disagree by more than 10%.
double infer_fsk_carrier(const SampleTrace& trace, std::pair<int, int> divisors);

enum class Modulation { ASK, FSK, UNKNOWN };

struct ModulationGuess {
    Modulation kind = Modulation::UNKNOWN;
    double confidence = 0.0;  // between-class separation score of the winner
};

// Needs at least 32 modulation cycles. Amplitude bimodality wins over period
// bimodality: on-off keying also produces two period classes (carrier
// present/absent), so the amplitude test must run first.
ModulationGuess detect_modulation(const SampleTrace& trace, double carrier_hz);

}  // namespace rfidforge::demod
