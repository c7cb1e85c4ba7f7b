#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "macfcs/model.hpp"

namespace macfcs {

struct SimConfig {
  std::size_t n = 8;        // blocklength in channel symbols
  int blocks = 4;           // block-Markov schemes only
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::map<std::string, double> rates;  // bits per symbol, scheme-specific names
  double epsilon = 0.05;    // codebook-size slack added to entropy-derived default rates
  int workers = 0;          // 0 = one per hardware thread
};

struct SimOutcome {
  long errors = 0;
  std::size_t trials = 0;
  double error_rate = 0.0;
  // Which decoding stage failed; a trial may log several stage failures,
  // so counts can sum past `errors`.
  std::map<std::string, long> breakdown;
  std::vector<std::string> notes;
};

// Decoding everywhere is maximum likelihood with a conservative tie rule:
// scores within 1e-9 of the maximum count as a tie, and ties are errors.

// Slepian-Wolf random binning at rates R1, R2 against a noiseless
// destination that knows the source joint. Bins are a fresh seeded uniform
// hash per trial; if a bin count exceeds the sequence count the binning
// degenerates to the identity (zero error, noted in `notes`).
SimOutcome simulate_sw(const SourcePair& src, const SimConfig& cfg);

// Classical MAC random coding toward Y3 at rates R1, R2 with i.i.d.
// codebooks from the given input pmfs and uniform messages. Rejects
// n * rate > 24 per codebook.
SimOutcome simulate_mac(const Channel& ch, const SimConfig& cfg,
                        const std::vector<double>& p_x1, const std::vector<double>& p_x2);

// The ML pair decoder used by simulate_mac, exposed for direct testing.
// loglaw3 is indexed [x1 * x2_card + x2][y3]; codebooks are message-major
// symbol sequences. Returns the decoded pair and whether the maximum tied.
struct MacDecodeResult {
  std::size_t m1 = 0, m2 = 0;
  bool tie = false;
};
MacDecodeResult mac_ml_decode(const std::vector<std::vector<double>>& loglaw3,
                              std::size_t x2_card,
                              const std::vector<std::vector<std::uint8_t>>& cb1,
                              const std::vector<std::vector<std::uint8_t>>& cb2,
                              const std::vector<std::uint8_t>& y3);

// Block-Markov decode-forward scheme: per block both nodes index their fresh
// source block into seeded hash bins, superimpose the previous block's
// agreed triple, and transmit; node 1 ML-decodes the other node's fresh
// index from Y1 (stage "node1-decode-k"), node 2 from Y2 ("node2-decode-j"),
// and the destination ML-decodes each block's triple across two blocks
// (stages "dest-4a".."dest-4g" by error pattern). Decoding mistakes
// propagate through each party's running belief of the shared triple. Block
// 0 uses the publicly known triple (0,0,0); the final block's fresh indices
// are not counted. A trial is an error when any destination triple over
// blocks 0..B-2 is wrong.
//
// Rates R0 (shared index), R1 (node 1 fresh), R2 (node 2 fresh) default to
// the source-statistics demands plus cfg.epsilon; a demand of zero keeps a
// zero rate (single-codeword book) rather than gaining the slack.
SimOutcome simulate_df(const Channel& ch, const SourcePair& src, const DFInput& in,
                       const SimConfig& cfg);

struct TrendRow {
  std::size_t n = 0;
  std::size_t trials = 0;
  long errors = 0;
  double error_rate = 0.0;
  std::map<std::string, long> breakdown;
};

// Runs `op` for each config; configs must agree on everything but n.
std::vector<TrendRow> trend_report(const std::function<SimOutcome(const SimConfig&)>& op,
                                   std::vector<SimConfig> cfgs);

// CSV with header "n,trials,errors,error_rate,stage_breakdown"; the
// breakdown column is a semicolon-joined label:count list.
std::string trend_csv(const std::vector<TrendRow>& rows);

}  // namespace macfcs
