#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "macfcs/prob.hpp"

namespace macfcs {

// Canonical variable names used across joints built by this module.
namespace var {
inline constexpr const char* S1 = "S1";
inline constexpr const char* S2 = "S2";
inline constexpr const char* X1 = "X1";
inline constexpr const char* X2 = "X2";
inline constexpr const char* Y1 = "Y1";
inline constexpr const char* Y2 = "Y2";
inline constexpr const char* Y3 = "Y3";
inline constexpr const char* W0 = "W0";
inline constexpr const char* W1 = "W1";
inline constexpr const char* W2 = "W2";
inline constexpr const char* U1 = "U1";
inline constexpr const char* U2 = "U2";
inline constexpr const char* Yt1 = "Yt1";
inline constexpr const char* Yt2 = "Yt2";
}  // namespace var

// The channel: transition law of (Y1,Y2,Y3) given the two inputs (X1,X2).
struct Channel {
  std::size_t x1_card, x2_card, y1_card, y2_card, y3_card;
  Factor law;  // children (Y1,Y2,Y3), parents (X1,X2)

  // probs is flattened row-major over (x1, x2, y1, y2, y3).
  static Channel make(std::size_t x1_card, std::size_t x2_card, std::size_t y1_card,
                      std::size_t y2_card, std::size_t y3_card, std::vector<double> probs);
};

// Uniform component structure: S1 = (D,E), S2 = (D,F) with D,E,F independent
// and uniform. Kept on the SourcePair when it was built that way so the
// simulator can index the shared component separately.
struct CommonPartShape {
  std::size_t d, e, f;
};

struct SourcePair {
  std::size_t s1_card, s2_card;
  Dist joint;  // over (S1, S2)
  std::optional<CommonPartShape> common;

  // probs is flattened row-major over (s1, s2).
  static SourcePair make(std::size_t s1_card, std::size_t s2_card, std::vector<double> probs);
};

// S1 = (D,E) encoded as D*e + E, S2 = (D,F) encoded as D*f + F; uniform over
// consistent pairs.
SourcePair make_common_part_source(std::size_t d, std::size_t e, std::size_t f);

// The six entropy statistics every rate bound consumes, in bits.
struct SourceStats {
  double h_s1, h_s2, h_s1_given_s2, h_s2_given_s1, h_joint, i_s1_s2;
};

SourceStats source_stats(const SourcePair& s);

// Decode-forward auxiliary input: p(w0) p(w1) p(w2) p(x1|w0,w1,w2) p(x2|w0,w1,w2).
struct DFInput {
  std::size_t w0_card, w1_card, w2_card;
  Dist p_w0, p_w1, p_w2;
  Factor f_x1, f_x2;  // child X1 / X2, parents (W0, W1, W2)

  static DFInput make(std::size_t w0_card, std::size_t w1_card, std::size_t w2_card,
                      std::vector<double> p_w0, std::vector<double> p_w1,
                      std::vector<double> p_w2, std::vector<double> f_x1,
                      std::vector<double> f_x2, std::size_t x1_card, std::size_t x2_card);

  static DFInput uniform(std::size_t w0_card, std::size_t w1_card, std::size_t w2_card,
                         std::size_t x1_card, std::size_t x2_card);
};

// Compress-forward auxiliary input:
// p(u1) p(x1|u1) p(u2) p(x2|u2) p(yt1|y1,x1) p(yt2|y2,x2).
struct CFInput {
  std::size_t u1_card, u2_card, yt1_card, yt2_card;
  Dist p_u1, p_u2;
  Factor f_x1, f_x2;    // child X1 (parent U1) / X2 (parent U2)
  Factor f_yt1, f_yt2;  // child Yt1 (parents Y1,X1) / Yt2 (parents Y2,X2)

  static CFInput make(std::size_t u1_card, std::size_t u2_card, std::size_t yt1_card,
                      std::size_t yt2_card, std::vector<double> p_u1, std::vector<double> p_u2,
                      std::vector<double> f_x1, std::vector<double> f_x2,
                      std::vector<double> f_yt1, std::vector<double> f_yt2,
                      std::size_t x1_card, std::size_t x2_card, std::size_t y1_card,
                      std::size_t y2_card);

  static CFInput uniform(std::size_t u1_card, std::size_t u2_card, std::size_t yt1_card,
                         std::size_t yt2_card, std::size_t x1_card, std::size_t x2_card,
                         std::size_t y1_card, std::size_t y2_card);
};

// Joint over (W0,W1,W2,X1,X2,Y1,Y2,Y3).
Dist build_df_joint(const Channel& ch, const DFInput& in);

// Joint over (U1,U2,X1,X2,Y1,Y2,Y3,Yt1,Yt2).
Dist build_cf_joint(const Channel& ch, const CFInput& in);

}  // namespace macfcs
