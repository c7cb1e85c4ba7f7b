#include "macfcs/model.hpp"

#include <array>
#include <string>

namespace macfcs {

namespace {

std::vector<double> uniform_rows(std::size_t rows, std::size_t card) {
  return std::vector<double>(rows * card, 1.0 / static_cast<double>(card));
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw validation_error(msg);
}

}  // namespace

Channel Channel::make(std::size_t x1_card, std::size_t x2_card, std::size_t y1_card,
                      std::size_t y2_card, std::size_t y3_card, std::vector<double> probs) {
  Factor law({{var::Y1, y1_card}, {var::Y2, y2_card}, {var::Y3, y3_card}},
             {{var::X1, x1_card}, {var::X2, x2_card}}, std::move(probs));
  return Channel{x1_card, x2_card, y1_card, y2_card, y3_card, std::move(law)};
}

SourcePair SourcePair::make(std::size_t s1_card, std::size_t s2_card, std::vector<double> probs) {
  Dist joint({{var::S1, s1_card}, {var::S2, s2_card}}, std::move(probs));
  return SourcePair{s1_card, s2_card, std::move(joint), std::nullopt};
}

SourcePair make_common_part_source(std::size_t d, std::size_t e, std::size_t f) {
  require(d >= 1 && e >= 1 && f >= 1, "make_common_part_source: all component sizes must be >= 1");
  const std::size_t s1c = d * e, s2c = d * f;
  std::vector<double> probs(s1c * s2c, 0.0);
  const double mass = 1.0 / static_cast<double>(d * e * f);
  for (std::size_t dd = 0; dd < d; ++dd)
    for (std::size_t ee = 0; ee < e; ++ee)
      for (std::size_t ff = 0; ff < f; ++ff) {
        const std::size_t s1 = dd * e + ee, s2 = dd * f + ff;
        probs[s1 * s2c + s2] = mass;
      }
  auto sp = SourcePair::make(s1c, s2c, std::move(probs));
  sp.common = CommonPartShape{d, e, f};
  return sp;
}

SourceStats source_stats(const SourcePair& s) {
  const Dist& j = s.joint;
  SourceStats st{};
  st.h_s1 = entropy(j, {var::S1});
  st.h_s2 = entropy(j, {var::S2});
  st.h_joint = entropy(j, {var::S1, var::S2});
  st.h_s1_given_s2 = st.h_joint - st.h_s2;
  st.h_s2_given_s1 = st.h_joint - st.h_s1;
  st.i_s1_s2 = st.h_s1 + st.h_s2 - st.h_joint;
  if (st.h_s1_given_s2 < 0) st.h_s1_given_s2 = 0;
  if (st.h_s2_given_s1 < 0) st.h_s2_given_s1 = 0;
  if (st.i_s1_s2 < 0) st.i_s1_s2 = 0;
  return st;
}

DFInput DFInput::make(std::size_t w0_card, std::size_t w1_card, std::size_t w2_card,
                      std::vector<double> p_w0, std::vector<double> p_w1,
                      std::vector<double> p_w2, std::vector<double> f_x1,
                      std::vector<double> f_x2, std::size_t x1_card, std::size_t x2_card) {
  std::vector<Variable> wvars{{var::W0, w0_card}, {var::W1, w1_card}, {var::W2, w2_card}};
  return DFInput{w0_card,
                 w1_card,
                 w2_card,
                 Dist({{var::W0, w0_card}}, std::move(p_w0)),
                 Dist({{var::W1, w1_card}}, std::move(p_w1)),
                 Dist({{var::W2, w2_card}}, std::move(p_w2)),
                 Factor({{var::X1, x1_card}}, wvars, std::move(f_x1)),
                 Factor({{var::X2, x2_card}}, wvars, std::move(f_x2))};
}

DFInput DFInput::uniform(std::size_t w0_card, std::size_t w1_card, std::size_t w2_card,
                         std::size_t x1_card, std::size_t x2_card) {
  const std::size_t rows = w0_card * w1_card * w2_card;
  return make(w0_card, w1_card, w2_card, uniform_rows(1, w0_card), uniform_rows(1, w1_card),
              uniform_rows(1, w2_card), uniform_rows(rows, x1_card), uniform_rows(rows, x2_card),
              x1_card, x2_card);
}

CFInput CFInput::make(std::size_t u1_card, std::size_t u2_card, std::size_t yt1_card,
                      std::size_t yt2_card, std::vector<double> p_u1, std::vector<double> p_u2,
                      std::vector<double> f_x1, std::vector<double> f_x2,
                      std::vector<double> f_yt1, std::vector<double> f_yt2,
                      std::size_t x1_card, std::size_t x2_card, std::size_t y1_card,
                      std::size_t y2_card) {
  return CFInput{
      u1_card,
      u2_card,
      yt1_card,
      yt2_card,
      Dist({{var::U1, u1_card}}, std::move(p_u1)),
      Dist({{var::U2, u2_card}}, std::move(p_u2)),
      Factor({{var::X1, x1_card}}, {{var::U1, u1_card}}, std::move(f_x1)),
      Factor({{var::X2, x2_card}}, {{var::U2, u2_card}}, std::move(f_x2)),
      Factor({{var::Yt1, yt1_card}}, {{var::Y1, y1_card}, {var::X1, x1_card}}, std::move(f_yt1)),
      Factor({{var::Yt2, yt2_card}}, {{var::Y2, y2_card}, {var::X2, x2_card}}, std::move(f_yt2))};
}

CFInput CFInput::uniform(std::size_t u1_card, std::size_t u2_card, std::size_t yt1_card,
                         std::size_t yt2_card, std::size_t x1_card, std::size_t x2_card,
                         std::size_t y1_card, std::size_t y2_card) {
  return make(u1_card, u2_card, yt1_card, yt2_card, uniform_rows(1, u1_card),
              uniform_rows(1, u2_card), uniform_rows(u1_card, x1_card),
              uniform_rows(u2_card, x2_card), uniform_rows(y1_card * x1_card, yt1_card),
              uniform_rows(y2_card * x2_card, yt2_card), x1_card, x2_card, y1_card, y2_card);
}

namespace {

void check_df_dims(const Channel& ch, const DFInput& in) {
  require(in.f_x1.children()[0].card == ch.x1_card,
          "DFInput: f_x1 child cardinality does not match channel x1_card");
  require(in.f_x2.children()[0].card == ch.x2_card,
          "DFInput: f_x2 child cardinality does not match channel x2_card");
}

void check_cf_dims(const Channel& ch, const CFInput& in) {
  require(in.f_x1.children()[0].card == ch.x1_card,
          "CFInput: f_x1 child cardinality does not match channel x1_card");
  require(in.f_x2.children()[0].card == ch.x2_card,
          "CFInput: f_x2 child cardinality does not match channel x2_card");
  require(in.f_yt1.parents()[0].card == ch.y1_card,
          "CFInput: f_yt1 parent cardinality does not match channel y1_card");
  require(in.f_yt1.parents()[1].card == ch.x1_card,
          "CFInput: f_yt1 parent cardinality does not match channel x1_card");
  require(in.f_yt2.parents()[0].card == ch.y2_card,
          "CFInput: f_yt2 parent cardinality does not match channel y2_card");
  require(in.f_yt2.parents()[1].card == ch.x2_card,
          "CFInput: f_yt2 parent cardinality does not match channel x2_card");
}

}  // namespace

Dist build_df_joint(const Channel& ch, const DFInput& in) {
  check_df_dims(ch, in);
  const std::array<Factor, 6> factors = {Factor::from_dist(in.p_w0), Factor::from_dist(in.p_w1),
                                         Factor::from_dist(in.p_w2), in.f_x1, in.f_x2, ch.law};
  return chain_product(factors);
}

Dist build_cf_joint(const Channel& ch, const CFInput& in) {
  check_cf_dims(ch, in);
  const std::array<Factor, 7> factors = {Factor::from_dist(in.p_u1),
                                         Factor::from_dist(in.p_u2),
                                         in.f_x1,
                                         in.f_x2,
                                         ch.law,
                                         in.f_yt1,
                                         in.f_yt2};
  return chain_product(factors);
}

}  // namespace macfcs
