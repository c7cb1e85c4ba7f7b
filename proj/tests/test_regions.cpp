#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "instances.hpp"
#include "macfcs/regions.hpp"

using namespace macfcs;
using testgen::rng::Stream;
using testgen::rng::stream_key;

namespace {

const ConstraintEval& by_label(const FeasibilityReport& r, const std::string& label) {
  for (const auto& c : r.constraints)
    if (c.label == label) return c;
  REQUIRE(false);
  return r.constraints.front();
}

}  // namespace

TEST_CASE("slepian-wolf region bounds") {
  SUBCASE("independent uniform bits") {
    const auto sys = slepian_wolf_region(source_stats(testgen::bern_pair(0.5, 0.5)));
    REQUIRE(sys.ineqs.size() == 3);
    CHECK(-sys.ineqs[0].rhs == doctest::Approx(1.0));
    CHECK(-sys.ineqs[1].rhs == doctest::Approx(1.0));
    CHECK(-sys.ineqs[2].rhs == doctest::Approx(2.0));
    CHECK_FALSE(sys.ineqs[0].strict);
  }
  SUBCASE("doubly symmetric binary source") {
    const auto sys = slepian_wolf_region(source_stats(testgen::dsbs(0.25)));
    CHECK(-sys.ineqs[0].rhs == doctest::Approx(0.8112781245).epsilon(1e-9));
    CHECK(-sys.ineqs[1].rhs == doctest::Approx(0.8112781245).epsilon(1e-9));
    CHECK(-sys.ineqs[2].rhs == doctest::Approx(1.8112781245).epsilon(1e-9));
  }
  SUBCASE("perfectly correlated bits") {
    const auto sys = slepian_wolf_region(source_stats(SourcePair::make(2, 2, {0.5, 0, 0, 0.5})));
    CHECK(-sys.ineqs[0].rhs == doctest::Approx(0.0));
    CHECK(-sys.ineqs[2].rhs == doctest::Approx(1.0));
  }
}

TEST_CASE("decode-forward constraints on the cross-link reference instance") {
  const Channel ch = testgen::crosslink_channel(0.0);
  const SourcePair src = testgen::bern_pair(0.11, 0.11);
  const SourceStats st = source_stats(src);
  const DFInput in = DFInput::uniform(1, 1, 1, 2, 2);
  const Dist joint = build_df_joint(ch, in);

  const FeasibilityReport rep = df_constraints(joint, st);
  CHECK(rep.feasible);
  CHECK(by_label(rep, "1a").margin == doctest::Approx(1.0 - 0.499915958164528).epsilon(1e-9));
  CHECK(by_label(rep, "1c").vacuous);  // independent sources demand nothing of the shared path
  CHECK(rep.min_margin == doctest::Approx(0.5000840418).epsilon(1e-6));

  SUBCASE("uniform sources saturate the node exchange exactly") {
    const FeasibilityReport flat = df_constraints(joint, source_stats(testgen::bern_pair(0.5, 0.5)));
    CHECK_FALSE(flat.feasible);
    CHECK(by_label(flat, "1a").margin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(by_label(flat, "1a").satisfied);
  }
  SUBCASE("sum bound cannot exceed the destination alphabet") {
    Stream s(stream_key(1, "big"));
    const SourcePair big = testgen::random_source(s, 3, 3);
    SourceStats bst = source_stats(big);
    bst.h_joint = 2.5;  // demand beyond log2 |Y3| = 2
    const FeasibilityReport r = df_constraints(joint, bst);
    CHECK_FALSE(by_label(r, "1g").satisfied);
  }
}

TEST_CASE("raw decode-forward constraints") {
  const Channel ch = testgen::crosslink_channel(0.0);
  const SourceStats st = source_stats(testgen::bern_pair(0.11, 0.11));
  const Dist joint = build_df_joint(ch, DFInput::uniform(1, 1, 1, 2, 2));

  const FeasibilityReport raw = df_raw_constraints(joint, st);
  const FeasibilityReport stated = df_constraints(joint, st);
  REQUIRE(raw.constraints.size() == 9);
  CHECK(raw.feasible == stated.feasible);
  CHECK(raw.min_margin == doctest::Approx(stated.min_margin).epsilon(1e-12));

  SUBCASE("no feedback path starves the node decodes") {
    const Channel dead = testgen::dead_channel();
    const Dist j = build_df_joint(dead, DFInput::uniform(1, 1, 1, 2, 2));
    const FeasibilityReport r = df_raw_constraints(j, source_stats(testgen::dsbs(0.25)));
    CHECK_FALSE(by_label(r, "2").satisfied);
    CHECK(by_label(r, "2").rhs == doctest::Approx(0.0));
  }
}

TEST_CASE("min-form equivalence: raw and stated agree on 1000 random triples") {
  Stream s(stream_key(42, "df-minform"));
  int checked = 0;
  for (int it = 0; it < 1000; ++it) {
    auto card = [&] { return 2 + s.next_below(2); };  // 2..3
    const Channel ch = testgen::random_channel(s, card(), card(), card(), card(), card());
    const SourcePair src = testgen::random_source(s, card(), card());
    const DFInput in = testgen::random_df_input(s, card(), card(), card(), ch);
    const SourceStats st = source_stats(src);
    const Dist joint = build_df_joint(ch, in);
    const FeasibilityReport a = df_constraints(joint, st);
    const FeasibilityReport b = df_raw_constraints(joint, st);
    REQUIRE(a.feasible == b.feasible);
    // the min-form margins equal the tighter of their raw branches
    const double m1a = by_label(a, "1a").margin;
    const double m3 = by_label(b, "3").margin;
    const double m4b = by_label(b, "4b").margin;
    REQUIRE(m1a == doctest::Approx(std::min(m3, m4b)).epsilon(1e-12));
    const double m1b = by_label(a, "1b").margin;
    REQUIRE(m1b ==
            doctest::Approx(std::min(by_label(b, "2").margin, by_label(b, "4c").margin))
                .epsilon(1e-12));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("degenerate auxiliaries reduce to the classical MAC quantities") {
  Stream s(stream_key(43, "mac-degenerate"));
  for (int it = 0; it < 200; ++it) {
    auto card = [&] { return 2 + s.next_below(2); };
    const Channel ch = testgen::random_channel(s, card(), card(), card(), card(), card());
    const auto px1 = testgen::dirichlet_row(s, ch.x1_card);
    const auto px2 = testgen::dirichlet_row(s, ch.x2_card);
    const DFInput in = DFInput::make(1, 1, 1, {1}, {1}, {1}, px1, px2, ch.x1_card, ch.x2_card);
    const Dist joint = build_df_joint(ch, in);
    const SourceStats st = source_stats(testgen::dsbs(0.25));
    const FeasibilityReport rep = df_constraints(joint, st);

    const Dist direct = chain_product(std::array{
        Factor::from_dist(Dist({{var::X1, ch.x1_card}}, px1)),
        Factor::from_dist(Dist({{var::X2, ch.x2_card}}, px2)), ch.law});
    const double i1 = cond_mutual_info(direct, {var::X1}, {var::Y3}, {var::X2});
    const double i2 = cond_mutual_info(direct, {var::X2}, {var::Y3}, {var::X1});
    const double i12 = cond_mutual_info(direct, {var::X1, var::X2}, {var::Y3}, {});
    REQUIRE(by_label(rep, "1d").rhs == doctest::Approx(i1).epsilon(1e-9));
    REQUIRE(by_label(rep, "1e").rhs == doctest::Approx(i2).epsilon(1e-9));
    REQUIRE(by_label(rep, "1g").rhs == doctest::Approx(i12).epsilon(1e-9));
  }
}

TEST_CASE("compress-forward constraints") {
  Stream s(stream_key(44, "cf"));
  const Channel ch = testgen::crosslink_channel(0.05);
  const SourceStats st = source_stats(testgen::bern_pair(0.2, 0.2));

  SUBCASE("constant auxiliaries reduce to the classical MAC constraints") {
    const CFInput in = CFInput::uniform(1, 1, 1, 1, 2, 2, 2, 2);
    const Dist joint = build_cf_joint(ch, in);
    const FeasibilityReport rep = cf_constraints(joint, st, 1e-6);
    CHECK(by_label(rep, "7a").vacuous);
    CHECK(by_label(rep, "7b").vacuous);
    CHECK(by_label(rep, "7c").vacuous);
    CHECK(rep.indep_ok);

    const Dist direct = chain_product(std::array{
        Factor::from_dist(Dist({{var::X1, 2}}, {0.5, 0.5})),
        Factor::from_dist(Dist({{var::X2, 2}}, {0.5, 0.5})), ch.law});
    CHECK(by_label(rep, "6a").rhs ==
          doctest::Approx(cond_mutual_info(direct, {var::X1}, {var::Y3}, {var::X2})).epsilon(1e-9));
    CHECK(by_label(rep, "6b").rhs ==
          doctest::Approx(cond_mutual_info(direct, {var::X2}, {var::Y3}, {var::X1})).epsilon(1e-9));
    CHECK(by_label(rep, "6c").rhs ==
          doctest::Approx(cond_mutual_info(direct, {var::X1, var::X2}, {var::Y3}, {})).epsilon(1e-9));
  }
  SUBCASE("a noiseless self-quantizer demands more than constant compressors supply") {
    // Yt1 copies Y1 while U1 is constant: 7a demand is H(Y1|X1) - I(Yt1;Y3|...) > 0, supply 0
    const CFInput in = CFInput::make(
        1, 1, 2, 1, {1}, {1}, {0.5, 0.5}, {0.5, 0.5},
        {1, 0, 1, 0, 0, 1, 0, 1},  // yt1 = y1 regardless of x1
        {1, 1, 1, 1}, 2, 2, 2, 2);
    const Dist joint = build_cf_joint(ch, in);
    const FeasibilityReport rep = cf_constraints(joint, st, 1e-6);
    const auto& c7a = by_label(rep, "7a");
    CHECK(c7a.lhs > 0.1);
    CHECK(c7a.rhs == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_FALSE(c7a.satisfied);
    CHECK_FALSE(rep.feasible);
  }
  SUBCASE("dependent quantized observations fail the independence check") {
    // y1 = y2 = a shared coin independent of the inputs; copy quantizers then
    // produce identical Yt1 and Yt2
    std::vector<double> probs(2 * 2 * 2 * 2 * 2, 0.0);
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2)
        for (std::size_t coin = 0; coin < 2; ++coin)
          probs[(((x1 * 2 + x2) * 2 + coin) * 2 + coin) * 2 + x1] = 0.5;
    const Channel shared = Channel::make(2, 2, 2, 2, 2, std::move(probs));
    const CFInput dep = CFInput::make(
        2, 2, 2, 2, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5},
        {1, 0, 1, 0, 0, 1, 0, 1}, {1, 0, 1, 0, 0, 1, 0, 1}, 2, 2, 2, 2);
    const Dist joint = build_cf_joint(shared, dep);
    const FeasibilityReport rep = cf_constraints(joint, st, 1e-6);
    REQUIRE(rep.indep_tv.has_value());
    CHECK(*rep.indep_tv > 0.4);  // identical fair coins: TV from the product is 1/2
    CHECK_FALSE(rep.indep_ok);
    CHECK_FALSE(rep.feasible);
  }
}

TEST_CASE("raw compress-forward system shape") {
  Stream s(stream_key(45, "cf-raw"));
  const Channel ch = testgen::crosslink_channel(0.05);
  const SourceStats st = source_stats(testgen::bern_pair(0.2, 0.2));

  SUBCASE("fifteen inequalities over six variables") {
    const CFInput in =
        testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, testgen::QuantizerStyle::y_only);
    const RateConstraintSystem sys = cf_raw_system(build_cf_joint(ch, in), st);
    CHECK(sys.vars.size() == 6);
    CHECK(sys.ineqs.size() == 14);  // plus implicit nonnegativity
    CHECK(sys.nonneg);
  }
  SUBCASE("constant auxiliaries leave bare quantization-rate bounds") {
    const CFInput in = CFInput::uniform(1, 1, 1, 1, 2, 2, 2, 2);
    const RateConstraintSystem sys = cf_raw_system(build_cf_joint(ch, in), st);
    for (const auto& q : sys.ineqs) {
      if (q.label == "8") {
        CHECK(q.rhs == doctest::Approx(0.0).epsilon(1e-9));  // Rt1 > 0
        CHECK(q.strict);
      }
      if (q.label == "11a") CHECK(q.rhs == doctest::Approx(0.0).epsilon(1e-9));  // Rt1 < Rp1
    }
  }
}

TEST_CASE("fourier-motzkin elimination") {
  SUBCASE("open interval eliminates to an empty system") {
    RateConstraintSystem sys;
    sys.vars = {"x"};
    sys.nonneg = false;
    sys.ineqs.push_back({{{"x", -1.0}}, -1.0, true, "lo"});  // x > 1
    sys.ineqs.push_back({{{"x", 1.0}}, 3.0, true, "hi"});    // x < 3
    const RateConstraintSystem out = fm_eliminate(sys, "x");
    CHECK(out.ineqs.empty());
    CHECK(out.vars.empty());
  }
  SUBCASE("empty interval leaves a violated constant") {
    RateConstraintSystem sys;
    sys.vars = {"x"};
    sys.nonneg = false;
    sys.ineqs.push_back({{{"x", -1.0}}, -2.0, true, "lo"});  // x > 2
    sys.ineqs.push_back({{{"x", 1.0}}, 1.0, true, "hi"});    // x < 1
    const RateConstraintSystem out = fm_eliminate(sys, "x");
    REQUIRE(out.ineqs.size() == 1);
    CHECK(out.ineqs[0].coeffs.empty());
    CHECK(out.ineqs[0].rhs < 0.0);
    CHECK(out.ineqs[0].strict);
  }
  SUBCASE("unknown variable") {
    RateConstraintSystem sys;
    sys.vars = {"x"};
    CHECK_THROWS_AS(fm_eliminate(sys, "y"), validation_error);
  }
  SUBCASE("soundness: surviving points satisfy the projection") {
    Stream s(stream_key(46, "fm-sound"));
    for (int it = 0; it < 200; ++it) {
      RateConstraintSystem sys;
      sys.vars = {"a", "b", "c"};
      sys.nonneg = true;
      for (int q = 0; q < 6; ++q) {
        LinIneq iq;
        for (const auto* v : {"a", "b", "c"})
          if (s.next_below(2)) iq.coeffs[v] = s.next_below(2) ? 1.0 : -1.0;
        if (iq.coeffs.empty()) iq.coeffs["a"] = 1.0;
        iq.rhs = 4.0 * s.next_double() - 1.0;
        iq.strict = s.next_below(2) != 0;
        iq.label = "q" + std::to_string(q);
        sys.ineqs.push_back(std::move(iq));
      }
      const RateConstraintSystem projected = fm_eliminate(sys, "b");
      // sample points satisfying the original; their (a,c) must satisfy the projection
      for (int pt = 0; pt < 40; ++pt) {
        const double a = 3.0 * s.next_double(), b = 3.0 * s.next_double(),
                     c = 3.0 * s.next_double();
        auto ok = [&](const RateConstraintSystem& ss, double av, double bv, double cv) {
          for (const auto& q : ss.ineqs) {
            double lhs = 0.0;
            for (const auto& [name, coef] : q.coeffs)
              lhs += coef * (name == "a" ? av : name == "b" ? bv : cv);
            if (q.strict ? lhs >= q.rhs : lhs > q.rhs) return false;
          }
          return true;
        };
        if (ok(sys, a, b, c)) REQUIRE(ok(projected, a, 0.0, c));
      }
    }
  }
}

TEST_CASE("system feasibility with witness") {
  SUBCASE("closed-open interval midpoint") {
    RateConstraintSystem sys;
    sys.vars = {"R1"};
    sys.ineqs.push_back({{{"R1", -1.0}}, -1.0, false, "lo"});  // R1 >= 1
    sys.ineqs.push_back({{{"R1", 1.0}}, 2.0, true, "hi"});     // R1 < 2
    const SystemFeasibility w = system_feasible(sys);
    REQUIRE(w.feasible);
    CHECK(w.witness.at("R1") == doctest::Approx(1.5));
  }
  SUBCASE("sum bound infeasibility") {
    RateConstraintSystem sys;
    sys.vars = {"R1", "R2"};
    sys.ineqs.push_back({{{"R1", -1.0}, {"R2", -1.0}}, -2.0, false, "sum"});  // R1+R2 >= 2
    sys.ineqs.push_back({{{"R1", 1.0}}, 0.5, true, "c1"});                    // R1 < 0.5
    sys.ineqs.push_back({{{"R2", 1.0}}, 1.0, true, "c2"});                    // R2 < 1
    CHECK_FALSE(system_feasible(sys).feasible);
  }
  SUBCASE("witness satisfies every inequality on random systems") {
    Stream s(stream_key(47, "witness"));
    int feasible_count = 0;
    for (int it = 0; it < 300; ++it) {
      RateConstraintSystem sys;
      sys.vars = {"a", "b", "c", "d"};
      for (int q = 0; q < 7; ++q) {
        LinIneq iq;
        for (const auto* v : {"a", "b", "c", "d"})
          if (s.next_below(2)) iq.coeffs[v] = s.next_below(2) ? 1.0 : -1.0;
        if (iq.coeffs.empty()) continue;
        iq.rhs = 5.0 * s.next_double() - 1.5;
        iq.strict = s.next_below(2) != 0;
        iq.label = "q" + std::to_string(q);
        sys.ineqs.push_back(std::move(iq));
      }
      const SystemFeasibility w = system_feasible(sys);
      if (!w.feasible) continue;
      ++feasible_count;
      for (const auto& q : sys.ineqs) {
        double lhs = 0.0;
        for (const auto& [name, coef] : q.coeffs) lhs += coef * w.witness.at(name);
        REQUIRE((q.strict ? lhs < q.rhs + 1e-9 : lhs <= q.rhs + 1e-9));
      }
      for (const auto& [name, v] : w.witness) REQUIRE(v >= -1e-12);
    }
    CHECK(feasible_count > 50);  // the family is not degenerate
  }
}

TEST_CASE("elimination equivalence on seeded compress-forward instances") {
  Stream s(stream_key(48, "cf-equiv"));
  int agree = 0, feas = 0;
  const int total = 300;
  for (int it = 0; it < total; ++it) {
    Channel ch = (it % 2 == 0) ? testgen::crosslink_channel(0.02 + 0.2 * s.next_double())
                               : testgen::random_channel(s, 2, 2, 2, 2, 2);
    const auto style =
        (it % 2 == 0) ? testgen::QuantizerStyle::y_only : testgen::QuantizerStyle::x_only;
    const CFInput in = testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, style);
    SourcePair src = (it % 3 == 0) ? testgen::bern_pair(0.02 + 0.4 * s.next_double(),
                                                        0.02 + 0.4 * s.next_double())
                                   : testgen::random_source(s, 2, 2);
    const SourceStats st = source_stats(src);
    const Dist joint = build_cf_joint(ch, in);
    const FeasibilityReport rep = cf_constraints(joint, st, 1e-6);
    REQUIRE(rep.indep_ok);  // generator families guarantee quantizer independence
    const RateConstraintSystem raw = cf_raw_system(joint, st);
    const SystemFeasibility fm = system_feasible(raw);
    const bool stated = rep.feasible;
    if (stated == fm.feasible) ++agree;
    feas += stated;
  }
  CHECK(agree == total);
}

TEST_CASE("fm verdict matches the grid oracle on compress-forward systems") {
  Stream s(stream_key(49, "cf-grid"));
  int agree = 0;
  const int total = 60;
  for (int it = 0; it < total; ++it) {
    Channel ch = (it % 2 == 0) ? testgen::crosslink_channel(0.02 + 0.2 * s.next_double())
                               : testgen::random_channel(s, 2, 2, 2, 2, 2);
    const auto style =
        (it % 2 == 0) ? testgen::QuantizerStyle::y_only : testgen::QuantizerStyle::x_only;
    const CFInput in = testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, style);
    const SourceStats st = source_stats(testgen::bern_pair(0.02 + 0.4 * s.next_double(),
                                                           0.02 + 0.4 * s.next_double()));
    const RateConstraintSystem raw = cf_raw_system(build_cf_joint(ch, in), st);
    const bool fm = system_feasible(raw).feasible;
    const bool grid = testgen::cf_grid_oracle(raw, 1e-3);
    if (fm == grid) ++agree;
  }
  CHECK(agree == total);
}

TEST_CASE("sum capacity") {
  SUBCASE("noiseless pair channel reaches two bits") {
    std::vector<double> probs(2 * 2 * 4, 0.0);
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2) probs[(x1 * 2 + x2) * 4 + x1 * 2 + x2] = 1.0;
    const Channel ch = Channel::make(2, 2, 1, 1, 4, std::move(probs));
    CHECK(mac_sum_capacity(ch) == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("single binary symmetric pipe ignores the second input") {
    std::vector<double> probs(2 * 2 * 2, 0.0);
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2) {
        probs[(x1 * 2 + x2) * 2 + x1] = 0.95;
        probs[(x1 * 2 + x2) * 2 + (1 - x1)] = 0.05;
      }
    const Channel ch = Channel::make(2, 2, 1, 1, 2, std::move(probs));
    CHECK(mac_sum_capacity(ch) == doctest::Approx(0.7136030428840439).epsilon(1e-6));
  }
  SUBCASE("constant output carries nothing") {
    const Channel ch = testgen::dead_channel();
    CHECK(mac_sum_capacity(ch) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("cut-set dominance and garbling monotonicity") {
  Stream s(stream_key(50, "cutset"));
  for (int it = 0; it < 60; ++it) {
    const Channel ch = testgen::random_channel(s, 2, 2, 2, 2, 3);
    const DFInput in = testgen::random_df_input(s, 2, 2, 2, ch);
    const Dist joint = build_df_joint(ch, in);
    const SourceStats st = source_stats(testgen::dsbs(0.25));
    const FeasibilityReport rep = df_constraints(joint, st);
    const double cap = mac_sum_capacity(ch);
    for (const auto& c : rep.constraints)
      if (c.label == "1g") REQUIRE(c.rhs <= cap + 1e-6);

    // post-compose y3 with a random stochastic map
    const std::size_t zc = 2 + s.next_below(2);
    const auto g = testgen::dirichlet_rows(s, 3, zc);
    const std::size_t yb = ch.y1_card * ch.y2_card * ch.y3_card;
    std::vector<double> garbled(ch.x1_card * ch.x2_card * ch.y1_card * ch.y2_card * zc, 0.0);
    for (std::size_t x = 0; x < ch.x1_card * ch.x2_card; ++x)
      for (std::size_t yj = 0; yj < yb; ++yj) {
        const std::size_t y12 = yj / ch.y3_card, y3 = yj % ch.y3_card;
        for (std::size_t z = 0; z < zc; ++z)
          garbled[(x * (yb / ch.y3_card) + y12) * zc + z] +=
              ch.law.probs()[x * yb + yj] * g[y3 * zc + z];
      }
    const Channel gch = Channel::make(ch.x1_card, ch.x2_card, ch.y1_card, ch.y2_card, zc,
                                      std::move(garbled));
    const FeasibilityReport grep = df_constraints(build_df_joint(gch, in), st);
    // every supplier that reads the destination signal can only shrink
    for (const auto* label : {"1c", "1d", "1e", "1f", "1g"})
      REQUIRE(by_label(grep, label).rhs <= by_label(rep, label).rhs + 1e-9);
    for (const auto* label : {"4b", "4c"}) {
      const FeasibilityReport r0 = df_raw_constraints(joint, st);
      const FeasibilityReport r1 = df_raw_constraints(build_df_joint(gch, in), st);
      REQUIRE(by_label(r1, label).rhs <= by_label(r0, label).rhs + 1e-9);
    }
  }
}
