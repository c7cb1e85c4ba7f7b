#include "macfcs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "macfcs/rng.hpp"

namespace macfcs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-9;
constexpr double kMaxCodebookBits = 24.0;

double rate_of(const SimConfig& cfg, const std::string& name) {
  auto it = cfg.rates.find(name);
  if (it == cfg.rates.end())
    throw validation_error("SimConfig: missing rate '" + name + "'");
  if (it->second < 0.0) throw validation_error("SimConfig: rate '" + name + "' is negative");
  return it->second;
}

std::size_t codebook_size(std::size_t n, double rate, const std::string& name) {
  const double bits = static_cast<double>(n) * rate;
  if (bits > kMaxCodebookBits + 1e-9)
    throw validation_error("codebook '" + name + "' needs n*rate = " + std::to_string(bits) +
                           " bits; the enumeration guard allows at most 24");
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(std::exp2(bits))));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Best-score tracker with the tie rule: scores within kTieTol (or exactly
// equal, covering -inf) of the running maximum count as ties.
struct ArgBest {
  double best = kNegInf;
  std::size_t arg = 0;
  bool tie = false;
  bool any = false;

  void offer(double s, std::size_t idx) {
    if (!any) {
      best = s;
      arg = idx;
      any = true;
      return;
    }
    if (s > best + kTieTol) {
      best = s;
      arg = idx;
      tie = false;
    } else if (s == best || s > best - kTieTol) {
      tie = true;
    }
  }
};

// Splits `trials` across workers; outcomes merge by summing counts, so the
// result is independent of the worker count.
SimOutcome run_trials(std::size_t trials, int workers,
                      const std::function<void(std::size_t, SimOutcome&)>& one_trial) {
  if (trials < 1) throw validation_error("SimConfig: trials must be >= 1");
  const int nworkers = std::max(
      1, std::min<int>(static_cast<int>(trials),
                       workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<SimOutcome> local(nworkers);
  auto work = [&](int w) {
    for (std::size_t t = static_cast<std::size_t>(w); t < trials; t += nworkers)
      one_trial(t, local[w]);
  };
  if (nworkers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < nworkers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  SimOutcome out;
  out.trials = trials;
  for (const auto& l : local) {
    out.errors += l.errors;
    for (const auto& [k, v] : l.breakdown) out.breakdown[k] += v;
  }
  out.error_rate = static_cast<double>(out.errors) / static_cast<double>(trials);
  return out;
}

std::size_t pow_card(std::size_t card, std::size_t n, const char* what) {
  double bits = static_cast<double>(n) * std::log2(static_cast<double>(card));
  if (bits > kMaxCodebookBits + 1e-9)
    throw validation_error(std::string(what) + ": sequence space needs " + std::to_string(bits) +
                           " bits; the enumeration guard allows at most 24");
  std::size_t r = 1;
  for (std::size_t i = 0; i < n; ++i) r *= card;
  return r;
}

}  // namespace

SimOutcome simulate_sw(const SourcePair& src, const SimConfig& cfg) {
  const double r1 = rate_of(cfg, "R1");
  const double r2 = rate_of(cfg, "R2");
  const std::size_t n = cfg.n;
  if (n < 1) throw validation_error("SimConfig: n must be >= 1");
  const std::size_t nseq1 = pow_card(src.s1_card, n, "simulate_sw");
  const std::size_t nseq2 = pow_card(src.s2_card, n, "simulate_sw");
  auto bin_count = [n](double rate) -> std::size_t {
    const double bits = static_cast<double>(n) * rate;
    if (bits > 40.0) return std::numeric_limits<std::size_t>::max();
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::exp2(bits))));
  };
  const std::size_t bins1 = bin_count(r1);
  const std::size_t bins2 = bin_count(r2);
  const bool inj1 = bins1 > nseq1;  // more bins than sequences: identity binning
  const bool inj2 = bins2 > nseq2;

  std::vector<double> logj(src.joint.size());
  for (std::size_t i = 0; i < logj.size(); ++i) logj[i] = safe_log(src.joint.probs()[i]);
  const std::size_t s2c = src.s2_card;

  auto digits_of = [n](std::size_t idx, std::size_t card, std::vector<std::uint8_t>& out) {
    out.resize(n);
    for (std::size_t i = n; i-- > 0;) {
      out[i] = static_cast<std::uint8_t>(idx % card);
      idx /= card;
    }
  };

  SimOutcome out = run_trials(cfg.trials, cfg.workers, [&](std::size_t trial, SimOutcome& acc) {
    rng::Stream s(rng::stream_key(cfg.seed, "sw-src", trial));
    std::size_t i1 = 0, i2 = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t pair = s.sample(src.joint.probs());
      i1 = i1 * src.s1_card + pair / s2c;
      i2 = i2 * src.s2_card + pair % s2c;
    }
    const std::uint64_t kb1 = rng::stream_key(cfg.seed, "sw-bin1", trial);
    const std::uint64_t kb2 = rng::stream_key(cfg.seed, "sw-bin2", trial);
    auto bin1 = [&](std::size_t q) { return inj1 ? q : rng::bin_of(kb1, q, bins1); };
    auto bin2 = [&](std::size_t q) { return inj2 ? q : rng::bin_of(kb2, q, bins2); };
    const std::uint64_t b1 = bin1(i1), b2 = bin2(i2);

    std::vector<std::size_t> cand1, cand2;
    if (inj1) {
      cand1.push_back(i1);
    } else {
      for (std::size_t q = 0; q < nseq1; ++q)
        if (bin1(q) == b1) cand1.push_back(q);
    }
    if (inj2) {
      cand2.push_back(i2);
    } else {
      for (std::size_t q = 0; q < nseq2; ++q)
        if (bin2(q) == b2) cand2.push_back(q);
    }

    std::vector<std::uint8_t> d1;
    std::vector<std::vector<std::uint8_t>> digs2(cand2.size());
    for (std::size_t c = 0; c < cand2.size(); ++c) digits_of(cand2[c], src.s2_card, digs2[c]);

    ArgBest best;
    std::size_t truth_pos = cand1.size() * cand2.size();
    for (std::size_t a = 0; a < cand1.size(); ++a) {
      digits_of(cand1[a], src.s1_card, d1);
      for (std::size_t b = 0; b < cand2.size(); ++b) {
        double score = 0.0;
        for (std::size_t pos = 0; pos < n; ++pos)
          score += logj[d1[pos] * s2c + digs2[b][pos]];
        const std::size_t flat = a * cand2.size() + b;
        if (cand1[a] == i1 && cand2[b] == i2) truth_pos = flat;
        best.offer(score, flat);
      }
    }
    if (best.tie || best.arg != truth_pos) {
      ++acc.errors;
      ++acc.breakdown["joint-decode"];
    }
  });
  if (inj1) out.notes.push_back("R1 exceeds log2 of the sequence space; identity binning, zero-error regime");
  if (inj2) out.notes.push_back("R2 exceeds log2 of the sequence space; identity binning, zero-error regime");
  return out;
}

namespace {

// Fast pair scan for binary inputs and finite log-likelihoods: score(m1,m2)
// decomposes into per-message terms plus a bilinear part handled with byte
// lookup tables over the AND of the two codeword bit masks.
MacDecodeResult mac_ml_decode_binary(const std::vector<std::vector<double>>& loglaw3,
                                     const std::vector<std::vector<std::uint8_t>>& cb1,
                                     const std::vector<std::vector<std::uint8_t>>& cb2,
                                     const std::vector<std::uint8_t>& y3) {
  const std::size_t n = y3.size();
  const std::size_t nbytes = (n + 7) / 8;
  std::vector<double> l00(n), l10(n), l01(n), l11(n);
  double base = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    l00[i] = loglaw3[0][y3[i]];
    l10[i] = loglaw3[2][y3[i]];  // x1=1, x2=0
    l01[i] = loglaw3[1][y3[i]];  // x1=0, x2=1
    l11[i] = loglaw3[3][y3[i]];
    base += l00[i];
  }
  std::vector<std::vector<double>> tbl(nbytes, std::vector<double>(256, 0.0));
  for (std::size_t k = 0; k < nbytes; ++k)
    for (std::size_t v = 0; v < 256; ++v) {
      double s = 0.0;
      for (std::size_t j = 0; j < 8; ++j) {
        const std::size_t i = 8 * k + j;
        if ((v >> j & 1u) && i < n) s += l11[i] - l10[i] - l01[i] + l00[i];
      }
      tbl[k][v] = s;
    }

  auto mask_and_gain = [&](const std::vector<std::uint8_t>& cw, const std::vector<double>& gain,
                           std::uint64_t& mask) {
    mask = 0;
    double g = 0.0;
    for (std::size_t i = 0; i < cw.size(); ++i)
      if (cw[i]) {
        mask |= 1ull << i;
        g += gain[i];
      }
    return g;
  };
  std::vector<std::uint64_t> mask1(cb1.size()), mask2(cb2.size());
  std::vector<double> f(cb1.size()), g(cb2.size());
  std::vector<double> gain1(n), gain2(n);
  for (std::size_t i = 0; i < n; ++i) {
    gain1[i] = l10[i] - l00[i];
    gain2[i] = l01[i] - l00[i];
  }
  for (std::size_t m = 0; m < cb1.size(); ++m) f[m] = mask_and_gain(cb1[m], gain1, mask1[m]);
  for (std::size_t m = 0; m < cb2.size(); ++m) g[m] = mask_and_gain(cb2[m], gain2, mask2[m]);

  ArgBest best;
  for (std::size_t a = 0; a < cb1.size(); ++a) {
    const double fa = base + f[a];
    const std::uint64_t ma = mask1[a];
    for (std::size_t b = 0; b < cb2.size(); ++b) {
      std::uint64_t m = ma & mask2[b];
      double s = fa + g[b];
      for (std::size_t k = 0; k < nbytes; ++k) {
        s += tbl[k][m & 0xffu];
        m >>= 8;
      }
      best.offer(s, a * cb2.size() + b);
    }
  }
  return {best.arg / cb2.size(), best.arg % cb2.size(), best.tie};
}

}  // namespace

MacDecodeResult mac_ml_decode(const std::vector<std::vector<double>>& loglaw3,
                              std::size_t x2_card,
                              const std::vector<std::vector<std::uint8_t>>& cb1,
                              const std::vector<std::vector<std::uint8_t>>& cb2,
                              const std::vector<std::uint8_t>& y3) {
  const std::size_t n = y3.size();
  const std::size_t x1_card = loglaw3.size() / x2_card;
  bool all_finite = true;
  for (const auto& row : loglaw3)
    for (double v : row) all_finite = all_finite && std::isfinite(v);
  if (x1_card == 2 && x2_card == 2 && n <= 64 && all_finite)
    return mac_ml_decode_binary(loglaw3, cb1, cb2, y3);

  // generic scan: flatten to [x1][x2][y3] so the inner loop is pure lookups
  const std::size_t ny = loglaw3[0].size();
  std::vector<double> flat(loglaw3.size() * ny);
  for (std::size_t x = 0; x < loglaw3.size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) flat[x * ny + y] = loglaw3[x][y];

  ArgBest best;
  std::vector<std::size_t> row_base(n);
  for (std::size_t a = 0; a < cb1.size(); ++a) {
    for (std::size_t i = 0; i < n; ++i)
      row_base[i] = (static_cast<std::size_t>(cb1[a][i]) * x2_card) * ny + y3[i];
    for (std::size_t b = 0; b < cb2.size(); ++b) {
      double s = 0.0;
      const auto& cw2 = cb2[b];
      for (std::size_t i = 0; i < n; ++i)
        s += flat[row_base[i] + static_cast<std::size_t>(cw2[i]) * ny];
      best.offer(s, a * cb2.size() + b);
    }
  }
  return {best.arg / cb2.size(), best.arg % cb2.size(), best.tie};
}

SimOutcome simulate_mac(const Channel& ch, const SimConfig& cfg, const std::vector<double>& p_x1,
                        const std::vector<double>& p_x2) {
  if (p_x1.size() != ch.x1_card || p_x2.size() != ch.x2_card)
    throw validation_error("simulate_mac: input pmf size does not match the channel alphabets");
  const Dist d1({{var::X1, ch.x1_card}}, p_x1);
  const Dist d2({{var::X2, ch.x2_card}}, p_x2);
  const std::size_t n = cfg.n;
  if (n < 1) throw validation_error("SimConfig: n must be >= 1");
  const std::size_t m1n = codebook_size(n, rate_of(cfg, "R1"), "R1");
  const std::size_t m2n = codebook_size(n, rate_of(cfg, "R2"), "R2");

  // p(y3 | x1, x2) and its log
  const std::size_t yblock = ch.y1_card * ch.y2_card * ch.y3_card;
  std::vector<std::vector<double>> law3(ch.x1_card * ch.x2_card,
                                        std::vector<double>(ch.y3_card, 0.0));
  for (std::size_t x = 0; x < law3.size(); ++x)
    for (std::size_t yj = 0; yj < yblock; ++yj)
      law3[x][yj % ch.y3_card] += ch.law.probs()[x * yblock + yj];
  std::vector<std::vector<double>> loglaw3(law3.size(), std::vector<double>(ch.y3_card));
  for (std::size_t x = 0; x < law3.size(); ++x)
    for (std::size_t y = 0; y < ch.y3_card; ++y) loglaw3[x][y] = safe_log(law3[x][y]);

  return run_trials(cfg.trials, cfg.workers, [&](std::size_t trial, SimOutcome& acc) {
    std::vector<std::vector<std::uint8_t>> cb1(m1n, std::vector<std::uint8_t>(n));
    std::vector<std::vector<std::uint8_t>> cb2(m2n, std::vector<std::uint8_t>(n));
    {
      rng::Stream s1(rng::stream_key(cfg.seed, "mac-cb1", trial));
      for (auto& cw : cb1)
        for (auto& sym : cw) sym = static_cast<std::uint8_t>(s1.sample(d1.probs()));
      rng::Stream s2(rng::stream_key(cfg.seed, "mac-cb2", trial));
      for (auto& cw : cb2)
        for (auto& sym : cw) sym = static_cast<std::uint8_t>(s2.sample(d2.probs()));
    }
    rng::Stream msg(rng::stream_key(cfg.seed, "mac-msg", trial));
    const std::size_t m1 = static_cast<std::size_t>(msg.next_below(m1n));
    const std::size_t m2 = static_cast<std::size_t>(msg.next_below(m2n));

    rng::Stream chs(rng::stream_key(cfg.seed, "mac-ch", trial));
    std::vector<std::uint8_t> y3(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t x = cb1[m1][i] * ch.x2_card + cb2[m2][i];
      y3[i] = static_cast<std::uint8_t>(chs.sample(law3[x]));
    }

    const MacDecodeResult dec = mac_ml_decode(loglaw3, ch.x2_card, cb1, cb2, y3);
    if (dec.tie || dec.m1 != m1 || dec.m2 != m2) {
      ++acc.errors;
      ++acc.breakdown["ml-decode"];
    }
  });
}

namespace {

// Everything fixed across the trials of one decode-forward run.
struct DfSim {
  const Channel& ch;
  const SourcePair& src;
  const DFInput& in;
  const SimConfig& cfg;
  std::size_t n;
  std::size_t mi, mj, mk;  // codebook sizes for the shared / node-1 / node-2 indices

  std::vector<double> law_rows;          // joint (y1,y2,y3) row per (x1,x2)
  std::vector<std::vector<double>> log1; // log p(y1|x1,x2), [x1*x2c+x2][y1]
  std::vector<std::vector<double>> log2; // log p(y2|x1,x2)
  std::vector<std::vector<double>> log3; // log p(y3|x1,x2)
  std::vector<std::vector<double>> logc; // log of the cloud law p(y3|w0,w1,w2)

  struct Triple {
    std::size_t i = 0, j = 0, k = 0;
    bool operator==(const Triple&) const = default;
  };

  using Codeword = std::vector<std::uint8_t>;
  using Slice = std::vector<Codeword>;

  Codeword w_row(const Dist& pw, const char* tag, std::size_t trial, std::size_t index) const {
    rng::Stream s(rng::stream_key(cfg.seed, tag, trial, index));
    Codeword cw(n);
    for (auto& sym : cw) sym = static_cast<std::uint8_t>(s.sample(pw.probs()));
    return cw;
  }

  // x codeword for (fresh index, agreed triple); the agreed triple selects
  // the superposition cloud through the realized w codewords.
  Codeword x_row(const Factor& fx, const char* tag, std::size_t trial, Triple h, std::size_t fresh,
                 const Slice& w0rows, const Slice& w1rows, const Slice& w2rows) const {
    rng::Stream s(rng::stream_key(cfg.seed, tag, trial, h.i, h.j, h.k, fresh));
    const std::size_t w1c = in.w1_card, w2c = in.w2_card;
    Codeword cw(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t row =
          (static_cast<std::size_t>(w0rows[h.i][pos]) * w1c + w1rows[h.j][pos]) * w2c +
          w2rows[h.k][pos];
      cw[pos] = static_cast<std::uint8_t>(
          s.sample(std::span<const double>(fx.probs().data() + row * fx.child_block(),
                                           fx.child_block())));
    }
    return cw;
  }

  Slice x1_slice(std::size_t trial, Triple h, const Slice& w0r, const Slice& w1r,
                 const Slice& w2r) const {
    Slice out(mj);
    for (std::size_t j = 0; j < mj; ++j)
      out[j] = x_row(in.f_x1, "df-x1", trial, h, j, w0r, w1r, w2r);
    return out;
  }
  Slice x2_slice(std::size_t trial, Triple h, const Slice& w0r, const Slice& w1r,
                 const Slice& w2r) const {
    Slice out(mk);
    for (std::size_t k = 0; k < mk; ++k)
      out[k] = x_row(in.f_x2, "df-x2", trial, h, k, w0r, w1r, w2r);
    return out;
  }
};

const char* kDfDestLabels[8] = {
    nullptr,     // decoded == truth
    "dest-4a",   // i wrong only
    "dest-4b",   // j wrong only
    "dest-4d",   // i and j wrong
    "dest-4c",   // k wrong only
    "dest-4e",   // i and k wrong
    "dest-4f",   // j and k wrong
    "dest-4g",   // all wrong
};

const char* df_dest_label(DfSim::Triple truth, DfSim::Triple got) {
  const int pattern = (got.i != truth.i ? 1 : 0) | (got.j != truth.j ? 2 : 0) |
                      (got.k != truth.k ? 4 : 0);
  return kDfDestLabels[pattern];
}

}  // namespace

SimOutcome simulate_df(const Channel& ch, const SourcePair& src, const DFInput& in,
                       const SimConfig& cfg) {
  if (cfg.blocks < 3) throw validation_error("SimConfig: decode-forward needs blocks >= 3");
  if (cfg.n < 1) throw validation_error("SimConfig: n must be >= 1");
  if (in.f_x1.children()[0].card != ch.x1_card || in.f_x2.children()[0].card != ch.x2_card)
    throw validation_error("simulate_df: DFInput alphabets do not match the channel");

  const SourceStats st = source_stats(src);
  const SimConfig& c = cfg;
  auto default_rate = [&](double demand) { return demand > 1e-12 ? demand + c.epsilon : 0.0; };
  auto rate_or = [&](const char* name, double fallback) {
    auto it = c.rates.find(name);
    if (it == c.rates.end()) return fallback;
    if (it->second < 0.0) throw validation_error(std::string("SimConfig: rate '") + name + "' is negative");
    return it->second;
  };
  const double r0 = rate_or("R0", default_rate(st.i_s1_s2));
  const double r1 = rate_or("R1", default_rate(st.h_s1_given_s2));
  const double r2 = rate_or("R2", default_rate(st.h_s2_given_s1));

  DfSim sim{ch, src, in, cfg, cfg.n, codebook_size(cfg.n, r0, "R0"),
            codebook_size(cfg.n, r1, "R1"), codebook_size(cfg.n, r2, "R2")};

  // channel tables
  const std::size_t y1c = ch.y1_card, y2c = ch.y2_card, y3c = ch.y3_card;
  const std::size_t yblock = y1c * y2c * y3c;
  const std::size_t nx = ch.x1_card * ch.x2_card;
  sim.law_rows = ch.law.probs();
  sim.log1.assign(nx, std::vector<double>(y1c, 0.0));
  sim.log2.assign(nx, std::vector<double>(y2c, 0.0));
  sim.log3.assign(nx, std::vector<double>(y3c, 0.0));
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<double> m1(y1c, 0.0), m2(y2c, 0.0), m3(y3c, 0.0);
    for (std::size_t yj = 0; yj < yblock; ++yj) {
      const double p = ch.law.probs()[x * yblock + yj];
      m1[yj / (y2c * y3c)] += p;
      m2[(yj / y3c) % y2c] += p;
      m3[yj % y3c] += p;
    }
    for (std::size_t y = 0; y < y1c; ++y) sim.log1[x][y] = safe_log(m1[y]);
    for (std::size_t y = 0; y < y2c; ++y) sim.log2[x][y] = safe_log(m2[y]);
    for (std::size_t y = 0; y < y3c; ++y) sim.log3[x][y] = safe_log(m3[y]);
  }
  // cloud law: p(y3 | w0,w1,w2) with the fresh inputs averaged out
  const std::size_t nw = in.w0_card * in.w1_card * in.w2_card;
  sim.logc.assign(nw, std::vector<double>(y3c, 0.0));
  for (std::size_t w = 0; w < nw; ++w) {
    std::vector<double> m3(y3c, 0.0);
    for (std::size_t a = 0; a < ch.x1_card; ++a)
      for (std::size_t b = 0; b < ch.x2_card; ++b) {
        const double px = in.f_x1.value(w, a) * in.f_x2.value(w, b);
        const std::size_t x = a * ch.x2_card + b;
        for (std::size_t yj = 0; yj < yblock; ++yj)
          m3[yj % y3c] += px * ch.law.probs()[x * yblock + yj];
      }
    for (std::size_t y = 0; y < y3c; ++y) sim.logc[w][y] = safe_log(m3[y]);
  }

  // Source-index spaces: with a declared common part, the shared component is
  // indexed separately; otherwise the shared index is the constant 0.
  const bool has_common = src.common.has_value();
  const std::size_t s2card = src.s2_card;

  using Triple = DfSim::Triple;
  const std::size_t n = cfg.n;
  const int blocks = cfg.blocks;

  return run_trials(cfg.trials, cfg.workers, [&](std::size_t trial, SimOutcome& acc) {
    // realized w codebooks for this trial
    DfSim::Slice w0rows(sim.mi), w1rows(sim.mj), w2rows(sim.mk);
    for (std::size_t i = 0; i < sim.mi; ++i) w0rows[i] = sim.w_row(in.p_w0, "df-w0", trial, i);
    for (std::size_t j = 0; j < sim.mj; ++j) w1rows[j] = sim.w_row(in.p_w1, "df-w1", trial, j);
    for (std::size_t k = 0; k < sim.mk; ++k) w2rows[k] = sim.w_row(in.p_w2, "df-w2", trial, k);
    const std::uint64_t kbin_i = rng::stream_key(cfg.seed, "df-bin-i", trial);
    const std::uint64_t kbin_j = rng::stream_key(cfg.seed, "df-bin-j", trial);
    const std::uint64_t kbin_k = rng::stream_key(cfg.seed, "df-bin-k", trial);

    Triple h_node1{}, h_node2{}, h_dest{};       // each party's belief of the agreed triple
    std::vector<Triple> truth(blocks);           // fresh indices per block
    std::vector<std::vector<std::uint8_t>> y3_blocks(blocks);

    bool trial_error = false;
    for (int t = 0; t < blocks; ++t) {
      // fresh source block and its indices
      rng::Stream ssrc(rng::stream_key(cfg.seed, "df-src", trial, static_cast<std::uint64_t>(t)));
      std::size_t idx_d = 0, idx_e = 0, idx_f = 0, idx_s1 = 0, idx_s2 = 0;
      for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t pair = ssrc.sample(src.joint.probs());
        const std::size_t s1 = pair / s2card, s2 = pair % s2card;
        idx_s1 = idx_s1 * src.s1_card + s1;
        idx_s2 = idx_s2 * s2card + s2;
        if (has_common) {
          idx_d = idx_d * src.common->d + s1 / src.common->e;
          idx_e = idx_e * src.common->e + s1 % src.common->e;
          idx_f = idx_f * src.common->f + s2 % src.common->f;
        }
      }
      Triple fresh;
      fresh.i = has_common ? rng::bin_of(kbin_i, idx_d, sim.mi) : 0;
      fresh.j = rng::bin_of(kbin_j, has_common ? idx_e : idx_s1, sim.mj);
      fresh.k = rng::bin_of(kbin_k, has_common ? idx_f : idx_s2, sim.mk);
      truth[t] = fresh;

      // transmissions under each node's own belief of the agreed triple
      const auto x1tx = sim.x_row(in.f_x1, "df-x1", trial, h_node1, fresh.j, w0rows, w1rows, w2rows);
      const auto x2tx = sim.x_row(in.f_x2, "df-x2", trial, h_node2, fresh.k, w0rows, w1rows, w2rows);

      // channel
      rng::Stream chs(rng::stream_key(cfg.seed, "df-ch", trial, static_cast<std::uint64_t>(t)));
      std::vector<std::uint8_t> y1(n), y2(n), y3(n);
      for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t x = x1tx[pos] * ch.x2_card + x2tx[pos];
        const std::size_t yj = chs.sample(
            std::span<const double>(sim.law_rows.data() + x * yblock, yblock));
        y1[pos] = static_cast<std::uint8_t>(yj / (y2c * y3c));
        y2[pos] = static_cast<std::uint8_t>((yj / y3c) % y2c);
        y3[pos] = static_cast<std::uint8_t>(yj % y3c);
      }
      y3_blocks[t] = std::move(y3);

      if (t <= blocks - 2) {
        // node 1 decodes the other node's fresh index from y1
        {
          const auto x2cands = sim.x2_slice(trial, h_node1, w0rows, w1rows, w2rows);
          ArgBest best;
          for (std::size_t k = 0; k < sim.mk; ++k) {
            double s = 0.0;
            for (std::size_t pos = 0; pos < n; ++pos)
              s += sim.log1[x1tx[pos] * ch.x2_card + x2cands[k][pos]][y1[pos]];
            best.offer(s, k);
          }
          if (best.tie || best.arg != fresh.k) ++acc.breakdown["node1-decode-k"];
          h_node1 = Triple{fresh.i, fresh.j, best.arg};
        }
        // node 2 decodes node 1's fresh index from y2
        {
          const auto x1cands = sim.x1_slice(trial, h_node2, w0rows, w1rows, w2rows);
          ArgBest best;
          for (std::size_t j = 0; j < sim.mj; ++j) {
            double s = 0.0;
            for (std::size_t pos = 0; pos < n; ++pos)
              s += sim.log2[x1cands[j][pos] * ch.x2_card + x2tx[pos]][y2[pos]];
            best.offer(s, j);
          }
          if (best.tie || best.arg != fresh.j) ++acc.breakdown["node2-decode-j"];
          h_node2 = Triple{fresh.i, best.arg, fresh.k};
        }
      }

      // destination decodes block t-1's triple from blocks t-1 and t
      if (t >= 1) {
        const int tb = t - 1;
        const auto x1cands = sim.x1_slice(trial, h_dest, w0rows, w1rows, w2rows);
        const auto x2cands = sim.x2_slice(trial, h_dest, w0rows, w1rows, w2rows);
        const auto& yprev = y3_blocks[tb];
        const auto& ycur = y3_blocks[t];
        const Triple want = truth[tb];

        double best = kNegInf;
        Triple arg{}, alt{};
        bool tie = false, any = false, have_alt = false;
        for (std::size_t j = 0; j < sim.mj; ++j)
          for (std::size_t k = 0; k < sim.mk; ++k) {
            double s1 = 0.0;
            for (std::size_t pos = 0; pos < n; ++pos)
              s1 += sim.log3[x1cands[j][pos] * ch.x2_card + x2cands[k][pos]][yprev[pos]];
            for (std::size_t i = 0; i < sim.mi; ++i) {
              double s = s1;
              for (std::size_t pos = 0; pos < n; ++pos) {
                const std::size_t w =
                    (static_cast<std::size_t>(w0rows[i][pos]) * in.w1_card + w1rows[j][pos]) *
                        in.w2_card +
                    w2rows[k][pos];
                s += sim.logc[w][ycur[pos]];
              }
              const Triple cand{i, j, k};
              if (!any || s > best + kTieTol) {
                best = s;
                arg = cand;
                tie = false;
                have_alt = false;
                any = true;
              } else if (s == best || s > best - kTieTol) {
                tie = true;
                if (!have_alt && !(cand == arg)) {
                  alt = cand;
                  have_alt = true;
                }
              }
            }
          }

        h_dest = arg;
        const bool wrong = tie || !(arg == want);
        if (wrong) {
          trial_error = true;
          const Triple classify = (arg == want && have_alt) ? alt : arg;
          const char* label = df_dest_label(want, classify);
          ++acc.breakdown[label ? label : "dest-4g"];
        }
      }
    }
    if (trial_error) ++acc.errors;
  });
}

std::vector<TrendRow> trend_report(const std::function<SimOutcome(const SimConfig&)>& op,
                                   std::vector<SimConfig> cfgs) {
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    const auto& a = cfgs[0];
    const auto& b = cfgs[i];
    if (a.blocks != b.blocks || a.trials != b.trials || a.seed != b.seed || a.rates != b.rates ||
        a.epsilon != b.epsilon)
      throw validation_error("trend_report: configs must agree on everything but n");
  }
  std::vector<TrendRow> rows;
  rows.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    const SimOutcome out = op(cfg);
    rows.push_back({cfg.n, out.trials, out.errors, out.error_rate, out.breakdown});
  }
  return rows;
}

std::string trend_csv(const std::vector<TrendRow>& rows) {
  std::string csv = "n,trials,errors,error_rate,stage_breakdown\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%ld,%.6g,", r.n, r.trials, r.errors, r.error_rate);
    csv += buf;
    bool first = true;
    for (const auto& [label, count] : r.breakdown) {
      csv += (first ? "" : ";") + label + ":" + std::to_string(count);
      first = false;
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace macfcs
