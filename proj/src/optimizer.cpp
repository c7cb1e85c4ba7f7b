#include "macfcs/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "macfcs/rng.hpp"

namespace macfcs {

namespace {

using Rows = std::vector<std::vector<double>>;

struct EvalResult {
  double objective = 0.0;
  FeasibilityReport report;
};

using EvalFn = std::function<EvalResult(const Rows&)>;

double objective_of(const FeasibilityReport& rep, double indep_penalty) {
  double obj = rep.min_margin;
  if (rep.indep_tv) obj -= indep_penalty * *rep.indep_tv;
  return obj;
}

Rows uniform_rows(const std::vector<std::size_t>& shape) {
  Rows rows;
  rows.reserve(shape.size());
  for (std::size_t k : shape) rows.emplace_back(k, 1.0 / static_cast<double>(k));
  return rows;
}

Rows dirichlet_rows(const std::vector<std::size_t>& shape, rng::Stream& s) {
  Rows rows;
  rows.reserve(shape.size());
  for (std::size_t k : shape) {
    std::vector<double> row(k);
    double sum = 0.0;
    for (auto& v : row) {
      v = -std::log(1.0 - s.next_double());
      sum += v;
    }
    for (auto& v : row) v /= sum;
    rows.push_back(std::move(row));
  }
  return rows;
}

bool project_perturbed(std::vector<double>& row, std::size_t i, double delta) {
  row[i] += delta;
  double sum = 0.0;
  for (auto& v : row) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) return false;
  for (auto& v : row) v /= sum;
  return true;
}

// Coordinate ascent over every simplex entry; keeps strictly improving moves.
// The step halves whenever a full sweep makes no progress.
void refine(Rows& rows, EvalResult& best, const EvalFn& eval, int max_sweeps, long& evals) {
  double delta = 0.1;
  for (int sweep = 0; sweep < max_sweeps && delta >= 1e-4; ++sweep) {
    bool improved = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() < 2) continue;
      for (std::size_t i = 0; i < rows[r].size(); ++i) {
        for (double sign : {1.0, -1.0}) {
          Rows cand = rows;
          if (!project_perturbed(cand[r], i, sign * delta)) continue;
          EvalResult er = eval(cand);
          ++evals;
          if (er.objective > best.objective) {
            rows = std::move(cand);
            best = std::move(er);
            improved = true;
          }
        }
      }
    }
    if (!improved) delta *= 0.5;
  }
}

struct SearchOutcome {
  Rows rows;
  EvalResult eval;
  long evaluations = 0;
  int restart = 0;
};

SearchOutcome run_search(const std::vector<std::size_t>& shape, const SearchConfig& cfg,
                         const EvalFn& eval, std::string_view tag, const ProgressFn& progress) {
  if (cfg.restarts < 1) throw validation_error("SearchConfig: restarts must be >= 1");
  const int nworkers =
      std::max(1, std::min(cfg.restarts, cfg.workers > 0
                                             ? cfg.workers
                                             : static_cast<int>(std::thread::hardware_concurrency())));

  std::vector<SearchOutcome> local(nworkers);
  std::mutex progress_mu;
  double progress_best = -std::numeric_limits<double>::infinity();

  auto work = [&](int w) {
    SearchOutcome& out = local[w];
    out.restart = -1;
    for (int r = w; r < cfg.restarts; r += nworkers) {
      Rows rows;
      if (r == 0) {
        rows = uniform_rows(shape);
      } else {
        rng::Stream s(rng::stream_key(cfg.seed, tag, static_cast<std::uint64_t>(r)));
        rows = dirichlet_rows(shape, s);
      }
      EvalResult er = eval(rows);
      ++out.evaluations;
      refine(rows, er, eval, cfg.refine_iters, out.evaluations);
      if (out.restart < 0 || er.objective > out.eval.objective) {
        out.rows = std::move(rows);
        out.eval = std::move(er);
        out.restart = r;
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        progress_best = std::max(progress_best, out.eval.objective);
        progress(r, progress_best);
      }
    }
  };

  if (nworkers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  SearchOutcome best;
  best.restart = -1;
  long evals = 0;
  for (auto& out : local) {
    evals += out.evaluations;
    if (out.restart < 0) continue;
    const bool take = best.restart < 0 || out.eval.objective > best.eval.objective ||
                      (out.eval.objective == best.eval.objective && out.restart < best.restart);
    if (take) best = std::move(out);
  }
  best.evaluations = evals;
  return best;
}

}  // namespace

DFSearchResult search_df(const Channel& ch, const SourceStats& st, const SearchConfig& cfg,
                         const ProgressFn& progress) {
  const std::size_t w0c = cfg.card_or("W0", 2);
  const std::size_t w1c = cfg.card_or("W1", 2);
  const std::size_t w2c = cfg.card_or("W2", 2);
  const std::size_t wrows = w0c * w1c * w2c;
  const RegionTol tol{cfg.tol_feas, cfg.tol_zero};

  std::vector<std::size_t> shape{w0c, w1c, w2c};
  shape.insert(shape.end(), wrows, ch.x1_card);
  shape.insert(shape.end(), wrows, ch.x2_card);

  auto to_input = [&](const Rows& rows) {
    std::vector<double> fx1, fx2;
    for (std::size_t r = 0; r < wrows; ++r)
      fx1.insert(fx1.end(), rows[3 + r].begin(), rows[3 + r].end());
    for (std::size_t r = 0; r < wrows; ++r)
      fx2.insert(fx2.end(), rows[3 + wrows + r].begin(), rows[3 + wrows + r].end());
    return DFInput::make(w0c, w1c, w2c, rows[0], rows[1], rows[2], std::move(fx1), std::move(fx2),
                         ch.x1_card, ch.x2_card);
  };
  EvalFn eval = [&](const Rows& rows) {
    const DFInput in = to_input(rows);
    FeasibilityReport rep = df_constraints(build_df_joint(ch, in), st, tol);
    EvalResult er;
    er.objective = objective_of(rep, 0.0);
    er.report = std::move(rep);
    return er;
  };

  SearchOutcome out = run_search(shape, cfg, eval, "search-df", progress);
  return DFSearchResult{to_input(out.rows), std::move(out.eval.report), out.eval.objective,
                        out.evaluations, out.restart};
}

CFSearchResult search_cf(const Channel& ch, const SourceStats& st, const SearchConfig& cfg,
                         const ProgressFn& progress) {
  const std::size_t u1c = cfg.card_or("U1", 2);
  const std::size_t u2c = cfg.card_or("U2", 2);
  const std::size_t yt1c = cfg.card_or("Yt1", ch.y1_card + 1);
  const std::size_t yt2c = cfg.card_or("Yt2", ch.y2_card + 1);
  const std::size_t q1rows = ch.y1_card * ch.x1_card;
  const std::size_t q2rows = ch.y2_card * ch.x2_card;
  const RegionTol tol{cfg.tol_feas, cfg.tol_zero};

  std::vector<std::size_t> shape{u1c, u2c};
  shape.insert(shape.end(), u1c, ch.x1_card);
  shape.insert(shape.end(), u2c, ch.x2_card);
  shape.insert(shape.end(), q1rows, yt1c);
  shape.insert(shape.end(), q2rows, yt2c);

  auto to_input = [&](const Rows& rows) {
    std::size_t at = 2;
    auto take = [&](std::size_t nrows) {
      std::vector<double> flat;
      for (std::size_t r = 0; r < nrows; ++r, ++at)
        flat.insert(flat.end(), rows[at].begin(), rows[at].end());
      return flat;
    };
    auto fx1 = take(u1c);
    auto fx2 = take(u2c);
    auto fyt1 = take(q1rows);
    auto fyt2 = take(q2rows);
    return CFInput::make(u1c, u2c, yt1c, yt2c, rows[0], rows[1], std::move(fx1), std::move(fx2),
                         std::move(fyt1), std::move(fyt2), ch.x1_card, ch.x2_card, ch.y1_card,
                         ch.y2_card);
  };
  EvalFn eval = [&](const Rows& rows) {
    const CFInput in = to_input(rows);
    FeasibilityReport rep = cf_constraints(build_cf_joint(ch, in), st, cfg.tol_indep, tol);
    EvalResult er;
    er.objective = objective_of(rep, cfg.indep_penalty);
    er.report = std::move(rep);
    return er;
  };

  SearchOutcome out = run_search(shape, cfg, eval, "search-cf", progress);
  return CFSearchResult{to_input(out.rows), std::move(out.eval.report), out.eval.objective,
                        out.evaluations, out.restart};
}

}  // namespace macfcs
