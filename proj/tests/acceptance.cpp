// Acceptance checks. Usage: celm_acceptance [N ...]; with no arguments every
// criterion runs. One PASS/FAIL line per criterion; exit status is non-zero
// when any requested criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "adversarial.hpp"
#include "celm.hpp"
#include "oracle.hpp"

using namespace celm;
using namespace celm::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Manifest manifest() { return load_manifest(std::string(CELM_DATA_DIR) + "/manifest.json"); }

const ManifestEntry& entry(const Manifest& m, const std::string& name) {
  for (const auto& e : m.datasets)
    if (e.name == name) return e;
  throw UsageError("manifest has no dataset '" + name + "'");
}

GridReport grid_for(const Manifest& m, const std::string& name) {
  const auto& e = entry(m, name);
  const auto ds = data::load_csv((m.base_dir / e.file).string());
  return run_grid(ds, e.name, e.config, e.grid, m.seeds);
}

// 1. Recursive updates reproduce the stacked batch solve.
Outcome batch_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(101);
  double worst = 0.0;
  int instances = 0;
  while (instances < 100) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 10);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::Index t = std::min<Eigen::Index>(50, k + 5 + static_cast<Eigen::Index>(rng() % 40));
    const Eigen::Index t0_rows = k + static_cast<Eigen::Index>(rng() % (t - k));
    const Matrix h = oracle::random_matrix(rng, t, k, 0.0, 1.0);
    if (Eigen::FullPivLU<Matrix>(h.topRows(t0_rows)).rank() < k) continue;
    const Matrix y = oracle::random_coded(rng, t, n);
    auto s = solver::rls_init(h.topRows(t0_rows), y.topRows(t0_rows), 0.0);
    for (Eigen::Index i = t0_rows; i < t; ++i) s = solver::rls_step(s, h.row(i).transpose(), Vector(y.row(i).transpose()));
    worst = std::max(worst, oracle::relative_error(s.weights, solver::pinv_solve(h, y)));
    ++instances;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 5.0,
          "100 instances, worst relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// 2. Every pseudoinverse solve satisfies the normal equations.
Outcome normal_equations() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(202);
  double worst_ratio = 0.0;
  int deficient = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index t = 2 + static_cast<Eigen::Index>(rng() % 49);
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 10);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 3);
    Matrix h;
    if (i % 2 == 0) {
      const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % std::max<Eigen::Index>(1, std::min(t, k) - 1));
      h = oracle::random_rank_deficient(rng, t, k, r);
    } else {
      h = oracle::random_matrix(rng, t, k);
    }
    if (Eigen::FullPivLU<Matrix>(h).rank() < std::min(t, k) || k > t) ++deficient;
    const Matrix y = oracle::random_coded(rng, t, n);
    const Matrix w = solver::pinv_solve(h, y);
    const double bound = 1e-8 * (1.0 + (h.transpose() * y).norm());
    worst_ratio = std::max(worst_ratio, oracle::normal_residual(h, w, y) / bound);
  }
  const double secs = seconds_since(t0);
  return {worst_ratio <= 1.0 && secs < 5.0 && deficient > 0,
          "100 instances (" + std::to_string(deficient) + " rank-deficient), worst residual/bound " +
              fmt("%.2e", worst_ratio) + ", " + fmt("%.2f", secs) + " s"};
}

// 3. Collative values stay in [0,1]; surprise vanishes exactly on correct predictions.
Outcome collative_fuzz() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(303);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int range_failures = 0, surprise_failures = 0, saturated_wrong = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t m = 1 + rng() % 6, n = 2 + rng() % 5, k = 1 + rng() % 10;
    NetworkState net(m, n);
    for (std::size_t i = 0; i < k; ++i) {
      Vector c(static_cast<Eigen::Index>(m));
      for (auto& v : c) v = u(rng);
      net.neurons.push_back({c, 0.05 + 5.0 * (u(rng) + 1.0), static_cast<ClassId>(1 + rng() % n)});
    }
    net.weights = oracle::random_matrix(rng, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n), -4.0, 4.0);
    Vector x(static_cast<Eigen::Index>(m));
    for (auto& v : x) v = 1.5 * u(rng);
    const auto y = CodedLabel::from_class(static_cast<ClassId>(1 + rng() % n), n);
    const auto s = appraise(x, y, net, trial % 2 ? PosteriorSource::HingeError : PosteriorSource::TruncatedOutput);
    for (double v : {s.novelty, s.uncertainty, s.conflict, s.surprise})
      if (!(v >= 0.0 && v <= 1.0)) ++range_failures;
    // independent route to correctness: argmax of the raw output by hand
    const Vector out = oracle::naive_output(hidden_row(x, net), net.weights);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < out.size(); ++j)
      if (out(j) > out(best)) best = j;
    const bool correct = best + 1 == y.class_id();
    if ((s.surprise == 0.0) != correct) {
      // surprise may also vanish when a wrong prediction has a zero hinge error
      const Vector e = hinge_error(out, y);
      const bool zero_error = e(y.class_id() - 1) == 0.0 || e(best) == 0.0;
      if (correct || !zero_error) ++surprise_failures;
      else ++saturated_wrong;
    }
  }
  const double secs = seconds_since(t0);
  return {range_failures == 0 && surprise_failures == 0 && secs < 10.0,
          "10000 pairs, " + std::to_string(range_failures) + " out of range, " + std::to_string(surprise_failures) +
              " surprise mismatches, " + std::to_string(saturated_wrong) +
              " wrong predictions with a saturated (zero) hinge error, " + fmt("%.2f", secs) + " s"};
}

// 4. Wundt curve is unimodal; entropy is bounded and maximal at uniform.
Outcome wundt_entropy() {
  const auto t0 = std::chrono::steady_clock::now();
  const arousal::WundtParams p;
  int direction_changes = 0, last = 0;
  for (int i = 1; i <= 1000; ++i) {
    const double d = arousal::wundt_hedonic(i / 1000.0, p) - arousal::wundt_hedonic((i - 1) / 1000.0, p);
    const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sign != 0 && last != 0 && sign != last) ++direction_changes;
    if (sign != 0) last = sign;
  }
  const bool unimodal = direction_changes == 1;
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_excess = 0.0, worst_uniform = 0.0, worst_negative = 0.0;
  for (std::size_t n = 2; n <= 64; ++n) {
    const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    const double hmax = std::log2(static_cast<double>(n));
    worst_uniform = std::max(worst_uniform, std::abs(arousal::shannon_entropy(uniform) - hmax));
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> q(n);
      double sum = 0.0;
      for (auto& v : q) sum += (v = u(rng) * (trial % 5 == 0 ? u(rng) : 1.0));
      for (auto& v : q) v /= sum;
      const double h = arousal::shannon_entropy(q);
      worst_excess = std::max(worst_excess, h - hmax);
      worst_negative = std::min(worst_negative, h);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = unimodal && worst_excess <= 1e-9 && worst_uniform <= 1e-9 && worst_negative >= 0.0 && secs < 1.0;
  return {ok, std::string(unimodal ? "unimodal" : "not unimodal") + ", max entropy excess " +
                  fmt("%.1e", worst_excess) + ", uniform deviation " + fmt("%.1e", worst_uniform) + ", " +
                  fmt("%.3f", secs) + " s"};
}

std::string grid_summary(const GridReport& r, double secs) {
  std::ostringstream os;
  os << "eta_o mean " << fmt("%.2f", r.eta_o.mean) << " (best seed " << fmt("%.2f", r.eta_o_best) << "), K mean "
     << fmt("%.1f", r.k_mean) << ", deletions mean " << fmt("%.1f", r.deletions_mean) << ", " << r.seeds.size()
     << " seeds x " << r.points.size() << " points, " << fmt("%.1f", secs) << " s";
  return os.str();
}

double max_k(const GridReport& r) {
  double k = 0.0;
  for (const auto& run : r.runs) k = std::max(k, static_cast<double>(run.final_k));
  return k;
}

// 5. Iris.
Outcome iris() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = manifest();
  const auto r = grid_for(m, "iris");
  const double secs = seconds_since(t0);
  std::size_t no_deletion = 0;
  for (const auto& run : r.runs) no_deletion += run.deletions == 0 ? 1 : 0;
  const bool ok = r.seeds.size() >= 10 && r.eta_o.mean >= 96.0 && r.eta_o_best >= 98.0 && max_k(r) <= 12.0 &&
                  2 * no_deletion > r.runs.size() && secs < 120.0;
  return {ok, grid_summary(r, secs) + ", max K " + fmt("%.0f", max_k(r)) + ", deletion-free seeds " +
                  std::to_string(no_deletion)};
}

// 6. Breast cancer.
Outcome breast_cancer() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = grid_for(manifest(), "breast_cancer");
  const double secs = seconds_since(t0);
  return {r.eta_o.mean >= 94.5 && max_k(r) <= 20.0 && secs < 180.0,
          grid_summary(r, secs) + ", max K " + fmt("%.0f", max_k(r))};
}

// 7. Wine.
Outcome wine() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = grid_for(manifest(), "wine");
  const double secs = seconds_since(t0);
  return {r.eta_o.mean >= 95.0 && max_k(r) <= 16.0 && secs < 120.0,
          grid_summary(r, secs) + ", max K " + fmt("%.0f", max_k(r))};
}

// 8. Full table.
Outcome full_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = manifest();
  const auto r = run_reproduce(m, {}, [](const ReproRow& row) {
    std::cerr << "  " << row.entry.name << ": " << to_string(row.status) << '\n';
  });
  const double secs = seconds_since(t0);
  bool ok = r.rows.size() == 8 && secs < 1800.0;
  std::ostringstream os;
  for (const auto& row : r.rows) {
    const bool accepted = row.status == RowStatus::WithinBand || row.status == RowStatus::SplitInduced;
    ok = ok && accepted;
    os << row.entry.name << "=" << to_string(row.status);
    if (row.grid) os << "(" << fmt("%.2f", row.grid->eta_o.mean) << ", K " << fmt("%.1f", row.grid->k_mean) << ")";
    os << "; ";
  }
  os << fmt("%.0f", secs) << " s";
  return {ok, os.str()};
}

// 9. Deletion pathway.
Outcome deletion_pathway() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto found = adversarial::find_single_deletion_stream();
  std::size_t deletions = 0;
  bool residual_ok = true;
  if (found) {
    Trainer tr(found->stream.dim(), found->stream.n_classes, found->config);
    for (std::size_t i = 0; i < found->stream.size(); ++i) {
      const auto log = tr.train_step(found->stream.sample(i), found->stream.labels[i]);
      if (log.applied != StrategyChoice::DeleteNeuron) continue;
      ++deletions;
      const Matrix h = hidden_matrix(tr.history_inputs(), tr.network());
      const Matrix y = tr.history_targets();
      residual_ok = residual_ok && oracle::normal_residual(h, tr.network().weights, y) <=
                                       1e-8 * (1.0 + (h.transpose() * y).norm());
    }
  }
  const auto glass = grid_for(manifest(), "glass");
  const double secs = seconds_since(t0);
  return {deletions >= 1 && residual_ok && glass.deletions_mean > 0.0 && secs < 60.0,
          "adversarial stream deletions " + std::to_string(deletions) + (residual_ok ? ", residual ok" : ", residual FAILED") +
              ", glass deletions mean " + fmt("%.2f", glass.deletions_mean) + ", " + fmt("%.1f", secs) + " s"};
}

// 10. Determinism of repeated training runs.
Outcome determinism() {
  const auto m = manifest();
  std::size_t compared = 0, identical = 0;
  for (const auto& e : m.datasets) {
    const auto ds = data::load_csv((m.base_dir / e.file).string());
    for (std::uint64_t seed : {1u, 2u}) {
      auto cfg = e.config;
      cfg.celm.seed = seed;
      cfg.split.seed = seed;
      TrainReport la, lb;
      auto a = run_train(ds, e.name, cfg, &la);
      auto b = run_train(ds, e.name, cfg, &lb);
      la.wall_time_ms = lb.wall_time_ms = 0.0;
      a.wall_time_ms = b.wall_time_ms = 0.0;
      ++compared;
      if (nlohmann::json(a).dump() == nlohmann::json(b).dump() && nlohmann::json(la).dump() == nlohmann::json(lb).dump())
        ++identical;
    }
  }
  return {compared == identical && compared > 0,
          std::to_string(identical) + "/" + std::to_string(compared) + " repeated runs identical modulo wall time"};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria = {
    {"batch equivalence", batch_equivalence}, {"normal-equations residual", normal_equations},
    {"collative-range fuzz", collative_fuzz},  {"Wundt and entropy properties", wundt_entropy},
    {"iris reproduction", iris},               {"breast cancer reproduction", breast_cancer},
    {"wine reproduction", wine},               {"eight-dataset table", full_table},
    {"deletion pathway", deletion_pathway},    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::cerr << "usage: " << argv[0] << " [1-" << kCriteria.size() << " ...]\n";
      return 2;
    }
    which.push_back(n);
  }
  if (which.empty())
    for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) which.push_back(n);

  bool all = true;
  for (int n : which) {
    const auto& [name, run] = kCriteria[static_cast<std::size_t>(n - 1)];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
