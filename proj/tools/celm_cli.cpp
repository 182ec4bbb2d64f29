// celm: train, grid-search and benchmark the curiosity-driven ELM from the
// command line.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 data, 4 numeric.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "celm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumeric = 4 };

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw celm::UsageError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw celm::UsageError("failed writing '" + path.string() + "'");
}

std::string dataset_name(const std::string& path) { return fs::path(path).stem().string(); }

celm::harness::RunConfig read_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto config = celm::harness::load_run_config(path);
  if (seed) config.celm.seed = *seed;
  return config;
}

celm::data::Dataset read_dataset(const std::string& path, const celm::harness::RunConfig& config) {
  return celm::data::load_csv(path, {config.label_column, config.header, {}});
}

celm::arousal::WundtParams read_wundt_params(const std::string& path) {
  celm::arousal::WundtParams p;
  if (path.empty()) return p;
  std::ifstream in(path);
  if (!in) throw celm::UsageError("cannot open wundt parameter file '" + path + "'");
  try {
    json j;
    in >> j;
    p.r_max = j.value("r_max", p.r_max);
    p.p_max = j.value("p_max", p.p_max);
    p.rho_r = j.value("rho_r", p.rho_r);
    p.rho_p = j.value("rho_p", p.rho_p);
    p.r_min = j.value("r_min", p.r_min);
    p.p_min = j.value("p_min", p.p_min);
  } catch (const json::exception& e) {
    throw celm::UsageError("wundt parameters '" + path + "': " + e.what());
  }
  return p;
}

celm::harness::GridSpec read_grid(const std::string& spec) {
  if (spec.empty() || spec == "default") return celm::harness::GridSpec::default_grid();
  std::ifstream in(spec);
  if (!in) throw celm::UsageError("cannot open grid file '" + spec + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw celm::UsageError("grid '" + spec + "': " + e.what());
  }
  return celm::harness::parse_grid_spec(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curiosity-driven extreme learning machine benchmark harness"};
  app.require_subcommand(1);

  std::string data_path, config_path, out_path, log_path, grid_spec, seeds_text = "1-10", manifest_path;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t points = 1001;

  auto* train = app.add_subcommand("train", "fit on the training split and report test accuracy");
  train->add_option("--data", data_path, "CSV dataset")->required();
  train->add_option("--config", config_path, "JSON run configuration")->required();
  train->add_option("--out", out_path, "RunReport JSON output")->required();
  train->add_option("--seed", seed, "override the configured seed");
  train->add_option("--log", log_path, "optional per-step training log (JSON)");

  auto* grid = app.add_subcommand("grid", "threshold grid search over several seeds");
  grid->add_option("--data", data_path, "CSV dataset")->required();
  grid->add_option("--config", config_path, "JSON run configuration")->required();
  grid->add_option("--out", out_path, "grid report JSON output")->required();
  grid->add_option("--grid", grid_spec, "grid JSON file, or 'default'");
  grid->add_option("--seeds", seeds_text, "seed list, e.g. 1-10 or 1,4,9");
  grid->add_flag("--oracle", oracle, "select on test accuracy instead of the validation fold");
  grid->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* reproduce = app.add_subcommand("reproduce", "run the benchmark table from a manifest");
  reproduce->add_option("--manifest", manifest_path, "manifest JSON")->required();
  reproduce->add_option("--out", out_path, "output directory")->required();
  reproduce->add_option("--seeds", seeds_text, "override the manifest seed list");
  reproduce->add_flag("--oracle", oracle, "select on test accuracy instead of the validation fold");
  reproduce->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* wundt = app.add_subcommand("wundt", "emit the Wundt curve as CSV");
  wundt->add_option("--config", config_path, "JSON with r_max, p_max, rho_r, rho_p, r_min, p_min");
  wundt->add_option("--points", points, "grid size (>= 2)");
  wundt->add_option("--out", out_path, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      const auto config = read_config(config_path, seed);
      const auto ds = read_dataset(data_path, config);
      celm::TrainReport log;
      const auto report =
          celm::harness::run_train(ds, dataset_name(data_path), config, log_path.empty() ? nullptr : &log);
      write_file(out_path, json(report).dump(2) + "\n");
      if (!log_path.empty()) write_file(log_path, json(log).dump(2) + "\n");
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << out_path << "\n"
                << report.dataset << ": eta_o=" << report.eta_o << " eta_a=" << report.eta_a
                << " K=" << report.final_k << " deletions=" << report.deletions << "\n";
    } else if (*grid) {
      const auto config = read_config(config_path, std::nullopt);
      const auto spec = read_grid(grid_spec);
      const auto seeds = celm::harness::parse_seed_list(seeds_text);
      const auto ds = read_dataset(data_path, config);
      celm::harness::GridOptions opts;
      opts.oracle = oracle;
      opts.jobs = jobs;
      std::cerr << "grid: " << spec.enumerate(config.celm).size() << " points x " << seeds.size() << " seeds\n";
      const auto report = celm::harness::run_grid(ds, dataset_name(data_path), config, spec, seeds, opts);
      write_file(out_path, celm::harness::grid_report_to_json(report).dump(2) + "\n");
      std::cout << out_path << "\n"
                << report.dataset << " [" << report.selection << ", " << report.points.size()
                << " points]: eta_o=" << report.eta_o.mean << "+/-" << report.eta_o.sd
                << " eta_a=" << report.eta_a.mean << "+/-" << report.eta_a.sd << " K=" << report.k_mean << "\n";
    } else if (*reproduce) {
      auto manifest = celm::harness::load_manifest(manifest_path);
      if (reproduce->count("--seeds") > 0) manifest.seeds = celm::harness::parse_seed_list(seeds_text);
      celm::harness::GridOptions opts;
      opts.oracle = oracle;
      opts.jobs = jobs;
      const auto report = celm::harness::run_reproduce(manifest, opts, [](const celm::harness::ReproRow& row) {
        std::cerr << row.entry.name << ": " << celm::harness::to_string(row.status);
        if (row.grid) std::cerr << " eta_o=" << row.grid->eta_o.mean << " K=" << row.grid->k_mean;
        std::cerr << "\n";
      });
      const fs::path dir(out_path);
      write_file(dir / "reproduction.md", celm::harness::render_markdown(report));
      write_file(dir / "reproduction.json", celm::harness::repro_report_to_json(report).dump(2) + "\n");
      std::size_t within = 0, split_induced = 0, missed = 0, skipped = 0;
      for (const auto& row : report.rows) {
        switch (row.status) {
          case celm::harness::RowStatus::WithinBand: ++within; break;
          case celm::harness::RowStatus::SplitInduced: ++split_induced; break;
          case celm::harness::RowStatus::Miss: ++missed; break;
          case celm::harness::RowStatus::Skipped: ++skipped; break;
        }
      }
      std::cout << (dir / "reproduction.md").string() << "\n"
                << report.rows.size() << " datasets: " << within << " within band, " << split_induced
                << " split-induced, " << missed << " missed, " << skipped << " skipped\n";
    } else if (*wundt) {
      const auto params = read_wundt_params(config_path);
      write_file(out_path, celm::harness::wundt_csv(params, points));
      std::cout << out_path << "\n"
                << "wundt: " << points << " points, argmax at s=" << celm::arousal::wundt_argmax(params) << "\n";
    }
  } catch (const celm::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const celm::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const celm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const celm::DomainError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
