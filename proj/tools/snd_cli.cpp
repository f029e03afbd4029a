// snd: command line driver for the small-noise-defense experiments.
//
//   snd gen-data --config desk.cfg --out run/
//   snd train    --config desk.cfg --out run/
//   snd attack   --config desk.cfg --out run/ --jobs 4
//   snd analyze  --config desk.cfg --out run/ --mode logs
//   snd plot     --out run/
//
// Exit status: 0 success, 1 a run (or training) failed, 2 bad config/input.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snd/analysis.hpp"
#include "snd/config.hpp"
#include "snd/dataset.hpp"
#include "snd/errors.hpp"
#include "snd/experiment.hpp"
#include "snd/format.hpp"
#include "snd/model_io.hpp"
#include "snd/svg_plot.hpp"
#include "snd/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kRunFailed = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t jobs = 1;
  std::string mode = "clean";
  std::string csv;
  std::string svg;
  std::string title = "Attack success rate vs query budget";
};

// Thrown for unreadable inputs that are not config syntax problems.
struct InputError : snd::Error {
  using snd::Error::Error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw snd::Error("cannot write " + p.string());
}

snd::Config load_config(const Options& o) {
  snd::Config c = o.config_path.empty() ? snd::Config{} : snd::Config::load(o.config_path);
  // A loaded model defaults to the file `train` writes.
  if (c.get_string("model.source", "train") == "load" && !c.has("model.path")) {
    c.set("model.path", (fs::path(o.out) / "model.txt").string());
  }
  return c;
}

snd::ExperimentConfig experiment(const Options& o, const char* seed_key) {
  snd::Config c = load_config(o);
  if (o.seed) c.set(seed_key, std::to_string(*o.seed));
  auto e = snd::ExperimentConfig::from(c);
  e.validate();
  return e;
}

int cmd_gen_data(const Options& o) {
  const auto cfg = experiment(o, "data.seed");
  const auto data = snd::generate_dataset(cfg.data);
  const fs::path path = fs::path(o.out) / "data.txt";
  fs::create_directories(o.out);
  snd::save_dataset(path.string(), data);
  std::printf("wrote %zu samples (%zux%zux%zu, %zu classes) to %s\n", data.size(), data.shape.width,
              data.shape.height, data.shape.channels, data.num_classes, path.c_str());
  const auto counts = data.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    std::printf("  class %zu: %zu (%.1f%%)\n", k, counts[k], 100.0 * double(counts[k]) / double(data.size()));
  }
  return kOk;
}

int cmd_train(const Options& o) {
  const auto cfg = experiment(o, "train.seed");
  const auto data = snd::obtain_dataset(cfg);
  snd::TrainReport rep;
  const auto model = snd::train_mlp(data, cfg.hidden, cfg.sgd, cfg.train_seed, &rep);
  const fs::path path = fs::path(o.out) / "model.txt";
  fs::create_directories(o.out);
  snd::save_model(path.string(), model);
  std::printf("trained MLP %zu", model.input_dim());
  for (auto h : cfg.hidden) std::printf("-%zu", h);
  std::printf("-%zu for %zu epochs\n", model.num_classes(), cfg.sgd.epochs);
  std::printf("final loss %.4f, train accuracy %.2f%%\n", rep.final_loss, 100.0 * rep.train_accuracy);
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_attack(const Options& o) {
  const auto cfg = experiment(o, "seed");
  const auto data = snd::obtain_dataset(cfg);
  const auto model = snd::obtain_model(cfg, data);
  const auto eval = snd::select_eval_set(cfg, model);
  if (eval.images.size() < cfg.eval_images) {
    std::fprintf(stderr, "warning: only %zu correctly classified evaluation images\n", eval.images.size());
  }
  fs::create_directories(o.out);
  const auto results = snd::run_grid(cfg, model, eval, o.jobs, o.out);

  write_file(fs::path(o.out) / "results.csv", snd::results_csv(cfg, results));
  const std::string table = snd::summary_table(cfg, results);
  write_file(fs::path(o.out) / "summary.txt", table);
  std::cout << table;

  json run;
  run["config_hash"] = cfg.hash;
  run["master_seed"] = cfg.master_seed;
  run["n_images"] = eval.images.size();
  run["cells"] = json::array();
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json cell;
    cell["index"] = r.cell.index;
    cell["attack"] = r.cell.attack;
    cell["defense"] = r.cell.defense.label();
    cell["T"] = r.cell.T;
    cell["seed"] = r.cell.seed;
    cell["status"] = r.status;
    if (!r.reason.empty()) cell["reason"] = r.reason;
    cell["traces"] = "traces/cell_" + std::to_string(i) + ".json";
    cell["report"] = json::parse(r.report.to_json());
    run["cells"].push_back(std::move(cell));
    if (r.status != "ok") {
      failed = true;
      std::fprintf(stderr, "cell %zu (%s, %s) failed: %s\n", i, r.cell.attack.c_str(),
                   r.cell.defense.label().c_str(), r.reason.c_str());
    }
  }
  write_file(fs::path(o.out) / "run.json", run.dump(2) + "\n");
  return failed ? kRunFailed : kOk;
}

struct LogTally {
  std::size_t mismatches = 0;
  std::size_t queries = 0;
  std::vector<double> final_l2;
};

// Replays the undefended model over every logged attack-time query.
std::map<std::string, LogTally> tally_logs(const fs::path& out, const snd::Classifier& model) {
  const fs::path qdir = out / "queries";
  if (!fs::is_directory(qdir)) throw InputError("no query logs under " + qdir.string() + " (set log.queries = true)");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(qdir)) {
    if (e.path().extension() == ".csv") files.push_back(e.path());
  }
  if (files.empty()) throw InputError("no query logs under " + qdir.string());
  std::sort(files.begin(), files.end());

  std::map<std::string, LogTally> by_defense;
  for (const auto& f : files) {
    std::istringstream in(read_file(f));
    std::string line;
    std::getline(in, line);
    if (line.rfind("# defense=", 0) != 0) throw InputError(f.string() + ": missing defense header");
    LogTally& t = by_defense[line.substr(10)];
    std::getline(in, line);  // column names
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = snd::split_csv_line(line);
      if (fields.size() < 4) throw InputError(f.string() + ": short row");
      snd::Vec x;
      x.reserve(fields.size() - 3);
      for (std::size_t i = 3; i < fields.size(); ++i) x.push_back(std::stod(fields[i]));
      ++t.queries;
      if (model.predict_label(x) != std::stoul(fields[2])) ++t.mismatches;
    }
    // final norms from the matching trace file
    const fs::path trace = out / "traces" / f.filename().replace_extension(".json");
    if (fs::exists(trace)) {
      const auto j = json::parse(read_file(trace));
      for (const auto& tr : j.at("traces")) t.final_l2.push_back(tr.value("final_l2", 0.0));
    }
  }
  return by_defense;
}

int cmd_analyze(const Options& o) {
  if (o.mode != "clean" && o.mode != "logs") throw snd::ConfigError("--mode must be clean or logs");
  const auto cfg = experiment(o, "seed");
  const auto data = snd::obtain_dataset(cfg);
  const auto model = snd::obtain_model(cfg, data);
  const auto eval = snd::select_eval_set(cfg, model);
  const std::size_t trials = cfg.pmis_trials ? cfg.pmis_trials : 100;
  const std::size_t sh_trials = std::max<std::size_t>(2, cfg.sigma_hat_trials);

  std::map<std::string, LogTally> logs;
  if (o.mode == "logs") logs = tally_logs(o.out, model);

  std::string csv = snd::MetricReport::csv_header() + "\n";
  std::printf("%-28s %10s %10s %12s %10s\n", "defense", "P_mis", "sigma_hat", "mean_final", "samples");
  std::uint64_t stream = 0;
  for (const auto& d : cfg.defenses) {
    snd::MetricReport m;
    m.attack = o.mode == "clean" ? "clean" : "attack-logs";
    m.defense = d.label();
    m.sigma = d.noise_sigma();
    m.seed = cfg.master_seed;
    m.n_images = eval.images.size();
    if (o.mode == "clean") {
      snd::SeededRng rng = snd::SeededRng::derive(cfg.master_seed ^ 0xc1eaULL, stream);
      m.pmis = snd::estimate_pmis(model, d, eval.images, trials, rng);
      m.pmis_samples = trials * eval.images.size();
    } else {
      const auto it = logs.find(d.label());
      if (it == logs.end() || it->second.queries == 0) {
        throw InputError("no query logs recorded for defense " + d.label());
      }
      m.pmis = double(it->second.mismatches) / double(it->second.queries);
      m.pmis_samples = it->second.queries;
      const auto& f = it->second.final_l2;
      double s = 0.0;
      for (double v : f) s += v;
      m.mean_final_l2 = f.empty() ? 0.0 : s / double(f.size());
    }
    snd::SeededRng rng = snd::SeededRng::derive(cfg.master_seed ^ 0x5167ULL, stream++);
    m.sigma_hat = snd::estimate_sigma_hat(model, d, eval.images, eval.labels, sh_trials, rng);
    m.sigma_hat_samples = sh_trials * eval.images.size();
    csv += m.csv_row() + "\n";
    std::printf("%-28s %10.4f %10.4f %12.4f %10zu\n", m.defense.c_str(), m.pmis, m.sigma_hat, m.mean_final_l2,
                m.pmis_samples);
  }
  write_file(fs::path(o.out) / ("analysis_" + o.mode + ".csv"), csv);
  return kOk;
}

int cmd_plot(const Options& o) {
  const fs::path csv = o.csv.empty() ? fs::path(o.out) / "results.csv" : fs::path(o.csv);
  const fs::path svg = o.svg.empty() ? fs::path(o.out) / "success.svg" : fs::path(o.svg);
  const auto series = snd::series_from_results_csv(read_file(csv));
  write_file(svg, snd::render_success_chart(series, o.title));
  std::printf("wrote %s (%zu series)\n", svg.c_str(), series.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small noise defense experiments on the desk task"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override the seed this command draws from");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset");
  auto* train = app.add_subcommand("train", "train the MLP classifier");
  auto* attack = app.add_subcommand("attack", "run the attack x defense x seed grid");
  auto* analyze = app.add_subcommand("analyze", "P_mis and sigma_hat per defense");
  auto* plot = app.add_subcommand("plot", "success-rate chart from results.csv");
  for (auto* s : {gen, train, attack, analyze, plot}) common(s);
  analyze->add_option("--mode", o.mode, "clean | logs")->capture_default_str();
  plot->add_option("--csv", o.csv, "results CSV (default OUT/results.csv)");
  plot->add_option("--svg", o.svg, "output file (default OUT/success.svg)");
  plot->add_option("--title", o.title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o);
    if (train->parsed()) return cmd_train(o);
    if (attack->parsed()) return cmd_attack(o);
    if (analyze->parsed()) return cmd_analyze(o);
    return cmd_plot(o);
  } catch (const snd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kConfigError;
  } catch (const snd::FormatError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRunFailed;
  }
}
