// Command-line surface: compress / decompress / eval / benchmark.
//
// Exit codes are a stable contract for harnesses:
//   0 success, 2 usage error, 3 training finished infeasible,
//   4 I/O or decode failure.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "loonie/loonie.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "LxW" -> L hidden layers of width W.
loonie::SirenConfig parse_arch(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 == text.size()) {
    throw UsageError("bad --arch, expected LxW (e.g. 5x20): " + text);
  }
  try {
    loonie::SirenConfig cfg;
    std::size_t used = 0;
    cfg.hidden_layers = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    cfg.hidden_width = std::stoi(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
    if (!cfg.valid()) throw std::invalid_argument(text);
    return cfg;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("bad --arch, expected LxW (e.g. 5x20): " + text);
  }
}

std::string arch_string(const loonie::SirenConfig& cfg) {
  return std::to_string(cfg.hidden_layers) + "x" + std::to_string(cfg.hidden_width);
}

struct PaperTarget {
  double bpp;
  loonie::SirenConfig coin_arch;    // dense architecture matching the budget
  loonie::SirenConfig initial_arch; // next-larger start for loonie/mp
  double eta_dual;
};

const std::vector<PaperTarget>& paper_targets() {
  static const std::vector<PaperTarget> table = {
      {0.07, {2, 3, 5, 20, 30.0}, {2, 3, 5, 30, 30.0}, 7e-3},
      {0.15, {2, 3, 5, 30, 30.0}, {2, 3, 10, 28, 30.0}, 3e-3},
      {0.3, {2, 3, 10, 28, 30.0}, {2, 3, 10, 40, 30.0}, 1e-3},
      {0.6, {2, 3, 10, 40, 30.0}, {2, 3, 13, 40, 30.0}, 8e-4},
  };
  return table;
}

const PaperTarget* find_paper_target(double bpp) {
  for (const auto& t : paper_targets()) {
    if (std::fabs(t.bpp - bpp) < 1e-9) return &t;
  }
  return nullptr;
}

loonie::Method parse_method(const std::string& name) {
  if (name == "coin") return loonie::Method::coin;
  if (name == "loonie") return loonie::Method::loonie;
  if (name == "mp") return loonie::Method::mp;
  throw UsageError("unknown method: " + name + " (expected coin, loonie or mp)");
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad JSON config: ") + e.what());
  }
}

// Flags win over config-file values.
template <typename T>
void merge_key(std::optional<T>& slot, const json& cfg, const char* key) {
  if (slot.has_value() || !cfg.contains(key)) return;
  try {
    slot = cfg.at(key).get<T>();
  } catch (const std::exception&) {
    throw UsageError(std::string("config key has wrong type: ") + key);
  }
}

loonie::PixelDataset load_dataset(const std::string& path) {
  try {
    return loonie::load_image(path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

std::string default_metrics_path(const std::string& model_path) {
  fs::path p(model_path);
  p.replace_extension(".csv");
  return p.string();
}

void write_metrics(const loonie::MetricsLog& log, const std::string& path,
                   const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open metrics file for writing: " + path);
  log.write_csv(out, comment);
  if (!out) throw IoError("metrics write failed: " + path);
}

// ---------------------------------------------------------------- compress

struct CompressOptions {
  std::optional<std::string> image, out, metrics, arch, method;
  std::optional<double> target_bpp, paper_target;
  std::optional<double> eta_theta, eta_psi, eta_dual;
  std::optional<int> steps, eval_every;
  std::optional<std::uint64_t> seed;
  std::optional<bool> restarts;
  std::string config_path;

  // which exclusive-group members came from actual flags
  bool flag_arch = false, flag_target = false, flag_paper = false;
};

struct ResolvedRun {
  loonie::TrainConfig cfg;
  std::string image, out, metrics;
};

ResolvedRun resolve_compress(CompressOptions o) {
  if (!o.config_path.empty()) {
    const json cfg = load_config_json(o.config_path);
    // A flag on one side of an exclusive pair suppresses config values for
    // the other side.
    const bool drop_paper = o.flag_arch || o.flag_target;
    merge_key(o.image, cfg, "image");
    merge_key(o.out, cfg, "out");
    merge_key(o.metrics, cfg, "metrics");
    merge_key(o.method, cfg, "method");
    if (!o.flag_paper) merge_key(o.arch, cfg, "arch");
    if (!o.flag_paper) merge_key(o.target_bpp, cfg, "target_bpp");
    if (!drop_paper) merge_key(o.paper_target, cfg, "paper_target");
    merge_key(o.eta_theta, cfg, "eta_theta");
    merge_key(o.eta_psi, cfg, "eta_psi");
    merge_key(o.eta_dual, cfg, "eta_dual");
    merge_key(o.steps, cfg, "steps");
    merge_key(o.eval_every, cfg, "eval_every");
    merge_key(o.seed, cfg, "seed");
    merge_key(o.restarts, cfg, "restarts");
  }
  if (!o.image) throw UsageError("--image is required");
  if (!o.out) throw UsageError("--out is required");
  if (!o.method) throw UsageError("--method is required");

  ResolvedRun run;
  run.cfg.method = parse_method(*o.method);
  run.image = *o.image;
  run.out = *o.out;
  run.metrics = o.metrics.value_or(default_metrics_path(run.out));

  if (o.paper_target && (o.arch || o.target_bpp)) {
    throw UsageError("--paper-target excludes --arch and --target-bpp");
  }

  const bool sparse = run.cfg.method != loonie::Method::coin;
  if (!sparse && (o.target_bpp || o.paper_target)) {
    throw UsageError("coin is unconstrained; a target BPP makes no sense here");
  }

  if (o.paper_target) {
    const PaperTarget* t = find_paper_target(*o.paper_target);
    if (!t) throw UsageError("--paper-target must be one of 0.07, 0.15, 0.3, 0.6");
    run.cfg.arch = sparse ? t->initial_arch : t->coin_arch;
    if (sparse) {
      run.cfg.target_bpp = t->bpp;
      run.cfg.eta_dual = o.eta_dual.value_or(t->eta_dual);
    }
  } else {
    if (!o.arch) throw UsageError("--arch LxW is required without --paper-target");
    run.cfg.arch = parse_arch(*o.arch);
    if (sparse) {
      if (!o.target_bpp) throw UsageError("loonie/mp need --target-bpp or --paper-target");
      run.cfg.target_bpp = *o.target_bpp;
      run.cfg.eta_dual = o.eta_dual.value_or(1e-3);
    }
  }
  if (sparse && run.cfg.target_bpp <= 0.0) throw UsageError("target BPP must be positive");

  run.cfg.steps = o.steps.value_or(50'000);
  run.cfg.seed = o.seed.value_or(0);
  run.cfg.eval_every = o.eval_every.value_or(100);
  run.cfg.restarts_enabled = o.restarts.value_or(true);
  run.cfg.eta_theta =
      o.eta_theta.value_or(run.cfg.method == loonie::Method::loonie ? 1e-3 : 2e-4);
  run.cfg.eta_psi = o.eta_psi.value_or(7e-4);
  if (run.cfg.steps < 1) throw UsageError("--steps must be at least 1");
  if (run.cfg.eval_every < 1) throw UsageError("--eval-every must be at least 1");
  return run;
}

json config_json(const ResolvedRun& run) {
  json j;
  j["command"] = "compress";
  j["image"] = run.image;
  j["out"] = run.out;
  j["metrics"] = run.metrics;
  j["method"] = loonie::method_name(run.cfg.method);
  j["arch"] = arch_string(run.cfg.arch);
  j["omega0"] = run.cfg.arch.omega0;
  j["steps"] = run.cfg.steps;
  j["seed"] = run.cfg.seed;
  j["eval_every"] = run.cfg.eval_every;
  j["eta_theta"] = run.cfg.eta_theta;
  if (run.cfg.method != loonie::Method::coin) {
    j["target_bpp"] = run.cfg.target_bpp;
  }
  if (run.cfg.method == loonie::Method::loonie) {
    j["eta_psi"] = run.cfg.eta_psi;
    j["eta_dual"] = run.cfg.eta_dual;
    j["restarts"] = run.cfg.restarts_enabled;
  }
  return j;
}

int cmd_compress(const CompressOptions& options) {
  const ResolvedRun run = resolve_compress(options);
  const loonie::PixelDataset data = load_dataset(run.image);

  loonie::TrainResult result;
  try {
    result = loonie::train(run.cfg, data);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  try {
    loonie::write_model_file(result.model, data.height, data.width, run.out);
    write_metrics(result.log, run.metrics, config_json(run).dump());
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }

  const auto report =
      loonie::casted_bpp(std::span<const float>(result.model.effective()), data.pixel_count());
  const loonie::MetricsRecord& last = result.log.records.back();
  std::printf("method=%s arch=%s steps=%d psnr_f16=%.4f bpp=%.6f active_params=%zu\n",
              loonie::method_name(run.cfg.method), arch_string(run.cfg.arch).c_str(),
              run.cfg.steps, last.psnr_f16, report.bpp, report.active_params);

  if (run.cfg.method == loonie::Method::loonie && report.bpp > run.cfg.target_bpp) {
    std::fprintf(stderr, "constraint violated: final bpp %.6f > target %.6f\n", report.bpp,
                 run.cfg.target_bpp);
    return kExitInfeasible;
  }
  return kExitOk;
}

// -------------------------------------------------------------- decompress

int cmd_decompress(const std::string& model_path, const std::string& out_path,
                   std::optional<int> height, std::optional<int> width) {
  loonie::DecodedModel decoded;
  try {
    decoded = loonie::read_model_file(model_path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  const int h = height.value_or(decoded.height);
  const int w = width.value_or(decoded.width);
  if (h < 1 || w < 1) throw UsageError("--height/--width must be positive");
  try {
    const loonie::Image8 img = loonie::decompress_to_image(decoded.model, h, w);
    loonie::save_png(img, out_path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  std::printf("wrote %dx%d image to %s\n", w, h, out_path.c_str());
  return kExitOk;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const std::string& model_path, const std::string& image_path) {
  loonie::DecodedModel decoded;
  std::size_t file_bytes = 0;
  try {
    decoded = loonie::read_model_file(model_path);
    file_bytes = static_cast<std::size_t>(fs::file_size(model_path));
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  const loonie::PixelDataset data = load_dataset(image_path);
  if (decoded.height != data.height || decoded.width != data.width) {
    throw UsageError("model was trained at " + std::to_string(decoded.width) + "x" +
                     std::to_string(decoded.height) + " but the image is " +
                     std::to_string(data.width) + "x" + std::to_string(data.height));
  }

  const loonie::Image8 rendered =
      loonie::decompress_to_image(decoded.model, data.height, data.width);
  std::vector<float> rec(rendered.pixels.size());
  for (std::size_t i = 0; i < rec.size(); ++i) rec[i] = rendered.pixels[i] / 255.0f;
  const double psnr_db =
      loonie::psnr(std::span<const float>(data.targets), std::span<const float>(rec));

  std::size_t active = 0;
  for (const float g : decoded.model.gates) active += (g != 0.0f) ? 1 : 0;
  const loonie::FileBits bits = loonie::file_bits(file_bytes, active, data.pixel_count());
  std::printf("psnr_db=%.6f bpp=%.6f file_bpp=%.6f active_params=%zu\n", psnr_db,
              bits.payload_bpp, bits.total_bpp, active);
  return kExitOk;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkOptions {
  std::string dir, out_dir, arch, extra_csv;
  std::vector<std::string> methods;
  std::vector<double> targets;
  std::optional<int> steps, eval_every, jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta_dual;
  std::string config_path;
};

struct BenchRun {
  std::string image_name;
  std::string image_path;
  loonie::TrainConfig cfg;
  double grid_target = 0.0;
};

int cmd_benchmark(BenchmarkOptions o) {
  if (!o.config_path.empty()) {
    const json cfg = load_config_json(o.config_path);
    if (o.dir.empty() && cfg.contains("dir")) o.dir = cfg.at("dir").get<std::string>();
    if (o.out_dir.empty() && cfg.contains("out_dir")) o.out_dir = cfg.at("out_dir").get<std::string>();
    if (o.arch.empty() && cfg.contains("arch")) o.arch = cfg.at("arch").get<std::string>();
    if (o.methods.empty() && cfg.contains("methods"))
      o.methods = cfg.at("methods").get<std::vector<std::string>>();
    if (o.targets.empty() && cfg.contains("targets"))
      o.targets = cfg.at("targets").get<std::vector<double>>();
    merge_key(o.steps, cfg, "steps");
    merge_key(o.eval_every, cfg, "eval_every");
    merge_key(o.jobs, cfg, "jobs");
    merge_key(o.seed, cfg, "seed");
    merge_key(o.eta_dual, cfg, "eta_dual");
  }
  if (o.dir.empty() || o.out_dir.empty()) throw UsageError("--dir and --out-dir are required");
  if (o.methods.empty()) throw UsageError("--methods is required");
  if (o.targets.empty()) throw UsageError("--targets is required");
  const int jobs = std::max(1, o.jobs.value_or(1));

  std::vector<fs::path> images;
  try {
    for (const auto& entry : fs::directory_iterator(o.dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".ppm") images.push_back(entry.path());
    }
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) throw UsageError("no .png or .ppm images in " + o.dir);

  fs::create_directories(o.out_dir);

  // Preload datasets once; runs only read them.
  std::map<std::string, loonie::PixelDataset> datasets;
  for (const auto& path : images) datasets[path.string()] = load_dataset(path.string());

  std::vector<BenchRun> runs;
  for (const auto& image : images) {
    for (const std::string& method_name : o.methods) {
      const loonie::Method method = parse_method(method_name);
      for (const double target : o.targets) {
        BenchRun run;
        run.image_name = image.stem().string();
        run.image_path = image.string();
        run.grid_target = target;
        run.cfg.method = method;
        run.cfg.steps = o.steps.value_or(50'000);
        run.cfg.seed = o.seed.value_or(0);
        run.cfg.eval_every = o.eval_every.value_or(100);
        run.cfg.eta_psi = 7e-4;
        run.cfg.eta_theta = method == loonie::Method::loonie ? 1e-3 : 2e-4;
        if (const PaperTarget* t = find_paper_target(target)) {
          run.cfg.arch = method == loonie::Method::coin ? t->coin_arch : t->initial_arch;
          run.cfg.eta_dual = o.eta_dual.value_or(t->eta_dual);
        } else {
          if (o.arch.empty()) {
            throw UsageError("--arch is required for non-paper targets");
          }
          run.cfg.arch = parse_arch(o.arch);
          run.cfg.eta_dual = o.eta_dual.value_or(1e-3);
        }
        if (method != loonie::Method::coin) run.cfg.target_bpp = target;
        runs.push_back(std::move(run));
      }
    }
  }

  std::vector<std::string> summary_rows(runs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= runs.size() || failed.load()) return;
      const BenchRun& run = runs[idx];
      try {
        const loonie::PixelDataset& data = datasets.at(run.image_path);
        const loonie::TrainResult result = loonie::train(run.cfg, data);

        char tgt[32];
        std::snprintf(tgt, sizeof tgt, "%g", run.grid_target);
        const std::string stem =
            run.image_name + "_" + loonie::method_name(run.cfg.method) + "_" + tgt;
        json j;
        j["command"] = "benchmark";
        j["image"] = run.image_path;
        j["method"] = loonie::method_name(run.cfg.method);
        j["arch"] = arch_string(run.cfg.arch);
        j["target_bpp"] = run.grid_target;
        j["steps"] = run.cfg.steps;
        j["seed"] = run.cfg.seed;
        j["eval_every"] = run.cfg.eval_every;
        write_metrics(result.log, (fs::path(o.out_dir) / (stem + ".csv")).string(), j.dump());
        loonie::write_model_file(result.model, data.height, data.width,
                                 (fs::path(o.out_dir) / (stem + ".l0ne")).string());

        const auto report = loonie::casted_bpp(std::span<const float>(result.model.effective()),
                                               data.pixel_count());
        const double wall_s =
            result.log.records.empty() ? 0.0 : result.log.records.back().wall_ms / 1000.0;
        char row[256];
        if (std::isfinite(result.log.best_feasible_psnr)) {
          std::snprintf(row, sizeof row, "%s,%s,%g,%.6f,%.9g,%.3f", run.image_name.c_str(),
                        loonie::method_name(run.cfg.method), run.grid_target,
                        result.log.best_feasible_psnr, report.bpp, wall_s);
        } else {
          std::snprintf(row, sizeof row, "%s,%s,%g,nan,%.9g,%.3f", run.image_name.c_str(),
                        loonie::method_name(run.cfg.method), run.grid_target, report.bpp, wall_s);
        }
        summary_rows[idx] = row;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw IoError("benchmark run failed: " + first_error);

  const std::string summary_path = (fs::path(o.out_dir) / "summary.csv").string();
  std::ofstream out(summary_path);
  if (!out) throw IoError("cannot write " + summary_path);
  out << "image,method,target_bpp,best_feasible_psnr,final_bpp,wall_s\n";
  for (const std::string& row : summary_rows) out << row << "\n";

  if (!o.extra_csv.empty()) {
    std::ifstream extra(o.extra_csv);
    if (!extra) throw IoError("cannot open --extra-csv file: " + o.extra_csv);
    std::string line;
    while (std::getline(extra, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("image,", 0) == 0) continue;
      out << line << "\n";
    }
  }
  std::printf("wrote %zu runs to %s\n", runs.size(), summary_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse implicit-neural image compression toolkit"};
  app.require_subcommand(1);

  CompressOptions comp;
  auto* compress = app.add_subcommand("compress", "Fit a model to an image and store it");
  compress->add_option("--image", comp.image, "Input image (PNG or binary PPM)");
  compress->add_option("--method", comp.method, "coin, loonie or mp");
  auto* opt_target = compress->add_option("--target-bpp", comp.target_bpp,
                                          "BPP budget (loonie/mp)");
  auto* opt_arch = compress->add_option("--arch", comp.arch, "Architecture LxW, e.g. 5x20");
  auto* opt_paper =
      compress->add_option("--paper-target", comp.paper_target,
                           "One of 0.07/0.15/0.3/0.6; picks architecture and dual step");
  opt_paper->excludes(opt_arch);
  opt_paper->excludes(opt_target);
  compress->add_option("--steps", comp.steps, "Training steps (default 50000)");
  compress->add_option("--seed", comp.seed, "RNG seed (default 0)");
  compress->add_option("--out", comp.out, "Output model path (.l0ne)");
  compress->add_option("--metrics", comp.metrics, "Metrics CSV path (default: out with .csv)");
  compress->add_option("--eta-theta", comp.eta_theta, "Adam step size on magnitudes");
  compress->add_option("--eta-psi", comp.eta_psi, "Adam step size on gate parameters");
  compress->add_option("--eta-dual", comp.eta_dual, "Dual ascent step size");
  compress->add_option("--eval-every", comp.eval_every, "Eval cadence in steps (default 100)");
  compress->add_flag("--no-restarts{false},--restarts{true}", comp.restarts,
                     "Dual restarts (default on)");
  compress->add_option("--config", comp.config_path, "JSON config merged under the flags");

  std::string dec_model, dec_out;
  std::optional<int> dec_height, dec_width;
  auto* decompress = app.add_subcommand("decompress", "Reconstruct an image from a model");
  decompress->add_option("--model", dec_model, "Model path (.l0ne)")->required();
  decompress->add_option("--out", dec_out, "Output PNG path")->required();
  decompress->add_option("--height", dec_height, "Render height (default: training height)");
  decompress->add_option("--width", dec_width, "Render width (default: training width)");

  std::string eval_model, eval_image;
  auto* eval = app.add_subcommand("eval", "Report PSNR and BPP of a model against an image");
  eval->add_option("--model", eval_model, "Model path (.l0ne)")->required();
  eval->add_option("--image", eval_image, "Reference image")->required();

  BenchmarkOptions bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run a method x target grid over a directory");
  benchmark->add_option("--dir", bench.dir, "Directory of .png/.ppm images");
  benchmark->add_option("--methods", bench.methods, "Comma-separated methods")->delimiter(',');
  benchmark->add_option("--targets", bench.targets, "Comma-separated BPP targets")->delimiter(',');
  benchmark->add_option("--steps", bench.steps, "Training steps per run (default 50000)");
  benchmark->add_option("--seed", bench.seed, "Seed used by every run (default 0)");
  benchmark->add_option("--out-dir", bench.out_dir, "Output directory");
  benchmark->add_option("--arch", bench.arch, "Architecture LxW for non-paper targets");
  benchmark->add_option("--eval-every", bench.eval_every, "Eval cadence in steps");
  benchmark->add_option("--eta-dual", bench.eta_dual, "Dual ascent step size override");
  benchmark->add_option("--jobs", bench.jobs, "Parallel runs (default 1)");
  benchmark->add_option("--extra-csv", bench.extra_csv,
                        "Append externally produced rows to the summary");
  benchmark->add_option("--config", bench.config_path, "JSON config merged under the flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  comp.flag_arch = opt_arch->count() > 0;
  comp.flag_target = opt_target->count() > 0;
  comp.flag_paper = opt_paper->count() > 0;

  try {
    if (compress->parsed()) return cmd_compress(comp);
    if (decompress->parsed()) return cmd_decompress(dec_model, dec_out, dec_height, dec_width);
    if (eval->parsed()) return cmd_eval(eval_model, eval_image);
    if (benchmark->parsed()) return cmd_benchmark(bench);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
