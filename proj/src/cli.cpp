#include "ddnet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ddnet/checkpoint.hpp"
#include "ddnet/errors.hpp"
#include "ddnet/pgm.hpp"
#include "ddnet/pipeline.hpp"
#include "ddnet/synthgen.hpp"

namespace ddnet {

namespace {

namespace fs = std::filesystem;

// Raw flag values; only the ones actually given override the config.
struct Flags {
  std::string config, image1, image2, truth, trimap, model, map, out, mode, r_list;
  std::uint64_t seed = 0;
  std::size_t r = 0, epochs = 0, batch = 0, mask_width = 0, di_window = 0;
  unsigned looks = 0;
  double lr = 0.0, fraction = 0.0;
  int verbose = 0;
  std::map<std::string, CLI::Option*> given;
};

void add_flags(CLI::App* app, Flags& f) {
  auto opt = [&](const std::string& name, auto& target, const std::string& help) {
    f.given[name] = app->add_option(name, target, help);
  };
  opt("--config", f.config, "key = value config file");
  opt("--image1", f.image1, "first acquisition (PGM)");
  opt("--image2", f.image2, "second acquisition (PGM)");
  opt("--truth", f.truth, "ground-truth change map (PGM, >=128 = changed)");
  opt("--trimap", f.trimap, "preclassification map (PGM 0/128/255)");
  opt("--model", f.model, "model checkpoint");
  opt("--map", f.map, "change map (PGM)");
  opt("--out", f.out, "output directory");
  opt("--seed", f.seed, "root random seed");
  opt("--r", f.r, "patch size (odd)");
  opt("--mode", f.mode, "both | no-dct | no-mrc | plain-cnn");
  opt("--epochs", f.epochs, "training epochs");
  opt("--batch", f.batch, "minibatch size");
  opt("--lr", f.lr, "Adam learning rate");
  opt("--mask-width", f.mask_width, "rows/columns masked in the MRC middle regions");
  opt("--fraction", f.fraction, "fraction of reliable pixels drawn per class");
  opt("--di-window", f.di_window, "box-mean window before the log-ratio (odd, 1 = per pixel)");
  opt("--looks", f.looks, "speckle looks for synth");
  opt("--r-list", f.r_list, "comma-separated patch sizes for sweep");
  app->add_flag("-v,--verbose", f.verbose, "print the effective configuration");
}

RunConfig assemble(const Flags& f) {
  auto given = [&](const char* name) { return f.given.at(name)->count() > 0; };
  RunConfig cfg;
  if (given("--config")) cfg = load_config(f.config, cfg);
  if (given("--image1")) cfg.image1 = f.image1;
  if (given("--image2")) cfg.image2 = f.image2;
  if (given("--truth")) cfg.ground_truth = f.truth;
  if (given("--trimap")) cfg.trimap = f.trimap;
  if (given("--model")) cfg.model = f.model;
  if (given("--map")) cfg.map = f.map;
  if (given("--out")) cfg.out = f.out;
  if (given("--seed")) cfg.train.seed = f.seed;
  if (given("--r")) cfg.train.r = f.r;
  if (given("--mode")) cfg.train.mode = parse_mode(f.mode);
  if (given("--epochs")) cfg.train.epochs = f.epochs;
  if (given("--batch")) cfg.train.batch_size = f.batch;
  if (given("--lr")) cfg.train.lr = f.lr;
  if (given("--mask-width")) cfg.train.mask_width = f.mask_width;
  if (given("--fraction")) cfg.train.sample_fraction = f.fraction;
  if (given("--di-window")) cfg.di_window = f.di_window;
  if (given("--looks")) cfg.looks = f.looks;
  if (given("--r-list")) cfg = parse_config("r_list = " + f.r_list, cfg);
  cfg.verbosity += f.verbose;
  return cfg;
}

class Command {
 public:
  Command(RunConfig cfg, std::ostream& out, std::ostream& err) : cfg_(std::move(cfg)), out_(out), err_(err) {}

  const std::string& stage() const noexcept { return stage_; }

  void synth() {
    stage_ = "synth";
    announce_seed();
    SceneSpec spec = SceneSpec::default_scene(cfg_.train.seed);
    spec.looks = cfg_.looks;
    const Scene scene = generate(spec);
    prepare_out();
    write_raster(scene.i1, "i1.pgm");
    write_raster(scene.i2, "i2.pgm");
    write_raster(scene.truth.to_raster(), "truth.pgm");
    out_ << "wrote i1.pgm i2.pgm truth.pgm to " << cfg_.out.string() << " (" << scene.truth.count_changed()
         << " changed pixels)\n";
  }

  void preclassify() {
    const auto [i1, i2] = load_pair();
    stage_ = "preclassify";
    const DifferenceImage di = difference_image(i1, i2, cfg_);
    const TriMap trimap = hierarchical_trimap(di);
    prepare_out();
    write_raster(di.to_raster(), "di.pgm");
    write_raster(trimap.to_raster(), "trimap.pgm");
    report_trimap(trimap);
  }

  void train() {
    const auto [i1, i2] = load_pair();
    const TriMap trimap = TriMap::from_raster(load(input_or(cfg_.trimap, "trimap.pgm"), "trimap"));
    announce_seed();
    stage_ = "preclassify";
    const SampleSet samples =
        draw_samples(trimap, i1, i2, cfg_.train.r, cfg_.train.sample_fraction, sample_seed(cfg_.train.seed));
    stage_ = "train";
    const TrainResult result = ddnet::train(samples, cfg_.train);
    prepare_out();
    write_training(result);
  }

  void infer() {
    const auto [i1, i2] = load_pair();
    const TriMap trimap = TriMap::from_raster(load(input_or(cfg_.trimap, "trimap.pgm"), "trimap"));
    stage_ = "load";
    const ModelParams params = load_checkpoint(input_or(cfg_.model, "model.bin"));
    stage_ = "infer";
    const ChangeMap map = infer_map(i1, i2, trimap, params);
    prepare_out();
    write_raster(map.to_raster(), "changemap.pgm");
    out_ << "change map: " << map.count_changed() << " changed pixels\n";
  }

  void eval() {
    const ChangeMap map = ChangeMap::from_raster(load(input_or(cfg_.map, "changemap.pgm"), "map"));
    const ChangeMap truth = ChangeMap::from_raster(load(require(cfg_.ground_truth, "--truth"), "truth"));
    stage_ = "eval";
    const MetricsReport metrics = score(map, truth);
    prepare_out();
    write_text(metrics.to_key_value(), "metrics.txt");
    out_ << "FP FN OE PCC KC\n" << metrics.to_line() << '\n';
  }

  /// Returns the metrics when a ground truth was supplied.
  std::optional<MetricsReport> run() {
    const auto [i1, i2] = load_pair();
    std::optional<ChangeMap> truth;
    if (!cfg_.ground_truth.empty()) truth = ChangeMap::from_raster(load(cfg_.ground_truth, "truth"));
    announce_seed();
    prepare_out();

    stage_ = "preclassify";
    const DifferenceImage di = difference_image(i1, i2, cfg_);
    const TriMap trimap = hierarchical_trimap(di);
    write_raster(di.to_raster(), "di.pgm");
    write_raster(trimap.to_raster(), "trimap.pgm");
    report_trimap(trimap);
    const SampleSet samples =
        draw_samples(trimap, i1, i2, cfg_.train.r, cfg_.train.sample_fraction, sample_seed(cfg_.train.seed));

    stage_ = "train";
    const TrainResult result = ddnet::train(samples, cfg_.train);
    write_training(result);

    stage_ = "infer";
    const ChangeMap map = infer_map(i1, i2, trimap, result.params);
    write_raster(map.to_raster(), "changemap.pgm");

    if (!truth) return std::nullopt;
    stage_ = "eval";
    const MetricsReport metrics = score(map, *truth);
    write_text(metrics.to_key_value(), "metrics.txt");
    out_ << "FP FN OE PCC KC\n" << metrics.to_line() << '\n';
    return metrics;
  }

 private:
  void announce_seed() { err_ << "seed: " << cfg_.train.seed << '\n'; }

  static const fs::path& require(const fs::path& p, const char* flag) {
    if (p.empty()) throw InputError(std::string("missing required input ") + flag);
    return p;
  }

  fs::path input_or(const fs::path& given, const char* default_name) const {
    return given.empty() ? cfg_.out / default_name : given;
  }

  Raster load(const fs::path& path, const char* what) {
    stage_ = "load";
    if (!fs::exists(path)) throw InputError(std::string(what) + " file not found: " + path.string());
    return load_pgm(path);
  }

  std::pair<Raster, Raster> load_pair() {
    Raster i1 = load(require(cfg_.image1, "--image1"), "image1");
    Raster i2 = load(require(cfg_.image2, "--image2"), "image2");
    require_same_geometry(i1, i2);
    return {std::move(i1), std::move(i2)};
  }

  void prepare_out() {
    std::error_code ec;
    fs::create_directories(cfg_.out, ec);
    if (ec) throw IoError("cannot create output directory " + cfg_.out.string() + ": " + ec.message());
  }

  void write_raster(const Raster& raster, const char* name) { save_pgm(raster, cfg_.out / name); }

  void write_text(const std::string& text, const char* name) {
    std::ofstream file(cfg_.out / name, std::ios::trunc);
    if (!(file << text)) throw IoError("cannot write " + (cfg_.out / name).string());
  }

  void write_training(const TrainResult& result) {
    save_checkpoint(result.params, cfg_.out / "model.bin");
    write_text(result.report.to_text(), "train.log");
    if (cfg_.verbosity > 0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "training took %.2f s\n", result.report.wall_seconds);
      err_ << buf;
    }
  }

  void report_trimap(const TriMap& trimap) {
    out_ << "trimap: changed " << trimap.count(Label::Changed) << ", unchanged " << trimap.count(Label::Unchanged)
         << ", intermediate " << trimap.count(Label::Intermediate) << '\n';
  }

  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::string stage_ = "setup";
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PreclassifyError*>(&e)) return kExitPreclassify;
  if (dynamic_cast<const TrainingError*>(&e)) return kExitTraining;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitInput;
}

void sweep(const RunConfig& base, std::ostream& out, std::ostream& err, int& status) {
  if (base.ground_truth.empty()) throw InputError("sweep needs --truth to score each patch size");
  std::vector<std::size_t> sizes = base.r_list;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::string table = "r PCC KC\n";
  for (std::size_t r : sizes) {
    RunConfig cfg = base;
    cfg.train.r = r;
    cfg.out = base.out / ("r" + std::to_string(r));
    std::ostringstream sink;
    Command cmd(cfg, sink, err);
    char row[96];
    try {
      cfg.validate();
      const auto metrics = cmd.run();
      std::snprintf(row, sizeof row, "%zu %.2f %.2f\n", r, metrics->pcc, metrics->kc);
    } catch (const std::exception& e) {
      err << "ddnet: sweep r=" << r << ": " << cmd.stage() << ": " << e.what() << '\n';
      if (status == kExitOk) status = exit_code_for(e);
      std::snprintf(row, sizeof row, "%zu failed failed\n", r);
    }
    table += row;
  }
  out << table;
  std::ofstream file(base.out / "sweep.txt", std::ios::trunc);
  if (!(file << table)) throw IoError("cannot write " + (base.out / "sweep.txt").string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised SAR change detection with a dual-domain network", "ddnet"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"synth", "generate a synthetic speckled image pair with ground truth"},
      {"preclassify", "difference image and hierarchical FCM trimap"},
      {"train", "train the network on pseudo-labels drawn from a trimap"},
      {"infer", "classify intermediate pixels and write the change map"},
      {"run", "full pipeline from an image pair to a change map"},
      {"eval", "score a change map against ground truth"},
      {"sweep", "run the pipeline for several patch sizes"},
  };
  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> apps;
  for (const Sub& s : subs) {
    apps[s.name] = app.add_subcommand(s.name, s.help);
    add_flags(apps[s.name], flags[s.name]);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  std::string name;
  for (const auto& [n, sub] : apps)
    if (sub->parsed()) name = n;

  std::string stage = "setup";
  try {
    RunConfig cfg = assemble(flags.at(name));
    cfg.validate();
    if (cfg.verbosity > 0) err << "# effective configuration\n" << cfg.to_text();
    if (name == "sweep") {
      int status = kExitOk;
      sweep(cfg, out, err, status);
      return status;
    }
    Command cmd(cfg, out, err);
    try {
      if (name == "synth") cmd.synth();
      else if (name == "preclassify") cmd.preclassify();
      else if (name == "train") cmd.train();
      else if (name == "infer") cmd.infer();
      else if (name == "eval") cmd.eval();
      else if (name == "run") cmd.run();
    } catch (...) {
      stage = cmd.stage();
      throw;
    }
  } catch (const std::exception& e) {
    err << "ddnet: " << name << ": " << stage << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace ddnet
