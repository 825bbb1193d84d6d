#include "ddnet/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddnet/errors.hpp"

namespace ddnet {

void RunConfig::validate() const {
  train.validate();
  if (di_window == 0 || di_window % 2 == 0)
    throw InputError("di_window must be a positive odd number, got " + std::to_string(di_window));
  if (looks == 0) throw InputError("looks must be positive");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw InputError("config key '" + key + "': '" + value + "' is not a valid non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw InputError("config key '" + key + "': '" + value + "' is not a number");
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<std::size_t>(key, trim(item)));
  if (out.empty()) throw InputError("config key '" + key + "' is empty");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig cfg) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "image1") cfg.image1 = value;
    else if (key == "image2") cfg.image2 = value;
    else if (key == "ground_truth" || key == "truth") cfg.ground_truth = value;
    else if (key == "trimap") cfg.trimap = value;
    else if (key == "model") cfg.model = value;
    else if (key == "map") cfg.map = value;
    else if (key == "out") cfg.out = value;
    else if (key == "seed") cfg.train.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "r") cfg.train.r = parse_integer<std::size_t>(key, value);
    else if (key == "mode") cfg.train.mode = parse_mode(value);
    else if (key == "epochs") cfg.train.epochs = parse_integer<std::size_t>(key, value);
    else if (key == "batch") cfg.train.batch_size = parse_integer<std::size_t>(key, value);
    else if (key == "lr") cfg.train.lr = parse_double(key, value);
    else if (key == "mask_width") cfg.train.mask_width = parse_integer<std::size_t>(key, value);
    else if (key == "sample_fraction") cfg.train.sample_fraction = parse_double(key, value);
    else if (key == "di_window") cfg.di_window = parse_integer<std::size_t>(key, value);
    else if (key == "looks") cfg.looks = parse_integer<unsigned>(key, value);
    else if (key == "r_list") cfg.r_list = parse_list(key, value);
    else if (key == "verbosity") cfg.verbosity = parse_integer<int>(key, value);
    else throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream file(path);
  if (!file) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << file.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "image1 = " << image1.string() << '\n'
     << "image2 = " << image2.string() << '\n'
     << "ground_truth = " << ground_truth.string() << '\n'
     << "trimap = " << trimap.string() << '\n'
     << "model = " << model.string() << '\n'
     << "map = " << map.string() << '\n'
     << "out = " << out.string() << '\n'
     << "seed = " << train.seed << '\n'
     << "r = " << train.r << '\n'
     << "mode = " << mode_name(train.mode) << '\n'
     << "epochs = " << train.epochs << '\n'
     << "batch = " << train.batch_size << '\n'
     << "lr = " << format_double(train.lr) << '\n'
     << "mask_width = " << train.mask_width << '\n'
     << "sample_fraction = " << format_double(train.sample_fraction) << '\n'
     << "di_window = " << di_window << '\n'
     << "looks = " << looks << '\n'
     << "r_list = ";
  for (std::size_t i = 0; i < r_list.size(); ++i) os << (i ? "," : "") << r_list[i];
  os << '\n' << "verbosity = " << verbosity << '\n';
  return os.str();
}

std::uint64_t sample_seed(std::uint64_t root) { return Rng(root).derive("samples").seed(); }

DifferenceImage difference_image(const Raster& i1, const Raster& i2, const RunConfig& cfg) {
  return smoothed_log_ratio(i1, i2, cfg.di_window);
}

PipelineResult run_pipeline(const Raster& i1, const Raster& i2, const ChangeMap* truth, const RunConfig& cfg) {
  cfg.validate();
  require_same_geometry(i1, i2);
  PipelineResult result;
  result.di = difference_image(i1, i2, cfg);
  result.trimap = hierarchical_trimap(result.di);
  const SampleSet samples =
      draw_samples(result.trimap, i1, i2, cfg.train.r, cfg.train.sample_fraction, sample_seed(cfg.train.seed));
  result.training = train(samples, cfg.train);
  result.map = infer_map(i1, i2, result.trimap, result.training.params);
  if (truth) result.metrics = score(result.map, *truth);
  return result;
}

}  // namespace ddnet
