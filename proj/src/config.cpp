#include "scatterhsd/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "scatterhsd/error.hpp"

namespace scatterhsd::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size() || item.empty()) {
      throw InvalidInput("expected a comma-separated list of counts, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = [] {
    const auto m = trainer::desk_scale_model();
    const trainer::TrainConfig t;
    const scatter::ScatterConfig s{64, 8, 10000, 0};
    std::map<std::string, std::string> r;
    r["corpus.classes"] = "8";
    r["corpus.per_class"] = "200";
    r["corpus.seed"] = "0";
    r["scatter.seeds"] = std::to_string(s.seeds);
    r["scatter.neighbors"] = std::to_string(s.neighbors);
    r["scatter.source_size"] = std::to_string(s.source_size);
    r["scatter.views"] = std::to_string(t.views);
    r["scatter.rng_seed"] = std::to_string(s.rng_seed);
    r["model.encoder_widths"] = join(m.upstream.encoder_widths);
    r["model.decoder_hidden"] = std::to_string(m.upstream.decoder_hidden);
    r["model.split_hidden"] = std::to_string(m.upstream.split_hidden);
    r["model.coarse_points"] = std::to_string(m.upstream.coarse_points);
    r["model.split_ratios"] = join(m.upstream.split_ratios);
    r["model.offset_bound"] = fmt(m.upstream.offset_bound);
    r["model.k"] = join(m.hfe.k_per_level);
    r["model.level_widths"] = join(m.hfe.level_widths);
    r["model.head_dim"] = std::to_string(m.hfe.head_dim);
    r["model.seg_hidden"] = std::to_string(m.hfe.seg_hidden);
    r["train.epochs"] = std::to_string(t.epochs);
    r["train.batch_size"] = std::to_string(t.batch_size);
    r["train.lr_init"] = fmt(t.lr_init);
    r["train.schedule"] = "step_decay";
    r["train.decay_factor"] = fmt(t.decay_factor);
    r["train.decay_every"] = std::to_string(t.decay_every);
    r["train.cosine_min_factor"] = fmt(t.cosine_min_factor);
    r["train.alpha"] = fmt(t.weights.alpha);
    r["train.beta"] = fmt(t.weights.beta);
    r["train.gamma"] = fmt(t.weights.gamma);
    r["train.objective"] = "hsd";
    r["train.temperature"] = fmt(t.distill.temperature);
    r["train.seed"] = std::to_string(t.seed);
    r["train.mode"] = "classify";
    r["train.detach_reconstruction"] = "false";
    r["train.trace_batch"] = std::to_string(t.trace_batch);
    r["train.mi_bins"] = std::to_string(t.mi_bins);
    r["train.weight_decay"] = fmt(t.adam.weight_decay);
    return r;
  }();
  return d;
}

Config Config::parse(std::istream& in) {
  Config c;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    c.set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidInput("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const auto& s = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidInput("config key '" + key + "' expects a number, got '" + s + "'");
}

std::uint64_t Config::get_uint(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw InvalidInput("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw InvalidInput("config key '" + key + "' expects true/false, got '" + s + "'");
}

void Config::dump(std::ostream& out) const {
  std::string section;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
}

scatter::ScatterConfig Config::scatter() const {
  scatter::ScatterConfig s;
  s.seeds = get_uint("scatter.seeds");
  s.neighbors = get_uint("scatter.neighbors");
  s.source_size = get_uint("scatter.source_size");
  s.rng_seed = get_uint("scatter.rng_seed");
  s.validate();
  return s;
}

trainer::ModelConfig Config::model() const {
  auto m = trainer::desk_scale_model(get_uint("corpus.classes"), 0);
  m.upstream.encoder_widths = parse_size_list(get("model.encoder_widths"));
  m.upstream.decoder_hidden = get_uint("model.decoder_hidden");
  m.upstream.split_hidden = get_uint("model.split_hidden");
  m.upstream.coarse_points = get_uint("model.coarse_points");
  m.upstream.split_ratios = parse_size_list(get("model.split_ratios"));
  m.upstream.offset_bound = get_double("model.offset_bound");
  std::size_t target = m.upstream.coarse_points;
  for (auto r : m.upstream.split_ratios) target *= r;
  m.upstream.target_points = target;
  m.hfe.k_per_level = parse_size_list(get("model.k"));
  m.hfe.level_widths = parse_size_list(get("model.level_widths"));
  m.hfe.levels = m.hfe.k_per_level.size();
  m.hfe.sample_fractions.resize(m.hfe.levels);
  for (std::size_t l = 0; l < m.hfe.levels; ++l) m.hfe.sample_fractions[l] = 0.25 / static_cast<double>(1u << l);
  m.hfe.head_dim = get_uint("model.head_dim");
  m.hfe.seg_hidden = get_uint("model.seg_hidden");
  if (get("train.mode") == "segment") m.hfe.part_classes = 2;
  m.upstream.validate();
  m.hfe.validate();
  return m;
}

trainer::TrainConfig Config::train() const {
  trainer::TrainConfig t;
  t.epochs = get_uint("train.epochs");
  t.batch_size = get_uint("train.batch_size");
  t.lr_init = get_double("train.lr_init");
  const auto& sched = get("train.schedule");
  if (sched == "step_decay") t.schedule = trainer::Schedule::step_decay;
  else if (sched == "cosine") t.schedule = trainer::Schedule::cosine;
  else throw InvalidInput("train.schedule must be step_decay or cosine");
  t.decay_factor = get_double("train.decay_factor");
  t.decay_every = get_uint("train.decay_every");
  t.cosine_min_factor = get_double("train.cosine_min_factor");
  t.weights = {get_double("train.alpha"), get_double("train.beta"), get_double("train.gamma")};
  const auto& obj = get("train.objective");
  if (obj == "baseline") t.objective = downstream::Objective::baseline;
  else if (obj == "dsn") t.objective = downstream::Objective::dsn;
  else if (obj == "hsd") t.objective = downstream::Objective::hsd;
  else throw InvalidInput("train.objective must be baseline, dsn or hsd");
  t.distill.temperature = get_double("train.temperature");
  t.views = get_uint("scatter.views");
  t.seed = get_uint("train.seed");
  const auto& mode = get("train.mode");
  if (mode == "classify") t.mode = trainer::Mode::classify;
  else if (mode == "segment") t.mode = trainer::Mode::segment;
  else throw InvalidInput("train.mode must be classify or segment");
  t.detach_reconstruction = get_bool("train.detach_reconstruction");
  t.trace_batch = get_uint("train.trace_batch");
  t.mi_bins = get_uint("train.mi_bins");
  t.adam.weight_decay = get_double("train.weight_decay");
  t.validate();
  return t;
}

}  // namespace scatterhsd::config
