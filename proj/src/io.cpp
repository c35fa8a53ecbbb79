#include "cpt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cpt/baselines.hpp"
#include "cpt/kway.hpp"
#include "cpt/pecoc.hpp"
#include "cpt/serialize.hpp"
#include "cpt/tree.hpp"

namespace cpt {

namespace {

constexpr struct {
  Mode mode;
  std::string_view name;
} kModes[] = {
    {Mode::kCptOnline, "cpt-online"}, {Mode::kCptRandom, "cpt-random"}, {Mode::kCptFixed, "cpt-fixed"},
    {Mode::kOaa, "oaa"},              {Mode::kPecoc, "pecoc"},          {Mode::kKway, "kway"},
    {Mode::kTable, "table"},
};

constexpr std::string_view kMagic = "CPTM";
constexpr std::uint32_t kStructureTag = 0x43525453;  // "STRC"
constexpr std::uint32_t kWeightsTag = 0x54484757;    // "WGHT"

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view mode_name(Mode mode) {
  for (const auto& m : kModes)
    if (m.mode == mode) return m.name;
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (const auto& m : kModes)
    if (m.name == name) return m.mode;
  throw ConfigError("unknown mode: " + std::string(name));
}

bool is_tree_mode(Mode mode) {
  return mode == Mode::kCptOnline || mode == Mode::kCptRandom || mode == Mode::kCptFixed || mode == Mode::kKway;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("--alpha must lie in (0, 1]");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) throw ConfigError("--eta must be positive");
  if (cfg.hash_bits < kMinHashBits || cfg.hash_bits > kMaxHashBits)
    throw ConfigError("--hash-bits must lie in [10, 30]");
  if (cfg.passes < 1) throw ConfigError("--passes must be at least 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("--delta must lie in (0, 1)");
  if (!cfg.seed) throw ConfigError("--seed is required");
  if ((cfg.mode == Mode::kKway) != cfg.k.has_value()) throw ConfigError("--k is required exactly when mode is kway");
  if (cfg.k && (*cfg.k < 2 || (*cfg.k & (*cfg.k - 1)) != 0)) throw ConfigError("--k must be a power of two >= 2");
  for (double e : cfg.learning_rate_grid)
    if (!(e > 0.0)) throw ConfigError("learning-rate grid values must be positive");
  for (double a : cfg.alpha_grid)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha grid values must lie in (0, 1]");
  if (!cfg.alpha_grid.empty() && cfg.mode != Mode::kCptOnline)
    throw ConfigError("an alpha grid only applies to cpt-online");
}

Example parse_example_line(std::string_view line, std::size_t line_number, int hash_bits) {
  const auto bar = line.find('|');
  if (bar == std::string_view::npos) throw ParseError(line_number, "missing '|' separator");
  const auto label = trim(line.substr(0, bar));
  if (label.empty()) throw ParseError(line_number, "empty label");
  for (char c : label)
    if (is_space(c)) throw ParseError(line_number, "label must be a single token");

  std::vector<Feature> feats;
  std::string_view rest = line.substr(bar + 1);
  while (true) {
    while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
    if (rest.empty()) break;
    std::size_t end = 0;
    while (end < rest.size() && !is_space(rest[end])) ++end;
    const std::string_view tok = rest.substr(0, end);
    rest.remove_prefix(end);

    if (tok.find('|') != std::string_view::npos) throw ParseError(line_number, "unexpected '|' in features");
    std::string_view name = tok;
    double weight = 1.0;
    if (const auto colon = tok.rfind(':'); colon != std::string_view::npos) {
      name = tok.substr(0, colon);
      const std::string_view w = tok.substr(colon + 1);
      const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), weight);
      if (w.empty() || ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(weight))
        throw ParseError(line_number, "non-numeric weight in '" + std::string(tok) + "'");
    }
    if (name.empty()) throw ParseError(line_number, "empty feature name");
    feats.push_back({hash_feature(name, hash_bits), weight});
  }
  try {
    return Example{canonicalize(std::move(feats), hash_bits), std::string(label)};
  } catch (const InvalidInput& e) {
    throw ParseError(line_number, e.what());
  }
}

std::vector<Example> parse_examples(std::istream& in, int hash_bits) {
  std::vector<Example> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    out.push_back(parse_example_line(line, n, hash_bits));
  }
  return out;
}

std::vector<Example> read_examples(const std::string& path, int hash_bits) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return parse_examples(in, hash_bits);
  } catch (const ParseError& e) {
    throw ParseError(e.line_number, path + ": " + std::string(e.what()).substr(std::string(e.what()).find(':') + 2));
  }
}

std::vector<std::string> distinct_labels(std::span<const Example> examples) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto& ex : examples)
    if (seen.insert(ex.y).second) out.push_back(ex.y);
  return out;
}

std::unique_ptr<Estimator> make_estimator(const RunConfig& cfg, std::span<const Example> training) {
  const RegressorConfig reg{cfg.learning_rate, cfg.hash_bits};
  TreeOptions topt;
  topt.alpha = cfg.alpha;
  topt.seed = cfg.seed.value_or(0);
  topt.regressor = reg;

  switch (cfg.mode) {
    case Mode::kCptOnline:
      topt.policy = InsertionPolicy::kOnline;
      return std::make_unique<CondProbTree>(topt);
    case Mode::kCptRandom:
      topt.policy = InsertionPolicy::kRandom;
      return std::make_unique<CondProbTree>(topt);
    case Mode::kCptFixed: {
      const auto labels = distinct_labels(training);
      auto t = std::make_unique<CondProbTree>(CondProbTree::balanced(labels, topt));
      t->freeze_structure(true);
      return t;
    }
    case Mode::kOaa:
      return std::make_unique<OneAgainstAll>(reg);
    case Mode::kPecoc:
      return std::make_unique<PecocModel>(distinct_labels(training), reg);
    case Mode::kKway:
      if (!cfg.k) throw ConfigError("kway mode needs --k");
      return std::make_unique<KWayTree>(distinct_labels(training), *cfg.k, reg);
    case Mode::kTable:
      return std::make_unique<TableBaseline>();
  }
  throw ConfigError("unknown mode");
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

std::string encode_model(const RunConfig& cfg, const Estimator& estimator) {
  BinaryWriter out;
  out.raw(kMagic);
  out.u32(kModelVersion);
  out.u8(static_cast<std::uint8_t>(cfg.mode));
  out.f64(cfg.alpha);
  out.f64(cfg.learning_rate);
  out.u32(static_cast<std::uint32_t>(cfg.hash_bits));
  out.u32(static_cast<std::uint32_t>(cfg.passes));
  out.u32(static_cast<std::uint32_t>(cfg.k.value_or(0)));
  out.f64(cfg.delta);
  out.u64(cfg.seed.value_or(0));

  BinaryWriter structure, weights;
  estimator.write_structure(structure);
  estimator.write_weights(weights);
  out.u32(kStructureTag);
  out.u64(structure.bytes().size());
  out.raw(structure.bytes());
  out.u32(kWeightsTag);
  out.u64(weights.bytes().size());
  out.raw(weights.bytes());
  return out.take();
}

ModelSections split_model(std::string_view bytes) {
  BinaryReader in(bytes);
  if (in.remaining() < kMagic.size() || in.raw(kMagic.size()) != kMagic) throw CorruptionError("not a model file");
  if (in.u32() != kModelVersion) throw CorruptionError("unsupported model version");
  constexpr std::size_t kConfigBytes = 1 + 8 + 8 + 4 + 4 + 4 + 8 + 8;
  ModelSections s;
  s.header = std::string(bytes.substr(0, kMagic.size() + 4 + kConfigBytes));
  in.raw(kConfigBytes);
  auto section = [&](std::uint32_t tag) {
    if (in.u32() != tag) throw CorruptionError("missing model section");
    const auto len = in.u64();
    if (len > in.remaining()) throw CorruptionError("model section truncated");
    return std::string(in.raw(static_cast<std::size_t>(len)));
  };
  s.structure = section(kStructureTag);
  s.weights = section(kWeightsTag);
  if (!in.at_end()) throw CorruptionError("trailing bytes after model");
  return s;
}

LoadedModel decode_model(std::string_view bytes) {
  const ModelSections s = split_model(bytes);
  BinaryReader h(s.header);
  h.raw(kMagic.size());
  h.u32();
  LoadedModel m;
  RunConfig& cfg = m.config;
  const auto mode = h.u8();
  if (mode > static_cast<std::uint8_t>(Mode::kTable)) throw CorruptionError("unknown mode in model");
  cfg.mode = static_cast<Mode>(mode);
  cfg.alpha = h.f64();
  cfg.learning_rate = h.f64();
  cfg.hash_bits = static_cast<int>(h.u32());
  cfg.passes = static_cast<int>(h.u32());
  if (const auto k = h.u32(); k != 0) cfg.k = k;
  cfg.delta = h.f64();
  cfg.seed = h.u64();

  BinaryReader structure(s.structure), weights(s.weights);
  switch (cfg.mode) {
    case Mode::kCptOnline:
    case Mode::kCptRandom:
    case Mode::kCptFixed:
      m.estimator = std::make_unique<CondProbTree>(CondProbTree::read(structure, weights));
      break;
    case Mode::kOaa:
      m.estimator = std::make_unique<OneAgainstAll>(OneAgainstAll::read(structure, weights));
      break;
    case Mode::kPecoc:
      m.estimator = std::make_unique<PecocModel>(PecocModel::read(structure, weights));
      break;
    case Mode::kKway:
      m.estimator = std::make_unique<KWayTree>(KWayTree::read(structure, weights));
      break;
    case Mode::kTable:
      m.estimator = std::make_unique<TableBaseline>(TableBaseline::read(structure, weights));
      break;
  }
  if (!structure.at_end() || !weights.at_end()) throw CorruptionError("model section has trailing bytes");
  return m;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_model(const std::string& path, const RunConfig& cfg, const Estimator& estimator) {
  write_file(path, encode_model(cfg, estimator));
}

LoadedModel load_model(const std::string& path) {
  try {
    return decode_model(read_file(path));
  } catch (const CorruptionError& e) {
    throw CorruptionError(path + ": " + e.what());
  }
}

}  // namespace cpt
