#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpt/core.hpp"
#include "cpt/estimator.hpp"

namespace cpt {

enum class Mode : std::uint8_t {
  kCptOnline = 0,
  kCptRandom = 1,
  kCptFixed = 2,
  kOaa = 3,
  kPecoc = 4,
  kKway = 5,
  kTable = 6,
};

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);  // ConfigError on an unknown name
bool is_tree_mode(Mode mode);

struct RunConfig {
  Mode mode = Mode::kCptOnline;
  double alpha = 0.9;
  double learning_rate = 0.1;
  int hash_bits = kDefaultHashBits;
  int passes = 1;
  std::optional<std::size_t> k;  // k-way arity; required iff mode == kKway
  double delta = 0.05;
  std::optional<std::uint64_t> seed;
  std::vector<double> learning_rate_grid;
  std::vector<double> alpha_grid;

  std::string train_path;
  std::string test_path;
  std::string model_path;
  std::string report_path;
  bool freeze = false;
  bool timing = true;
};

// Mode-specific checks; throws ConfigError.
void validate(const RunConfig& cfg);

// `<label> | <feature>[:<weight>] ...`. The label is a single non-whitespace
// token; a weight is the text after the feature's last ':' and defaults to 1.
// Features are hashed and canonicalised. Throws ParseError.
Example parse_example_line(std::string_view line, std::size_t line_number, int hash_bits = kDefaultHashBits);

// Blank lines are skipped.
std::vector<Example> parse_examples(std::istream& in, int hash_bits = kDefaultHashBits);
std::vector<Example> read_examples(const std::string& path, int hash_bits = kDefaultHashBits);

// Distinct labels in order of first appearance.
std::vector<std::string> distinct_labels(std::span<const Example> examples);

// Fresh estimator for the config. Modes with a fixed label layout (fixed
// tree, PECOC, k-way) take their labels from `training`.
std::unique_ptr<Estimator> make_estimator(const RunConfig& cfg, std::span<const Example> training);

// ---------------------------------------------------------------------------
// Model file: "CPTM", u32 version, u8 mode, config echo, then the structure
// and weights sections, each as u32 tag + u64 length + bytes. Little-endian
// throughout.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kModelVersion = 1;

struct ModelSections {
  std::string header;
  std::string structure;
  std::string weights;
};

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Estimator> estimator;
};

std::string encode_model(const RunConfig& cfg, const Estimator& estimator);
ModelSections split_model(std::string_view bytes);
LoadedModel decode_model(std::string_view bytes);

void write_file(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);
void save_model(const std::string& path, const RunConfig& cfg, const Estimator& estimator);
LoadedModel load_model(const std::string& path);

}  // namespace cpt
