#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spacetime/graph.hpp"
#include "spacetime/likelihood.hpp"
#include "spacetime/manifold.hpp"
#include "spacetime/optimizer.hpp"

namespace spacetime {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DataSource { kGenerator, kEdgeList };
enum class GeneratorKind {
  kDupDiv,
  kChain,
  kCycle,
  kTransitiveChain,
  kCommonNeighbors,
};

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view name);

struct DataConfig {
  DataSource source = DataSource::kGenerator;
  GeneratorKind generator = GeneratorKind::kDupDiv;
  DupDivParams dupdiv;  // dupdiv.seed is the generator seed
  int n = 10;           // chain, cycle, transitive_chain
  int n_pred = 8;       // common_neighbors
  int n_succ = 8;
  std::filesystem::path edge_list;
  double train_frac = 0.85;
  double valid_frac = 0.0;
  std::uint64_t split_seed = 0;
};

struct ExperimentConfig {
  ManifoldSpec manifold{ManifoldKind::kCylindricalMinkowski, 9, 10.0};
  Likelihood likelihood;
  bool auto_k = true;
  TrainConfig train;
  DataConfig data;
  std::filesystem::path output_dir = "out";
  int sweep_trials = 1;
  int sweep_workers = 1;

  void validate() const;
};

/// Flat "section.key" -> value text, the form config files are read into.
/// A value holding commas is a sweep list.
using RawConfig = std::map<std::string, std::string>;

/// Reads an INI file (sections plus key = value lines, ';' or '#' comments).
RawConfig read_raw_config(const std::filesystem::path& path);
/// Applies "section.key=value".
void apply_override(RawConfig& raw, std::string_view assignment);

/// Resolves a raw config. Defaults come from the tuned duplication-divergence
/// setup of the chosen manifold at 10 stored coordinates; every key given
/// overrides them. Unknown keys and sweep lists are errors.
ExperimentConfig parse_config(const RawConfig& raw);

/// Every field, fully resolved.
RawConfig to_raw(const ExperimentConfig& config);
void write_config(const ExperimentConfig& config,
                  const std::filesystem::path& path);

/// Splits a comma-separated list, trimming blanks around items.
std::vector<std::string> split_list(std::string_view value);

struct SweepPoint {
  /// The swept keys with this point's values, in key order.
  std::vector<std::pair<std::string, std::string>> assignment;
  ExperimentConfig config;
};

/// Cartesian product over every list-valued key. A config without lists is
/// a single point.
std::vector<SweepPoint> expand_sweep(const RawConfig& raw);

}  // namespace spacetime
