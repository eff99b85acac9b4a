#include "spacetime/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <set>

#include "spacetime/experiments.hpp"
#include "spacetime/text_format.hpp"

namespace spacetime {

namespace {

namespace pt = boost::property_tree;

constexpr int kDefaultEmbeddingDim = 10;
constexpr double kDefaultCircumference = 10.0;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key + ": not an integer: '" + text + "'");
  }
  return value;
}

// Tracks which keys were consumed so leftovers can be reported.
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const std::string* find(const std::string& key) {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return nullptr;
    used_.insert(key);
    if (it->second.find(',') != std::string::npos) {
      throw ConfigError(key + ": value lists are only allowed in sweeps");
    }
    return &it->second;
  }

  void get(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      try {
        out = parse_double(*v);
      } catch (const std::invalid_argument&) {
        throw ConfigError(key + ": not a number: '" + *v + "'");
      }
    }
  }
  void get(const std::string& key, int& out) {
    if (const auto* v = find(key)) out = parse_integer<int>(key, *v);
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(key)) out = parse_integer<std::uint64_t>(key, *v);
  }
  void get(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (*v == "true" || *v == "1") {
        out = true;
      } else if (*v == "false" || *v == "0") {
        out = false;
      } else {
        throw ConfigError(key + ": expected true or false, got '" + *v + "'");
      }
    }
  }

  void check_all_used() const {
    for (const auto& [key, value] : raw_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const RawConfig& raw_;
  std::set<std::string> used_;
};

ModelSetup base_setup(ManifoldKind kind) {
  if (kind == ManifoldKind::kCylindricalEuclidean) {
    ModelSetup s = dupdiv_setup(ManifoldKind::kCylindricalMinkowski,
                                kDefaultEmbeddingDim);
    s.spec = ManifoldSpec::from_embedding_dim(kind, kDefaultEmbeddingDim,
                                              kDefaultCircumference);
    return s;
  }
  return dupdiv_setup(kind, kDefaultEmbeddingDim);
}

template <typename E>
E parse_enum(const std::string& key, const std::string& value, E (*parse)(std::string_view)) {
  try {
    return parse(value);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kDupDiv:
      return "dupdiv";
    case GeneratorKind::kChain:
      return "chain";
    case GeneratorKind::kCycle:
      return "cycle";
    case GeneratorKind::kTransitiveChain:
      return "transitive_chain";
    case GeneratorKind::kCommonNeighbors:
      return "common_neighbors";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  for (auto kind : {GeneratorKind::kDupDiv, GeneratorKind::kChain,
                    GeneratorKind::kCycle, GeneratorKind::kTransitiveChain,
                    GeneratorKind::kCommonNeighbors}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown generator '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  likelihood.validate();
  train.validate();
  if (data.source == DataSource::kGenerator) {
    if (data.generator == GeneratorKind::kDupDiv) data.dupdiv.validate();
    if (data.n < 2) throw ConfigError("data.n must be >= 2");
    if (data.n_pred < 1 || data.n_succ < 1) {
      throw ConfigError("data.n_pred and data.n_succ must be >= 1");
    }
  } else if (!std::filesystem::exists(data.edge_list)) {
    throw ConfigError("edge list not found: " + data.edge_list.string());
  }
  if (!(data.train_frac > 0.0 && data.train_frac < 1.0) ||
      !(data.valid_frac >= 0.0) || data.train_frac + data.valid_frac >= 1.0) {
    throw ConfigError(
        "split fractions need 0 < train_frac, 0 <= valid_frac and "
        "train_frac + valid_frac < 1");
  }
  if (output_dir.empty()) throw ConfigError("output.dir is empty");
  if (sweep_trials < 1) throw ConfigError("sweep.trials must be >= 1");
  if (sweep_workers < 1) throw ConfigError("sweep.workers must be >= 1");
}

RawConfig read_raw_config(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  RawConfig raw;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(path.string() + ": key '" + section +
                        "' outside any section");
    }
    for (const auto& [key, value] : body) {
      raw[section + "." + key] = trim(value.data());
    }
  }
  return raw;
}

void apply_override(RawConfig& raw, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const std::string key = trim(assignment.substr(0, eq));
  if (eq == std::string_view::npos || key.find('.') == std::string::npos) {
    throw ConfigError("override must look like section.key=value, got '" +
                      std::string(assignment) + "'");
  }
  raw[key] = trim(assignment.substr(eq + 1));
}

ExperimentConfig parse_config(const RawConfig& raw) {
  Reader r(raw);
  ExperimentConfig cfg;

  ManifoldKind kind = ManifoldKind::kCylindricalMinkowski;
  if (const auto* v = r.find("manifold.kind")) {
    kind = parse_enum(std::string("manifold.kind"), *v, &parse_manifold_kind);
  }
  const ModelSetup base = base_setup(kind);
  int spatial_dim = base.spec.spatial_dim();
  const auto* sd = r.find("manifold.spatial_dim");
  const auto* ed = r.find("manifold.embedding_dim");
  if (sd && ed) {
    throw ConfigError("give manifold.spatial_dim or manifold.embedding_dim, not both");
  }
  if (sd) spatial_dim = parse_integer<int>("manifold.spatial_dim", *sd);
  std::optional<double> circumference;
  if (base.spec.has_circumference()) circumference = base.spec.circumference();
  if (r.find("manifold.circumference")) {
    double c = 0.0;
    r.get("manifold.circumference", c);
    circumference = c;
  }
  try {
    cfg.manifold =
        ed ? ManifoldSpec::from_embedding_dim(
                 kind, parse_integer<int>("manifold.embedding_dim", *ed),
                 circumference)
           : ManifoldSpec(kind, spatial_dim, circumference);
  } catch (const ManifoldError& e) {
    throw ConfigError(std::string("manifold: ") + e.what());
  }

  cfg.likelihood = base.likelihood;
  cfg.auto_k = base.auto_k;
  if (const auto* v = r.find("likelihood.kind")) {
    cfg.likelihood.kind =
        parse_enum(std::string("likelihood.kind"), *v, &parse_likelihood_kind);
  }
  r.get("likelihood.fd_tau", cfg.likelihood.fd.tau);
  r.get("likelihood.fd_r", cfg.likelihood.fd.r);
  r.get("likelihood.fd_alpha", cfg.likelihood.fd.alpha);
  r.get("likelihood.tau1", cfg.likelihood.tfd.tau1);
  r.get("likelihood.tau2", cfg.likelihood.tfd.tau2);
  r.get("likelihood.alpha", cfg.likelihood.tfd.alpha);
  r.get("likelihood.r", cfg.likelihood.tfd.r);
  r.get("likelihood.wrap_m", cfg.likelihood.tfd.wrap_m);
  if (const auto* v = r.find("likelihood.k")) {
    if (*v == "auto") {
      cfg.auto_k = true;
    } else {
      cfg.auto_k = false;
      r.get("likelihood.k", cfg.likelihood.tfd.k);
    }
  }

  cfg.train = base.train;
  auto& t = cfg.train;
  r.get("train.lr", t.lr);
  r.get("train.epochs", t.epochs);
  r.get("train.burnin_epochs", t.burnin_epochs);
  r.get("train.burnin_factor", t.burnin_factor);
  r.get("train.batch_size", t.batch_size);
  r.get("train.neg_ratio", t.neg_ratio);
  r.get("train.lr_final_fraction", t.lr_final_fraction);
  r.get("train.init_scale", t.init_scale);
  r.get("train.seed", t.seed);
  if (const auto* v = r.find("train.reduction")) {
    if (*v == "mean") {
      t.reduction = LossReduction::kMean;
    } else if (*v == "sum") {
      t.reduction = LossReduction::kSum;
    } else {
      throw ConfigError("train.reduction: expected mean or sum, got '" + *v + "'");
    }
  }

  auto& d = cfg.data;
  if (const auto* v = r.find("data.source")) {
    if (*v == "generator") {
      d.source = DataSource::kGenerator;
    } else if (*v == "edge_list") {
      d.source = DataSource::kEdgeList;
    } else {
      throw ConfigError("data.source: expected generator or edge_list, got '" +
                        *v + "'");
    }
  }
  if (const auto* v = r.find("data.generator")) {
    d.generator = parse_enum(std::string("data.generator"), *v, &parse_generator_kind);
  }
  r.get("data.n_initial", d.dupdiv.n_initial);
  r.get("data.n_final", d.dupdiv.n_final);
  r.get("data.p_inherit", d.dupdiv.p_inherit);
  r.get("data.p_link", d.dupdiv.p_link);
  r.get("data.dag_seed", d.dupdiv.dag_seed);
  r.get("data.generator_seed", d.dupdiv.seed);
  r.get("data.n", d.n);
  r.get("data.n_pred", d.n_pred);
  r.get("data.n_succ", d.n_succ);
  if (const auto* v = r.find("data.edge_list")) d.edge_list = *v;
  r.get("data.train_frac", d.train_frac);
  r.get("data.valid_frac", d.valid_frac);
  r.get("data.split_seed", d.split_seed);

  if (const auto* v = r.find("output.dir")) cfg.output_dir = *v;
  r.get("sweep.trials", cfg.sweep_trials);
  r.get("sweep.workers", cfg.sweep_workers);

  r.check_all_used();
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RawConfig to_raw(const ExperimentConfig& c) {
  RawConfig raw;
  raw["manifold.kind"] = to_string(c.manifold.kind());
  raw["manifold.spatial_dim"] = std::to_string(c.manifold.spatial_dim());
  if (c.manifold.has_circumference()) {
    raw["manifold.circumference"] = format_double(c.manifold.circumference());
  }

  const Likelihood& l = c.likelihood;
  raw["likelihood.kind"] = to_string(l.kind);
  raw["likelihood.fd_tau"] = format_double(l.fd.tau);
  raw["likelihood.fd_r"] = format_double(l.fd.r);
  raw["likelihood.fd_alpha"] = format_double(l.fd.alpha);
  raw["likelihood.tau1"] = format_double(l.tfd.tau1);
  raw["likelihood.tau2"] = format_double(l.tfd.tau2);
  raw["likelihood.alpha"] = format_double(l.tfd.alpha);
  raw["likelihood.r"] = format_double(l.tfd.r);
  raw["likelihood.k"] = c.auto_k ? "auto" : format_double(l.tfd.k);
  raw["likelihood.wrap_m"] = std::to_string(l.tfd.wrap_m);

  const TrainConfig& t = c.train;
  raw["train.lr"] = format_double(t.lr);
  raw["train.epochs"] = std::to_string(t.epochs);
  raw["train.burnin_epochs"] = std::to_string(t.burnin_epochs);
  raw["train.burnin_factor"] = format_double(t.burnin_factor);
  raw["train.batch_size"] = std::to_string(t.batch_size);
  raw["train.neg_ratio"] = std::to_string(t.neg_ratio);
  raw["train.lr_final_fraction"] = format_double(t.lr_final_fraction);
  raw["train.init_scale"] = format_double(t.init_scale);
  raw["train.reduction"] = t.reduction == LossReduction::kMean ? "mean" : "sum";
  raw["train.seed"] = std::to_string(t.seed);

  const DataConfig& d = c.data;
  raw["data.source"] = d.source == DataSource::kGenerator ? "generator" : "edge_list";
  raw["data.generator"] = to_string(d.generator);
  raw["data.n_initial"] = std::to_string(d.dupdiv.n_initial);
  raw["data.n_final"] = std::to_string(d.dupdiv.n_final);
  raw["data.p_inherit"] = format_double(d.dupdiv.p_inherit);
  raw["data.p_link"] = format_double(d.dupdiv.p_link);
  raw["data.dag_seed"] = d.dupdiv.dag_seed ? "true" : "false";
  raw["data.generator_seed"] = std::to_string(d.dupdiv.seed);
  raw["data.n"] = std::to_string(d.n);
  raw["data.n_pred"] = std::to_string(d.n_pred);
  raw["data.n_succ"] = std::to_string(d.n_succ);
  if (d.source == DataSource::kEdgeList) raw["data.edge_list"] = d.edge_list.string();
  raw["data.train_frac"] = format_double(d.train_frac);
  raw["data.valid_frac"] = format_double(d.valid_frac);
  raw["data.split_seed"] = std::to_string(d.split_seed);

  raw["output.dir"] = c.output_dir.string();
  raw["sweep.trials"] = std::to_string(c.sweep_trials);
  raw["sweep.workers"] = std::to_string(c.sweep_workers);
  return raw;
}

void write_config(const ExperimentConfig& config,
                  const std::filesystem::path& path) {
  pt::ptree tree;
  for (const auto& [key, value] : to_raw(config)) {
    const auto dot = key.find('.');
    tree.put_child(pt::ptree::path_type(key.substr(0, dot) + "|" + key.substr(dot + 1), '|'),
                   pt::ptree(value));
  }
  try {
    pt::write_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    items.push_back(trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

std::vector<SweepPoint> expand_sweep(const RawConfig& raw) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, value] : raw) {
    if (value.find(',') == std::string::npos) continue;
    auto items = split_list(value);
    for (const auto& item : items) {
      if (item.empty()) throw ConfigError(key + ": empty item in value list");
    }
    axes.emplace_back(key, std::move(items));
  }

  std::vector<SweepPoint> points;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    RawConfig point_raw = raw;
    SweepPoint point;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& [key, items] = axes[a];
      point_raw[key] = items[idx[a]];
      point.assignment.emplace_back(key, items[idx[a]]);
    }
    point.config = parse_config(point_raw);
    points.push_back(std::move(point));

    // Odometer increment, last axis fastest.
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return points;
    }
    if (axes.empty()) return points;
  }
}

}  // namespace spacetime
