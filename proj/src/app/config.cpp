#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "pga/app.hpp"

namespace pga {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || v[0] == '-') throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(out);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || !std::isfinite(out)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <typename F>
auto parse_enum(const std::string& key, const std::string& v, F parse) {
  try {
    return parse(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(T RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_size(k, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
          [member](const RunConfig& c) { return fmt(c.*member); }};
}

Field bool_field(bool RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); },
          [member](const RunConfig& c) { return fmt(c.*member); }};
}

// Ordered so that entries() echoes a stable, readable layout.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("seed", size_field(&RunConfig::seed));
    t.emplace_back("out", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                  if (v.empty()) throw ConfigError(k + ": must not be empty");
                                  c.out = v;
                                },
                                [](const RunConfig& c) { return c.out; }});
    t.emplace_back("identities", size_field(&RunConfig::identities));
    t.emplace_back("per_id", size_field(&RunConfig::per_id));
    t.emplace_back("in_channels", size_field(&RunConfig::in_channels));
    t.emplace_back("height", size_field(&RunConfig::height));
    t.emplace_back("width", size_field(&RunConfig::width));
    t.emplace_back("max_shift", size_field(&RunConfig::max_shift));
    t.emplace_back("noise_cam0", double_field(&RunConfig::noise_cam0));
    t.emplace_back("noise_cam1", double_field(&RunConfig::noise_cam1));
    t.emplace_back("occlusion_prob", double_field(&RunConfig::occlusion_prob));
    t.emplace_back("occlusion_size", size_field(&RunConfig::occlusion_size));
    t.emplace_back("channels", size_field(&RunConfig::channels));
    t.emplace_back("reduced_dim", size_field(&RunConfig::reduced_dim));
    t.emplace_back("depth", size_field(&RunConfig::depth));
    t.emplace_back("neighbors", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                        c.neighbors = parse_enum(k, v, parse_graph_kind);
                                      },
                                      [](const RunConfig& c) { return std::string(to_string(c.neighbors)); }});
    t.emplace_back("softmax", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                      c.softmax = parse_enum(k, v, parse_softmax_mode);
                                    },
                                    [](const RunConfig& c) { return std::string(to_string(c.softmax)); }});
    t.emplace_back("self_loops", bool_field(&RunConfig::self_loops));
    t.emplace_back("value_projection", bool_field(&RunConfig::value_projection));
    t.emplace_back("epochs", size_field(&RunConfig::epochs));
    t.emplace_back("batch_p", size_field(&RunConfig::batch_p));
    t.emplace_back("batch_k", size_field(&RunConfig::batch_k));
    t.emplace_back("target_accuracy", double_field(&RunConfig::target_accuracy));
    t.emplace_back("beta", Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.loss.beta = parse_double(k, v); },
                                 [](const RunConfig& c) { return fmt(c.loss.beta); }});
    t.emplace_back("margin", Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.loss.margin = parse_double(k, v); },
                                   [](const RunConfig& c) { return fmt(c.loss.margin); }});
    t.emplace_back("smoothing",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.loss.smoothing = parse_double(k, v); },
                         [](const RunConfig& c) { return fmt(c.loss.smoothing); }});
    t.emplace_back("lr", Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.adam.lr = parse_double(k, v); },
                               [](const RunConfig& c) { return fmt(c.adam.lr); }});
    t.emplace_back("weight_decay",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.adam.weight_decay = parse_double(k, v); },
                         [](const RunConfig& c) { return fmt(c.adam.weight_decay); }});
    t.emplace_back("warmup_iters",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.adam.warmup_iters = parse_size(k, v); },
                         [](const RunConfig& c) { return std::to_string(c.adam.warmup_iters); }});
    t.emplace_back("metric", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                     c.metric = parse_enum(k, v, parse_distance_metric);
                                   },
                                   [](const RunConfig& c) {
                                     return std::string(c.metric == DistanceMetric::Cosine ? "cosine" : "euclidean");
                                   }});
    t.emplace_back("bench_grids", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                          std::vector<std::pair<std::size_t, std::size_t>> grids;
                                          for (const auto& item : split(v, ',')) {
                                            const auto x = item.find('x');
                                            if (x == std::string::npos) throw ConfigError(k + ": expected HxW items, got '" + item + "'");
                                            grids.emplace_back(parse_size(k, item.substr(0, x)), parse_size(k, item.substr(x + 1)));
                                          }
                                          c.bench_grids = std::move(grids);
                                        },
                                        [](const RunConfig& c) {
                                          std::string s;
                                          for (const auto& [h, w] : c.bench_grids) {
                                            s += (s.empty() ? "" : ",") + std::to_string(h) + "x" + std::to_string(w);
                                          }
                                          return s;
                                        }});
    t.emplace_back("bench_repeats", size_field(&RunConfig::bench_repeats));
    t.emplace_back("sweep_depths", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                           std::vector<std::size_t> depths;
                                           for (const auto& item : split(v, ',')) depths.push_back(parse_size(k, item));
                                           c.sweep_depths = std::move(depths);
                                         },
                                         [](const RunConfig& c) {
                                           std::string s;
                                           for (auto d : c.sweep_depths) s += (s.empty() ? "" : ",") + std::to_string(d);
                                           return s;
                                         }});
    t.emplace_back("sweep_neighbors", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                              std::vector<GraphKind> kinds;
                                              for (const auto& item : split(v, ',')) kinds.push_back(parse_enum(k, item, parse_graph_kind));
                                              c.sweep_neighbors = std::move(kinds);
                                            },
                                            [](const RunConfig& c) {
                                              std::string s;
                                              for (auto g : c.sweep_neighbors) s += (s.empty() ? "" : ",") + std::string(to_string(g));
                                              return s;
                                            }});
    t.emplace_back("sweep_seeds", size_field(&RunConfig::sweep_seeds));
    t.emplace_back("verify_max_side", size_field(&RunConfig::verify_max_side));
    t.emplace_back("gradcheck_seeds", size_field(&RunConfig::gradcheck_seeds));
    t.emplace_back("corrupt_grid", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.corrupt_grid = v; },
                                         [](const RunConfig& c) { return c.corrupt_grid; }});
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(*this));
  return out;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> out;
  for (const auto& [name, field] : fields()) out.push_back(name);
  return out;
}

DatasetConfig RunConfig::dataset_config(std::uint64_t run_seed) const {
  DatasetConfig d;
  d.seed = run_seed;
  d.identities = identities;
  d.per_id = per_id;
  d.channels = in_channels;
  d.height = height;
  d.width = width;
  d.max_shift = max_shift;
  d.noise_cam0 = noise_cam0;
  d.noise_cam1 = noise_cam1;
  d.occlusion_prob = occlusion_prob;
  d.occlusion_size = occlusion_size;
  return d;
}

ModelConfig RunConfig::model_config(std::uint64_t run_seed) const {
  ModelConfig m;
  m.in_channels = in_channels;
  m.height = height;
  m.width = width;
  m.embed_dim = channels;
  m.reduced_dim = reduced_dim;
  m.depth = depth;
  m.num_classes = identities;
  m.graph = neighbors;
  m.softmax = softmax;
  m.self_loops = self_loops;
  m.value_projection = value_projection;
  m.seed = run_seed;
  return m;
}

TrainConfig RunConfig::train_config(std::uint64_t run_seed) const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_p = batch_p;
  t.batch_k = batch_k;
  t.loss = loss;
  t.adam = adam;
  t.seed = run_seed;
  t.target_accuracy = target_accuracy;
  return t;
}

void RunConfig::validate() const {
  try {
    dataset_config(seed).validate();
    model_config(seed).validate();
    loss.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (batch_p < 2 || batch_k < 2) throw ConfigError("batch_p and batch_k must be at least 2");
  if (batch_p > identities) throw ConfigError("batch_p exceeds the number of identities");
  if (!(adam.lr > 0.0)) throw ConfigError("lr must be positive");
  if (adam.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (target_accuracy < 0.0 || target_accuracy > 1.0) throw ConfigError("target_accuracy must lie in [0, 1]");
  if (bench_grids.empty()) throw ConfigError("bench_grids must list at least one grid");
  for (const auto& [h, w] : bench_grids) {
    if (h == 0 || w == 0) throw ConfigError("bench_grids entries must be positive");
  }
  if (bench_repeats < 3) throw ConfigError("bench_repeats must be at least 3");
  if (sweep_depths.empty() || sweep_neighbors.empty()) throw ConfigError("sweep lists must not be empty");
  if (sweep_seeds == 0) throw ConfigError("sweep_seeds must be positive");
  if (verify_max_side == 0) throw ConfigError("verify_max_side must be positive");
  if (gradcheck_seeds == 0) throw ConfigError("gradcheck_seeds must be positive");
  if (!corrupt_grid.empty()) {
    const auto colon = corrupt_grid.find(':');
    const auto x = corrupt_grid.find('x');
    bool ok = colon != std::string::npos && x != std::string::npos && x < colon;
    if (ok) {
      try {
        parse_neighbor_mode(corrupt_grid.substr(colon + 1));
      } catch (const std::invalid_argument&) {
        ok = false;
      }
    }
    if (!ok) throw ConfigError("corrupt_grid must look like 4x4:four, got '" + corrupt_grid + "'");
  }
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value, got '" + line + "'");
    try {
      config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  apply_config_text(config, text.str(), path.string());
}

void write_config(std::ostream& os, const RunConfig& config) {
  for (const auto& [key, value] : config.entries()) os << key << '=' << value << '\n';
}

std::filesystem::path make_run_dir(const RunConfig& config, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << command << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  const std::filesystem::path base = std::filesystem::path(config.out) / stamp.str();
  std::filesystem::path dir = base;
  for (int suffix = 1; std::filesystem::exists(dir); ++suffix) dir = base.string() + "-" + std::to_string(suffix);
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / "config.txt");
  write_config(os, config);
  return dir;
}

}  // namespace pga
