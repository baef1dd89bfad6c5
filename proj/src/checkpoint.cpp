#include "pga/checkpoint.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pga {

namespace {

constexpr const char* kMagic = "PGACHECKPOINT";
constexpr int kVersion = 1;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("checkpoint: " + what); }

std::size_t to_size(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-') fail("bad integer for " + key + ": '" + text + "'");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  fail("bad boolean for " + key + ": '" + text + "'");
}

void write_values(std::ostream& os, const double* v, std::size_t n) {
  os << std::hexfloat;
  for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << v[i];
  os << std::defaultfloat << '\n';
}

// operator>> does not accept hexfloats in libstdc++, so parse with strtod.
std::vector<double> read_values(std::istream& is, std::size_t n, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) fail("missing values for " + what);
  std::istringstream ls(line);
  std::vector<double> out;
  out.reserve(n);
  std::string tok;
  while (ls >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail("bad number '" + tok + "' in " + what);
    out.push_back(v);
  }
  if (out.size() != n) {
    fail(what + " has " + std::to_string(out.size()) + " values, expected " + std::to_string(n));
  }
  return out;
}

}  // namespace

std::string model_config_line(const ModelConfig& c) {
  std::ostringstream os;
  os << "in_channels=" << c.in_channels << " height=" << c.height << " width=" << c.width
     << " embed_dim=" << c.embed_dim << " reduced_dim=" << c.reduced_dim << " depth=" << c.depth
     << " num_classes=" << c.num_classes << " graph=" << to_string(c.graph) << " softmax=" << to_string(c.softmax)
     << " self_loops=" << (c.self_loops ? 1 : 0) << " value_projection=" << (c.value_projection ? 1 : 0)
     << " seed=" << c.seed;
  return os.str();
}

ModelConfig parse_model_config_line(const std::string& line) {
  ModelConfig c;
  std::istringstream is(line);
  std::string item;
  std::set<std::string> seen;
  while (is >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail("config entry without '=': '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (!seen.insert(key).second) fail("duplicate config key " + key);
    if (key == "in_channels") c.in_channels = to_size(key, value);
    else if (key == "height") c.height = to_size(key, value);
    else if (key == "width") c.width = to_size(key, value);
    else if (key == "embed_dim") c.embed_dim = to_size(key, value);
    else if (key == "reduced_dim") c.reduced_dim = to_size(key, value);
    else if (key == "depth") c.depth = to_size(key, value);
    else if (key == "num_classes") c.num_classes = to_size(key, value);
    else if (key == "graph") c.graph = parse_graph_kind(value);
    else if (key == "softmax") c.softmax = parse_softmax_mode(value);
    else if (key == "self_loops") c.self_loops = to_bool(key, value);
    else if (key == "value_projection") c.value_projection = to_bool(key, value);
    else if (key == "seed") c.seed = to_size(key, value);
    else fail("unknown config key " + key);
  }
  return c;
}

void save_checkpoint(std::ostream& os, ToyModel& model) {
  os << kMagic << ' ' << kVersion << '\n';
  os << "config " << model_config_line(model.config()) << '\n';
  for (const Parameter* p : model.parameters()) {
    const Shape& s = p->value.shape();
    os << "param " << p->name << ' ' << s.size();
    for (std::size_t d : s) os << ' ' << d;
    os << '\n';
    write_values(os, p->value.raw(), p->value.numel());
  }
  for (const BatchNormState* bn : model.batchnorms()) {
    os << "bn " << bn->name << ' ' << bn->channels() << ' ' << (bn->initialized ? 1 : 0) << '\n';
    write_values(os, bn->running_mean.data(), bn->channels());
    write_values(os, bn->running_var.data(), bn->channels());
  }
  os << "end\n";
  if (!os) fail("write failed");
}

void save_checkpoint(const std::filesystem::path& path, ToyModel& model) {
  std::ofstream os(path);
  if (!os) fail("cannot open " + path.string() + " for writing");
  save_checkpoint(os, model);
}

ToyModel load_checkpoint(std::istream& is) {
  std::string line, word;
  if (!std::getline(is, line)) fail("empty input");
  {
    std::istringstream hs(line);
    int version = 0;
    if (!(hs >> word >> version) || word != kMagic) fail("not a checkpoint (bad header)");
    if (version != kVersion) {
      fail("unsupported version " + std::to_string(version) + " (expected " + std::to_string(kVersion) + ")");
    }
  }
  if (!std::getline(is, line) || line.rfind("config ", 0) != 0) fail("missing config line");
  ToyModel model(parse_model_config_line(line.substr(7)));

  std::map<std::string, Parameter*> params;
  for (Parameter* p : model.parameters()) params[p->name] = p;
  std::map<std::string, BatchNormState*> bns;
  for (BatchNormState* b : model.batchnorms()) bns[b->name] = b;
  std::set<std::string> loaded;

  bool ended = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    if (!(ls >> word)) continue;
    if (word == "end") {
      ended = true;
      break;
    }
    std::string name;
    if (!(ls >> name)) fail("entry without a name: '" + line + "'");
    if (!loaded.insert(word + ":" + name).second) fail("duplicate entry " + name);
    if (word == "param") {
      auto it = params.find(name);
      if (it == params.end()) fail("unknown parameter " + name);
      std::size_t rank = 0;
      if (!(ls >> rank)) fail("parameter " + name + " lacks a rank");
      Shape shape(rank);
      for (auto& d : shape) {
        if (!(ls >> d)) fail("parameter " + name + " lacks dimensions");
      }
      Parameter& p = *it->second;
      if (shape != p.value.shape()) {
        fail("parameter " + name + " has shape " + shape_str(shape) + ", model expects " +
             shape_str(p.value.shape()));
      }
      p.value = Tensor(shape, read_values(is, p.value.numel(), name));
      p.zero_grad();
    } else if (word == "bn") {
      auto it = bns.find(name);
      if (it == bns.end()) fail("unknown batchnorm " + name);
      std::size_t channels = 0;
      int initialized = 0;
      if (!(ls >> channels >> initialized)) fail("batchnorm " + name + " header is malformed");
      BatchNormState& bn = *it->second;
      if (channels != bn.channels()) fail("batchnorm " + name + " channel count differs");
      bn.running_mean = read_values(is, channels, name + " mean");
      bn.running_var = read_values(is, channels, name + " var");
      bn.initialized = initialized != 0;
    } else {
      fail("unknown entry kind '" + word + "'");
    }
  }
  if (!ended) fail("truncated input (no end marker)");
  for (const auto& [name, p] : params) {
    if (!loaded.count("param:" + name)) fail("missing parameter " + name);
  }
  for (const auto& [name, b] : bns) {
    if (!loaded.count("bn:" + name)) fail("missing batchnorm " + name);
  }
  return model;
}

ToyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail("cannot open " + path.string());
  return load_checkpoint(is);
}

}  // namespace pga
