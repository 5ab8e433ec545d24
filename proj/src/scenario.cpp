#include "msaplan/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace msa {

// Scenario files use a small TOML subset:
//
//   # comment
//   [section.sub]
//   key = "string" | 12 | 1.5e-6 | true | [1, 2, 3]
//   dotted.key = 3
//
// Keys are bare ([A-Za-z0-9_-]), arrays are single-line and hold scalars.
// The parser flattens everything into "section.sub.key" paths.

namespace {

struct Value {
  enum class Type { String, Number, Bool, Array };
  Type type = Type::String;
  std::string text;  // string contents or the number's source token
  double number = 0.0;
  bool integer = false;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
  int column = 0;
};

struct Entry {
  std::string key;
  Value value;
};

class Parser {
 public:
  Parser(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

  std::vector<Entry> run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const auto eol = text_.find('\n', pos);
      line_text_ = text_.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      if (!line_text_.empty() && line_text_.back() == '\r') line_text_.remove_suffix(1);
      ++line_;
      col_ = 0;
      parse_line();
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    if (entries_.empty()) fail(1, 1, "empty scenario: no keys defined");
    return std::move(entries_);
  }

 private:
  [[noreturn]] void fail(int line, int column, const std::string& msg) const {
    throw ScenarioError(ScenarioError::Kind::Parse, fmt::format("{}:{}:{}: {}", origin_, line, column, msg), line,
                        column);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(line_, static_cast<int>(col_) + 1, msg); }

  bool at_end() const { return col_ >= line_text_.size(); }
  char peek() const { return at_end() ? '\0' : line_text_[col_]; }
  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++col_;
  }
  bool at_comment_or_end() {
    skip_ws();
    return at_end() || peek() == '#';
  }

  static bool bare(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string parse_key() {
    std::string key;
    while (true) {
      skip_ws();
      const auto start = col_;
      while (!at_end() && bare(peek())) ++col_;
      if (col_ == start) fail("expected a key");
      key.append(line_text_.substr(start, col_ - start));
      skip_ws();
      if (peek() != '.') break;
      key.push_back('.');
      ++col_;
    }
    return key;
  }

  void parse_line() {
    if (at_comment_or_end()) return;
    if (peek() == '[') {
      ++col_;
      section_ = parse_key();
      if (peek() != ']') fail("expected ']' to close the section header");
      ++col_;
      if (!at_comment_or_end()) fail("unexpected text after section header");
      return;
    }
    const int key_col = static_cast<int>(col_) + 1;
    const auto key = parse_key();
    if (peek() != '=') fail("expected '=' after key");
    ++col_;
    skip_ws();
    Value v = parse_value();
    if (!at_comment_or_end()) fail("unexpected text after value");
    const auto full = section_.empty() ? key : section_ + "." + key;
    for (const auto& e : entries_) {
      if (e.key == full) fail(line_, key_col, fmt::format("duplicate key '{}'", full));
    }
    v.line = line_;
    v.column = key_col;
    entries_.push_back({full, std::move(v)});
  }

  Value parse_value() {
    Value v;
    v.line = line_;
    v.column = static_cast<int>(col_) + 1;
    const char c = peek();
    if (c == '"') {
      v.type = Value::Type::String;
      ++col_;
      while (true) {
        if (at_end()) fail("unterminated string");
        const char ch = line_text_[col_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (at_end()) fail("unterminated escape");
          const char esc = line_text_[col_++];
          switch (esc) {
            case '"': v.text.push_back('"'); break;
            case '\\': v.text.push_back('\\'); break;
            case 'n': v.text.push_back('\n'); break;
            case 't': v.text.push_back('\t'); break;
            default: fail(fmt::format("unknown escape '\\{}'", esc));
          }
        } else {
          v.text.push_back(ch);
        }
      }
      return v;
    }
    if (c == '[') {
      v.type = Value::Type::Array;
      ++col_;
      skip_ws();
      while (peek() != ']') {
        if (at_end()) fail("unterminated array");
        Value item = parse_value();
        if (item.type == Value::Type::Array) fail("nested arrays are not supported");
        v.items.push_back(std::move(item));
        skip_ws();
        if (peek() == ',') {
          ++col_;
          skip_ws();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++col_;
      return v;
    }
    const auto start = col_;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != ' ' && peek() != '\t') ++col_;
    const auto token = line_text_.substr(start, col_ - start);
    if (token.empty()) fail("expected a value");
    if (token == "true" || token == "false") {
      v.type = Value::Type::Bool;
      v.flag = token == "true";
      return v;
    }
    v.type = Value::Type::Number;
    v.text = std::string(token);
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v.number);
    if (ec != std::errc() || ptr != last) fail(fmt::format("invalid value '{}'", token));
    v.integer = token.find_first_of(".eE") == std::string_view::npos;
    return v;
  }

  std::string_view text_;
  std::string_view origin_;
  std::string_view line_text_;
  std::size_t col_ = 0;
  int line_ = 0;
  std::string section_;
  std::vector<Entry> entries_;
};

[[noreturn]] void invalid(const Entry& e, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Validation,
                      fmt::format("{}:{}: {}: {}", e.value.line, e.value.column, e.key, msg), e.value.line,
                      e.value.column);
}

std::string as_string(const Entry& e) {
  if (e.value.type != Value::Type::String) invalid(e, "expected a string");
  return e.value.text;
}

double as_number(const Entry& e, const Value& v) {
  if (v.type != Value::Type::Number) invalid(e, "expected a number");
  return v.number;
}
double as_number(const Entry& e) { return as_number(e, e.value); }

std::int64_t as_int(const Entry& e, const Value& v) {
  if (v.type != Value::Type::Number || !v.integer) invalid(e, "expected an integer");
  std::int64_t out = 0;
  const char* first = v.text.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, v.text.data() + v.text.size(), out);
  if (ec != std::errc() || ptr != v.text.data() + v.text.size()) invalid(e, "integer out of range");
  return out;
}
std::int64_t as_int(const Entry& e) { return as_int(e, e.value); }

std::uint64_t as_u64(const Entry& e) {
  if (e.value.type != Value::Type::Number || !e.value.integer) invalid(e, "expected an unsigned integer");
  std::uint64_t out = 0;
  const auto& t = e.value.text;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) invalid(e, "expected an unsigned 64-bit integer");
  return out;
}

bool as_bool(const Entry& e) {
  if (e.value.type != Value::Type::Bool) invalid(e, "expected true or false");
  return e.value.flag;
}

const std::vector<Value>& as_array(const Entry& e) {
  if (e.value.type != Value::Type::Array) invalid(e, "expected an array");
  return e.value.items;
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

void apply_network_field(const Entry& e, NetworkParams& n, const std::string& field) {
  if (field == "alpha") {
    n.alpha = as_number(e);
  } else if (field == "beta") {
    n.beta = as_number(e);
  } else if (field == "gs_rounds_per_step") {
    n.gs_rounds_per_step = as_number(e);
  } else {
    invalid(e, "unknown key");
  }
}

bool apply_io_field(const Entry& e, IoParams& io, const std::string& field) {
  if (field == "enabled") {
    io.enabled = as_bool(e);
  } else if (field == "bytes_per_point") {
    io.bytes_per_point = as_number(e);
    return true;
  } else if (field == "node_io_bw_gbs") {
    io.node_io_bw = as_number(e);
  } else if (field == "output_every") {
    io.output_every = as_int(e);
  } else {
    invalid(e, "unknown key");
  }
  return false;
}

void apply_module_field(const Entry& e, ModuleSpec& m, const std::string& field, bool& count_set) {
  if (field == "kind") {
    const auto k = parse_module_kind(as_string(e));
    if (!k) invalid(e, "kind must be \"gpu\" or \"cpu\"");
    m.kind = *k;
  } else if (field == "device") {
    m.device = as_string(e);
  } else if (field == "nodes") {
    m.nodes = as_int(e);
  } else if (field == "devices_per_node") {
    m.devices_per_node = as_int(e);
  } else if (field == "cores_per_node") {
    m.cores_per_node = as_int(e);
  } else if (field == "count") {
    m.count = as_int(e);
    count_set = true;
  } else if (field == "p_opt") {
    m.p_opt = as_number(e);
  } else if (field == "eff_half_load") {
    m.eff_half_load = as_number(e);
  } else if (field == "mem_per_device_gb") {
    m.mem_per_device_gb = as_number(e);
  } else if (field == "usable_mem_gb") {
    m.usable_mem_gb = as_number(e);
  } else if (field == "io_bw_gbs") {
    m.io_bw_gbs = as_number(e);
  } else {
    invalid(e, "unknown key");
  }
}

Scenario build(const std::vector<Entry>& entries) {
  Scenario s;
  bool have_machine = false;
  bool have_case = false;

  // Presets first so that every other key overrides them.
  for (const auto& e : entries) {
    if (e.key == "machine.preset") {
      const auto name = as_string(e);
      auto m = find_machine_preset(name);
      if (!m) {
        throw ScenarioError(ScenarioError::Kind::UnknownPreset,
                            fmt::format("{}:{}: unknown machine preset '{}'", e.value.line, e.value.column, name),
                            e.value.line, e.value.column);
      }
      s.machine = std::move(*m);
      have_machine = true;
    } else if (e.key == "case.preset") {
      const auto name = as_string(e);
      auto c = find_case_preset(name);
      if (!c) {
        throw ScenarioError(ScenarioError::Kind::UnknownPreset,
                            fmt::format("{}:{}: unknown case preset '{}'", e.value.line, e.value.column, name),
                            e.value.line, e.value.column);
      }
      s.case_spec = std::move(*c);
      have_case = true;
    }
  }

  std::int64_t elements = s.case_spec.workload.elements();
  int poly_order = s.case_spec.workload.poly_order();
  double mem_per_element = s.case_spec.workload.mem_per_element();
  double bytes_per_point = s.case_spec.workload.bytes_per_point_output();
  bool elements_set = false;
  bool dims_set = false;
  bool io_bytes_set = false;
  bool case_bytes_set = false;
  std::map<std::string, bool> count_set;

  IoParams io = s.machine.io;
  std::optional<NetworkVariant> variant;
  std::vector<std::pair<const Entry*, std::string>> network_overrides;
  std::vector<std::pair<const Entry*, std::string>> io_overrides;

  for (const auto& e : entries) {
    const auto parts = split_key(e.key);
    const auto& section = parts.front();
    if (e.key == "machine.preset" || e.key == "case.preset") continue;

    if (section == "machine") {
      have_machine = true;
      if (parts.size() == 2 && parts[1] == "name") {
        s.machine.name = as_string(e);
      } else if (parts.size() == 4 && parts[1] == "module") {
        auto idx = s.machine.find(parts[2]);
        if (!idx) {
          ModuleSpec m;
          m.name = parts[2];
          s.machine.modules.push_back(m);
          idx = s.machine.modules.size() - 1;
        }
        bool& set = count_set[parts[2]];
        apply_module_field(e, s.machine.modules[*idx], parts[3], set);
      } else if (parts.size() == 4 && parts[1] == "network" && (parts[2] == "host" || parts[2] == "device")) {
        apply_network_field(e, parts[2] == "host" ? s.machine.host_network : s.machine.device_network, parts[3]);
      } else if (parts.size() == 3 && parts[1] == "io") {
        apply_io_field(e, s.machine.io, parts[2]);
        io = s.machine.io;
      } else {
        invalid(e, "unknown key");
      }
    } else if (section == "case") {
      have_case = true;
      const auto field = parts.size() == 2 ? parts[1] : std::string();
      if (field == "name") {
        s.case_spec.name = as_string(e);
      } else if (field == "elements") {
        elements = as_int(e);
        elements_set = true;
      } else if (field == "poly_order") {
        poly_order = static_cast<int>(as_int(e));
      } else if (field == "mem_per_element_gb") {
        mem_per_element = as_number(e);
      } else if (field == "bytes_per_point") {
        bytes_per_point = as_number(e);
        case_bytes_set = true;
      } else if (field == "mesh_dims") {
        const auto& items = as_array(e);
        if (items.size() != 3) invalid(e, "expected three dimensions");
        std::array<int, 3> d{};
        for (int i = 0; i < 3; ++i) d[i] = static_cast<int>(as_int(e, items[i]));
        s.case_spec.mesh_dims = d;
        dims_set = true;
      } else if (field == "box_geometry") {
        s.case_spec.box_geometry = as_bool(e);
      } else {
        invalid(e, "unknown key");
      }
    } else if (section == "network") {
      const auto field = parts.size() == 2 ? parts[1] : std::string();
      if (field == "variant") {
        const auto v = as_string(e);
        if (v == "host") {
          variant = NetworkVariant::Host;
        } else if (v == "device") {
          variant = NetworkVariant::Device;
        } else {
          invalid(e, "variant must be \"host\" or \"device\"");
        }
      } else if (field == "alpha" || field == "beta" || field == "gs_rounds_per_step") {
        network_overrides.emplace_back(&e, field);
      } else {
        invalid(e, "unknown key");
      }
    } else if (section == "io") {
      if (parts.size() != 2) invalid(e, "unknown key");
      io_overrides.emplace_back(&e, parts[1]);
    } else if (section == "run") {
      auto& run = s.run;
      if (parts.size() == 3 && parts[1] == "devices") {
        run.devices.emplace_back(parts[2], as_int(e));
        continue;
      }
      const auto field = parts.size() == 2 ? parts[1] : std::string();
      if (field == "modules") {
        run.modules.clear();
        for (const auto& v : as_array(e)) {
          if (v.type != Value::Type::String) invalid(e, "expected an array of module names");
          run.modules.push_back(v.text);
        }
      } else if (field == "count") {
        run.count = as_int(e);
      } else if (field == "counts") {
        run.counts.clear();
        for (const auto& v : as_array(e)) run.counts.push_back(as_int(e, v));
      } else if (field == "weight") {
        run.weight = as_number(e);
      } else if (field == "weight_grid") {
        run.weight_grid.clear();
        for (const auto& v : as_array(e)) run.weight_grid.push_back(as_number(e, v));
      } else if (field == "seed") {
        run.seed = as_u64(e);
      } else if (field == "samples") {
        run.samples = as_int(e);
      } else if (field == "rel_sigma") {
        run.rel_sigma = as_number(e);
      } else if (field == "extreme_fill_ratio") {
        run.extreme_fill_ratio = as_number(e);
      } else if (field == "capacity") {
        const auto c = as_string(e);
        if (c == "usable") {
          run.capacity = CapacityMode::Usable;
        } else if (c == "theoretical") {
          run.capacity = CapacityMode::Theoretical;
        } else {
          invalid(e, "capacity must be \"usable\" or \"theoretical\"");
        }
      } else {
        invalid(e, "unknown key");
      }
    } else {
      invalid(e, "unknown section");
    }
  }

  if (!have_machine) {
    throw ScenarioError(ScenarioError::Kind::Validation, "machine: set machine.preset or describe the modules");
  }
  if (!have_case) throw ScenarioError(ScenarioError::Kind::Validation, "case: set case.preset or case.elements");

  for (auto& m : s.machine.modules) {
    const auto it = count_set.find(m.name);
    if (it != count_set.end() && !it->second) m.count = m.nodes * m.devices_per_node;
  }

  if (elements_set && !dims_set) s.case_spec.mesh_dims.reset();
  try {
    s.case_spec.workload = Workload(elements, poly_order, mem_per_element, bytes_per_point);
  } catch (const std::invalid_argument& ex) {
    throw ScenarioError(ScenarioError::Kind::Validation, fmt::format("case: {}", ex.what()));
  }

  s.network_variant = variant.value_or(NetworkVariant::Host);
  s.network = s.network_variant == NetworkVariant::Host ? s.machine.host_network : s.machine.device_network;
  for (const auto& [e, field] : network_overrides) apply_network_field(*e, s.network, field);

  for (const auto& [e, field] : io_overrides) io_bytes_set |= apply_io_field(*e, io, field);
  if (!io_bytes_set && case_bytes_set) io.bytes_per_point = bytes_per_point;
  s.io = io;
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string num(double v) {
  auto s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";  // keep it a float token
  return s;
}

void write_network(std::ostream& out, const NetworkParams& n) {
  out << "alpha = " << num(n.alpha) << "\nbeta = " << num(n.beta)
      << "\ngs_rounds_per_step = " << num(n.gs_rounds_per_step) << "\n";
}

void write_io(std::ostream& out, const IoParams& io) {
  out << "enabled = " << (io.enabled ? "true" : "false") << "\nbytes_per_point = " << num(io.bytes_per_point)
      << "\nnode_io_bw_gbs = " << num(io.node_io_bw) << "\noutput_every = " << io.output_every << "\n";
}

void throw_violations(const std::vector<Violation>& v) {
  if (v.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& x : v) msg += fmt::format("\n  {}: {}", x.field, x.rule);
  throw ScenarioError(ScenarioError::Kind::Validation, msg);
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view origin) {
  Scenario s = build(Parser(text, origin).run());
  throw_violations(validate(s));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(ScenarioError::Kind::Parse, fmt::format("cannot open scenario '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

Scenario scenario_from_presets(std::string_view machine, std::string_view case_name) {
  auto m = find_machine_preset(machine);
  if (!m) throw ScenarioError(ScenarioError::Kind::UnknownPreset, fmt::format("unknown machine preset '{}'", machine));
  auto c = find_case_preset(case_name);
  if (!c) throw ScenarioError(ScenarioError::Kind::UnknownPreset, fmt::format("unknown case preset '{}'", case_name));
  Scenario s;
  s.machine = std::move(*m);
  s.case_spec = std::move(*c);
  s.network = s.machine.host_network;
  s.io = s.machine.io;
  return s;
}

std::string serialize(const Scenario& s) {
  std::ostringstream out;
  out << "[machine]\nname = " << quote(s.machine.name) << "\n";
  for (const auto& m : s.machine.modules) {
    out << "\n[machine.module." << m.name << "]\n"
        << "kind = " << quote(std::string(to_string(m.kind))) << "\n"
        << "device = " << quote(m.device) << "\n"
        << "nodes = " << m.nodes << "\ndevices_per_node = " << m.devices_per_node
        << "\ncores_per_node = " << m.cores_per_node << "\ncount = " << m.count << "\np_opt = " << num(m.p_opt)
        << "\neff_half_load = " << num(m.eff_half_load) << "\nmem_per_device_gb = " << num(m.mem_per_device_gb)
        << "\n";
    if (m.usable_mem_gb) out << "usable_mem_gb = " << num(*m.usable_mem_gb) << "\n";
    out << "io_bw_gbs = " << num(m.io_bw_gbs) << "\n";
  }
  out << "\n[machine.network.host]\n";
  write_network(out, s.machine.host_network);
  out << "\n[machine.network.device]\n";
  write_network(out, s.machine.device_network);
  out << "\n[machine.io]\n";
  write_io(out, s.machine.io);

  const auto& w = s.case_spec.workload;
  out << "\n[case]\nname = " << quote(s.case_spec.name) << "\nelements = " << w.elements()
      << "\npoly_order = " << w.poly_order() << "\nmem_per_element_gb = " << num(w.mem_per_element())
      << "\nbytes_per_point = " << num(w.bytes_per_point_output()) << "\n";
  if (s.case_spec.mesh_dims) {
    const auto& d = *s.case_spec.mesh_dims;
    out << "mesh_dims = [" << d[0] << ", " << d[1] << ", " << d[2] << "]\n";
  }
  out << "box_geometry = " << (s.case_spec.box_geometry ? "true" : "false") << "\n";

  out << "\n[network]\nvariant = " << (s.network_variant == NetworkVariant::Host ? "\"host\"" : "\"device\"") << "\n";
  write_network(out, s.network);
  out << "\n[io]\n";
  write_io(out, s.io);

  const auto& r = s.run;
  out << "\n[run]\n";
  if (!r.modules.empty()) {
    out << "modules = [";
    for (std::size_t i = 0; i < r.modules.size(); ++i) out << (i ? ", " : "") << quote(r.modules[i]);
    out << "]\n";
  }
  if (r.count) out << "count = " << *r.count << "\n";
  if (!r.counts.empty()) out << "counts = [" << fmt::format("{}", fmt::join(r.counts, ", ")) << "]\n";
  if (r.weight) out << "weight = " << num(*r.weight) << "\n";
  if (!r.weight_grid.empty()) {
    out << "weight_grid = [";
    for (std::size_t i = 0; i < r.weight_grid.size(); ++i) out << (i ? ", " : "") << num(r.weight_grid[i]);
    out << "]\n";
  }
  out << "seed = " << r.seed << "\nsamples = " << r.samples << "\nrel_sigma = " << num(r.rel_sigma)
      << "\nextreme_fill_ratio = " << num(r.extreme_fill_ratio)
      << "\ncapacity = " << (r.capacity == CapacityMode::Usable ? "\"usable\"" : "\"theoretical\"") << "\n";
  if (!r.devices.empty()) {
    out << "\n[run.devices]\n";
    for (const auto& [name, n] : r.devices) out << name << " = " << n << "\n";
  }
  return out.str();
}

std::vector<Violation> validate(const Scenario& s) {
  auto out = validate(s.machine);
  for (auto& v : validate(s.case_spec)) out.push_back(std::move(v));

  const auto& n = s.network;
  if (!(n.alpha >= 0.0)) out.push_back({"network.alpha", "network.alpha ≥ 0"});
  if (!(n.beta >= 0.0)) out.push_back({"network.beta", "network.beta ≥ 0"});
  if (!(n.gs_rounds_per_step >= 0.0)) out.push_back({"network.gs_rounds_per_step", "network.gs_rounds_per_step ≥ 0"});

  if (!(s.io.bytes_per_point >= 0.0)) out.push_back({"io.bytes_per_point", "io.bytes_per_point ≥ 0"});
  if (!(s.io.node_io_bw > 0.0)) out.push_back({"io.node_io_bw_gbs", "io.node_io_bw_gbs > 0"});
  if (s.io.output_every < 1) out.push_back({"io.output_every", "io.output_every ≥ 1"});

  const auto& r = s.run;
  for (const auto& name : r.modules) {
    if (!s.machine.find(name)) out.push_back({"run.modules", fmt::format("run.modules: unknown module '{}'", name)});
  }
  for (const auto& [name, count] : r.devices) {
    const auto idx = s.machine.find(name);
    if (!idx) {
      out.push_back({"run.devices." + name, fmt::format("run.devices: unknown module '{}'", name)});
    } else if (count < 1 || count > s.machine.modules[*idx].count) {
      out.push_back({"run.devices." + name,
                     fmt::format("run.devices.{} in [1, {}]", name, s.machine.modules[*idx].count)});
    }
  }
  if (r.count && *r.count < 1) out.push_back({"run.count", "run.count ≥ 1"});
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    if (r.counts[i] < 1 || (i > 0 && r.counts[i] <= r.counts[i - 1])) {
      out.push_back({"run.counts", "run.counts positive and strictly ascending"});
      break;
    }
  }
  if (r.weight && !(*r.weight > 0.0)) out.push_back({"run.weight", "run.weight > 0"});
  for (double w : r.weight_grid) {
    if (!(w > 0.0)) {
      out.push_back({"run.weight_grid", "run.weight_grid entries > 0"});
      break;
    }
  }
  if (r.samples < 2) out.push_back({"run.samples", "run.samples ≥ 2"});
  if (!(r.rel_sigma >= 0.0)) out.push_back({"run.rel_sigma", "run.rel_sigma ≥ 0"});
  if (!(r.extreme_fill_ratio > 0.0 && r.extreme_fill_ratio <= 1.0)) {
    out.push_back({"run.extreme_fill_ratio", "run.extreme_fill_ratio in (0, 1]"});
  }
  return out;
}

std::vector<std::size_t> resolve_modules(const Scenario& s) {
  std::vector<std::size_t> out;
  if (s.run.modules.empty()) {
    for (std::size_t i = 0; i < s.machine.modules.size(); ++i) out.push_back(i);
    return out;
  }
  for (const auto& name : s.run.modules) {
    const auto idx = s.machine.find(name);
    if (!idx) throw ScenarioError(ScenarioError::Kind::Validation, fmt::format("unknown module '{}'", name));
    out.push_back(*idx);
  }
  return out;
}

Mix resolve_mix(const Scenario& s) {
  Mix mix;
  if (!s.run.devices.empty()) {
    for (const auto& [name, n] : s.run.devices) {
      const auto idx = s.machine.find(name);
      if (!idx) throw ScenarioError(ScenarioError::Kind::Validation, fmt::format("unknown module '{}'", name));
      mix.push_back({*idx, n});
    }
    return mix;
  }
  const auto modules = resolve_modules(s);
  if (s.run.count) return even_mix(s.machine, modules, *s.run.count);
  for (auto idx : modules) mix.push_back({idx, s.machine.modules[idx].count});
  return mix;
}

SimOptions sim_options(const Scenario& s) {
  SimOptions o;
  o.network = s.network;
  o.io = s.io;
  o.extreme_fill_ratio = s.run.extreme_fill_ratio;
  o.capacity = s.run.capacity;
  return o;
}

}  // namespace msa
