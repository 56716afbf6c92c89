#include "evotrade/genome_io.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "evotrade/file_io.hpp"
#include "evotrade/numeric_io.hpp"

namespace evotrade {

namespace {

constexpr std::string_view kMagic = "evotrade-genome v1";

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw GenomeError(fmt::format("malformed integer '{}'", text));
  return value;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

/// key=value fields of one record; every key listed in `required` must be present.
class Fields {
 public:
  Fields(const std::vector<std::string_view>& toks, std::size_t line) : line_(line) {
    for (std::size_t i = 1; i < toks.size(); ++i) {
      auto eq = toks[i].find('=');
      if (eq == std::string_view::npos)
        throw GenomeError(fmt::format("line {}: expected key=value, got '{}'", line, toks[i]));
      values_[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
    }
  }
  std::string_view get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw GenomeError(fmt::format("line {}: missing field '{}'", line_, key));
    return it->second;
  }
  std::int64_t integer(std::string_view key) const { return parse_int(get(key)); }
  double real(std::string_view key) const {
    try {
      return parse_double(get(key));
    } catch (const std::invalid_argument& e) {
      throw GenomeError(fmt::format("line {}: {}", line_, e.what()));
    }
  }
  bool flag(std::string_view key) const { return integer(key) != 0; }

 private:
  std::map<std::string_view, std::string_view, std::less<>> values_;
  std::size_t line_;
};

}  // namespace

std::string serialize_genome(const Genome& g) {
  std::string out;
  out += kMagic;
  out += '\n';
  out += fmt::format("genome_id {}\n", g.genome_id);
  out += fmt::format("island {}\n", g.island);
  out += fmt::format("fitness {}\n", g.fitness ? format_double(*g.fitness) : "none");
  out += "parents";
  for (auto p : g.parents) out += fmt::format(" {}", p);
  out += '\n';
  out += fmt::format("origin {}\n", g.origin.empty() ? "-" : g.origin);
  for (const auto& n : g.nodes) {
    out += fmt::format("node id={} kind={} cell={} depth={} enabled={} params={}\n", n.id, to_string(n.kind),
                       to_string(n.cell), format_double(n.depth), n.enabled ? 1 : 0, join_doubles(n.params));
  }
  for (const auto& e : g.edges) {
    out += fmt::format("edge innovation={} source={} target={} weight={} enabled={}\n", e.innovation, e.source,
                       e.target, format_double(e.weight), e.enabled ? 1 : 0);
  }
  for (const auto& e : g.recurrent_edges) {
    out += fmt::format("recurrent innovation={} source={} target={} weight={} enabled={} time_skip={}\n",
                       e.innovation, e.source, e.target, format_double(e.weight), e.enabled ? 1 : 0, e.time_skip);
  }
  out += "end\n";
  return out;
}

Genome parse_genome(std::string_view text) {
  Genome g;
  std::size_t line_number = 0;
  bool seen_magic = false;
  bool seen_end = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!seen_magic) {
      if (line != kMagic) throw GenomeError(fmt::format("not a genome file (expected '{}')", kMagic));
      seen_magic = true;
      continue;
    }
    if (seen_end) throw GenomeError(fmt::format("line {}: content after 'end'", line_number));
    const auto toks = tokens(line);
    const auto key = toks.front();
    try {
      if (key == "genome_id" && toks.size() == 2) {
        g.genome_id = parse_int(toks[1]);
      } else if (key == "island" && toks.size() == 2) {
        g.island = static_cast<int>(parse_int(toks[1]));
      } else if (key == "fitness" && toks.size() == 2) {
        if (toks[1] != "none") g.fitness = parse_double(toks[1]);
      } else if (key == "parents") {
        for (std::size_t i = 1; i < toks.size(); ++i) g.parents.push_back(parse_int(toks[i]));
      } else if (key == "origin" && toks.size() == 2) {
        g.origin = toks[1] == "-" ? "" : std::string(toks[1]);
      } else if (key == "node") {
        Fields f(toks, line_number);
        NodeGene n;
        n.id = f.integer("id");
        n.kind = parse_node_kind(f.get("kind"));
        n.cell = parse_cell_kind(f.get("cell"));
        n.depth = f.real("depth");
        n.enabled = f.flag("enabled");
        auto params = f.get("params");
        while (!params.empty()) {
          auto comma = params.find(',');
          n.params.push_back(parse_double(params.substr(0, comma)));
          params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
        }
        g.nodes.push_back(std::move(n));
      } else if (key == "edge") {
        Fields f(toks, line_number);
        g.edges.push_back({f.integer("innovation"), f.integer("source"), f.integer("target"), f.real("weight"),
                           f.flag("enabled")});
      } else if (key == "recurrent") {
        Fields f(toks, line_number);
        g.recurrent_edges.push_back({f.integer("innovation"), f.integer("source"), f.integer("target"),
                                     f.real("weight"), f.flag("enabled"), static_cast<int>(f.integer("time_skip"))});
      } else if (key == "end" && toks.size() == 1) {
        seen_end = true;
      } else {
        throw GenomeError(fmt::format("line {}: unrecognized record '{}'", line_number, line));
      }
    } catch (const std::invalid_argument& e) {
      throw GenomeError(fmt::format("line {}: {}", line_number, e.what()));
    }
  }
  if (!seen_magic) throw GenomeError("empty genome file");
  if (!seen_end) throw GenomeError("genome file is truncated (no 'end')");
  validate(g);
  return g;
}

void save_genome(const std::filesystem::path& path, const Genome& genome) {
  write_file_atomic(path, serialize_genome(genome));
}

Genome load_genome(const std::filesystem::path& path) {
  try {
    return parse_genome(read_file(path));
  } catch (const GenomeError& e) {
    throw GenomeError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace evotrade
