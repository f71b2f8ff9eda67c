#include "sosim/gml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sosim/errors.hpp"

namespace sosim {

const GmlEntry* GmlList::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Tokenizer and tree parser

namespace {

enum class Tok { Key, Int, Real, String, Open, Close, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (c == '[') {
      ++pos_;
      t.kind = Tok::Open;
      return t;
    }
    if (c == ']') {
      ++pos_;
      t.kind = Tok::Close;
      return t;
    }
    if (c == '"') return string_token(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_')) {
        ++pos_;
      }
      t.kind = Tok::Key;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      return number_token(t);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' && (pos_ == 0 || src_[pos_ - 1] == '\n' ||
                              std::isspace(static_cast<unsigned char>(src_[pos_ - 1])))) {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token string_token(Token t) {
    ++pos_;
    std::string raw;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\n') ++line_;
      raw += src_[pos_++];
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated string", t.line);
    ++pos_;
    t.kind = Tok::String;
    t.text = decode(raw);
    return t;
  }

  Token number_token(Token t) {
    const std::size_t start = pos_;
    bool real = false;
    if (src_[pos_] == '-' || src_[pos_] == '+') ++pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E') {
        real = true;
        ++pos_;
        if ((c == 'e' || c == 'E') && pos_ < src_.size() &&
            (src_[pos_] == '-' || src_[pos_] == '+')) {
          ++pos_;
        }
      } else {
        break;
      }
    }
    t.kind = real ? Tok::Real : Tok::Int;
    t.text = std::string(src_.substr(start, pos_ - start));
    if (t.text == "-" || t.text == "+" || t.text == ".") {
      throw ParseError("malformed number '" + t.text + "'", t.line);
    }
    return t;
  }

  static std::string decode(const std::string& raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '&') {
        if (raw.compare(i, 6, "&quot;") == 0) {
          out += '"';
          i += 5;
          continue;
        }
        if (raw.compare(i, 5, "&amp;") == 0) {
          out += '&';
          i += 4;
          continue;
        }
      }
      out += raw[i];
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { advance(); }

  GmlList document() {
    GmlList top = list(false);
    if (cur_.kind != Tok::End) throw ParseError("unexpected ']'", cur_.line);
    return top;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  GmlList list(bool nested) {
    GmlList out;
    for (;;) {
      if (cur_.kind == Tok::End) {
        if (nested) throw ParseError("missing ']' before end of input", cur_.line);
        return out;
      }
      if (cur_.kind == Tok::Close) {
        if (!nested) return out;
        advance();
        return out;
      }
      if (cur_.kind != Tok::Key) {
        throw ParseError("expected a key, found '" + cur_.text + "'", cur_.line);
      }
      GmlEntry entry;
      entry.key = cur_.text;
      advance();
      entry.value.line = cur_.line;
      switch (cur_.kind) {
        case Tok::Int: {
          long long v = 0;
          const auto* b = cur_.text.data();
          const auto* e = b + cur_.text.size();
          if (*b == '+') ++b;
          auto [p, ec] = std::from_chars(b, e, v);
          if (ec != std::errc{} || p != e) {
            throw ParseError("bad integer '" + cur_.text + "'", cur_.line);
          }
          entry.value.data = v;
          advance();
          break;
        }
        case Tok::Real: {
          double v = 0;
          const auto* b = cur_.text.data();
          const auto* e = b + cur_.text.size();
          if (*b == '+') ++b;
          auto [p, ec] = std::from_chars(b, e, v);
          if (ec != std::errc{} || p != e) {
            throw ParseError("bad number '" + cur_.text + "'", cur_.line);
          }
          entry.value.data = v;
          advance();
          break;
        }
        case Tok::String:
          entry.value.data = cur_.text;
          advance();
          break;
        case Tok::Open:
          advance();
          entry.value.data = list(true);
          break;
        default:
          throw ParseError("missing value for key '" + entry.key + "'", cur_.line);
      }
      out.entries.push_back(std::move(entry));
    }
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace

GmlList parse_gml(std::string_view text) { return Parser(text).document(); }

// ---------------------------------------------------------------------------
// Writer

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf, p);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"') {
      out += "&quot;";
    } else if (c == '&') {
      out += "&amp;";
    } else {
      out += c;
    }
  }
  return out;
}

template <class T, class F>
std::string joined(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ' ';
    out += fmt(xs[k]);
  }
  return out;
}

}  // namespace

std::string to_gml(const Network& net) {
  std::ostringstream out;
  out << "graph [\n";
  out << "  directed 1\n";
  out << "  resources \"" << escape(joined(net.catalog.names(), [](const std::string& s) {
    return s;
  })) << "\"\n";
  out << "  timestep \"" << escape(net.timestep) << "\"\n";
  for (const auto& a : net.agents) {
    const auto m = a.tech.row_major();
    out << "  node [\n";
    out << "    id " << a.id << "\n";
    out << "    label \"" << escape(a.label) << "\"\n";
    out << "    techmatrix \""
        << joined(std::vector<double>(m.begin(), m.end()), format_double) << "\"\n";
    out << "    providercosts \"" << joined(a.provider_costs, [](const Cost& c) {
      return c.available() ? format_double(c.value()) : std::string("NA");
    }) << "\"\n";
    out << "    finaldemand \"" << joined(a.final_demand, format_double) << "\"\n";
    out << "    fdpriority " << a.final_demand_priority << "\n";
    out << "  ]\n";
  }
  for (const auto& l : net.links) {
    out << "  edge [\n";
    out << "    source " << l.from << "\n";
    out << "    target " << l.to << "\n";
    out << "    linkid " << l.id << "\n";
    out << "    cost \"" << joined(l.transport_cost, [](const Cost& c) {
      return c.available() ? format_double(c.value()) : std::string("INF");
    }) << "\"\n";
    out << "    capacity \"" << joined(l.capacity, [](const Capacity& c) {
      return c.bounded() ? format_double(c.limit()) : std::string("UNB");
    }) << "\"\n";
    out << "    priority " << l.priority << "\n";
    out << "  ]\n";
  }
  out << "]\n";
  return out.str();
}

std::size_t write_gml(const Network& net, std::ostream& out) {
  const std::string text = to_gml(net);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing GML output");
  return text.size();
}

void write_gml_file(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_gml(net, out);
}

// ---------------------------------------------------------------------------
// Reader

namespace {

struct Ctx {
  std::vector<std::string>* warnings;
  std::size_t R = 0;

  void warn(const std::string& what, int line) const {
    if (warnings) warnings->push_back("line " + std::to_string(line) + ": " + what);
  }
};

[[noreturn]] void schema(const std::string& what, int line) {
  throw SchemaError("line " + std::to_string(line) + ": " + what);
}

long long as_int(const GmlEntry& e) {
  if (const auto* v = std::get_if<long long>(&e.value.data)) return *v;
  schema("attribute '" + e.key + "' must be an integer", e.value.line);
}

const std::string& as_string(const GmlEntry& e) {
  if (const auto* v = std::get_if<std::string>(&e.value.data)) return *v;
  schema("attribute '" + e.key + "' must be a string", e.value.line);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double parse_number(const std::string& tok, const GmlEntry& e) {
  double v = 0;
  const char* b = tok.data();
  const char* end = b + tok.size();
  if (b != end && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) {
    throw ParseError("bad number '" + tok + "' in '" + e.key + "'", e.value.line);
  }
  return v;
}

std::vector<std::string> tokens_of(const GmlEntry& e, std::size_t expected) {
  std::vector<std::string> toks;
  if (std::holds_alternative<std::string>(e.value.data)) {
    toks = split(as_string(e));
  } else if (const auto* i = std::get_if<long long>(&e.value.data)) {
    toks = {std::to_string(*i)};
  } else if (const auto* d = std::get_if<double>(&e.value.data)) {
    toks = {format_double(*d)};
  } else {
    schema("attribute '" + e.key + "' must be a value list", e.value.line);
  }
  if (toks.size() != expected) {
    schema("attribute '" + e.key + "' has " + std::to_string(toks.size()) +
               " values, expected " + std::to_string(expected),
           e.value.line);
  }
  return toks;
}

const GmlEntry& required(const GmlList& list, std::string_view key, const char* record,
                         int line) {
  const GmlEntry* e = list.find(key);
  if (!e) schema(std::string(record) + " is missing '" + std::string(key) + "'", line);
  return *e;
}

struct RawNode {
  long long id;
  Agent agent;
};

RawNode read_node(const GmlList& rec, int line, const Ctx& ctx) {
  static const char* kKnown[] = {"id", "label", "techmatrix", "providercosts",
                                 "finaldemand", "fdpriority"};
  for (const auto& e : rec.entries) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return e.key == k; }) == std::end(kKnown)) {
      ctx.warn("unknown node attribute '" + e.key + "' ignored", e.value.line);
    }
  }
  RawNode out;
  out.id = as_int(required(rec, "id", "node", line));
  Agent& a = out.agent;
  a = make_agent(0, "", ctx.R);
  if (const auto* e = rec.find("label")) {
    a.label = as_string(*e);
  } else {
    a.label = "A" + std::to_string(out.id);
  }
  if (const auto* e = rec.find("techmatrix")) {
    const auto toks = tokens_of(*e, ctx.R * ctx.R);
    std::vector<double> vals;
    for (const auto& t : toks) vals.push_back(parse_number(t, *e));
    a.tech = TechnologyMatrix(ctx.R, std::move(vals));
  }
  if (const auto* e = rec.find("providercosts")) {
    const auto toks = tokens_of(*e, ctx.R);
    for (std::size_t r = 0; r < ctx.R; ++r) {
      a.provider_costs[r] = toks[r] == "NA" ? Cost::unavailable() : Cost{parse_number(toks[r], *e)};
    }
  }
  if (const auto* e = rec.find("finaldemand")) {
    const auto toks = tokens_of(*e, ctx.R);
    for (std::size_t r = 0; r < ctx.R; ++r) a.final_demand[r] = parse_number(toks[r], *e);
  }
  if (const auto* e = rec.find("fdpriority")) {
    a.final_demand_priority = static_cast<int>(as_int(*e));
  }
  return out;
}

struct RawEdge {
  long long source;
  long long target;
  std::optional<long long> linkid;
  int line;
  InfraLink link;
};

RawEdge read_edge(const GmlList& rec, int line, const Ctx& ctx) {
  static const char* kKnown[] = {"source", "target", "linkid", "cost", "capacity", "priority"};
  for (const auto& e : rec.entries) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return e.key == k; }) == std::end(kKnown)) {
      ctx.warn("unknown edge attribute '" + e.key + "' ignored", e.value.line);
    }
  }
  RawEdge out;
  out.line = line;
  out.source = as_int(required(rec, "source", "edge", line));
  out.target = as_int(required(rec, "target", "edge", line));
  if (const auto* e = rec.find("linkid")) out.linkid = as_int(*e);
  InfraLink& l = out.link;
  l.capacity.assign(ctx.R, Capacity::unbounded());
  const GmlEntry& cost = required(rec, "cost", "edge", line);
  for (const auto& t : tokens_of(cost, ctx.R)) {
    l.transport_cost.push_back(t == "INF" ? Cost::unavailable() : Cost{parse_number(t, cost)});
  }
  if (const auto* e = rec.find("capacity")) {
    const auto toks = tokens_of(*e, ctx.R);
    for (std::size_t r = 0; r < ctx.R; ++r) {
      l.capacity[r] = toks[r] == "UNB" ? Capacity::unbounded() : Capacity{parse_number(toks[r], *e)};
    }
  }
  if (const auto* e = rec.find("priority")) l.priority = static_cast<int>(as_int(*e));
  return out;
}

}  // namespace

Network network_from_gml(const GmlList& doc, std::vector<std::string>* warnings) {
  const GmlEntry* g = doc.find("graph");
  if (!g) throw SchemaError("document has no 'graph' record");
  const auto* graph = std::get_if<GmlList>(&g->value.data);
  if (!graph) schema("'graph' must be a record", g->value.line);

  Ctx ctx{warnings};
  Network net;
  const GmlEntry& res = required(*graph, "resources", "graph", g->value.line);
  net.catalog = ResourceCatalog(split(as_string(res)));
  ctx.R = net.catalog.size();
  if (ctx.R == 0) schema("graph declares no resources", res.value.line);
  if (const auto* e = graph->find("timestep")) net.timestep = as_string(*e);

  std::vector<RawNode> nodes;
  std::vector<RawEdge> edges;
  for (const auto& e : graph->entries) {
    if (e.key == "node" || e.key == "edge") {
      const auto* rec = std::get_if<GmlList>(&e.value.data);
      if (!rec) schema("'" + e.key + "' must be a record", e.value.line);
      if (e.key == "node") {
        nodes.push_back(read_node(*rec, e.value.line, ctx));
      } else {
        edges.push_back(read_edge(*rec, e.value.line, ctx));
      }
    } else if (e.key != "directed" && e.key != "resources" && e.key != "timestep") {
      ctx.warn("unknown graph attribute '" + e.key + "' ignored", e.value.line);
    }
  }

  // Dense ids in ascending order of the file's ids.
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const RawNode& a, const RawNode& b) { return a.id < b.id; });
  std::map<long long, AgentId> dense;
  for (auto& n : nodes) {
    if (!dense.emplace(n.id, static_cast<AgentId>(dense.size())).second) {
      throw SchemaError("duplicate node id " + std::to_string(n.id));
    }
    n.agent.id = dense[n.id];
    net.agents.push_back(std::move(n.agent));
  }

  const bool all_ids = std::all_of(edges.begin(), edges.end(),
                                   [](const RawEdge& e) { return e.linkid.has_value(); });
  if (all_ids) {
    std::stable_sort(edges.begin(), edges.end(),
                     [](const RawEdge& a, const RawEdge& b) { return *a.linkid < *b.linkid; });
    for (std::size_t k = 1; k < edges.size(); ++k) {
      if (*edges[k].linkid == *edges[k - 1].linkid) {
        schema("duplicate linkid " + std::to_string(*edges[k].linkid), edges[k].line);
      }
    }
  }
  for (auto& e : edges) {
    auto s = dense.find(e.source);
    auto t = dense.find(e.target);
    if (s == dense.end() || t == dense.end()) {
      schema("edge references an undeclared node", e.line);
    }
    e.link.id = static_cast<LinkId>(net.links.size());
    e.link.from = s->second;
    e.link.to = t->second;
    net.links.push_back(std::move(e.link));
  }
  return net;
}

Network read_gml(std::string_view text, std::vector<std::string>* warnings) {
  return network_from_gml(parse_gml(text), warnings);
}

Network read_gml_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_gml(buf.str(), warnings);
}

}  // namespace sosim
