#include "slopeforge/pwa_io.hpp"

#include "slopeforge/error.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace slopeforge {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t space = line.find(' ', start);
    const std::size_t end = space == std::string_view::npos ? line.size() : space;
    out.push_back(line.substr(start, end - start));
    if (space == std::string_view::npos) break;
    start = space + 1;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-empty line with trailing CR and blanks removed.
  std::string_view next(const char* what) {
    while (pos_ < text_.size()) {
      const std::size_t nl = text_.find('\n', pos_);
      const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
        line.remove_suffix(1);
      }
      if (!line.empty()) return line;
    }
    throw ParseError(std::string("unexpected end of input, expected ") + what);
  }

  bool at_end() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c != '\n' && c != '\r' && c != ' ' && c != '\t') return false;
      ++pos_;
    }
    return true;
  }

  int line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

std::optional<Rational> parse_optional(std::string_view field) {
  if (field == "-") return std::nullopt;
  return parse_rational(field);
}

std::string render(const std::optional<Rational>& y, bool decimal, int digits) {
  if (!y) return "-";
  return decimal ? format_decimal(*y, digits) : to_string(*y);
}

std::string serialize(const PwaMap& f, bool decimal, int digits) {
  std::ostringstream out;
  auto num = [&](const Rational& r) { return decimal ? format_decimal(r, digits) : to_string(r); };
  out << "pwa 1\n";
  out << "domain " << num(f.lo()) << ' ' << num(f.hi()) << '\n';
  out << "nodes " << f.nodes().size() << '\n';
  for (const Node& n : f.nodes()) {
    out << num(n.x) << ' ' << render(n.y_left, decimal, digits) << ' '
        << render(n.y_right, decimal, digits) << '\n';
  }
  return out.str();
}

}  // namespace

PwaMap parse_pwa(std::string_view text, MapKind kind) {
  LineReader reader(text);
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(reader.line_no()) + ": " + msg);
  };

  if (reader.next("header") != "pwa 1") throw fail("expected header 'pwa 1'");

  auto domain = split_fields(reader.next("domain line"));
  if (domain.size() != 3 || domain[0] != "domain") throw fail("expected 'domain <a> <b>'");
  const Rational a = parse_rational(domain[1]);
  const Rational b = parse_rational(domain[2]);
  if (!(a < b)) throw fail("empty domain");

  auto count = split_fields(reader.next("nodes line"));
  if (count.size() != 2 || count[0] != "nodes") throw fail("expected 'nodes <k>'");
  std::size_t k = 0;
  try {
    k = std::stoul(std::string(count[1]));
  } catch (const std::exception&) {
    throw fail("bad node count");
  }
  if (k < 2) throw fail("fewer than 2 nodes");

  std::vector<Node> nodes;
  nodes.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto fields = split_fields(reader.next("node line"));
    if (fields.size() != 3) throw fail("expected '<x> <y_left> <y_right>'");
    Node n{parse_rational(fields[0]), parse_optional(fields[1]), parse_optional(fields[2])};
    if (!nodes.empty() && !(nodes.back().x < n.x)) {
      throw fail("non-increasing x at " + to_string(n.x));
    }
    nodes.push_back(std::move(n));
  }
  if (!reader.at_end()) throw fail("trailing content after nodes");
  if (nodes.front().x != a || nodes.back().x != b) {
    throw ParseError("first and last node must sit at the domain endpoints");
  }
  return PwaMap(std::move(nodes), kind);
}

std::string serialize_pwa(const PwaMap& f) { return serialize(f, false, 0); }

std::string serialize_pwa_decimal(const PwaMap& f, int digits) { return serialize(f, true, digits); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
}

PwaMap read_pwa_file(const std::filesystem::path& path, MapKind kind) {
  return parse_pwa(read_text_file(path), kind);
}

}  // namespace slopeforge
