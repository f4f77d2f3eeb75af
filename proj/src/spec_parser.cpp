#include "wcc/spec_parser.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wcc/error.hpp"

namespace wcc {
namespace {

struct Token {
  std::string key;
  std::string value;
  bool has_value;
  std::size_t column;  // 1-based start of the key
  std::size_t value_column;
};

std::vector<Token> split(std::string_view body, std::size_t offset) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t end = std::min(body.find(',', pos), body.size());
    const std::string_view item = body.substr(pos, end - pos);
    if (item.empty()) throw ParseError("empty item", 1, offset + pos + 1);
    const std::size_t eq = item.find('=');
    Token t;
    t.column = offset + pos + 1;
    if (eq == std::string_view::npos) {
      t.key = std::string(item);
      t.has_value = false;
      t.value_column = t.column;
    } else {
      t.key = std::string(item.substr(0, eq));
      t.value = std::string(item.substr(eq + 1));
      t.has_value = true;
      t.value_column = t.column + eq + 1;
      if (t.key.empty()) throw ParseError("missing key before '='", 1, t.column);
      if (t.value.empty()) throw ParseError("missing value for '" + t.key + "'", 1, t.value_column);
    }
    out.push_back(std::move(t));
    if (end == body.size()) break;
    pos = end + 1;
  }
  return out;
}

double number(const Token& t) {
  try {
    std::size_t used = 0;
    const double v = std::stod(t.value, &used);
    if (used != t.value.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + t.value + "' for '" + t.key + "'", 1, t.value_column);
  }
}

std::uint64_t integer(const Token& t) {
  const double v = number(t);
  if (v < 1.0 || v != std::floor(v) || v > 1.8e19)
    throw ParseError("'" + t.key + "' needs a positive integer", 1, t.value_column);
  return static_cast<std::uint64_t>(v);
}

// Consumes precision keys; returns false for keys it does not know.
bool precision_key(const Token& t, PrecisionPolicy& p) {
  if (t.key == "precision") {
    try {
      p.mode = parse_precision_mode(t.value);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), 1, t.value_column);
    }
    return true;
  }
  if (t.key == "threshold") {
    p.threshold = number(t);
    return true;
  }
  if (t.key == "cap") {
    p.max_passage_steps = integer(t);
    return true;
  }
  return false;
}

void require_value(const Token& t) {
  if (!t.has_value) throw ParseError("expected '" + t.key + "=<value>'", 1, t.column);
}

template <class Fn>
auto rethrow_at(std::size_t column, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 1, column);
  }
}

}  // namespace

MapSpec parse_map_spec(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) throw ParseError("expected 'mp:' or 'pl:' prefix", 1, 1);
  const std::string_view kind = text.substr(0, colon);
  const std::vector<Token> tokens = split(text.substr(colon + 1), colon + 1);
  PrecisionPolicy policy;

  if (kind == "mp") {
    std::optional<double> z;
    double r = 1.0;
    std::size_t z_col = colon + 2;
    for (const auto& t : tokens) {
      if (precision_key(t, policy)) continue;
      require_value(t);
      if (t.key == "z") {
        z = number(t);
        z_col = t.value_column;
      } else if (t.key == "r") {
        r = number(t);
      } else {
        throw ParseError("unknown key '" + t.key + "' for an mp map", 1, t.column);
      }
    }
    if (!z) throw ParseError("mp map needs z=<real>", 1, colon + 2);
    return rethrow_at(z_col, [&] { return MapSpec::manneville_pomeau(*z, r, policy); });
  }

  if (kind != "pl") throw ParseError("unknown map kind '" + std::string(kind) + "'", 1, 1);
  if (tokens.empty() || tokens.front().has_value)
    throw ParseError("pl map needs a family: geom, pow, log or file", 1, colon + 2);
  const Token& family = tokens.front();
  std::optional<double> param;
  std::string path;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (precision_key(t, policy)) continue;
    require_value(t);
    if ((family.key == "geom" && t.key == "a") || (family.key == "pow" && t.key == "alpha")) {
      param = number(t);
    } else if (family.key == "file" && t.key == "path") {
      path = t.value;
    } else {
      throw ParseError("unknown key '" + t.key + "' for pl:" + family.key, 1, t.column);
    }
  }
  const std::size_t col = family.column;
  if (family.key == "geom") {
    if (!param) throw ParseError("pl:geom needs a=<real>", 1, col);
    return rethrow_at(col, [&] { return MapSpec::piecewise_linear(EpsilonSequence::geometric(*param), policy); });
  }
  if (family.key == "pow") {
    if (!param) throw ParseError("pl:pow needs alpha=<real>", 1, col);
    return rethrow_at(col, [&] { return MapSpec::piecewise_linear(EpsilonSequence::power(*param), policy); });
  }
  if (family.key == "log") return MapSpec::piecewise_linear(EpsilonSequence::logarithmic(), policy);
  if (family.key == "file") {
    if (path.empty()) throw ParseError("pl:file needs path=<file>", 1, col);
    return rethrow_at(col, [&] { return MapSpec::piecewise_linear(EpsilonSequence::load(path), policy); });
  }
  throw ParseError("unknown pl family '" + family.key + "'", 1, col);
}

}  // namespace wcc
