#pragma once

/// @file access_expr.hpp
/// Array access expressions (`A[i][j*8]`, `A[i][B[j]]`, `A[i, j+1]`) and a
/// recursive-descent parser that keeps subscripts affine in iterators and
/// parameters, turning array-valued subscripts into indirect indices.

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spmalloc/error.hpp"

namespace spmalloc {

/// Σ coefficient·symbol + constant, symbols being iterators or parameters.
/// Zero coefficients are never stored.
struct AffineExpr {
  std::map<std::string, std::int64_t> coefficients;
  std::int64_t constant = 0;

  bool operator==(const AffineExpr&) const = default;

  std::int64_t coefficient(const std::string& symbol) const {
    auto it = coefficients.find(symbol);
    return it == coefficients.end() ? 0 : it->second;
  }
  bool is_constant() const { return coefficients.empty(); }

  AffineExpr& operator+=(const AffineExpr& other) {
    for (const auto& [symbol, c] : other.coefficients) {
      if ((coefficients[symbol] += c) == 0) coefficients.erase(symbol);
    }
    constant += other.constant;
    return *this;
  }
  AffineExpr& operator*=(std::int64_t factor) {
    if (factor == 0) {
      coefficients.clear();
    } else {
      for (auto& [_, c] : coefficients) c *= factor;
    }
    constant *= factor;
    return *this;
  }
};

struct AccessExpr;

/// An array-valued subscript: scale·inner + offset.
struct IndirectIndex {
  std::shared_ptr<const AccessExpr> inner;
  std::int64_t scale = 1;
  AffineExpr offset;
};

using IndexExpr = std::variant<AffineExpr, IndirectIndex>;

struct AccessExpr {
  std::string base;
  std::vector<IndexExpr> indices;

  bool has_indirect() const {
    for (const auto& index : indices) {
      if (std::holds_alternative<IndirectIndex>(index)) return true;
    }
    return false;
  }
};

inline bool operator==(const AccessExpr& a, const AccessExpr& b);

inline bool operator==(const IndirectIndex& a, const IndirectIndex& b) {
  return a.scale == b.scale && a.offset == b.offset && a.inner && b.inner && *a.inner == *b.inner;
}

inline bool operator==(const AccessExpr& a, const AccessExpr& b) {
  return a.base == b.base && a.indices == b.indices;
}

inline std::string to_string(const AffineExpr& expr) {
  std::string out;
  for (const auto& [symbol, c] : expr.coefficients) {
    if (c < 0) {
      out += "-";
    } else if (!out.empty()) {
      out += "+";
    }
    std::int64_t magnitude = c < 0 ? -c : c;
    if (magnitude != 1) out += std::to_string(magnitude) + "*";
    out += symbol;
  }
  if (expr.constant != 0 || out.empty()) {
    if (expr.constant >= 0 && !out.empty()) out += "+";
    out += std::to_string(expr.constant);
  }
  return out;
}

inline std::string to_string(const AccessExpr& expr);

inline std::string to_string(const IndexExpr& index) {
  if (const auto* affine = std::get_if<AffineExpr>(&index)) return to_string(*affine);
  const auto& ind = std::get<IndirectIndex>(index);
  std::string out = ind.scale == 1 ? "" : std::to_string(ind.scale) + "*";
  out += to_string(*ind.inner);
  if (ind.offset != AffineExpr{}) {
    std::string rest = to_string(ind.offset);
    if (rest.front() != '-') out += "+";
    out += rest;
  }
  return out;
}

inline std::string to_string(const AccessExpr& expr) {
  std::string out = expr.base;
  for (const auto& index : expr.indices) out += "[" + to_string(index) + "]";
  return out;
}

namespace detail {

class AccessParser {
public:
  AccessParser(std::string_view text, const std::set<std::string>& arrays)
      : text_(text), arrays_(arrays) {}

  AccessExpr parse_access_only() {
    skip_space();
    AccessExpr expr = parse_access();
    expect_end();
    return expr;
  }

  AffineExpr parse_affine_only() {
    Value v = parse_sum();
    expect_end();
    if (v.indirect) throw ParseError("array reference not allowed here", start_);
    return v.affine;
  }

private:
  struct Value {
    AffineExpr affine;
    std::optional<IndirectIndex> indirect;
    std::size_t position = 0;

    bool is_constant() const { return !indirect && affine.is_constant(); }
  };

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  void expect_end() {
    if (!at_end()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
  }

  std::string identifier() {
    skip_space();
    std::size_t begin = pos_;
    if (pos_ >= text_.size() ||
        !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      throw ParseError("expected identifier", pos_);
    }
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  AccessExpr parse_access() {
    std::size_t at = pos_;
    AccessExpr expr;
    expr.base = identifier();
    if (!arrays_.count(expr.base)) throw ConfigError("unknown variable '" + expr.base + "' at position " + std::to_string(at));
    if (peek() != '[') throw ParseError("expected '[' after '" + expr.base + "'", pos_);
    while (accept('[')) {
      expr.indices.push_back(to_index(parse_sum()));
      while (accept(',')) expr.indices.push_back(to_index(parse_sum()));
      expect(']');
    }
    return expr;
  }

  static IndexExpr to_index(Value v) {
    if (v.indirect) {
      IndirectIndex ind = std::move(*v.indirect);
      ind.offset = v.affine;
      return ind;
    }
    return v.affine;
  }

  Value parse_sum() {
    skip_space();
    start_ = pos_;
    Value acc = parse_product();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') break;
      std::size_t at = pos_;
      ++pos_;
      Value rhs = parse_product();
      if (c == '-') negate(rhs);
      if (acc.indirect && rhs.indirect) {
        throw NonAffineError("subscript combines two array references", at);
      }
      acc.affine += rhs.affine;
      if (rhs.indirect) acc.indirect = std::move(rhs.indirect);
    }
    return acc;
  }

  Value parse_product() {
    Value acc = parse_unary();
    while (peek() == '*') {
      std::size_t at = pos_;
      ++pos_;
      Value rhs = parse_unary();
      if (acc.is_constant()) {
        std::swap(acc, rhs);
      } else if (!rhs.is_constant()) {
        throw NonAffineError("non-affine product in subscript", at);
      }
      scale(acc, rhs.affine.constant);
    }
    return acc;
  }

  Value parse_unary() {
    if (accept('-')) {
      Value v = parse_unary();
      negate(v);
      return v;
    }
    if (accept('+')) return parse_unary();
    return parse_primary();
  }

  Value parse_primary() {
    skip_space();
    Value v;
    v.position = pos_;
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        if (n > (INT64_MAX - 9) / 10) throw ParseError("integer literal too large", v.position);
        n = n * 10 + (text_[pos_] - '0');
        ++pos_;
      }
      v.affine.constant = n;
      return v;
    }
    if (c == '(') {
      ++pos_;
      std::size_t saved = start_;
      Value inner = parse_sum();
      start_ = saved;
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t save = pos_;
      std::string name = identifier();
      if (peek() == '[') {
        pos_ = save;
        IndirectIndex ind;
        ind.inner = std::make_shared<const AccessExpr>(parse_access());
        v.indirect = std::move(ind);
        return v;
      }
      if (arrays_.count(name)) throw ParseError("array '" + name + "' used without subscript", save);
      v.affine.coefficients[name] = 1;
      return v;
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  static void scale(Value& v, std::int64_t factor) {
    v.affine *= factor;
    if (v.indirect) {
      if (factor == 0) {
        v.indirect.reset();
      } else {
        v.indirect->scale *= factor;
      }
    }
  }

  static void negate(Value& v) { scale(v, -1); }

  std::string_view text_;
  const std::set<std::string>& arrays_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

}  // namespace detail

/// Parses one access such as `A[i][B[j]]`. Identifiers followed by `[` must
/// name a known variable; every other identifier is an iterator or parameter.
inline AccessExpr parse_access(std::string_view text, const std::set<std::string>& known_variables) {
  return detail::AccessParser(text, known_variables).parse_access_only();
}

/// Parses an affine expression over symbols, e.g. a loop bound `N-1`.
inline AffineExpr parse_affine(std::string_view text) {
  static const std::set<std::string> no_arrays;
  return detail::AccessParser(text, no_arrays).parse_affine_only();
}

}  // namespace spmalloc
