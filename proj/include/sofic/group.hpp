#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sofic/element.hpp"
#include "sofic/errors.hpp"
#include "sofic/rational.hpp"

namespace sofic {

enum class Family { cyclic, symmetric, dihedral, integers, lattice, table, product, wreath };

/// Largest finite group whose elements may be enumerated.
inline constexpr std::uint64_t kEnumerationLimit = 1U << 22;

/// A computable group. Implementations are immutable after construction and
/// every member function is pure, so contexts are freely shared across threads.
class Group {
 public:
  virtual ~Group() = default;

  virtual Family family() const = 0;
  /// Canonical group-spec text; parsing it yields an equivalent context.
  virtual std::string spec() const = 0;

  virtual Element identity() const = 0;
  virtual Element multiply(const Element& a, const Element& b) const = 0;
  virtual Element inverse(const Element& a) const = 0;

  virtual bool finite() const = 0;
  /// Group order; throws for infinite groups.
  virtual Integer order() const = 0;
  /// All elements in canonical order; finite groups within kEnumerationLimit only.
  virtual std::vector<Element> elements() const {
    throw GroupError(spec() + " cannot be enumerated");
  }

  /// Whether `a` is a well-formed element of this group.
  virtual bool contains(const Element& a) const = 0;

  virtual std::string format(const Element& a) const = 0;
  virtual Element parse_element(std::string_view text) const = 0;

  bool is_identity(const Element& a) const { return a == identity(); }

 protected:
  void require_enumerable() const {
    if (!finite()) throw GroupError(spec() + " is infinite and cannot be enumerated");
    if (order() > kEnumerationLimit) {
      throw CapExceeded(spec() + " has order " + order().str() + ", above the enumeration limit");
    }
  }
};

using GroupContext = std::shared_ptr<const Group>;

namespace detail {

inline bool is_open(char c) { return c == '(' || c == '[' || c == '{'; }
inline bool is_close(char c) { return c == ')' || c == ']' || c == '}'; }

/// Splits on `separator` occurring outside any (), [] or {} nesting.
inline std::vector<std::string_view> split_top_level(std::string_view text, char separator) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (is_open(c)) {
      ++depth;
    } else if (is_close(c)) {
      if (--depth < 0) throw ParseError("unbalanced brackets in '" + std::string(text) + "'");
    } else if (c == separator && depth == 0) {
      parts.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced brackets in '" + std::string(text) + "'");
  parts.push_back(trim(text.substr(start)));
  return parts;
}

/// Strips one pair of enclosing brackets `open`...`close`, or throws.
inline std::string_view unwrap(std::string_view text, char open, char close) {
  text = trim(text);
  if (text.size() < 2 || text.front() != open || text.back() != close) {
    throw ParseError(std::string("expected '") + open + "..." + close + "' in '" + std::string(text) + "'");
  }
  return text.substr(1, text.size() - 2);
}

inline std::uint64_t parse_size(std::string_view text, std::string_view what) {
  Integer v = parse_integer(text);
  if (v < 0 || v > std::numeric_limits<std::uint64_t>::max()) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v.convert_to<std::uint64_t>();
}

}  // namespace detail

/// Parses a comma-separated element list such as "1,-1" or "[1,0,2],[0,2,1]".
inline std::vector<Element> parse_elements(const Group& g, std::string_view text) {
  std::vector<Element> out;
  if (detail::trim(text).empty()) return out;
  for (auto part : detail::split_top_level(text, ',')) out.push_back(g.parse_element(part));
  return out;
}

/// Sorts into canonical order and removes duplicates.
inline std::vector<Element> canonical_set(std::vector<Element> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

/// Base for groups whose elements are indices 0..m-1 in canonical order.
class IndexedGroup : public Group {
 public:
  bool finite() const override { return true; }
  Integer order() const override { return Integer(size()); }
  std::vector<Element> elements() const override {
    require_enumerable();
    std::vector<Element> out;
    out.reserve(size());
    for (std::uint64_t i = 0; i < size(); ++i) out.push_back(Element::index(i));
    return out;
  }
  bool contains(const Element& a) const override {
    return a.kind() == Element::Kind::index && a.as_index() < size();
  }

  virtual std::uint64_t size() const = 0;

 protected:
  std::uint64_t checked(const Element& a) const {
    if (!contains(a)) throw GroupError("element is not in " + spec());
    return a.as_index();
  }
};

/// Cyclic group C(n) = Z/nZ written additively on {0, ..., n-1}.
class CyclicGroup final : public IndexedGroup {
 public:
  explicit CyclicGroup(std::uint64_t n) : n_(n) {
    if (n == 0) throw GroupError("C(n) needs n >= 1");
  }

  Family family() const override { return Family::cyclic; }
  std::string spec() const override { return "C(" + std::to_string(n_) + ")"; }
  std::uint64_t size() const override { return n_; }

  Element identity() const override { return Element::index(0); }
  Element multiply(const Element& a, const Element& b) const override {
    return Element::index((checked(a) + checked(b)) % n_);
  }
  Element inverse(const Element& a) const override { return Element::index((n_ - checked(a)) % n_); }

  std::string format(const Element& a) const override { return std::to_string(checked(a)); }
  Element parse_element(std::string_view text) const override {
    Integer v = parse_integer(text);
    Integer r = v % n_;
    if (r < 0) r += n_;
    return Element::index(r.convert_to<std::uint64_t>());
  }

 private:
  std::uint64_t n_;
};

/// Symmetric group S(n). Elements are ranks of image arrays in lexicographic
/// order (rank 0 is the identity); products compose right to left,
/// (ab)(x) = a(b(x)).
class SymmetricGroup final : public IndexedGroup {
 public:
  explicit SymmetricGroup(std::uint64_t n) : n_(n) {
    if (n == 0 || n > 20) throw GroupError("S(n) supports 1 <= n <= 20");
    factorial_.assign(n_ + 1, 1);
    for (std::uint64_t i = 1; i <= n_; ++i) factorial_[i] = factorial_[i - 1] * i;
  }

  Family family() const override { return Family::symmetric; }
  std::string spec() const override { return "S(" + std::to_string(n_) + ")"; }
  std::uint64_t size() const override { return factorial_[n_]; }

  Element identity() const override { return Element::index(0); }
  Element multiply(const Element& a, const Element& b) const override {
    auto pa = images(a);
    auto pb = images(b);
    std::vector<std::uint64_t> out(n_);
    for (std::uint64_t x = 0; x < n_; ++x) out[x] = pa[pb[x]];
    return from_images(out);
  }
  Element inverse(const Element& a) const override {
    auto pa = images(a);
    std::vector<std::uint64_t> out(n_);
    for (std::uint64_t x = 0; x < n_; ++x) out[pa[x]] = x;
    return from_images(out);
  }

  std::string format(const Element& a) const override {
    auto p = images(a);
    std::string s = "[";
    for (std::uint64_t i = 0; i < n_; ++i) {
      if (i) s += ',';
      s += std::to_string(p[i]);
    }
    return s + "]";
  }
  Element parse_element(std::string_view text) const override {
    std::vector<std::uint64_t> p;
    for (auto part : detail::split_top_level(detail::unwrap(text, '[', ']'), ',')) {
      p.push_back(detail::parse_size(part, "image"));
    }
    return from_images(p);
  }

  /// Image array of an element.
  std::vector<std::uint64_t> images(const Element& a) const {
    std::uint64_t rank = checked(a);
    std::vector<std::uint64_t> pool(n_);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<std::uint64_t> out;
    out.reserve(n_);
    for (std::uint64_t i = n_; i > 0; --i) {
      std::uint64_t q = rank / factorial_[i - 1];
      rank %= factorial_[i - 1];
      out.push_back(pool[q]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(q));
    }
    return out;
  }

  Element from_images(const std::vector<std::uint64_t>& p) const {
    if (p.size() != n_) throw GroupError("permutation of wrong length for " + spec());
    std::vector<bool> seen(n_, false);
    std::uint64_t rank = 0;
    for (std::uint64_t i = 0; i < n_; ++i) {
      if (p[i] >= n_ || seen[p[i]]) throw GroupError("not a permutation of 0.." + std::to_string(n_ - 1));
      std::uint64_t smaller_unused = 0;
      for (std::uint64_t v = 0; v < p[i]; ++v) smaller_unused += seen[v] ? 0 : 1;
      seen[p[i]] = true;
      rank += smaller_unused * factorial_[n_ - 1 - i];
    }
    return Element::index(rank);
  }

 private:
  std::uint64_t n_;
  std::vector<std::uint64_t> factorial_;
};

/// Dihedral group D(n) of order 2n. Index k + n*f encodes r^k s^f;
/// literals are "rk" for r^k and "sk" for r^k s.
class DihedralGroup final : public IndexedGroup {
 public:
  explicit DihedralGroup(std::uint64_t n) : n_(n) {
    if (n == 0) throw GroupError("D(n) needs n >= 1");
  }

  Family family() const override { return Family::dihedral; }
  std::string spec() const override { return "D(" + std::to_string(n_) + ")"; }
  std::uint64_t size() const override { return 2 * n_; }

  Element identity() const override { return Element::index(0); }
  Element multiply(const Element& a, const Element& b) const override {
    auto [ka, fa] = split(a);
    auto [kb, fb] = split(b);
    std::uint64_t k = fa ? (ka + n_ - kb) % n_ : (ka + kb) % n_;
    return Element::index(k + n_ * (fa ^ fb));
  }
  Element inverse(const Element& a) const override {
    auto [k, f] = split(a);
    return f ? a : Element::index((n_ - k) % n_);
  }

  std::string format(const Element& a) const override {
    auto [k, f] = split(a);
    return (f ? "s" : "r") + std::to_string(k);
  }
  Element parse_element(std::string_view text) const override {
    text = detail::trim(text);
    if (text.empty() || (text.front() != 'r' && text.front() != 's')) {
      throw ParseError("dihedral literal must be rk or sk: '" + std::string(text) + "'");
    }
    Integer k = parse_integer(text.substr(1)) % n_;
    if (k < 0) k += n_;
    return Element::index(k.convert_to<std::uint64_t>() + (text.front() == 's' ? n_ : 0));
  }

 private:
  std::pair<std::uint64_t, std::uint64_t> split(const Element& a) const {
    std::uint64_t i = checked(a);
    return {i % n_, i / n_};
  }

  std::uint64_t n_;
};

/// Finite group given by a validated Cayley table on {0, ..., m-1}.
class TableGroup final : public IndexedGroup {
 public:
  /// `source` is echoed back by spec(); it names the table's origin.
  TableGroup(std::vector<std::vector<std::uint64_t>> table, std::string source)
      : table_(std::move(table)), source_(std::move(source)) {
    validate();
  }

  static std::vector<std::vector<std::uint64_t>> read_table(std::istream& in) {
    std::uint64_t m = 0;
    if (!(in >> m) || m == 0) throw ParseError("Cayley table must start with a positive order");
    std::vector<std::vector<std::uint64_t>> t(m, std::vector<std::uint64_t>(m));
    for (auto& row : t) {
      for (auto& v : row) {
        long long x = 0;
        if (!(in >> x)) throw ParseError("Cayley table is truncated");
        if (x < 0) throw ParseError("Cayley table entries must be nonnegative");
        v = static_cast<std::uint64_t>(x);
      }
    }
    std::string rest;
    if (in >> rest) throw ParseError("trailing data after Cayley table");
    return t;
  }

  static std::shared_ptr<const TableGroup> from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open Cayley table file '" + path + "'");
    return std::make_shared<const TableGroup>(read_table(in), "table:" + path);
  }

  Family family() const override { return Family::table; }
  std::string spec() const override { return source_; }
  std::uint64_t size() const override { return table_.size(); }

  Element identity() const override { return Element::index(identity_); }
  Element multiply(const Element& a, const Element& b) const override {
    return Element::index(table_[checked(a)][checked(b)]);
  }
  Element inverse(const Element& a) const override { return Element::index(inverse_[checked(a)]); }

  std::string format(const Element& a) const override { return std::to_string(checked(a)); }
  Element parse_element(std::string_view text) const override {
    Element e = Element::index(detail::parse_size(text, "table index"));
    checked(e);
    return e;
  }

  const std::vector<std::vector<std::uint64_t>>& table() const noexcept { return table_; }

 private:
  void validate() {
    const std::uint64_t m = table_.size();
    for (const auto& row : table_) {
      if (row.size() != m) throw GroupError("Cayley table is not square");
      for (auto v : row) {
        if (v >= m) throw GroupError("Cayley table entry out of range");
      }
    }
    std::optional<std::uint64_t> e;
    for (std::uint64_t i = 0; i < m && !e; ++i) {
      bool ok = true;
      for (std::uint64_t x = 0; x < m && ok; ++x) ok = table_[i][x] == x && table_[x][i] == x;
      if (ok) e = i;
    }
    if (!e) throw GroupError("Cayley table has no identity element");
    identity_ = *e;
    inverse_.assign(m, m);
    for (std::uint64_t x = 0; x < m; ++x) {
      for (std::uint64_t y = 0; y < m; ++y) {
        if (table_[x][y] == identity_ && table_[y][x] == identity_) inverse_[x] = y;
      }
      if (inverse_[x] == m) throw GroupError("Cayley table element " + std::to_string(x) + " has no inverse");
    }
    for (std::uint64_t x = 0; x < m; ++x) {
      for (std::uint64_t y = 0; y < m; ++y) {
        for (std::uint64_t z = 0; z < m; ++z) {
          if (table_[table_[x][y]][z] != table_[x][table_[y][z]]) {
            throw GroupError("Cayley table is not associative at (" + std::to_string(x) + "," +
                             std::to_string(y) + "," + std::to_string(z) + ")");
          }
        }
      }
    }
  }

  std::vector<std::vector<std::uint64_t>> table_;
  std::string source_;
  std::uint64_t identity_ = 0;
  std::vector<std::uint64_t> inverse_;
};

/// The integers under addition, arbitrary precision.
class IntegerGroup final : public Group {
 public:
  Family family() const override { return Family::integers; }
  std::string spec() const override { return "Z"; }

  Element identity() const override { return Element::integer(0); }
  Element multiply(const Element& a, const Element& b) const override {
    return Element::integer(a.as_integer() + b.as_integer());
  }
  Element inverse(const Element& a) const override { return Element::integer(-a.as_integer()); }

  bool finite() const override { return false; }
  Integer order() const override { throw GroupError("Z is infinite"); }
  bool contains(const Element& a) const override { return a.kind() == Element::Kind::integer; }

  std::string format(const Element& a) const override { return a.as_integer().str(); }
  Element parse_element(std::string_view text) const override { return Element::integer(parse_integer(text)); }
};

/// The lattice Z^d, elements are d-tuples of integers written "(a,b,...)".
class LatticeGroup final : public Group {
 public:
  explicit LatticeGroup(std::uint64_t d) : d_(d) {
    if (d == 0) throw GroupError("Z^d needs d >= 1");
  }

  Family family() const override { return Family::lattice; }
  std::string spec() const override { return "Z^" + std::to_string(d_); }
  std::uint64_t rank() const noexcept { return d_; }

  Element identity() const override { return make(std::vector<Integer>(d_, 0)); }
  Element multiply(const Element& a, const Element& b) const override {
    auto x = coords(a);
    auto y = coords(b);
    for (std::uint64_t i = 0; i < d_; ++i) x[i] += y[i];
    return make(x);
  }
  Element inverse(const Element& a) const override {
    auto x = coords(a);
    for (auto& v : x) v = -v;
    return make(x);
  }

  bool finite() const override { return false; }
  Integer order() const override { throw GroupError(spec() + " is infinite"); }
  bool contains(const Element& a) const override {
    if (a.kind() != Element::Kind::tuple || a.as_tuple().size() != d_) return false;
    return std::all_of(a.as_tuple().begin(), a.as_tuple().end(),
                       [](const Element& c) { return c.kind() == Element::Kind::integer; });
  }

  std::string format(const Element& a) const override {
    std::string s = "(";
    auto x = coords(a);
    for (std::uint64_t i = 0; i < d_; ++i) {
      if (i) s += ',';
      s += x[i].str();
    }
    return s + ")";
  }
  Element parse_element(std::string_view text) const override {
    std::vector<Integer> x;
    for (auto part : detail::split_top_level(detail::unwrap(text, '(', ')'), ',')) x.push_back(parse_integer(part));
    if (x.size() != d_) throw ParseError("expected " + std::to_string(d_) + " coordinates in '" + std::string(text) + "'");
    return make(x);
  }

  std::vector<Integer> coords(const Element& a) const {
    if (!contains(a)) throw GroupError("element is not in " + spec());
    std::vector<Integer> x;
    for (const auto& c : a.as_tuple()) x.push_back(c.as_integer());
    return x;
  }
  static Element make(const std::vector<Integer>& x) {
    std::vector<Element> parts;
    for (const auto& v : x) parts.push_back(Element::integer(v));
    return Element::tuple(std::move(parts));
  }

 private:
  std::uint64_t d_;
};

/// Direct product A x B, elements "(a,b)".
class ProductGroup final : public Group {
 public:
  ProductGroup(GroupContext left, GroupContext right) : left_(std::move(left)), right_(std::move(right)) {}

  Family family() const override { return Family::product; }
  std::string spec() const override { return "product(" + left_->spec() + "," + right_->spec() + ")"; }
  const GroupContext& left() const noexcept { return left_; }
  const GroupContext& right() const noexcept { return right_; }

  Element identity() const override { return pair(left_->identity(), right_->identity()); }
  Element multiply(const Element& a, const Element& b) const override {
    return pair(left_->multiply(first(a), first(b)), right_->multiply(second(a), second(b)));
  }
  Element inverse(const Element& a) const override {
    return pair(left_->inverse(first(a)), right_->inverse(second(a)));
  }

  bool finite() const override { return left_->finite() && right_->finite(); }
  Integer order() const override { return left_->order() * right_->order(); }
  std::vector<Element> elements() const override {
    require_enumerable();
    std::vector<Element> out;
    auto ls = left_->elements();
    auto rs = right_->elements();
    for (const auto& l : ls) {
      for (const auto& r : rs) out.push_back(pair(l, r));
    }
    return out;
  }
  bool contains(const Element& a) const override {
    return a.kind() == Element::Kind::tuple && a.as_tuple().size() == 2 && left_->contains(a.as_tuple()[0]) &&
           right_->contains(a.as_tuple()[1]);
  }

  std::string format(const Element& a) const override {
    return "(" + left_->format(first(a)) + "," + right_->format(second(a)) + ")";
  }
  Element parse_element(std::string_view text) const override {
    auto parts = detail::split_top_level(detail::unwrap(text, '(', ')'), ',');
    if (parts.size() != 2) throw ParseError("product literal needs two components: '" + std::string(text) + "'");
    return pair(left_->parse_element(parts[0]), right_->parse_element(parts[1]));
  }

  static Element pair(Element a, Element b) { return Element::tuple({std::move(a), std::move(b)}); }
  const Element& first(const Element& a) const { return component(a, 0); }
  const Element& second(const Element& a) const { return component(a, 1); }

 private:
  const Element& component(const Element& a, std::size_t i) const {
    if (a.kind() != Element::Kind::tuple || a.as_tuple().size() != 2) {
      throw GroupError("element is not in " + spec());
    }
    return a.as_tuple()[i];
  }

  GroupContext left_;
  GroupContext right_;
};

/// Checks identity, inverse and associativity laws on `sample` (all triples).
/// Returns a description of the first violation, or nullopt.
inline std::optional<std::string> find_axiom_violation(const Group& g, const std::vector<Element>& sample) {
  const Element e = g.identity();
  for (const auto& a : sample) {
    if (!(g.multiply(e, a) == a) || !(g.multiply(a, e) == a)) return "identity law fails at " + g.format(a);
    const Element inv = g.inverse(a);
    if (!(g.multiply(a, inv) == e) || !(g.multiply(inv, a) == e)) return "inverse law fails at " + g.format(a);
  }
  for (const auto& a : sample) {
    for (const auto& b : sample) {
      const Element ab = g.multiply(a, b);
      for (const auto& c : sample) {
        if (!(g.multiply(ab, c) == g.multiply(a, g.multiply(b, c)))) {
          return "associativity fails at (" + g.format(a) + "," + g.format(b) + "," + g.format(c) + ")";
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace sofic
