#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sofic/errors.hpp"
#include "sofic/rational.hpp"

namespace sofic {

class WreathElement;

/// A group element as an immutable value.
///
/// Elements carry no reference to their group; the owning group context gives
/// them meaning. Four representations cover every supported family:
///   - index:   finite families (cyclic, symmetric, dihedral, Cayley tables)
///   - integer: the integers, arbitrary precision
///   - tuple:   direct products and integer lattices
///   - wreath:  elements of an unrestricted wreath product
///
/// Every element except a rule-based wreath element over an infinite acting
/// group has a canonical byte encoding. Equality is encoding equality and the
/// canonical total order is the lexicographic order of encodings; for indices
/// and integers that order is the numeric one.
class Element {
 public:
  enum class Kind { index, integer, tuple, wreath };

  Element() : Element(std::uint64_t{0}) {}

  static Element index(std::uint64_t i) { return Element(i); }
  static Element integer(Integer z) { return Element(std::move(z)); }
  static Element tuple(std::vector<Element> parts);
  static Element wreath(WreathElement w);

  Kind kind() const noexcept { return static_cast<Kind>(rep_.index()); }

  std::uint64_t as_index() const {
    if (auto* p = std::get_if<std::uint64_t>(&rep_)) return *p;
    throw GroupError("element is not an index element");
  }
  const Integer& as_integer() const {
    if (auto* p = std::get_if<Integer>(&rep_)) return *p;
    throw GroupError("element is not an integer element");
  }
  std::span<const Element> as_tuple() const {
    if (auto* p = std::get_if<TuplePtr>(&rep_)) return {(*p)->data(), (*p)->size()};
    throw GroupError("element is not a tuple element");
  }
  const WreathElement& as_wreath() const {
    if (auto* p = std::get_if<WreathPtr>(&rep_)) return **p;
    throw GroupError("element is not a wreath element");
  }

  bool encodable() const noexcept { return !code_.empty(); }

  /// Canonical encoding. Throws for rule-based wreath elements over infinite
  /// acting groups, whose equality is undecidable.
  const std::string& encoding() const {
    if (code_.empty()) {
      throw GroupError("element has a rule-based coordinate function and no canonical encoding");
    }
    return code_;
  }

  friend bool operator==(const Element& a, const Element& b) { return a.encoding() == b.encoding(); }
  friend std::strong_ordering operator<=>(const Element& a, const Element& b) {
    return a.encoding() <=> b.encoding();
  }

 private:
  using TuplePtr = std::shared_ptr<const std::vector<Element>>;
  using WreathPtr = std::shared_ptr<const WreathElement>;
  using Rep = std::variant<std::uint64_t, Integer, TuplePtr, WreathPtr>;

  explicit Element(std::uint64_t i) : rep_(i) {
    code_.push_back('i');
    append_u64(code_, i);
  }
  explicit Element(Integer z) : rep_(std::move(z)) {
    code_.push_back('z');
    append_integer(code_, std::get<Integer>(rep_));
  }
  Element(Rep rep, std::string code) : rep_(std::move(rep)), code_(std::move(code)) {}

  static void append_u64(std::string& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFFU));
  }
  static void append_u32(std::string& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFFU));
  }

  // Order-preserving and prefix-free: sign byte, then length and magnitude,
  // both complemented for negative values.
  static void append_integer(std::string& out, const Integer& v) {
    if (v == 0) {
      out.push_back(1);
      return;
    }
    std::vector<unsigned char> magnitude;
    Integer absolute = v < 0 ? Integer(-v) : v;
    boost::multiprecision::export_bits(absolute, std::back_inserter(magnitude), 8);
    auto length = static_cast<std::uint32_t>(magnitude.size());
    if (v > 0) {
      out.push_back(2);
      append_u32(out, length);
      for (unsigned char c : magnitude) out.push_back(static_cast<char>(c));
    } else {
      out.push_back(0);
      append_u32(out, ~length);
      for (unsigned char c : magnitude) out.push_back(static_cast<char>(static_cast<unsigned char>(~c)));
    }
  }

  friend class WreathElement;

  Rep rep_;
  std::string code_;
};

/// Arbitrary coordinate function H -> G, defined by a rule and a declared
/// evaluation window. An empty `in_window` means the rule is total.
struct CoordinateRule {
  std::function<Element(const Element&)> evaluate;
  std::function<bool(const Element&)> in_window;
  std::string window = "everywhere";
};

/// An element ((g_x)_{x in H}, h) of an unrestricted wreath product G wr wr H.
///
/// The coordinate function is either finitely supported over a fallback value
/// or rule based. Finite-support values are kept in normal form by the wreath
/// group context: entries never repeat the fallback, and over a finite acting
/// group the fallback is the identity of G.
class WreathElement {
 public:
  using Entries = std::map<Element, Element>;

  WreathElement(Element top, Element fallback, Entries entries)
      : top_(std::move(top)), coord_(Support{std::move(fallback), std::move(entries)}) {}

  WreathElement(Element top, CoordinateRule rule) : top_(std::move(top)), coord_(std::move(rule)) {}

  const Element& top() const noexcept { return top_; }

  bool finite_support() const noexcept { return std::holds_alternative<Support>(coord_); }

  const Element& fallback() const { return support().fallback; }
  const Entries& entries() const { return support().entries; }
  const CoordinateRule& rule() const {
    if (auto* r = std::get_if<CoordinateRule>(&coord_)) return *r;
    throw GroupError("wreath element has finite support, not a rule");
  }

  bool in_window(const Element& x) const {
    if (finite_support()) return true;
    const auto& r = rule();
    return !r.in_window || r.in_window(x);
  }

  /// Value g_x of the coordinate function.
  Element coordinate(const Element& x) const {
    if (const auto* s = std::get_if<Support>(&coord_)) {
      auto it = s->entries.find(x);
      return it == s->entries.end() ? s->fallback : it->second;
    }
    const auto& r = std::get<CoordinateRule>(coord_);
    if (r.in_window && !r.in_window(x)) {
      throw WindowError("coordinate evaluated outside its declared window (" + r.window + ")");
    }
    return r.evaluate(x);
  }

 private:
  struct Support {
    Element fallback;
    Entries entries;
  };

  const Support& support() const {
    if (auto* s = std::get_if<Support>(&coord_)) return *s;
    throw GroupError("wreath element has a rule-based coordinate function");
  }

  friend class Element;

  Element top_;
  std::variant<Support, CoordinateRule> coord_;
};

inline Element Element::tuple(std::vector<Element> parts) {
  std::string code;
  code.push_back('t');
  append_u32(code, static_cast<std::uint32_t>(parts.size()));
  for (const auto& p : parts) code += p.encoding();
  return Element(Rep(std::make_shared<const std::vector<Element>>(std::move(parts))), std::move(code));
}

inline Element Element::wreath(WreathElement w) {
  std::string code;
  if (w.finite_support()) {
    const auto& s = w.support();
    code.push_back('w');
    code += w.top_.encoding();
    code += s.fallback.encoding();
    append_u32(code, static_cast<std::uint32_t>(s.entries.size()));
    for (const auto& [key, value] : s.entries) {
      code += key.encoding();
      code += value.encoding();
    }
  }
  return Element(Rep(std::make_shared<const WreathElement>(std::move(w))), std::move(code));
}

}  // namespace sofic
