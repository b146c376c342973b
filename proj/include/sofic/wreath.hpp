#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sofic/element.hpp"
#include "sofic/group.hpp"

namespace sofic {

/// The unrestricted wreath product G wr wr H = (prod_{x in H} G) x| H with
///
///   ((g_x), h) . ((g'_x), h') = ((g_{h'x} g'_x), hh').
///
/// Literals are "{top|fallback|x1:g1;x2:g2}"; the fallback and entry list may
/// be omitted, and an empty fallback means the identity of G.
class WreathGroup final : public Group {
 public:
  WreathGroup(GroupContext inner, GroupContext acting) : inner_(std::move(inner)), acting_(std::move(acting)) {}

  Family family() const override { return Family::wreath; }
  std::string spec() const override { return "wreath(" + inner_->spec() + "," + acting_->spec() + ")"; }

  /// The coordinate group G.
  const GroupContext& inner() const noexcept { return inner_; }
  /// The acting group H.
  const GroupContext& acting() const noexcept { return acting_; }

  Element identity() const override { return Element::wreath(WreathElement(acting_->identity(), inner_->identity(), {})); }

  Element multiply(const Element& u, const Element& v) const override {
    const auto& a = checked(u);
    const auto& b = checked(v);
    const Group& g = *inner_;
    const Group& h = *acting_;
    Element top = h.multiply(a.top(), b.top());
    const Element& shift = b.top();
    if (a.finite_support() && b.finite_support()) {
      std::vector<Element> keys;
      const Element shift_inv = h.inverse(shift);
      for (const auto& [x, value] : a.entries()) keys.push_back(h.multiply(shift_inv, x));
      for (const auto& [x, value] : b.entries()) keys.push_back(x);
      WreathElement::Entries entries;
      for (const auto& x : keys) entries.emplace(x, g.multiply(a.coordinate(h.multiply(shift, x)), b.coordinate(x)));
      return normalize(std::move(top), g.multiply(a.fallback(), b.fallback()), std::move(entries));
    }
    GroupContext gc = inner_;
    GroupContext hc = acting_;
    CoordinateRule rule;
    rule.evaluate = [gc, hc, u, v](const Element& x) {
      const auto& a = u.as_wreath();
      const auto& b = v.as_wreath();
      return gc->multiply(a.coordinate(hc->multiply(b.top(), x)), b.coordinate(x));
    };
    rule.in_window = [hc, u, v](const Element& x) {
      const auto& a = u.as_wreath();
      const auto& b = v.as_wreath();
      return a.in_window(hc->multiply(b.top(), x)) && b.in_window(x);
    };
    rule.window = "product of windows";
    return make_rule(std::move(top), std::move(rule));
  }

  Element inverse(const Element& u) const override {
    const auto& a = checked(u);
    const Group& g = *inner_;
    const Group& h = *acting_;
    Element top_inv = h.inverse(a.top());
    if (a.finite_support()) {
      WreathElement::Entries entries;
      for (const auto& [x, value] : a.entries()) entries.emplace(h.multiply(a.top(), x), g.inverse(value));
      return normalize(std::move(top_inv), g.inverse(a.fallback()), std::move(entries));
    }
    GroupContext gc = inner_;
    GroupContext hc = acting_;
    CoordinateRule rule;
    rule.evaluate = [gc, hc, u, top_inv](const Element& x) {
      return gc->inverse(u.as_wreath().coordinate(hc->multiply(top_inv, x)));
    };
    rule.in_window = [hc, u, top_inv](const Element& x) { return u.as_wreath().in_window(hc->multiply(top_inv, x)); };
    rule.window = "shifted window";
    return make_rule(std::move(top_inv), std::move(rule));
  }

  bool finite() const override { return inner_->finite() && acting_->finite(); }
  Integer order() const override {
    Integer hs = acting_->order();
    if (hs > 4096) throw CapExceeded(spec() + " has too many coordinates to count its order");
    return boost::multiprecision::pow(inner_->order(), hs.convert_to<unsigned>()) * hs;
  }
  std::vector<Element> elements() const override {
    require_enumerable();
    auto gs = inner_->elements();
    auto hs = acting_->elements();
    std::vector<Element> out;
    std::vector<std::size_t> digits(hs.size(), 0);
    for (;;) {
      WreathElement::Entries entries;
      for (std::size_t i = 0; i < hs.size(); ++i) entries.emplace(hs[i], gs[digits[i]]);
      for (const auto& top : hs) out.push_back(normalize(top, inner_->identity(), entries));
      std::size_t pos = 0;
      while (pos < digits.size() && ++digits[pos] == gs.size()) digits[pos++] = 0;
      if (pos == digits.size()) break;
    }
    return canonical_set(std::move(out));
  }

  bool contains(const Element& u) const override {
    if (u.kind() != Element::Kind::wreath) return false;
    const auto& a = u.as_wreath();
    if (!acting_->contains(a.top())) return false;
    if (!a.finite_support()) return true;
    if (!inner_->contains(a.fallback())) return false;
    for (const auto& [x, value] : a.entries()) {
      if (!acting_->contains(x) || !inner_->contains(value) || value == a.fallback()) return false;
    }
    return !acting_->finite() || inner_->is_identity(a.fallback());
  }

  std::string format(const Element& u) const override {
    const auto& a = checked(u);
    std::string s = "{" + acting_->format(a.top()) + "|";
    if (!a.finite_support()) return s + "<rule on " + a.rule().window + ">}";
    s += inner_->format(a.fallback()) + "|";
    bool first = true;
    for (const auto& [x, value] : a.entries()) {
      if (!first) s += ";";
      first = false;
      s += acting_->format(x) + ":" + inner_->format(value);
    }
    return s + "}";
  }

  Element parse_element(std::string_view text) const override {
    auto parts = detail::split_top_level(detail::unwrap(text, '{', '}'), '|');
    if (parts.size() > 3 || parts[0].empty()) {
      throw ParseError("wreath literal must be {top|fallback|x:g;...}: '" + std::string(text) + "'");
    }
    Element top = acting_->parse_element(parts[0]);
    Element fallback = parts.size() > 1 && !parts[1].empty() ? inner_->parse_element(parts[1]) : inner_->identity();
    std::vector<std::pair<Element, Element>> values;
    if (parts.size() > 2 && !parts[2].empty()) {
      for (auto entry : detail::split_top_level(parts[2], ';')) {
        auto kv = detail::split_top_level(entry, ':');
        if (kv.size() != 2) throw ParseError("wreath entry must be x:g, got '" + std::string(entry) + "'");
        values.emplace_back(acting_->parse_element(kv[0]), inner_->parse_element(kv[1]));
      }
    }
    return make(std::move(top), std::move(fallback), values);
  }

  /// Finitely supported element: `fallback` everywhere except the listed values.
  Element make(Element top, Element fallback, const std::vector<std::pair<Element, Element>>& values) const {
    WreathElement::Entries entries;
    for (const auto& [x, g] : values) {
      if (!entries.emplace(x, g).second) throw GroupError("duplicate coordinate " + acting_->format(x));
    }
    return normalize(std::move(top), std::move(fallback), std::move(entries));
  }

  /// Element whose only non-identity coordinate is `value` at `at`.
  Element delta(const Element& at, const Element& value, Element top) const {
    return make(std::move(top), inner_->identity(), {{at, value}});
  }

  /// Constant coordinate function.
  Element constant(const Element& value, Element top) const { return make(std::move(top), value, {}); }

  /// Rule-based element. Over a finite acting group the rule is evaluated on
  /// every coordinate and stored in finite-support normal form.
  Element make_rule(Element top, CoordinateRule rule) const {
    if (!acting_->contains(top)) throw GroupError("top component is not in " + acting_->spec());
    if (acting_->finite()) {
      WreathElement::Entries entries;
      WreathElement raw(top, rule);
      for (const auto& x : acting_->elements()) entries.emplace(x, raw.coordinate(x));
      return normalize(std::move(top), inner_->identity(), std::move(entries));
    }
    return Element::wreath(WreathElement(std::move(top), std::move(rule)));
  }

 private:
  const WreathElement& checked(const Element& u) const {
    if (u.kind() != Element::Kind::wreath) throw GroupError("element is not in " + spec());
    return u.as_wreath();
  }

  // Finite-support normal form. Over a finite acting group the fallback is
  // folded into the entries so that the fallback is always e_G.
  Element normalize(Element top, Element fallback, WreathElement::Entries entries) const {
    if (!acting_->contains(top)) throw GroupError("top component is not in " + acting_->spec());
    if (!inner_->contains(fallback)) throw GroupError("coordinate value is not in " + inner_->spec());
    for (const auto& [x, value] : entries) {
      if (!acting_->contains(x)) throw GroupError("coordinate index is not in " + acting_->spec());
      if (!inner_->contains(value)) throw GroupError("coordinate value is not in " + inner_->spec());
    }
    if (acting_->finite() && !inner_->is_identity(fallback)) {
      for (const auto& x : acting_->elements()) entries.try_emplace(x, fallback);
      fallback = inner_->identity();
    }
    std::erase_if(entries, [&](const auto& kv) { return kv.second == fallback; });
    return Element::wreath(WreathElement(std::move(top), std::move(fallback), std::move(entries)));
  }

  GroupContext inner_;
  GroupContext acting_;
};

inline const WreathGroup& as_wreath_group(const Group& ctx) {
  if (auto* w = dynamic_cast<const WreathGroup*>(&ctx)) return *w;
  throw GroupError(ctx.spec() + " is not a wreath product");
}

/// Product in G wr wr H following the coordinate-shift law.
inline Element wreath_mul(const Element& u, const Element& v, const Group& ctx) {
  return as_wreath_group(ctx).multiply(u, v);
}

/// ((g_{h^-1 x}^-1), h^-1).
inline Element wreath_inv(const Element& u, const Group& ctx) { return as_wreath_group(ctx).inverse(u); }

/// Coordinate function of u, returned as the base-group element ((g_x), e_H).
/// Not a homomorphism.
inline Element project1(const Element& u, const Group& ctx) {
  const auto& w = as_wreath_group(ctx);
  const auto& a = u.as_wreath();
  if (a.finite_support()) {
    return w.make(w.acting()->identity(), a.fallback(),
                  std::vector<std::pair<Element, Element>>(a.entries().begin(), a.entries().end()));
  }
  return w.make_rule(w.acting()->identity(), a.rule());
}

/// Top component h of ((g_x), h); a homomorphism onto H.
inline Element project2(const Element& u) { return u.as_wreath().top(); }

}  // namespace sofic
