#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sofic/approximation.hpp"
#include "sofic/errors.hpp"
#include "sofic/group.hpp"
#include "sofic/wreath.hpp"
#include "sofic/wreath_approx.hpp"

namespace sofic {

/// A short exact sequence 1 -> N -> E -> Q -> 1 given by its maps.
struct ExtensionDescriptor {
  using Map = std::function<Element(const Element&)>;

  GroupContext n;
  GroupContext e;
  GroupContext q;
  Map project;  ///< p: E -> Q
  Map include;  ///< incl: N -> E
  /// incl^-1 on the kernel of p; empty result outside it.
  std::function<std::optional<Element>(const Element&)> kernel_preimage;
  /// Section used when E is infinite (finite E is scanned instead).
  Map section_rule;
  std::string description;
};

namespace detail {

inline std::function<std::optional<Element>(const Element&)> tabulated_preimage(const GroupContext& n,
                                                                                const ExtensionDescriptor::Map& incl) {
  auto table = std::make_shared<std::map<Element, Element>>();
  for (const auto& x : n->elements()) {
    if (!table->emplace(incl(x), x).second) throw GroupError("inclusion N -> E is not injective");
  }
  return [table](const Element& e) -> std::optional<Element> {
    auto it = table->find(e);
    if (it == table->end()) return std::nullopt;
    return it->second;
  };
}

inline const ProductGroup& as_product(const Group& g) {
  if (auto* p = dynamic_cast<const ProductGroup*>(&g)) return *p;
  throw GroupError(g.spec() + " is not a product group");
}

}  // namespace detail

/// p = reduction mod `modulus` from Z or C(m) onto Q = C(modulus). N is Z
/// (incl k -> modulus k) or C(m / modulus) (incl j -> modulus j).
inline ExtensionDescriptor mod_extension(GroupContext n, GroupContext e, GroupContext q, std::uint64_t modulus) {
  if (modulus == 0) throw GroupError("mod-0 is not a quotient map");
  if (q->family() != Family::cyclic || q->order() != modulus) {
    throw GroupError("mod-" + std::to_string(modulus) + " needs Q = C(" + std::to_string(modulus) + "), got " + q->spec());
  }
  ExtensionDescriptor ext;
  ext.n = n;
  ext.e = e;
  ext.q = q;
  ext.description = "mod-" + std::to_string(modulus);
  const Integer m(modulus);
  if (e->family() == Family::integers) {
    if (n->family() != Family::integers) throw GroupError("mod-n on Z needs N = Z, got " + n->spec());
    ext.project = [m](const Element& x) {
      Integer r = x.as_integer() % m;
      if (r < 0) r += m;
      return Element::index(r.convert_to<std::uint64_t>());
    };
    ext.include = [m](const Element& x) { return Element::integer(x.as_integer() * m); };
    ext.kernel_preimage = [m](const Element& x) -> std::optional<Element> {
      if (x.as_integer() % m != 0) return std::nullopt;
      return Element::integer(x.as_integer() / m);
    };
    ext.section_rule = [](const Element& x) { return Element::integer(Integer(x.as_index())); };
    return ext;
  }
  if (e->family() != Family::cyclic) throw GroupError("mod-n needs E = Z or a cyclic group, got " + e->spec());
  const std::uint64_t order = e->order().convert_to<std::uint64_t>();
  if (order % modulus != 0) {
    throw GroupError("mod-" + std::to_string(modulus) + " is not defined on " + e->spec());
  }
  if (n->family() != Family::cyclic || n->order() != order / modulus) {
    throw GroupError("mod-" + std::to_string(modulus) + " on " + e->spec() + " needs N = C(" +
                     std::to_string(order / modulus) + "), got " + n->spec());
  }
  ext.project = [modulus](const Element& x) { return Element::index(x.as_index() % modulus); };
  ext.include = [modulus](const Element& x) { return Element::index(x.as_index() * modulus); };
  ext.kernel_preimage = detail::tabulated_preimage(n, ext.include);
  return ext;
}

/// E = product(A, B) onto one factor; N is the other factor.
inline ExtensionDescriptor projection_extension(GroupContext n, GroupContext e, GroupContext q, int which) {
  const ProductGroup& prod = detail::as_product(*e);
  if (which != 1 && which != 2) throw GroupError("projection index must be 1 or 2");
  const GroupContext& onto = which == 1 ? prod.left() : prod.right();
  const GroupContext& kernel = which == 1 ? prod.right() : prod.left();
  if (onto->spec() != q->spec() || kernel->spec() != n->spec()) {
    throw GroupError("proj-" + std::to_string(which) + " on " + e->spec() + " gives N = " + kernel->spec() +
                     ", Q = " + onto->spec());
  }
  ExtensionDescriptor ext;
  ext.n = n;
  ext.e = e;
  ext.q = q;
  ext.description = "proj-" + std::to_string(which);
  auto ectx = e;
  ext.project = [ectx, which](const Element& x) {
    const auto& p = static_cast<const ProductGroup&>(*ectx);
    return which == 1 ? p.first(x) : p.second(x);
  };
  auto nid = n->identity();
  auto qid = q->identity();
  ext.include = [which, qid](const Element& x) {
    return which == 1 ? ProductGroup::pair(qid, x) : ProductGroup::pair(x, qid);
  };
  ext.kernel_preimage = [ectx, which, qid](const Element& x) -> std::optional<Element> {
    const auto& p = static_cast<const ProductGroup&>(*ectx);
    const Element& top = which == 1 ? p.first(x) : p.second(x);
    if (!(top == qid)) return std::nullopt;
    return which == 1 ? p.second(x) : p.first(x);
  };
  ext.section_rule = [which, nid](const Element& x) {
    return which == 1 ? ProductGroup::pair(x, nid) : ProductGroup::pair(nid, x);
  };
  return ext;
}

/// Extension of a finite E given by the images of p (and of incl) listed in
/// canonical element order. Without incl, N is the kernel of p as a table group.
inline ExtensionDescriptor map_extension(GroupContext e, GroupContext q, const std::vector<Element>& p_images,
                                         GroupContext n = nullptr, const std::vector<Element>& incl_images = {}) {
  if (!e->finite()) throw GroupError("a tabulated projection needs a finite E");
  const auto elements = e->elements();
  if (p_images.size() != elements.size()) {
    throw ParseError("projection lists " + std::to_string(p_images.size()) + " images for " +
                     std::to_string(elements.size()) + " elements of " + e->spec());
  }
  auto p_table = std::make_shared<std::map<Element, Element>>();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!q->contains(p_images[i])) throw GroupError("projection image is not in " + q->spec());
    p_table->emplace(elements[i], p_images[i]);
  }
  ExtensionDescriptor ext;
  ext.e = e;
  ext.q = q;
  ext.description = "map";
  ext.project = [p_table](const Element& x) {
    auto it = p_table->find(x);
    if (it == p_table->end()) throw GroupError("element outside the tabulated E");
    return it->second;
  };
  if (!n) {
    std::vector<Element> kernel;
    for (const auto& x : elements) {
      if ((*p_table)[x] == q->identity()) kernel.push_back(x);
    }
    std::vector<std::vector<std::uint64_t>> table(kernel.size(), std::vector<std::uint64_t>(kernel.size()));
    for (std::size_t i = 0; i < kernel.size(); ++i) {
      for (std::size_t j = 0; j < kernel.size(); ++j) {
        const auto prod = e->multiply(kernel[i], kernel[j]);
        const auto idx = detail::index_of(kernel, prod);
        if (idx == kernel.size()) throw GroupError("projection is not a homomorphism: its kernel is not closed");
        table[i][j] = idx;
      }
    }
    n = std::make_shared<const TableGroup>(std::move(table), "ker(" + e->spec() + ")");
    ext.include = [kernel](const Element& x) { return kernel.at(x.as_index()); };
  } else {
    if (!n->finite()) throw GroupError("a tabulated inclusion needs a finite N");
    const auto n_elements = n->elements();
    if (incl_images.size() != n_elements.size()) {
      throw ParseError("inclusion lists " + std::to_string(incl_images.size()) + " images for " +
                       std::to_string(n_elements.size()) + " elements of " + n->spec());
    }
    auto incl_table = std::make_shared<std::map<Element, Element>>();
    for (std::size_t i = 0; i < n_elements.size(); ++i) {
      if (!e->contains(incl_images[i])) throw GroupError("inclusion image is not in " + e->spec());
      incl_table->emplace(n_elements[i], incl_images[i]);
    }
    ext.include = [incl_table](const Element& x) {
      auto it = incl_table->find(x);
      if (it == incl_table->end()) throw GroupError("element outside the tabulated N");
      return it->second;
    };
  }
  ext.n = n;
  ext.kernel_preimage = detail::tabulated_preimage(n, ext.include);
  return ext;
}

/// E -> E/N for a normal subgroup N of a finite E. Cosets are numbered by
/// their least element in canonical order; N and Q become table groups.
inline ExtensionDescriptor quotient_extension(GroupContext e, std::vector<Element> normal) {
  if (!e->finite()) throw GroupError("quotients are only formed for finite E");
  normal = canonical_set(std::move(normal));
  const auto elements = e->elements();
  std::map<Element, std::uint64_t> coset_of;
  std::vector<Element> reps;
  for (const auto& x : elements) {
    if (coset_of.count(x)) continue;
    const auto idx = reps.size();
    reps.push_back(x);
    for (const auto& m : normal) {
      auto [it, fresh] = coset_of.emplace(e->multiply(x, m), idx);
      if (!fresh && it->second != idx) throw GroupError("subgroup cosets overlap: not a subgroup");
    }
  }
  if (reps.size() * normal.size() != elements.size()) throw GroupError("not a subgroup of " + e->spec());
  std::vector<std::vector<std::uint64_t>> qt(reps.size(), std::vector<std::uint64_t>(reps.size()));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (std::size_t j = 0; j < reps.size(); ++j) qt[i][j] = coset_of.at(e->multiply(reps[i], reps[j]));
  }
  // Well-definedness of the quotient law is exactly normality.
  for (const auto& x : elements) {
    for (const auto& y : elements) {
      if (coset_of.at(e->multiply(x, y)) != qt[coset_of.at(x)][coset_of.at(y)]) {
        throw GroupError("subgroup is not normal in " + e->spec());
      }
    }
  }
  auto q = std::make_shared<const TableGroup>(std::move(qt), e->spec() + "/N");
  std::vector<Element> images;
  for (const auto& x : elements) images.push_back(Element::index(coset_of.at(x)));
  return map_extension(e, q, images);
}

/// Exhaustive check of the exact-sequence axioms on finite data; returns the
/// first violation.
inline std::optional<std::string> find_extension_violation(const ExtensionDescriptor& ext) {
  const Group& e = *ext.e;
  const Group& q = *ext.q;
  const Group& n = *ext.n;
  if (!e.finite() || !n.finite()) return std::nullopt;
  const auto es = e.elements();
  const auto ns = n.elements();
  if (es.size() > 4096) return std::nullopt;
  std::map<Element, bool> hit;
  for (const auto& x : es) {
    const auto px = ext.project(x);
    if (!q.contains(px)) return "p(" + e.format(x) + ") is not in " + q.spec();
    hit[px] = true;
    for (const auto& y : es) {
      if (!(ext.project(e.multiply(x, y)) == q.multiply(px, ext.project(y)))) {
        return "p is not a homomorphism at (" + e.format(x) + ", " + e.format(y) + ")";
      }
    }
  }
  if (q.finite() && Integer(hit.size()) != q.order()) return "p is not surjective";
  std::size_t kernel = 0;
  for (const auto& x : es) kernel += q.is_identity(ext.project(x)) ? 1 : 0;
  if (kernel != ns.size()) return "ker p has " + std::to_string(kernel) + " elements but |N| = " + std::to_string(ns.size());
  std::map<Element, bool> seen;
  for (const auto& a : ns) {
    const auto ia = ext.include(a);
    if (!e.contains(ia)) return "incl(" + n.format(a) + ") is not in " + e.spec();
    if (!q.is_identity(ext.project(ia))) return "p(incl(" + n.format(a) + ")) is not the identity";
    if (!seen.emplace(ia, true).second) return "incl is not injective";
    for (const auto& b : ns) {
      if (!(ext.include(n.multiply(a, b)) == e.multiply(ia, ext.include(b)))) {
        return "incl is not a homomorphism at (" + n.format(a) + ", " + n.format(b) + ")";
      }
    }
  }
  return std::nullopt;
}

/// Set-theoretic section s: Q -> E with s(e_Q) = e_E.
class Section {
 public:
  Section(const ExtensionDescriptor& ext, std::map<Element, Element> table)
      : q_(ext.q), project_(ext.project), table_(std::move(table)) {}
  Section(const ExtensionDescriptor& ext, ExtensionDescriptor::Map rule)
      : q_(ext.q), project_(ext.project), rule_(std::move(rule)) {}

  Element operator()(const Element& q) const {
    if (!rule_) {
      auto it = table_.find(q);
      if (it == table_.end()) throw GroupError("section is not defined at " + q_->format(q));
      return it->second;
    }
    Element s = rule_(q);
    if (!(project_(s) == q)) throw GroupError("section rule fails p(s(q)) = q at " + q_->format(q));
    return s;
  }

  bool tabulated() const noexcept { return !rule_; }
  const std::map<Element, Element>& table() const noexcept { return table_; }

 private:
  GroupContext q_;
  ExtensionDescriptor::Map project_;
  std::map<Element, Element> table_;
  ExtensionDescriptor::Map rule_;
};

/// First preimage of each q in canonical order (finite E), s(e_Q) = e_E.
inline Section choose_section(const ExtensionDescriptor& ext) {
  const Group& q = *ext.q;
  if (!ext.e->finite()) {
    if (!ext.section_rule) throw GroupError("infinite E needs a section rule");
    if (!ext.e->is_identity(ext.section_rule(q.identity()))) throw GroupError("section rule does not fix the identity");
    return Section(ext, ext.section_rule);
  }
  std::map<Element, Element> table;
  for (const auto& x : ext.e->elements()) table.try_emplace(ext.project(x), x);
  table.insert_or_assign(q.identity(), ext.e->identity());
  if (!q.finite() || Integer(table.size()) != q.order()) throw GroupError("p is not surjective onto " + q.spec());
  return Section(ext, std::move(table));
}

/// Kaloujnine-Krasner image (f_e, p(e)) of e in N wr wr Q with
/// f_e(x) = s(p(e) x)^-1 e s(x), decoded into N.
inline Element kk_embed(const ExtensionDescriptor& ext, const Section& s, const WreathGroup& w, const Element& e) {
  if (!ext.e->contains(e)) throw GroupError("element is not in " + ext.e->spec());
  const Element top = ext.project(e);
  auto coordinate = [ext, s, e, top](const Element& x) {
    const Group& eg = *ext.e;
    const Element value = eg.multiply(eg.multiply(eg.inverse(s(ext.q->multiply(top, x))), e), s(x));
    auto n = ext.kernel_preimage(value);
    if (!n) {
      throw GroupError("f_e(" + ext.q->format(x) + ") = " + eg.format(value) +
                       " is not in the image of N: invalid extension data");
    }
    return *n;
  };
  if (ext.q->finite()) {
    std::vector<std::pair<Element, Element>> values;
    for (const auto& x : ext.q->elements()) values.emplace_back(x, coordinate(x));
    return w.make(top, ext.n->identity(), values);
  }
  CoordinateRule rule;
  rule.evaluate = coordinate;
  rule.window = "Q";
  return w.make_rule(top, std::move(rule));
}

struct ExtensionOptions {
  std::uint64_t point_cap = kDefaultPointCap;
  /// Radius of the separating-set search when Q is infinite.
  std::uint64_t radius = 1;
};

struct ExtensionResult {
  std::shared_ptr<const WreathGroup> wreath;  ///< N wr wr Q
  Section section;
  std::vector<Element> images;  ///< kk_embed of K, aligned with map.k()
  ApproximationMap approx_n;
  ApproximationMap approx_q;
  std::vector<Element> separating;
  std::vector<Element> k_h;
  std::vector<Element> k_g;
  WreathPointCodec codec;
  ApproximationMap map;  ///< approximation of E on C, indexed by E-elements
  EpsilonBudget budget;
  PredictedBounds predicted;
  Certificate certificate;
};

namespace detail {

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace detail

/// Approximation of E through its embedding into N wr wr Q: the wreath
/// construction evaluated on the images of K u K.K and indexed by E.
inline ExtensionResult extension_approx(const ExtensionDescriptor& ext, const std::vector<Element>& k,
                                        const Rational& eps, const ExtensionOptions& options = {}) {
  detail::staged("validate", [&] {
    detail::check_epsilon(eps);
    for (const auto& x : k) {
      if (!ext.e->contains(x)) throw GroupError("K element is not in " + ext.e->spec());
    }
    if (auto bad = find_extension_violation(ext)) throw GroupError(*bad);
    return 0;
  });
  const Group& eg = *ext.e;
  const Group& q = *ext.q;
  auto wctx = std::make_shared<const WreathGroup>(ext.n, ext.q);
  const WreathGroup& w = *wctx;
  Section section = detail::staged("section", [&] { return choose_section(ext); });

  std::vector<Element> kk = detail::with_identity(eg, k);
  std::vector<Element> images = detail::staged("embed", [&] {
    std::vector<Element> out;
    for (const auto& x : kk) out.push_back(kk_embed(ext, section, w, x));
    return out;
  });

  auto [separating, k_h] = detail::staged("separating-set", [&] {
    auto candidates = q.finite() ? q.elements() : ball(q, options.radius);
    auto sep = separating_set(w, images, candidates);
    std::vector<Element> kh = sep;
    for (const auto& x : kk) kh.push_back(ext.project(x));
    return std::make_pair(sep, canonical_set(std::move(kh)));
  });

  auto folner = detail::staged("folner", [&] { return folner_search(q, k_h, eps / 2); });
  auto bud = detail::staged("budget", [&] { return budget(eps, folner.size()); });
  ApproximationMap approx_q = detail::staged("sub-approximations", [&] { return build_amenable(ext.q, folner, k_h); });
  auto k_g = detail::staged("sub-approximations", [&] { return support_window(w, images, folner.elements); });
  ApproximationMap approx_n = detail::staged("sub-approximations", [&] { return approximate_group(ext.n, k_g, bud.eps_g); });

  WreathPointCodec codec = detail::staged("wreath", [&] {
    return WreathPointCodec(folner.elements, approx_n.points().size, options.point_cap);
  });
  ApproximationMap map(ext.e, kk, PointSet{"C", static_cast<std::size_t>(codec.size()), {}});
  detail::staged("wreath", [&] {
    std::map<Element, Permutation> cache;
    auto phi_n = [&](const Element& g) -> const Permutation& {
      auto it = cache.find(g);
      if (it == cache.end()) it = cache.emplace(g, approx_n.evaluate(g)).first;
      return it->second;
    };
    for (const auto& d : product_closure(map.k(), eg)) {
      map.assign(d, wreath_permutation(q, phi_n, approx_q, codec, kk_embed(ext, section, w, d)));
    }
    return 0;
  });
  map.provenance().builder = "extension";
  map.provenance().folner = approx_q.provenance().folner;

  auto cert = detail::staged("certify", [&] { return certify(map, eps); });
  auto predicted = predicted_bounds(bud.eps_h, bud.eps_g, codec.b_size());
  return ExtensionResult{wctx,         std::move(section),  std::move(images),    std::move(approx_n),
                         std::move(approx_q), std::move(separating), std::move(k_h), std::move(k_g),
                         std::move(codec),    std::move(map),        bud,            predicted,
                         std::move(cert)};
}

}  // namespace sofic
