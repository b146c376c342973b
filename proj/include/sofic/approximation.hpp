#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sofic/errors.hpp"
#include "sofic/folner.hpp"
#include "sofic/group.hpp"
#include "sofic/metric.hpp"
#include "sofic/permutation.hpp"
#include "sofic/rational.hpp"

namespace sofic {

/// The finite set an approximation acts on.
struct PointSet {
  std::string name;
  std::size_t size = 0;
  /// Group elements naming the points when the set is a subset of the source
  /// group (Følner sets, regular representations); empty otherwise.
  std::vector<Element> labels;
};

struct Provenance {
  std::string builder;
  std::optional<FolnerSet> folner;
  /// Good set E as indices into the point set, in increasing order.
  std::optional<std::vector<std::size_t>> good_set;
};

/// A finite partial map from group elements to permutations of one point set,
/// defined on K and all pairwise products of K.
class ApproximationMap {
 public:
  using Extender = std::function<Permutation(const Element&)>;

  ApproximationMap(GroupContext source, std::vector<Element> k, PointSet points)
      : source_(std::move(source)), k_(canonical_set(std::move(k))), points_(std::move(points)) {}

  const GroupContext& source() const noexcept { return source_; }
  const std::vector<Element>& k() const noexcept { return k_; }
  const PointSet& points() const noexcept { return points_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  Provenance& provenance() noexcept { return provenance_; }

  void assign(Element g, Permutation p) {
    if (p.size() != points_.size) {
      throw ApproximationError("assigned permutation acts on " + std::to_string(p.size()) + " points, expected " +
                               std::to_string(points_.size));
    }
    assignment_.insert_or_assign(std::move(g), std::move(p));
  }

  /// Optional rule extending the map to the whole source group.
  void set_extender(Extender e) { extender_ = std::move(e); }
  bool has_extender() const noexcept { return static_cast<bool>(extender_); }

  bool defined_at(const Element& g) const { return assignment_.count(g) != 0; }

  const Permutation& at(const Element& g) const {
    auto it = assignment_.find(g);
    if (it == assignment_.end()) {
      throw ApproximationError("no assignment for " + source_->format(g));
    }
    return it->second;
  }

  /// The stored value when present, otherwise the extender's value.
  Permutation evaluate(const Element& g) const {
    auto it = assignment_.find(g);
    if (it != assignment_.end()) return it->second;
    if (extender_) return extender_(g);
    throw ApproximationError("no assignment for " + source_->format(g) + " and no extension rule");
  }

  const std::map<Element, Permutation>& assignment() const noexcept { return assignment_; }

 private:
  GroupContext source_;
  std::vector<Element> k_;
  PointSet points_;
  Provenance provenance_;
  std::map<Element, Permutation> assignment_;
  Extender extender_;
};

/// K u K.K, canonical order.
inline std::vector<Element> product_closure(const std::vector<Element>& k, const Group& ctx) {
  std::vector<Element> out(k.begin(), k.end());
  for (const auto& a : k) {
    for (const auto& b : k) out.push_back(ctx.multiply(a, b));
  }
  return canonical_set(std::move(out));
}

struct Witness {
  std::string condition;  ///< "s1" (multiplicativity) or "s2" (separation)
  Element first;
  Element second;
  Rational value;
};

/// Exact measurement of an approximation against (s1) and (s2).
struct Certificate {
  std::vector<Element> k;
  Rational epsilon;
  /// max over k1, k2 in K of d(phi(k1 k2), phi(k1) phi(k2)).
  Rational defect;
  std::optional<std::pair<Element, Element>> defect_pair;
  /// min over distinct k1, k2 of d(phi(k1), phi(k2)); empty when |K| < 2.
  std::optional<Rational> separation;
  std::optional<std::pair<Element, Element>> separation_pair;
  bool defect_pass = false;
  bool separation_pass = false;
  std::vector<Witness> witnesses;

  bool pass() const noexcept { return defect_pass && separation_pass; }
};

inline Certificate certify(const ApproximationMap& approx, const Rational& eps) {
  if (eps < 0 || eps > 1) throw ApproximationError("epsilon must lie in [0, 1], got " + to_string(eps));
  const Group& g = *approx.source();
  const auto& k = approx.k();
  Certificate cert;
  cert.k = k;
  cert.epsilon = eps;
  cert.defect = 0;
  for (const auto& a : k) {
    const Permutation& pa = approx.at(a);
    for (const auto& b : k) {
      const Permutation& pab = approx.at(g.multiply(a, b));
      std::size_t bad = composition_mismatch_count(pab, pa, approx.at(b));
      Rational d(Integer(bad), Integer(std::max<std::size_t>(pab.size(), 1)));
      if (!cert.defect_pair || d > cert.defect) {
        cert.defect = d;
        cert.defect_pair = {a, b};
      }
      if (d > eps) cert.witnesses.push_back({"s1", a, b, d});
    }
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      Rational d = hamming(approx.at(k[i]), approx.at(k[j]));
      if (!cert.separation || d < *cert.separation) {
        cert.separation = d;
        cert.separation_pair = {k[i], k[j]};
      }
      if (d < 1 - eps) cert.witnesses.push_back({"s2", k[i], k[j], d});
    }
  }
  cert.defect_pass = cert.defect <= eps;
  cert.separation_pass = !cert.separation || *cert.separation >= 1 - eps;
  return cert;
}

/// Split of a total tolerance between the acting-group and coordinate-group
/// approximations of a wreath product.
struct EpsilonBudget {
  Rational eps_h;
  Rational eps_g;
};

inline constexpr int kBudgetHalvings = 64;

/// eps_H = eps/2 and eps_G the largest dyadic k/2^64 with
/// 1 - (1 - eps_H)(1 - eps_G)^|B| <= eps.
inline EpsilonBudget budget(const Rational& eps, std::size_t b_size) {
  detail::check_epsilon(eps);
  if (b_size == 0) throw ApproximationError("budget needs |B| >= 1");
  EpsilonBudget out;
  out.eps_h = eps / 2;
  const Rational keep = 1 - out.eps_h;
  out.eps_g = bisect_dyadic(Rational(0), Rational(1), kBudgetHalvings,
                            [&](const Rational& x) { return 1 - keep * pow(1 - x, b_size) <= eps; });
  if (out.eps_g == 0) throw ApproximationError("no positive dyadic eps_G at 64 halvings");
  return out;
}

namespace detail {

inline std::size_t index_of(const std::vector<Element>& sorted, const Element& x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end() || !(*it == x)) return sorted.size();
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace detail

/// phi(g) on a finite subset F (canonical order) of a group: f -> gf when gf
/// lies in F, otherwise the boundary bijection gF \ F -> F \ gF that pairs
/// both sides in canonical order.
inline Permutation amenable_permutation(const Group& ctx, const std::vector<Element>& f, const Element& g) {
  const std::size_t n = f.size();
  std::vector<Permutation::Point> images(n);
  std::vector<std::pair<Element, std::size_t>> overflow;  // (gf, index of f) with gf outside F
  for (std::size_t j = 0; j < n; ++j) {
    Element x = ctx.multiply(g, f[j]);
    std::size_t idx = detail::index_of(f, x);
    if (idx == n) {
      overflow.emplace_back(std::move(x), j);
    } else {
      images[j] = static_cast<Permutation::Point>(idx);
    }
  }
  std::sort(overflow.begin(), overflow.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const Element g_inv = ctx.inverse(g);
  std::vector<std::size_t> uncovered;  // F \ gF, canonical order
  for (std::size_t j = 0; j < n; ++j) {
    if (detail::index_of(f, ctx.multiply(g_inv, f[j])) == n) uncovered.push_back(j);
  }
  if (uncovered.size() != overflow.size()) throw ApproximationError("internal: boundary sizes differ");
  for (std::size_t i = 0; i < overflow.size(); ++i) {
    images[overflow[i].second] = static_cast<Permutation::Point>(uncovered[i]);
  }
  return Permutation(std::move(images));
}

/// Følner-set approximation of an amenable group on the point set F.
inline ApproximationMap build_amenable(GroupContext ctx, const FolnerSet& f, const std::vector<Element>& k) {
  for (const auto& x : k) {
    if (!ctx->contains(x)) throw GroupError("K element is not in " + ctx->spec());
  }
  auto verdict = folner_verify(f.elements, k, f.epsilon, *ctx);
  if (!verdict.ok()) {
    throw ApproximationError(verdict.failure == FolnerFailure::asymmetric
                                 ? "Følner set is not symmetric"
                                 : "Følner set fails the boundary condition for this K");
  }
  FolnerSet set = std::move(verdict.set);
  PointSet points{"F", set.size(), set.elements};
  ApproximationMap approx(ctx, k, points);
  for (const auto& g : product_closure(approx.k(), *ctx)) approx.assign(g, amenable_permutation(*ctx, set.elements, g));

  std::vector<std::size_t> good;
  for (std::size_t j = 0; j < set.size(); ++j) {
    bool inside = std::all_of(set.enlarged.begin(), set.enlarged.end(), [&](const Element& s) {
      return std::binary_search(set.elements.begin(), set.elements.end(), ctx->multiply(s, set.elements[j]));
    });
    if (inside) good.push_back(j);
  }
  approx.provenance().builder = "amenable";
  approx.provenance().good_set = std::move(good);
  auto elements = set.elements;
  approx.set_extender([ctx, elements](const Element& g) { return amenable_permutation(*ctx, elements, g); });
  approx.provenance().folner = std::move(set);
  return approx;
}

/// Left regular representation of a finite group on itself.
inline ApproximationMap build_finite_regular(GroupContext ctx, const std::vector<Element>& k) {
  if (!ctx->finite()) throw GroupError(ctx->spec() + " is infinite; the regular representation needs a finite group");
  for (const auto& x : k) {
    if (!ctx->contains(x)) throw GroupError("K element is not in " + ctx->spec());
  }
  auto elements = ctx->elements();
  if (elements.size() > std::numeric_limits<Permutation::Point>::max()) {
    throw CapExceeded(ctx->spec() + " is too large for a regular representation");
  }
  auto regular = [ctx, elements](const Element& g) {
    std::vector<Permutation::Point> images(elements.size());
    for (std::size_t j = 0; j < elements.size(); ++j) {
      images[j] = static_cast<Permutation::Point>(detail::index_of(elements, ctx->multiply(g, elements[j])));
    }
    return Permutation(std::move(images));
  };
  ApproximationMap approx(ctx, k, PointSet{"G", elements.size(), elements});
  for (const auto& g : product_closure(approx.k(), *ctx)) approx.assign(g, regular(g));
  std::vector<std::size_t> all(elements.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  approx.provenance().builder = "finite-regular";
  approx.provenance().good_set = std::move(all);
  approx.set_extender(regular);
  return approx;
}

}  // namespace sofic
