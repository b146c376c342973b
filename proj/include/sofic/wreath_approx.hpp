#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sofic/approximation.hpp"
#include "sofic/errors.hpp"
#include "sofic/folner.hpp"
#include "sofic/group.hpp"
#include "sofic/permutation.hpp"
#include "sofic/rational.hpp"
#include "sofic/wreath.hpp"

namespace sofic {

/// Default bound on |C| = |B| |A|^|B|.
inline constexpr std::uint64_t kDefaultPointCap = 10'000'000;

/// Indexing of C = B x A^B. Points are b-major; within a fiber the function
/// tau: B -> A is read as a base-|A| numeral whose most significant digit is
/// tau at the first element of B in canonical order.
class WreathPointCodec {
 public:
  WreathPointCodec(std::vector<Element> b, std::size_t a_size, std::uint64_t cap = kDefaultPointCap)
      : b_(std::move(b)), a_size_(a_size) {
    if (b_.empty() || a_size_ == 0) throw ApproximationError("C = B x A^B needs nonempty B and A");
    Integer fiber = boost::multiprecision::pow(Integer(a_size_), static_cast<unsigned>(b_.size()));
    Integer total = fiber * b_.size();
    if (total > cap || total > std::numeric_limits<Permutation::Point>::max()) {
      throw CapExceeded("|C| = " + std::to_string(b_.size()) + " * " + std::to_string(a_size_) + "^" +
                        std::to_string(b_.size()) + " = " + total.str() + " exceeds the enumeration cap " +
                        std::to_string(cap) + "; use a smaller B or A");
    }
    fiber_ = fiber.convert_to<std::uint64_t>();
    weights_.assign(b_.size(), 1);
    for (std::size_t i = b_.size() - 1; i > 0; --i) weights_[i - 1] = weights_[i] * a_size_;
  }

  const std::vector<Element>& b() const noexcept { return b_; }
  std::size_t b_size() const noexcept { return b_.size(); }
  std::size_t a_size() const noexcept { return a_size_; }
  std::uint64_t fiber_size() const noexcept { return fiber_; }
  std::uint64_t size() const noexcept { return fiber_ * b_.size(); }
  /// Place value of the digit tau(B[i]).
  std::uint64_t weight(std::size_t i) const { return weights_[i]; }

  std::uint64_t encode(std::size_t b_index, std::span<const std::size_t> tau) const {
    if (b_index >= b_.size() || tau.size() != b_.size()) throw ApproximationError("point outside C");
    std::uint64_t point = b_index * fiber_;
    for (std::size_t i = 0; i < tau.size(); ++i) {
      if (tau[i] >= a_size_) throw ApproximationError("point outside C");
      point += tau[i] * weights_[i];
    }
    return point;
  }

  std::pair<std::size_t, std::vector<std::size_t>> decode(std::uint64_t point) const {
    if (point >= size()) throw ApproximationError("point outside C");
    std::vector<std::size_t> tau(b_.size());
    std::uint64_t rest = point % fiber_;
    for (std::size_t i = 0; i < b_.size(); ++i) {
      tau[i] = static_cast<std::size_t>(rest / weights_[i]);
      rest %= weights_[i];
    }
    return {static_cast<std::size_t>(point / fiber_), std::move(tau)};
  }

 private:
  std::vector<Element> b_;
  std::size_t a_size_;
  std::uint64_t fiber_ = 0;
  std::vector<std::uint64_t> weights_;
};

/// Elements of norm at most `radius`: [-r, r] in Z, the box [-r, r]^d in Z^d,
/// and the whole group when it is finite.
inline std::vector<Element> ball(const Group& h, std::uint64_t radius) {
  if (h.finite()) return h.elements();
  if (h.family() == Family::integers) {
    std::vector<Element> out;
    for (long long x = -static_cast<long long>(radius); x <= static_cast<long long>(radius); ++x) {
      out.push_back(Element::integer(x));
    }
    return out;
  }
  if (h.family() == Family::lattice) {
    const auto d = static_cast<const LatticeGroup&>(h).rank();
    const long long r = static_cast<long long>(radius);
    std::vector<Element> out;
    std::vector<long long> digits(d, -r);
    for (;;) {
      out.push_back(LatticeGroup::make(std::vector<Integer>(digits.begin(), digits.end())));
      std::size_t pos = d;
      while (pos > 0 && digits[pos - 1] == r) digits[--pos] = -r;
      if (pos == 0) break;
      ++digits[pos - 1];
    }
    return out;
  }
  throw GroupError("no ball of radius for " + h.spec());
}

namespace detail {

inline Integer element_norm(const Group& h, const Element& x) {
  if (h.family() == Family::integers) return abs(x.as_integer());
  if (h.family() == Family::lattice) {
    Integer m = 0;
    for (const auto& c : static_cast<const LatticeGroup&>(h).coords(x)) m = std::max(m, Integer(abs(c)));
    return m;
  }
  return 0;
}

inline std::vector<Element> coordinate_functions(const WreathGroup& w, const std::vector<Element>& k) {
  std::vector<Element> out;
  for (const auto& u : k) out.push_back(project1(u, w));
  if (std::all_of(out.begin(), out.end(), [](const Element& e) { return e.encodable(); })) {
    return canonical_set(std::move(out));
  }
  return out;
}

}  // namespace detail

/// Greedy separating set: scanning `candidates` in canonical order, keeps each
/// index that separates a pair of distinct coordinate functions of K not yet
/// separated. Rule-based functions count as distinct only where they differ on
/// the candidates.
inline std::vector<Element> separating_set(const WreathGroup& w, const std::vector<Element>& k,
                                           std::vector<Element> candidates) {
  candidates = canonical_set(std::move(candidates));
  const auto funcs = detail::coordinate_functions(w, k);
  std::vector<std::pair<std::size_t, std::size_t>> pending;
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    for (std::size_t j = i + 1; j < funcs.size(); ++j) {
      if (funcs[i].encodable() && funcs[j].encodable() && funcs[i] == funcs[j]) continue;
      pending.emplace_back(i, j);
    }
  }
  std::vector<Element> chosen;
  for (const auto& x : candidates) {
    if (pending.empty()) break;
    std::vector<Element> values;
    values.reserve(funcs.size());
    for (const auto& f : funcs) values.push_back(f.as_wreath().coordinate(x));
    auto separated = [&](const auto& p) { return !(values[p.first] == values[p.second]); };
    if (std::any_of(pending.begin(), pending.end(), separated)) {
      chosen.push_back(x);
      std::erase_if(pending, separated);
    }
  }
  for (const auto& [i, j] : pending) {
    if (funcs[i].encodable() && funcs[j].encodable()) {
      throw ApproximationError("coordinate functions " + w.format(funcs[i]) + " and " + w.format(funcs[j]) +
                               " are not separated within the search window");
    }
  }
  return chosen;
}

/// Separating set searched over ball(H, radius).
inline std::vector<Element> separating_set(const WreathGroup& w, const std::vector<Element>& k, std::uint64_t radius) {
  return separating_set(w, k, ball(*w.acting(), radius));
}

/// B^-1 B.
inline std::vector<Element> difference_set(const Group& h, const std::vector<Element>& b) {
  std::vector<Element> out;
  for (const auto& x : b) {
    const Element xi = h.inverse(x);
    for (const auto& y : b) out.push_back(h.multiply(xi, y));
  }
  return canonical_set(std::move(out));
}

/// K_G = { g_x : (g_x) in pi_1(K), x in B^-1 B }.
inline std::vector<Element> support_window(const WreathGroup& w, const std::vector<Element>& k,
                                           const std::vector<Element>& b) {
  std::vector<Element> out;
  const auto window = difference_set(*w.acting(), b);
  for (const auto& u : k) {
    for (const auto& x : window) out.push_back(u.as_wreath().coordinate(x));
  }
  return canonical_set(std::move(out));
}

/// Permutation of C realizing (b, tau) -> (phi_H(h) b, tau-bar) with
/// tau-bar(i) = phi_G(g_{bi}) tau(i).
template <typename CoordinateApprox>
Permutation wreath_permutation(const Group& h_ctx, CoordinateApprox&& phi_g, const ApproximationMap& approx_h,
                               const WreathPointCodec& codec, const Element& u) {
  const WreathElement& w = u.as_wreath();
  const Permutation top = approx_h.evaluate(w.top());
  const auto& b = codec.b();
  const std::size_t nb = codec.b_size();
  const std::size_t na = codec.a_size();
  if (top.size() != nb) throw ApproximationError("acting-group approximation does not act on B");

  std::vector<Permutation::Point> images(codec.size());
  std::vector<const Permutation*> column(nb);
  std::vector<std::size_t> digits(nb);
  for (std::size_t bi = 0; bi < nb; ++bi) {
    for (std::size_t i = 0; i < nb; ++i) {
      column[i] = &phi_g(w.coordinate(h_ctx.multiply(b[bi], b[i])));
      if (column[i]->size() != na) throw ApproximationError("coordinate-group approximation does not act on A");
    }
    std::fill(digits.begin(), digits.end(), 0);
    std::uint64_t out = top(bi) * codec.fiber_size();
    for (std::size_t i = 0; i < nb; ++i) out += (*column[i])(0) * codec.weight(i);
    const std::uint64_t in_base = bi * codec.fiber_size();
    for (std::uint64_t t = 0; t < codec.fiber_size(); ++t) {
      images[in_base + t] = static_cast<Permutation::Point>(out);
      // Odometer step on tau, least significant digit last.
      std::size_t pos = nb;
      while (pos > 0) {
        --pos;
        const std::size_t old = digits[pos];
        const std::size_t next = old + 1 == na ? 0 : old + 1;
        digits[pos] = next;
        out = out - (*column[pos])(old) * codec.weight(pos) + (*column[pos])(next) * codec.weight(pos);
        if (next != 0) break;
      }
    }
  }
  return Permutation(std::move(images));
}

struct WreathBuildOptions {
  std::uint64_t point_cap = kDefaultPointCap;
  /// Indices scanned for the separating set; defaults to the ball whose radius
  /// covers B^-1 B and the supports of K (all of H when H is finite).
  std::optional<std::vector<Element>> separating_candidates;
};

/// Output of build_wreath: the approximation on C plus the data it was built from.
struct WreathApproximation {
  ApproximationMap map;
  WreathPointCodec codec;
  std::vector<Element> separating;  ///< I
  std::vector<Element> k_h;         ///< pi_2(K) u I
  std::vector<Element> k_g;         ///< support window of K over B^-1 B
};

namespace detail {

inline std::vector<Element> default_separating_candidates(const WreathGroup& w, const std::vector<Element>& k,
                                                          const std::vector<Element>& b) {
  const Group& h = *w.acting();
  if (h.finite()) return h.elements();
  std::vector<Element> pool = difference_set(h, b);
  for (const auto& u : k) {
    const auto& a = u.as_wreath();
    if (a.finite_support()) {
      for (const auto& [x, value] : a.entries()) pool.push_back(x);
    }
  }
  if (h.family() == Family::integers || h.family() == Family::lattice) {
    Integer radius = 0;
    for (const auto& x : pool) radius = std::max(radius, element_norm(h, x));
    return ball(h, radius.convert_to<std::uint64_t>());
  }
  pool.push_back(h.identity());
  return canonical_set(std::move(pool));
}

inline std::vector<Element> with_identity(const Group& ctx, std::vector<Element> k) {
  k.push_back(ctx.identity());
  return canonical_set(std::move(k));
}

}  // namespace detail

/// K (with identity), I, K_H and K_G for a build over the point labels B of
/// approx_h; checks the preconditions shared by the permutation and unitary
/// constructions.
struct WreathPlan {
  std::vector<Element> k;
  std::vector<Element> b;
  std::vector<Element> separating;
  std::vector<Element> k_h;
  std::vector<Element> k_g;
};

template <typename DefinedG>
WreathPlan plan_wreath(const WreathGroup& w, const std::vector<Element>& k, const ApproximationMap& approx_h,
                       const std::optional<std::vector<Element>>& candidates, DefinedG&& defined_g) {
  const Group& h = *w.acting();
  for (const auto& u : k) {
    if (!w.contains(u)) throw GroupError("K element is not in " + w.spec());
  }
  WreathPlan plan;
  plan.k = detail::with_identity(w, k);

  plan.b = approx_h.points().labels;
  const auto& b = plan.b;
  if (b.empty()) throw ApproximationError("acting-group approximation carries no Følner point labels");
  if (!std::is_sorted(b.begin(), b.end())) throw ApproximationError("Følner point labels are not in canonical order");
  for (const auto& x : b) {
    if (!std::binary_search(b.begin(), b.end(), h.inverse(x))) {
      throw ApproximationError("B is not symmetric: missing the inverse of " + h.format(x));
    }
  }

  plan.separating = separating_set(w, plan.k, candidates ? *candidates : detail::default_separating_candidates(w, plan.k, b));
  plan.k_h = plan.separating;
  for (const auto& u : plan.k) plan.k_h.push_back(project2(u));
  plan.k_h = canonical_set(std::move(plan.k_h));
  for (const auto& x : plan.k_h) {
    if (!approx_h.defined_at(x)) throw ApproximationError("acting-group approximation misses K_H element " + h.format(x));
  }
  plan.k_g = support_window(w, plan.k, b);
  for (const auto& g : plan.k_g) {
    if (!defined_g(g)) throw ApproximationError("coordinate-group approximation misses K_G element " + w.inner()->format(g));
  }
  return plan;
}

/// The wreath-product approximation on C = B x A^B, for K (augmented with the
/// identity) and every pairwise product of K.
inline WreathApproximation build_wreath(const ApproximationMap& approx_g, const ApproximationMap& approx_h,
                                        const std::vector<Element>& k, const WreathBuildOptions& options = {}) {
  auto wctx = std::make_shared<const WreathGroup>(approx_g.source(), approx_h.source());
  const WreathGroup& w = *wctx;
  auto plan = plan_wreath(w, k, approx_h, options.separating_candidates,
                          [&](const Element& g) { return approx_g.defined_at(g); });
  WreathPointCodec codec(plan.b, approx_g.points().size, options.point_cap);

  std::map<Element, Permutation> cache;
  auto phi_g = [&](const Element& g) -> const Permutation& {
    auto it = cache.find(g);
    if (it == cache.end()) it = cache.emplace(g, approx_g.evaluate(g)).first;
    return it->second;
  };

  ApproximationMap map(wctx, plan.k, PointSet{"C", static_cast<std::size_t>(codec.size()), {}});
  for (const auto& u : product_closure(map.k(), w)) {
    map.assign(u, wreath_permutation(*w.acting(), phi_g, approx_h, codec, u));
  }
  map.provenance().builder = "wreath";
  map.provenance().folner = approx_h.provenance().folner;
  return WreathApproximation{std::move(map), std::move(codec), std::move(plan.separating), std::move(plan.k_h),
                             std::move(plan.k_g)};
}

struct PredictedBounds {
  Rational defect_bound;     ///< 1 - (1 - eps_H)(1 - eps_G)^|B|
  Rational sep_top_differs;  ///< 1 - eps_H
  Rational sep_top_equal;    ///< (1 - eps_H)(1 - eps_G)
};

inline PredictedBounds predicted_bounds(const Rational& eps_h, const Rational& eps_g, std::size_t b_size) {
  const Rational keep_h = 1 - eps_h;
  const Rational keep_g = 1 - eps_g;
  return {1 - keep_h * pow(keep_g, b_size), keep_h, keep_h * keep_g};
}

/// Whether p = beta x sigma for permutations beta of B and sigma of A^B, i.e.
/// the B-part of p(b, tau) ignores tau and the A^B-part ignores b.
inline bool diagonality_test(const Permutation& p, const WreathPointCodec& codec) {
  if (p.size() != codec.size()) throw ApproximationError("permutation does not act on C");
  const std::uint64_t fiber = codec.fiber_size();
  for (std::uint64_t bi = 0; bi < codec.b_size(); ++bi) {
    const std::uint64_t first_block = p(bi * fiber) / fiber;
    for (std::uint64_t t = 0; t < fiber; ++t) {
      const std::uint64_t image = p(bi * fiber + t);
      if (image / fiber != first_block) return false;
      if (image % fiber != p(t) % fiber) return false;
    }
  }
  return true;
}

/// Separation measured separately over pairs with different and with equal
/// top components.
struct SeparationCases {
  std::optional<Rational> top_differs;
  std::optional<Rational> top_equal;
};

inline SeparationCases separation_cases(const ApproximationMap& map) {
  SeparationCases out;
  const auto& k = map.k();
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      Rational d = hamming(map.at(k[i]), map.at(k[j]));
      auto& slot = project2(k[i]) == project2(k[j]) ? out.top_equal : out.top_differs;
      if (!slot || d < *slot) slot = d;
    }
  }
  return out;
}

struct WreathCertificate {
  Certificate certificate;
  EpsilonBudget budget;
  PredictedBounds predicted;
  SeparationCases cases;
  /// Measured values respect the predicted bounds (exact comparison).
  bool bounds_hold = false;
};

inline WreathCertificate certify_wreath(const WreathApproximation& build, const Rational& eps,
                                        const EpsilonBudget& budget) {
  WreathCertificate out;
  out.certificate = certify(build.map, eps);
  out.budget = budget;
  out.predicted = predicted_bounds(budget.eps_h, budget.eps_g, build.codec.b_size());
  out.cases = separation_cases(build.map);
  out.bounds_hold = out.certificate.defect <= out.predicted.defect_bound &&
                    (!out.cases.top_differs || *out.cases.top_differs >= out.predicted.sep_top_differs) &&
                    (!out.cases.top_equal || *out.cases.top_equal >= out.predicted.sep_top_equal);
  return out;
}

/// Approximation of a supported group: regular representation when finite,
/// Følner construction in Z and Z^d.
inline ApproximationMap approximate_group(const GroupContext& ctx, const std::vector<Element>& k, const Rational& eps) {
  if (ctx->finite()) return build_finite_regular(ctx, k);
  return build_amenable(ctx, folner_search(*ctx, k, eps), k);
}

namespace detail {

/// Separating candidates and K_H = pi_2(K) u I, computed before B is known:
/// all of H when finite, otherwise the supports of K together with e_H.
inline std::pair<std::vector<Element>, std::vector<Element>> acting_window(
    const WreathGroup& w, const std::vector<Element>& kk, const std::optional<std::vector<Element>>& given) {
  const Group& h = *w.acting();
  std::vector<Element> candidates;
  if (given) {
    candidates = *given;
  } else if (h.finite()) {
    candidates = h.elements();
  } else {
    candidates.push_back(h.identity());
    for (const auto& u : kk) {
      const auto& a = u.as_wreath();
      if (!a.finite_support()) throw ApproximationError("rule-based K over infinite H needs explicit separating candidates");
      for (const auto& [x, value] : a.entries()) candidates.push_back(x);
    }
  }
  candidates = canonical_set(std::move(candidates));
  std::vector<Element> k_h = separating_set(w, kk, candidates);
  for (const auto& u : kk) k_h.push_back(project2(u));
  return {std::move(candidates), canonical_set(std::move(k_h))};
}

}  // namespace detail

struct WreathPipelineResult {
  ApproximationMap approx_g;
  ApproximationMap approx_h;
  WreathApproximation build;
  WreathCertificate certificate;
};

/// Full construction for K in G wr wr H at tolerance eps: separating set,
/// budget, Følner set of H, coordinate approximation of G, the map on C, and
/// its exact certificate.
inline WreathPipelineResult approximate_wreath(const WreathGroup& w, const std::vector<Element>& k, const Rational& eps,
                                               WreathBuildOptions options = {}) {
  detail::check_epsilon(eps);
  const auto kk = detail::with_identity(w, k);
  const GroupContext& g = w.inner();
  const GroupContext& h = w.acting();

  auto [candidates, k_h] = detail::acting_window(w, kk, options.separating_candidates);
  options.separating_candidates = std::move(candidates);

  const Rational eps_h = eps / 2;
  auto folner = folner_search(*h, k_h, eps_h);
  const std::size_t b_size = folner.size();
  auto bud = budget(eps, b_size);

  ApproximationMap approx_h = build_amenable(h, folner, k_h);
  auto k_g = support_window(w, kk, folner.elements);
  if (!g->finite() && g->family() != Family::integers && g->family() != Family::lattice) {
    throw GroupError("no approximation builder for coordinate group " + g->spec());
  }
  ApproximationMap approx_g = approximate_group(g, k_g, bud.eps_g);
  auto build = build_wreath(approx_g, approx_h, kk, options);
  auto cert = certify_wreath(build, eps, bud);
  return {std::move(approx_g), std::move(approx_h), std::move(build), std::move(cert)};
}

}  // namespace sofic
