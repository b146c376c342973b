#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "sofic/approximation.hpp"
#include "sofic/errors.hpp"
#include "sofic/metric.hpp"
#include "sofic/wreath_approx.hpp"

namespace sofic {

/// Largest dense dimension the unitary constructions will allocate.
inline constexpr std::uint64_t kDefaultDimensionCap = 4096;

/// A finite partial map from group elements to unitaries of one dimension.
class UnitaryApprox {
 public:
  using Extender = std::function<UnitaryMatrix(const Element&)>;

  UnitaryApprox(GroupContext source, std::vector<Element> k, std::size_t dimension)
      : source_(std::move(source)), k_(canonical_set(std::move(k))), dimension_(dimension) {}

  const GroupContext& source() const noexcept { return source_; }
  const std::vector<Element>& k() const noexcept { return k_; }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& builder() const noexcept { return builder_; }
  void set_builder(std::string b) { builder_ = std::move(b); }

  void assign(Element g, UnitaryMatrix u) {
    if (u.dimension() != dimension_) {
      throw ApproximationError("assigned unitary has dimension " + std::to_string(u.dimension()) + ", expected " +
                               std::to_string(dimension_));
    }
    assignment_.insert_or_assign(std::move(g), std::move(u));
  }

  void set_extender(Extender e) { extender_ = std::move(e); }
  bool defined_at(const Element& g) const { return assignment_.count(g) != 0; }

  const UnitaryMatrix& at(const Element& g) const {
    auto it = assignment_.find(g);
    if (it == assignment_.end()) throw ApproximationError("no unitary assigned to " + source_->format(g));
    return it->second;
  }

  UnitaryMatrix evaluate(const Element& g) const {
    auto it = assignment_.find(g);
    if (it != assignment_.end()) return it->second;
    if (extender_) return extender_(g);
    throw ApproximationError("no unitary assigned to " + source_->format(g) + " and no extension rule");
  }

  const std::map<Element, UnitaryMatrix>& assignment() const noexcept { return assignment_; }

 private:
  GroupContext source_;
  std::vector<Element> k_;
  std::size_t dimension_;
  std::string builder_;
  std::map<Element, UnitaryMatrix> assignment_;
  Extender extender_;
};

/// Permutation matrices of every assigned permutation.
inline UnitaryApprox lift_perm_approx(const ApproximationMap& a) {
  UnitaryApprox out(a.source(), a.k(), a.points().size);
  for (const auto& [g, p] : a.assignment()) out.assign(g, perm_to_unitary(p));
  if (a.has_extender()) {
    out.set_extender([a](const Element& g) { return perm_to_unitary(a.evaluate(g)); });
  }
  out.set_builder("lift(" + a.provenance().builder + ")");
  return out;
}

/// One-dimensional character k -> exp(2 pi i k / n) of the cyclic group C(n).
inline UnitaryApprox cyclic_character_approx(GroupContext ctx, const std::vector<Element>& k) {
  if (ctx->family() != Family::cyclic) throw GroupError("a cyclic character needs a cyclic group, got " + ctx->spec());
  const auto n = static_cast<double>(ctx->order().convert_to<std::uint64_t>());
  auto chi = [ctx, n](const Element& g) {
    if (!ctx->contains(g)) throw GroupError("element is not in " + ctx->spec());
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(g.as_index()) / n;
    UnitaryMatrix::Matrix m(1, 1);
    m(0, 0) = std::polar(1.0, angle);
    return UnitaryMatrix(std::move(m));
  };
  UnitaryApprox out(ctx, k, 1);
  for (const auto& g : product_closure(out.k(), *ctx)) out.assign(g, chi(g));
  out.set_extender(chi);
  out.set_builder("character");
  return out;
}

/// eps_H = eps^2/8 and eps_G the largest dyadic k/2^64 in [0, 1] with
///   sqrt(|B|/(|B|+n^|B|) eps_H^2 + n^|B|/(|B|+n^|B|) eps_G^(2|B|)) < eps,
/// evaluated in the equivalent squared form in exact arithmetic.
inline EpsilonBudget hs_budget(const Rational& eps, std::size_t b_size, std::size_t n) {
  detail::check_epsilon(eps);
  if (b_size == 0 || n == 0) throw ApproximationError("hs_budget needs |B| >= 1 and n >= 1");
  EpsilonBudget out;
  out.eps_h = eps * eps / 8;
  const Rational weight_b(static_cast<long long>(b_size));
  const Rational weight_n(boost::multiprecision::pow(Integer(n), static_cast<unsigned>(b_size)));
  const Rational bound = eps * eps * (weight_b + weight_n);
  auto holds = [&](const Rational& x) {
    return weight_b * out.eps_h * out.eps_h + weight_n * pow(x, 2 * b_size) < bound;
  };
  out.eps_g = holds(Rational(1)) ? Rational(1) : bisect_dyadic(Rational(0), Rational(1), kBudgetHalvings, holds);
  if (out.eps_g == 0) throw ApproximationError("no positive dyadic eps_G at 64 halvings");
  return out;
}

/// The root-mean expression bounded by eps in the budget, as a double.
inline double hs_predicted(const EpsilonBudget& b, std::size_t b_size, std::size_t n) {
  const double wb = static_cast<double>(b_size);
  const double wn = std::pow(static_cast<double>(n), static_cast<double>(b_size));
  const double eh = to_double(b.eps_h);
  const double eg = to_double(b.eps_g);
  return std::sqrt((wb * eh * eh + wn * std::pow(eg, 2.0 * static_cast<double>(b_size))) / (wb + wn));
}

struct HyperlinearWreath {
  UnitaryApprox map;
  WreathPointCodec codec;  ///< basis identification (b, i_1, ..., i_|B|)
  std::vector<Element> separating;
  std::vector<Element> k_h;
  std::vector<Element> k_g;
};

struct HyperlinearBuildOptions {
  std::uint64_t dimension_cap = kDefaultDimensionCap;
  std::optional<std::vector<Element>> separating_candidates;
};

/// Unitary of (g, h) on the tensor space C^B (x) (C^n)^(x)|B|: the basis
/// vector (b, w_1 (x) ... (x) w_|B|) goes to
/// (phi_H(h) b, theta_G(g_{b j_1}) w_1 (x) ... (x) theta_G(g_{b j_|B|}) w_|B|).
template <typename CoordinateUnitary>
UnitaryMatrix wreath_unitary(const Group& h_ctx, CoordinateUnitary&& theta_g, const ApproximationMap& approx_h,
                             const WreathPointCodec& codec, const Element& u) {
  const WreathElement& w = u.as_wreath();
  const Permutation top = approx_h.evaluate(w.top());
  const auto& b = codec.b();
  const auto fiber = static_cast<Eigen::Index>(codec.fiber_size());
  const auto dim = static_cast<Eigen::Index>(codec.size());
  UnitaryMatrix::Matrix m = UnitaryMatrix::Matrix::Zero(dim, dim);
  for (std::size_t bi = 0; bi < b.size(); ++bi) {
    UnitaryMatrix::Matrix block = UnitaryMatrix::Matrix::Identity(1, 1);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const UnitaryMatrix& factor = theta_g(w.coordinate(h_ctx.multiply(b[bi], b[j])));
      if (factor.dimension() != codec.a_size()) {
        throw ApproximationError("coordinate-group unitary has the wrong dimension");
      }
      UnitaryMatrix::Matrix next = Eigen::kroneckerProduct(block, factor.matrix());
      block = std::move(next);
    }
    m.block(static_cast<Eigen::Index>(top(bi)) * fiber, static_cast<Eigen::Index>(bi) * fiber, fiber, fiber) = block;
  }
  return UnitaryMatrix::assume_unitary(std::move(m));
}

/// Unitary approximation of G wr wr H from a unitary approximation of G and a
/// Følner permutation approximation of H.
inline HyperlinearWreath build_hyperlinear_wreath(const UnitaryApprox& theta_g, const ApproximationMap& approx_h,
                                                  const std::vector<Element>& k,
                                                  const HyperlinearBuildOptions& options = {}) {
  auto wctx = std::make_shared<const WreathGroup>(theta_g.source(), approx_h.source());
  const WreathGroup& w = *wctx;
  auto plan = plan_wreath(w, k, approx_h, options.separating_candidates,
                          [&](const Element& g) { return theta_g.defined_at(g); });
  WreathPointCodec codec(plan.b, theta_g.dimension(), options.dimension_cap);

  std::map<Element, UnitaryMatrix> cache;
  auto theta = [&](const Element& g) -> const UnitaryMatrix& {
    auto it = cache.find(g);
    if (it == cache.end()) it = cache.emplace(g, theta_g.evaluate(g)).first;
    return it->second;
  };

  UnitaryApprox map(wctx, plan.k, static_cast<std::size_t>(codec.size()));
  for (const auto& u : product_closure(map.k(), w)) map.assign(u, wreath_unitary(*w.acting(), theta, approx_h, codec, u));
  map.set_builder("hyperlinear-wreath");
  return HyperlinearWreath{std::move(map), std::move(codec), std::move(plan.separating), std::move(plan.k_h),
                           std::move(plan.k_g)};
}

inline constexpr double kHsTolerance = 1e-9;

struct HsWitness {
  std::string condition;  ///< "h1" or "h2"
  Element first;
  Element second;
  double value;
};

/// Measurement against (h1)/(h2); comparisons allow kHsTolerance.
struct HsCertificate {
  std::vector<Element> k;
  Rational epsilon;
  std::size_t dimension = 0;
  double defect = 0.0;
  std::optional<std::pair<Element, Element>> defect_pair;
  std::optional<double> separation;
  std::optional<std::pair<Element, Element>> separation_pair;
  bool defect_pass = false;
  bool separation_pass = false;
  std::vector<HsWitness> witnesses;

  bool pass() const noexcept { return defect_pass && separation_pass; }
};

inline HsCertificate certify_hs(const UnitaryApprox& ua, const Rational& eps) {
  if (eps < 0 || eps > 1) throw ApproximationError("epsilon must lie in [0, 1], got " + to_string(eps));
  const Group& g = *ua.source();
  const auto& k = ua.k();
  const double e = to_double(eps);
  const double sqrt2 = std::numbers::sqrt2;
  HsCertificate cert;
  cert.k = k;
  cert.epsilon = eps;
  cert.dimension = ua.dimension();
  for (const auto& a : k) {
    for (const auto& b : k) {
      const double d = hs_distance(ua.at(a) * ua.at(b), ua.at(g.multiply(a, b)));
      if (!cert.defect_pair || d > cert.defect) {
        cert.defect = d;
        cert.defect_pair = {a, b};
      }
      if (d > e + kHsTolerance) cert.witnesses.push_back({"h1", a, b, d});
    }
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      const double d = hs_distance(ua.at(k[i]), ua.at(k[j]));
      if (!cert.separation || d < *cert.separation) {
        cert.separation = d;
        cert.separation_pair = {k[i], k[j]};
      }
      if (d < sqrt2 - e - kHsTolerance) cert.witnesses.push_back({"h2", k[i], k[j], d});
    }
  }
  cert.defect_pass = cert.defect <= e + kHsTolerance;
  cert.separation_pass = !cert.separation || *cert.separation >= sqrt2 - e - kHsTolerance;
  return cert;
}

/// How the pipeline represents the coordinate group G.
enum class ThetaKind { regular, character };

struct HyperlinearPipelineResult {
  UnitaryApprox theta_g;
  ApproximationMap approx_h;
  HyperlinearWreath build;
  EpsilonBudget budget;
  double predicted = 0.0;
  HsCertificate certificate;
};

/// Unitary construction for K in G wr wr H with finite G: theta_G is the lifted
/// regular representation or a cyclic character.
inline HyperlinearPipelineResult approximate_hyperlinear_wreath(const WreathGroup& w, const std::vector<Element>& k,
                                                                const Rational& eps, ThetaKind theta,
                                                                HyperlinearBuildOptions options = {}) {
  detail::check_epsilon(eps);
  const GroupContext& g = w.inner();
  const GroupContext& h = w.acting();
  if (!g->finite()) throw GroupError("the unitary pipeline needs a finite coordinate group, got " + g->spec());
  const auto kk = detail::with_identity(w, k);
  auto [candidates, k_h] = detail::acting_window(w, kk, options.separating_candidates);
  options.separating_candidates = std::move(candidates);

  auto folner = folner_search(*h, k_h, eps * eps / 8);
  const std::size_t b_size = folner.size();
  const std::size_t n = theta == ThetaKind::regular ? g->order().convert_to<std::size_t>() : 1;
  auto bud = hs_budget(eps, b_size, n);

  ApproximationMap approx_h = build_amenable(h, folner, k_h);
  auto k_g = support_window(w, kk, folner.elements);
  UnitaryApprox theta_g = theta == ThetaKind::regular ? lift_perm_approx(build_finite_regular(g, k_g))
                                                      : cyclic_character_approx(g, k_g);
  auto build = build_hyperlinear_wreath(theta_g, approx_h, kk, options);
  auto cert = certify_hs(build.map, eps);
  const double predicted = hs_predicted(bud, b_size, n);
  return {std::move(theta_g), std::move(approx_h), std::move(build), bud, predicted, std::move(cert)};
}

}  // namespace sofic
