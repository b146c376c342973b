#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "sofic/errors.hpp"
#include "sofic/group.hpp"
#include "sofic/rational.hpp"

namespace sofic {

/// Largest Følner set the search will materialize.
inline constexpr std::uint64_t kFolnerSizeLimit = 10'000'000;

struct BoundaryRatio {
  Element s;
  Integer outside;  ///< |F \ sF|
  Rational ratio;   ///< |F \ sF| / |F|
};

/// A finite subset of a group together with its boundary report against the
/// enlarged set S = ({e} u K u K^-1)^2.
struct FolnerSet {
  std::vector<Element> elements;  ///< canonical order, no duplicates
  bool symmetric = false;
  std::vector<Element> enlarged;  ///< S
  Rational epsilon;
  Rational epsilon_prime;  ///< epsilon / |S|
  std::vector<BoundaryRatio> ratios;

  std::size_t size() const noexcept { return elements.size(); }

  Rational worst_ratio() const {
    Rational worst(0);
    for (const auto& r : ratios) worst = std::max(worst, r.ratio);
    return worst;
  }
  bool ratios_pass() const {
    return std::all_of(ratios.begin(), ratios.end(), [&](const auto& r) { return r.ratio < epsilon_prime; });
  }
};

enum class FolnerFailure { none, asymmetric, ratio };

struct FolnerVerdict {
  FolnerSet set;
  FolnerFailure failure = FolnerFailure::none;
  std::optional<Element> witness;  ///< an offending s, or an f with f^-1 not in F

  bool ok() const noexcept { return failure == FolnerFailure::none; }
};

/// S = ({e} u K u K^-1)^2, deduplicated, canonical order.
inline std::vector<Element> enlarge(const std::vector<Element>& k, const Group& ctx) {
  std::vector<Element> base{ctx.identity()};
  for (const auto& x : k) {
    base.push_back(x);
    base.push_back(ctx.inverse(x));
  }
  base = canonical_set(std::move(base));
  std::vector<Element> s;
  s.reserve(base.size() * base.size());
  for (const auto& a : base) {
    for (const auto& b : base) s.push_back(ctx.multiply(a, b));
  }
  return canonical_set(std::move(s));
}

namespace detail {

inline void check_epsilon(const Rational& eps) {
  if (eps <= 0 || eps >= 1) throw ApproximationError("epsilon must lie strictly between 0 and 1, got " + to_string(eps));
}

}  // namespace detail

/// Exact boundary report for a candidate F. Succeeds iff F = F^-1 and
/// |F \ sF| < eps' |F| for every s in S.
inline FolnerVerdict folner_verify(std::vector<Element> f, const std::vector<Element>& k, const Rational& eps,
                                   const Group& ctx) {
  detail::check_epsilon(eps);
  FolnerVerdict verdict;
  FolnerSet& set = verdict.set;
  set.elements = canonical_set(std::move(f));
  if (set.elements.empty()) throw ApproximationError("a Følner set must be nonempty");
  auto member = [&](const Element& x) { return std::binary_search(set.elements.begin(), set.elements.end(), x); };

  set.symmetric = true;
  for (const auto& x : set.elements) {
    if (!member(ctx.inverse(x))) {
      set.symmetric = false;
      verdict.failure = FolnerFailure::asymmetric;
      verdict.witness = x;
      break;
    }
  }

  set.enlarged = enlarge(k, ctx);
  set.epsilon = eps;
  set.epsilon_prime = eps / Rational(static_cast<long long>(set.enlarged.size()));
  const Rational size(static_cast<long long>(set.elements.size()));
  for (const auto& s : set.enlarged) {
    // f lies in sF iff s^-1 f lies in F.
    const Element s_inv = ctx.inverse(s);
    Integer outside = 0;
    for (const auto& x : set.elements) outside += member(ctx.multiply(s_inv, x)) ? 0 : 1;
    Rational ratio = Rational(outside) / size;
    if (verdict.failure == FolnerFailure::none && ratio >= set.epsilon_prime) {
      verdict.failure = FolnerFailure::ratio;
      verdict.witness = s;
    }
    set.ratios.push_back({s, outside, std::move(ratio)});
  }
  return verdict;
}

namespace detail {

/// |F \ sF| / |F| for the centered box [-n, n]^d and a translation s.
inline Rational box_ratio(const std::vector<Integer>& s, const Integer& n) {
  Integer side = 2 * n + 1;
  Integer inside = 1;
  Integer total = 1;
  for (const auto& c : s) {
    Integer a = c < 0 ? Integer(-c) : c;
    inside *= a >= side ? Integer(0) : Integer(side - a);
    total *= side;
  }
  return Rational(total - inside, total);
}

inline Integer minimal_box_radius(const std::vector<std::vector<Integer>>& translations, const Rational& eps_prime) {
  auto adequate = [&](const Integer& n) {
    return std::all_of(translations.begin(), translations.end(),
                       [&](const auto& s) { return box_ratio(s, n) < eps_prime; });
  };
  // The ratios decrease in n, so the first adequate radius is found by
  // doubling and then bisecting; it equals the first hit of a linear scan.
  Integer hi = 1;
  while (!adequate(hi)) hi *= 2;
  if (adequate(Integer(0))) return 0;
  Integer lo = 0;  // inadequate
  while (hi - lo > 1) {
    Integer mid = (lo + hi) / 2;
    if (adequate(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

/// Symmetric Følner set for K at tolerance eps in a supported amenable family:
/// the whole group when finite, the minimal centered interval [-n, n] in Z,
/// the minimal centered box in Z^d.
inline FolnerSet folner_search(const Group& ctx, const std::vector<Element>& k, const Rational& eps) {
  detail::check_epsilon(eps);
  std::vector<Element> candidate;
  if (ctx.finite()) {
    candidate = ctx.elements();
  } else if (ctx.family() == Family::integers || ctx.family() == Family::lattice) {
    const bool scalar = ctx.family() == Family::integers;
    const auto s = enlarge(k, ctx);
    const Rational eps_prime = eps / Rational(static_cast<long long>(s.size()));
    std::vector<std::vector<Integer>> translations;
    for (const auto& x : s) {
      if (scalar) {
        translations.push_back({x.as_integer()});
      } else {
        translations.push_back(static_cast<const LatticeGroup&>(ctx).coords(x));
      }
    }
    const std::size_t d = scalar ? 1 : static_cast<const LatticeGroup&>(ctx).rank();
    const Integer n = detail::minimal_box_radius(translations, eps_prime);
    if (boost::multiprecision::pow(Integer(2 * n + 1), static_cast<unsigned>(d)) > kFolnerSizeLimit) {
      throw CapExceeded("Følner box of radius " + n.str() + " in " + ctx.spec() + " exceeds the size limit");
    }
    const long long radius = n.convert_to<long long>();
    std::vector<long long> digits(d, -radius);
    for (;;) {
      if (scalar) {
        candidate.push_back(Element::integer(digits[0]));
      } else {
        candidate.push_back(LatticeGroup::make(std::vector<Integer>(digits.begin(), digits.end())));
      }
      std::size_t pos = d;
      while (pos > 0 && digits[pos - 1] == radius) digits[--pos] = -radius;
      if (pos == 0) break;
      ++digits[pos - 1];
    }
  } else {
    throw GroupError("no Følner search for " + ctx.spec() + "; supply a candidate set and use folner_verify");
  }
  auto verdict = folner_verify(std::move(candidate), k, eps, ctx);
  if (!verdict.ok()) throw ApproximationError("internal: searched Følner set failed verification");
  return std::move(verdict.set);
}

}  // namespace sofic
