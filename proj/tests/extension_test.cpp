#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sofic/sofic.hpp"

using namespace sofic;

namespace {

Element idx(std::uint64_t i) { return Element::index(i); }
Element z(long long v) { return Element::integer(v); }

ExtensionDescriptor z4_over_z2() { return mod_extension(make_group("C(2)"), make_group("C(4)"), make_group("C(2)"), 2); }

// Homomorphism, injectivity and top-component checks of kk_embed over all of E.
void expect_faithful_embedding(const ExtensionDescriptor& ext) {
  const auto xs = ext.e->elements();
  auto s = choose_section(ext);
  WreathGroup w(ext.n, ext.q);
  std::vector<Element> images;
  for (const auto& x : xs) images.push_back(kk_embed(ext, s, w, x));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(project2(images[i]), ext.project(xs[i]));
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i < j) EXPECT_NE(images[i], images[j]);
      const auto k = sofic::detail::index_of(xs, ext.e->multiply(xs[i], xs[j]));
      ASSERT_EQ(images[k], w.multiply(images[i], images[j])) << ext.e->spec() << " " << ext.description;
    }
  }
}

std::string stage_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const StageError& e) {
    return e.stage();
  }
  return "";
}

}  // namespace

TEST(ExtensionDescriptor, ModAndProjectionMapsAreExactSequences) {
  EXPECT_FALSE(find_extension_violation(z4_over_z2()));
  EXPECT_FALSE(find_extension_violation(
      mod_extension(make_group("C(3)"), make_group("C(12)"), make_group("C(4)"), 4)));
  EXPECT_FALSE(find_extension_violation(
      projection_extension(make_group("C(3)"), make_group("product(C(3),S(3))"), make_group("S(3)"), 2)));
  EXPECT_FALSE(find_extension_violation(
      projection_extension(make_group("S(3)"), make_group("product(C(3),S(3))"), make_group("C(3)"), 1)));
}

TEST(ExtensionDescriptor, RejectsMismatchedGroups) {
  EXPECT_THROW(mod_extension(make_group("C(3)"), make_group("C(4)"), make_group("C(2)"), 2), GroupError);
  EXPECT_THROW(mod_extension(make_group("C(2)"), make_group("C(5)"), make_group("C(2)"), 2), GroupError);
  EXPECT_THROW(mod_extension(make_group("C(2)"), make_group("Z"), make_group("C(2)"), 2), GroupError);
  EXPECT_THROW(projection_extension(make_group("C(2)"), make_group("product(C(3),C(2))"), make_group("C(2)"), 1),
               GroupError);
  EXPECT_THROW(projection_extension(make_group("C(2)"), make_group("C(4)"), make_group("C(2)"), 1), GroupError);
}

TEST(ExtensionDescriptor, KernelIsBuiltWhenNIsOmitted) {
  auto e = make_group("C(6)");
  std::vector<Element> p;
  for (std::uint64_t x = 0; x < 6; ++x) p.push_back(idx(x % 3));
  auto ext = map_extension(e, make_group("C(3)"), p);
  EXPECT_EQ(ext.n->order(), 2);
  EXPECT_EQ(ext.n->spec(), "ker(C(6))");
  EXPECT_EQ(ext.include(idx(1)), idx(3));
  EXPECT_FALSE(find_extension_violation(ext));
}

TEST(ExtensionDescriptor, DetectsANonHomomorphicProjection) {
  auto e = make_group("C(4)");
  std::vector<Element> p{idx(0), idx(1), idx(1), idx(0)};
  EXPECT_THROW(map_extension(e, make_group("C(2)"), p), GroupError);
  auto ext = map_extension(e, make_group("C(2)"), p, make_group("C(2)"), {idx(0), idx(3)});
  ASSERT_TRUE(find_extension_violation(ext));
}

TEST(ExtensionDescriptor, QuotientRequiresNormality) {
  auto s3 = make_group("S(3)");
  EXPECT_THROW(quotient_extension(s3, {s3->identity(), s3->parse_element("[1,0,2]")}), GroupError);
  auto a3 = quotient_extension(s3, {s3->identity(), s3->parse_element("[1,2,0]"), s3->parse_element("[2,0,1]")});
  EXPECT_EQ(a3.q->order(), 2);
  EXPECT_FALSE(find_extension_violation(a3));
}

TEST(ChooseSection, SplitExtensionPicksTheCanonicalSplitting) {
  auto ext = projection_extension(make_group("C(2)"), make_group("product(C(2),C(3))"), make_group("C(3)"), 2);
  auto s = choose_section(ext);
  ASSERT_TRUE(s.tabulated());
  for (std::uint64_t q = 0; q < 3; ++q) EXPECT_EQ(s(idx(q)), ProductGroup::pair(idx(0), idx(q)));
}

TEST(ChooseSection, CyclicFirstPreimages) {
  auto s = choose_section(z4_over_z2());
  EXPECT_EQ(s(idx(0)), idx(0));
  EXPECT_EQ(s(idx(1)), idx(1));
}

TEST(ChooseSection, QuaternionOntoKleinFourGroup) {
  auto q8 = oracle::quaternion_group();
  auto ext = quotient_extension(q8, {idx(0), idx(1)});
  ASSERT_EQ(ext.q->order(), 4);
  // The quotient by {1, -1} has exponent 2.
  for (const auto& x : ext.q->elements()) EXPECT_EQ(ext.q->multiply(x, x), ext.q->identity());
  auto s = choose_section(ext);
  EXPECT_EQ(s.table().size(), 4U);
  for (const auto& [q, e] : s.table()) EXPECT_EQ(ext.project(e), q);
  EXPECT_EQ(s(ext.q->identity()), q8->identity());
}

TEST(ChooseSection, InfiniteEUsesTheRule) {
  auto ext = mod_extension(make_group("Z"), make_group("Z"), make_group("C(3)"), 3);
  auto s = choose_section(ext);
  EXPECT_FALSE(s.tabulated());
  EXPECT_EQ(s(idx(2)), z(2));
  ExtensionDescriptor broken = ext;
  broken.section_rule = [](const Element& q) { return z(static_cast<long long>(q.as_index()) + 1); };
  EXPECT_THROW(choose_section(broken), GroupError);
}

TEST(KkEmbed, IdentityGoesToTheIdentity) {
  auto ext = z4_over_z2();
  WreathGroup w(ext.n, ext.q);
  EXPECT_EQ(kk_embed(ext, choose_section(ext), w, idx(0)), w.identity());
}

TEST(KkEmbed, GeneratorOfZ4) {
  auto ext = z4_over_z2();
  auto s = choose_section(ext);
  WreathGroup w(ext.n, ext.q);
  auto one = kk_embed(ext, s, w, idx(1));
  EXPECT_EQ(project2(one), idx(1));
  // Coordinates (0, 2) in E, i.e. (0, 1) in N.
  EXPECT_EQ(ext.include(one.as_wreath().coordinate(idx(0))), idx(0));
  EXPECT_EQ(ext.include(one.as_wreath().coordinate(idx(1))), idx(2));
  auto two = kk_embed(ext, s, w, idx(2));
  EXPECT_EQ(w.multiply(one, one), two);
  EXPECT_EQ(two, w.make(idx(0), idx(0), {{idx(0), idx(1)}, {idx(1), idx(1)}}));
}

TEST(KkEmbed, ExhaustiveOracleOverSmallGroups) {
  for (const auto& e : {make_group("C(4)"), make_group("product(C(2),C(2))"), make_group("D(4)"),
                        oracle::quaternion_group(), make_group("S(3)")}) {
    for (const auto& normal : oracle::normal_subgroups(*e)) {
      auto ext = quotient_extension(e, normal);
      EXPECT_FALSE(find_extension_violation(ext));
      expect_faithful_embedding(ext);
    }
  }
}

TEST(KkEmbed, OrderSixteenExtensions) {
  expect_faithful_embedding(mod_extension(make_group("C(4)"), make_group("C(16)"), make_group("C(4)"), 4));
  expect_faithful_embedding(
      projection_extension(make_group("D(4)"), make_group("product(D(4),C(2))"), make_group("C(2)"), 2));
  auto d8 = make_group("D(8)");
  // Rotation subgroup and its index-4 subgroup <r^2>... only the normal ones.
  expect_faithful_embedding(quotient_extension(d8, {d8->parse_element("r0"), d8->parse_element("r4")}));
  std::vector<Element> rotations;
  for (int k = 0; k < 8; ++k) rotations.push_back(d8->parse_element("r" + std::to_string(k)));
  expect_faithful_embedding(quotient_extension(d8, rotations));
}

TEST(KkEmbed, NormalSubgroupMapsToTheIdentityCoordinate) {
  auto q8 = oracle::quaternion_group();
  auto ext = quotient_extension(q8, {idx(0), idx(1), idx(2), idx(3)});
  auto s = choose_section(ext);
  WreathGroup w(ext.n, ext.q);
  for (const auto& n : ext.n->elements()) {
    auto img = kk_embed(ext, s, w, ext.include(n));
    EXPECT_EQ(project2(img), ext.q->identity());
    EXPECT_EQ(img.as_wreath().coordinate(ext.q->identity()), n);
  }
}

TEST(KkEmbed, InfiniteQuotientGivesARuleBasedElement) {
  auto ext = projection_extension(make_group("C(3)"), make_group("product(C(3),Z)"), make_group("Z"), 2);
  auto s = choose_section(ext);
  WreathGroup w(ext.n, ext.q);
  auto a = ProductGroup::pair(idx(1), z(2));
  auto b = ProductGroup::pair(idx(2), z(-5));
  auto ia = kk_embed(ext, s, w, a);
  EXPECT_FALSE(ia.encodable());
  EXPECT_EQ(project2(ia), z(2));
  auto prod = w.multiply(ia, kk_embed(ext, s, w, b));
  auto direct = kk_embed(ext, s, w, ext.e->multiply(a, b));
  EXPECT_EQ(project2(prod), project2(direct));
  for (long long x = -6; x <= 6; ++x) {
    EXPECT_EQ(prod.as_wreath().coordinate(z(x)), direct.as_wreath().coordinate(z(x)));
    // For a direct product the coordinates are constant.
    EXPECT_EQ(ia.as_wreath().coordinate(z(x)), idx(1));
  }
}

TEST(KkEmbed, RejectsInvalidExtensionData) {
  auto ext = z4_over_z2();
  ext.kernel_preimage = [](const Element&) -> std::optional<Element> { return std::nullopt; };
  WreathGroup w(ext.n, ext.q);
  EXPECT_THROW(kk_embed(ext, choose_section(ext), w, idx(1)), GroupError);
  EXPECT_THROW(kk_embed(z4_over_z2(), choose_section(ext), w, idx(7)), GroupError);
}

TEST(ExtensionApprox, CyclicOfOrderFourOverZ2) {
  auto ext = z4_over_z2();
  auto r = extension_approx(ext, ext.e->elements(), Rational(1, 4));
  EXPECT_EQ(r.codec.size(), 8U);
  EXPECT_TRUE(r.certificate.pass());
  EXPECT_EQ(r.certificate.defect, 0);
  EXPECT_EQ(*r.certificate.separation, 1);
  EXPECT_EQ(r.map.source()->spec(), "C(4)");
  EXPECT_EQ(r.images.size(), 4U);
}

TEST(ExtensionApprox, SplitExtensionEqualsTheWreathRestriction) {
  auto ext = projection_extension(make_group("C(2)"), make_group("product(C(2),C(2))"), make_group("C(2)"), 2);
  auto r = extension_approx(ext, ext.e->elements(), Rational(1, 4));
  auto s = choose_section(ext);
  std::vector<Element> images;
  for (const auto& d : r.map.k()) images.push_back(kk_embed(ext, s, *r.wreath, d));
  auto build = build_wreath(build_finite_regular(ext.n, ext.n->elements()),
                            build_finite_regular(ext.q, ext.q->elements()), images);
  for (const auto& [d, p] : r.map.assignment()) {
    EXPECT_EQ(p, build.map.at(kk_embed(ext, s, *r.wreath, d))) << ext.e->format(d);
  }
  EXPECT_TRUE(r.certificate.pass());
}

TEST(ExtensionApprox, SymmetricKernelOverC3) {
  auto e = make_group("product(S(3),C(3))");
  auto ext = projection_extension(make_group("S(3)"), e, make_group("C(3)"), 2);
  const auto s3 = make_group("S(3)");
  std::vector<Element> k{ProductGroup::pair(s3->parse_element("[1,0,2]"), idx(0)),
                         ProductGroup::pair(s3->parse_element("[1,2,0]"), idx(0)),
                         ProductGroup::pair(s3->identity(), idx(1))};
  auto r = extension_approx(ext, k, Rational(1, 10));
  EXPECT_EQ(r.codec.size(), 648U);
  EXPECT_TRUE(r.certificate.pass());
  EXPECT_EQ(r.certificate.defect, 0);
}

TEST(ExtensionApprox, NonSplitQuaternionExtension) {
  auto q8 = oracle::quaternion_group();
  auto ext = quotient_extension(q8, {idx(0), idx(1)});
  auto r = extension_approx(ext, q8->elements(), Rational(1, 10));
  EXPECT_EQ(r.codec.size(), 4U * 16U);
  EXPECT_TRUE(r.certificate.pass());
  EXPECT_EQ(*r.certificate.separation, 1);
}

TEST(ExtensionApprox, InfiniteKernel) {
  auto ext = mod_extension(make_group("Z"), make_group("Z"), make_group("C(2)"), 2);
  auto r = extension_approx(ext, {z(1), z(-1)}, Rational(1, 2));
  EXPECT_EQ(r.approx_n.provenance().builder, "amenable");
  EXPECT_EQ(r.codec.b_size(), 2U);
  EXPECT_TRUE(r.certificate.pass());
  EXPECT_LE(r.certificate.defect, r.predicted.defect_bound);
}

TEST(ExtensionApprox, ErrorsCarryTheirStage) {
  auto ext = z4_over_z2();
  EXPECT_EQ(stage_of([&] { extension_approx(ext, {idx(1)}, Rational(0)); }), "validate");
  EXPECT_EQ(stage_of([&] { extension_approx(ext, {idx(9)}, Rational(1, 2)); }), "validate");
  auto broken = ext;
  broken.kernel_preimage = [](const Element&) -> std::optional<Element> { return std::nullopt; };
  EXPECT_EQ(stage_of([&] { extension_approx(broken, {idx(1)}, Rational(1, 2)); }), "embed");
  ExtensionOptions tight;
  tight.point_cap = 7;
  EXPECT_EQ(stage_of([&] { extension_approx(ext, {idx(1)}, Rational(1, 2), tight); }), "wreath");
  auto infinite_q = projection_extension(make_group("C(2)"), make_group("product(C(2),Z)"), make_group("Z"), 2);
  EXPECT_EQ(stage_of([&] { extension_approx(infinite_q, {ProductGroup::pair(idx(1), z(1))}, Rational(1, 4)); }),
            "wreath");
}
