#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sofic/errors.hpp"

namespace sofic {

/// A bijection of {0, ..., n-1}, stored as its image array.
class Permutation {
 public:
  using Point = std::uint32_t;

  Permutation() = default;

  explicit Permutation(std::vector<Point> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (Point p : images_) {
      if (p >= images_.size() || seen[p]) throw ApproximationError("image array is not a bijection");
      seen[p] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<Point> images(n);
    std::iota(images.begin(), images.end(), Point{0});
    return Permutation(std::move(images), Unchecked{});
  }

  std::size_t size() const noexcept { return images_.size(); }
  Point operator()(std::size_t f) const { return images_[f]; }
  std::span<const Point> images() const noexcept { return images_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (images_[i] != i) return false;
    }
    return true;
  }

  Permutation inverse() const {
    std::vector<Point> inv(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<Point>(i);
    return Permutation(std::move(inv), Unchecked{});
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

  /// (a * b)(f) = a(b(f)).
  friend Permutation operator*(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw ApproximationError("composing permutations of different sizes");
    std::vector<Point> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.images_[b.images_[i]];
    return Permutation(std::move(out), Unchecked{});
  }

 private:
  struct Unchecked {};
  Permutation(std::vector<Point> images, Unchecked) : images_(std::move(images)) {}

  std::vector<Point> images_;
};

}  // namespace sofic
