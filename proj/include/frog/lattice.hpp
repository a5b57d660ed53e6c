#ifndef FROG_LATTICE_HPP
#define FROG_LATTICE_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace frog {

inline constexpr int kMaxDim = 3;

/// A point of Z^d, d in {1,2,3}. Unused trailing coordinates are kept at zero
/// so that value comparison and hashing never depend on garbage.
struct Site {
  std::array<std::int32_t, kMaxDim> c{};
  std::int32_t dim = 0;

  Site() = default;
  Site(std::initializer_list<std::int32_t> coords);
  static Site origin(int d);
  /// Unit vector along `axis` (0-based) in dimension d.
  static Site unit(int d, int axis, int sign = 1);

  std::int32_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  std::int32_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
};

Site operator+(const Site& a, const Site& b);
Site operator-(const Site& a, const Site& b);

std::int64_t l1_norm(const Site& x);
inline std::int64_t l1_distance(const Site& a, const Site& b) { return l1_norm(a - b); }

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

/// Finite set of sites sharing one dimension, stored sorted and unique.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(int dim) : dim_(dim) {}
  SiteSet(int dim, std::vector<Site> members);
  SiteSet(int dim, std::initializer_list<Site> members);

  int dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const Site& x) const;
  std::span<const Site> members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  bool is_subset_of(const SiteSet& other) const;
  SiteSet united(const SiteSet& other) const;

  friend bool operator==(const SiteSet&, const SiteSet&) = default;

 private:
  int dim_ = 0;
  std::vector<Site> members_;
};

/// All lattice points with L1 norm at most r.
SiteSet l1_ball(double r, int d);

/// Minkowski sum of s with the lattice L1 ball of radius r.
SiteSet dilate(const SiteSet& s, std::int64_t r);

/// Axis-aligned box [-half, half]^d centred at `center`.
SiteSet box(const Site& center, std::int32_t half);

/// Lattice set viewed at scale n: the points x/n for x in `sites`. The sites are
/// kept unscaled; real coordinates are produced only at comparison time.
class ScaledSet {
 public:
  ScaledSet(SiteSet sites, std::int64_t scale);

  const SiteSet& sites() const { return sites_; }
  std::int64_t scale() const { return scale_; }
  int dim() const { return sites_.dim(); }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  std::vector<std::array<double, kMaxDim>> points() const;

 private:
  SiteSet sites_;
  std::int64_t scale_;
};

/// Hausdorff distance under the L1 ground metric, in scaled units.
/// Equal-scale inputs use an exact lattice distance transform (L1 distance on
/// Z^d is the nearest-neighbour graph distance); otherwise pairwise search.
double hausdorff(const ScaledSet& a, const ScaledSet& b);

/// The 2^d d! signed permutations of coordinates (the hyperoctahedral group).
struct SignedPermutation {
  std::array<int, kMaxDim> perm{};
  std::array<int, kMaxDim> sign{};
  int dim = 0;
  Site apply(const Site& x) const;
};
std::vector<SignedPermutation> hyperoctahedral_group(int d);

/// max over the hyperoctahedral group g of hausdorff(s, g(s)).
double symmetry_defect(const ScaledSet& s);

}  // namespace frog

#endif  // FROG_LATTICE_HPP
