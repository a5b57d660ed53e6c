#include "frog/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace frog {

Site::Site(std::initializer_list<std::int32_t> coords) {
  if (coords.size() < 1 || coords.size() > kMaxDim) {
    throw std::invalid_argument("Site: dimension must be 1, 2 or 3");
  }
  dim = static_cast<std::int32_t>(coords.size());
  std::copy(coords.begin(), coords.end(), c.begin());
}

Site Site::origin(int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("Site: dimension must be 1, 2 or 3");
  Site s;
  s.dim = d;
  return s;
}

Site Site::unit(int d, int axis, int sign) {
  Site s = origin(d);
  s[axis] = sign;
  return s;
}

Site operator+(const Site& a, const Site& b) {
  Site r = a;
  for (int i = 0; i < kMaxDim; ++i) r[i] += b[i];
  return r;
}

Site operator-(const Site& a, const Site& b) {
  Site r = a;
  for (int i = 0; i < kMaxDim; ++i) r[i] -= b[i];
  return r;
}

std::int64_t l1_norm(const Site& x) {
  std::int64_t s = 0;
  for (int i = 0; i < x.dim; ++i) s += std::abs(static_cast<std::int64_t>(x[i]));
  return s;
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s.dim + 1);
  for (int i = 0; i < kMaxDim; ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[i])) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------- SiteSet

SiteSet::SiteSet(int dim, std::vector<Site> members) : dim_(dim), members_(std::move(members)) {
  for (const auto& m : members_) {
    if (m.dim != dim_) throw std::invalid_argument("SiteSet: mixed dimensions");
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

SiteSet::SiteSet(int dim, std::initializer_list<Site> members)
    : SiteSet(dim, std::vector<Site>(members)) {}

bool SiteSet::contains(const Site& x) const {
  return std::binary_search(members_.begin(), members_.end(), x);
}

bool SiteSet::is_subset_of(const SiteSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
}

SiteSet SiteSet::united(const SiteSet& other) const {
  std::vector<Site> out;
  out.reserve(size() + other.size());
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(out));
  SiteSet r(dim_ ? dim_ : other.dim_);
  r.members_ = std::move(out);
  return r;
}

SiteSet l1_ball(double r, int d) {
  if (!(r >= 0)) throw std::invalid_argument("l1_ball: negative radius");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("l1_ball: dimension must be 1, 2 or 3");
  const auto R = static_cast<std::int32_t>(std::floor(r));
  std::vector<Site> out;
  Site x = Site::origin(d);
  // Enumerate the box [-R, R]^d and keep the ball.
  const std::int32_t lo = -R;
  for (std::int32_t a = lo; a <= R; ++a) {
    x[0] = a;
    if (d == 1) {
      out.push_back(x);
      continue;
    }
    const std::int32_t rb = R - std::abs(a);
    for (std::int32_t b = -rb; b <= rb; ++b) {
      x[1] = b;
      if (d == 2) {
        out.push_back(x);
        continue;
      }
      const std::int32_t rc = rb - std::abs(b);
      for (std::int32_t cc = -rc; cc <= rc; ++cc) {
        x[2] = cc;
        out.push_back(x);
      }
    }
  }
  return SiteSet(d, std::move(out));
}

SiteSet dilate(const SiteSet& s, std::int64_t r) {
  if (r < 0) throw std::invalid_argument("dilate: negative radius");
  if (s.empty()) return s;
  const SiteSet ball = l1_ball(static_cast<double>(r), s.dim());
  std::vector<Site> out;
  out.reserve(s.size() * ball.size());
  for (const auto& x : s) {
    for (const auto& y : ball) out.push_back(x + y);
  }
  return SiteSet(s.dim(), std::move(out));
}

SiteSet box(const Site& center, std::int32_t half) {
  if (half < 0) throw std::invalid_argument("box: negative half-width");
  const int d = center.dim;
  std::vector<Site> out;
  Site x = center;
  const std::int32_t hz = d >= 3 ? half : 0;
  const std::int32_t hy = d >= 2 ? half : 0;
  for (std::int32_t i = -half; i <= half; ++i) {
    for (std::int32_t j = -hy; j <= hy; ++j) {
      for (std::int32_t k = -hz; k <= hz; ++k) {
        x[0] = center[0] + i;
        if (d >= 2) x[1] = center[1] + j;
        if (d >= 3) x[2] = center[2] + k;
        out.push_back(x);
      }
    }
  }
  return SiteSet(d, std::move(out));
}

// --------------------------------------------------------------- ScaledSet

ScaledSet::ScaledSet(SiteSet sites, std::int64_t scale) : sites_(std::move(sites)), scale_(scale) {
  if (scale_ < 1) throw std::invalid_argument("ScaledSet: scale must be positive");
}

std::vector<std::array<double, kMaxDim>> ScaledSet::points() const {
  std::vector<std::array<double, kMaxDim>> out;
  out.reserve(size());
  const double inv = 1.0 / static_cast<double>(scale_);
  for (const auto& x : sites_) {
    std::array<double, kMaxDim> p{};
    for (int i = 0; i < dim(); ++i) p[static_cast<std::size_t>(i)] = x[i] * inv;
    out.push_back(p);
  }
  return out;
}

namespace {

constexpr std::int64_t kMaxTransformVolume = 64LL << 20;

/// Lattice L1 distance-to-set on a box, by multi-source BFS.
class DistanceTransform {
 public:
  DistanceTransform(Site lo, Site hi, int dim) : lo_(lo), dim_(dim) {
    volume_ = 1;
    for (int i = 0; i < kMaxDim; ++i) {
      extent_[static_cast<std::size_t>(i)] = i < dim ? static_cast<std::int64_t>(hi[i]) - lo[i] + 1 : 1;
      volume_ *= extent_[static_cast<std::size_t>(i)];
    }
  }

  std::int64_t volume() const { return volume_; }

  void compute(const SiteSet& targets) {
    dist_.assign(static_cast<std::size_t>(volume_), -1);
    std::vector<std::int64_t> frontier;
    frontier.reserve(targets.size());
    for (const auto& t : targets) {
      const auto i = index(t);
      if (dist_[static_cast<std::size_t>(i)] < 0) {
        dist_[static_cast<std::size_t>(i)] = 0;
        frontier.push_back(i);
      }
    }
    std::array<std::int64_t, kMaxDim> stride{1, extent_[0], extent_[0] * extent_[1]};
    std::vector<std::int64_t> next;
    std::int32_t level = 0;
    while (!frontier.empty()) {
      ++level;
      next.clear();
      for (const auto i : frontier) {
        std::int64_t rem = i;
        std::array<std::int64_t, kMaxDim> coord{};
        for (int a = kMaxDim - 1; a >= 0; --a) {
          coord[static_cast<std::size_t>(a)] = rem / stride[static_cast<std::size_t>(a)];
          rem %= stride[static_cast<std::size_t>(a)];
        }
        for (int a = 0; a < dim_; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          if (coord[ua] > 0) visit(i - stride[ua], level, next);
          if (coord[ua] + 1 < extent_[ua]) visit(i + stride[ua], level, next);
        }
      }
      frontier.swap(next);
    }
  }

  std::int32_t at(const Site& x) const { return dist_[static_cast<std::size_t>(index(x))]; }

 private:
  std::int64_t index(const Site& x) const {
    std::int64_t i = 0;
    std::int64_t stride = 1;
    for (int a = 0; a < dim_; ++a) {
      i += (static_cast<std::int64_t>(x[a]) - lo_[a]) * stride;
      stride *= extent_[static_cast<std::size_t>(a)];
    }
    return i;
  }

  void visit(std::int64_t j, std::int32_t level, std::vector<std::int64_t>& next) {
    auto& d = dist_[static_cast<std::size_t>(j)];
    if (d < 0) {
      d = level;
      next.push_back(j);
    }
  }

  Site lo_;
  int dim_;
  std::array<std::int64_t, kMaxDim> extent_{};
  std::int64_t volume_ = 1;
  std::vector<std::int32_t> dist_;
};

void bounding_box(const SiteSet& s, Site& lo, Site& hi) {
  for (const auto& x : s) {
    for (int i = 0; i < s.dim(); ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  }
}

// Exact pairwise Hausdorff distance between x/na and y/nb, as a rational
// numerator over na*nb.
double hausdorff_pairwise(const ScaledSet& a, const ScaledSet& b) {
  const std::int64_t na = a.scale();
  const std::int64_t nb = b.scale();
  auto directed = [&](const ScaledSet& from, std::int64_t nf, const ScaledSet& to, std::int64_t nt) {
    std::int64_t worst = 0;
    for (const auto& x : from.sites()) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const auto& y : to.sites()) {
        std::int64_t d = 0;
        for (int i = 0; i < from.dim(); ++i) {
          d += std::abs(static_cast<std::int64_t>(x[i]) * nt - static_cast<std::int64_t>(y[i]) * nf);
        }
        best = std::min(best, d);
        if (best <= worst) break;
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  const std::int64_t num = std::max(directed(a, na, b, nb), directed(b, nb, a, na));
  return static_cast<double>(num) / (static_cast<double>(na) * static_cast<double>(nb));
}

}  // namespace

double hausdorff(const ScaledSet& a, const ScaledSet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty set");
  if (a.dim() != b.dim()) throw std::invalid_argument("hausdorff: dimension mismatch");
  if (a.scale() != b.scale()) return hausdorff_pairwise(a, b);

  Site lo = *a.sites().begin();
  Site hi = lo;
  bounding_box(a.sites(), lo, hi);
  bounding_box(b.sites(), lo, hi);
  DistanceTransform to_b(lo, hi, a.dim());
  if (to_b.volume() > kMaxTransformVolume) return hausdorff_pairwise(a, b);

  std::int32_t worst = 0;
  to_b.compute(b.sites());
  for (const auto& x : a.sites()) worst = std::max(worst, to_b.at(x));
  DistanceTransform to_a(lo, hi, a.dim());
  to_a.compute(a.sites());
  for (const auto& y : b.sites()) worst = std::max(worst, to_a.at(y));
  return static_cast<double>(worst) / static_cast<double>(a.scale());
}

Site SignedPermutation::apply(const Site& x) const {
  Site y = Site::origin(dim);
  for (int i = 0; i < dim; ++i) {
    y[i] = sign[static_cast<std::size_t>(i)] * x[perm[static_cast<std::size_t>(i)]];
  }
  return y;
}

std::vector<SignedPermutation> hyperoctahedral_group(int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("hyperoctahedral_group: bad dimension");
  std::vector<SignedPermutation> out;
  std::array<int, kMaxDim> perm{0, 1, 2};
  do {
    for (int mask = 0; mask < (1 << d); ++mask) {
      SignedPermutation g;
      g.dim = d;
      g.perm = perm;
      for (int i = 0; i < d; ++i) g.sign[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1 : 1;
      out.push_back(g);
    }
  } while (std::next_permutation(perm.begin(), perm.begin() + d));
  return out;
}

double symmetry_defect(const ScaledSet& s) {
  if (s.empty()) throw std::invalid_argument("symmetry_defect: empty set");
  const int d = s.dim();
  const auto group = hyperoctahedral_group(d);

  // The orbit of s under the group lies in the cube [-M, M]^d.
  std::int32_t m = 0;
  for (const auto& x : s.sites()) {
    for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[i]));
  }
  Site lo = Site::origin(d);
  Site hi = Site::origin(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = -m;
    hi[i] = m;
  }
  DistanceTransform to_s(lo, hi, d);
  if (to_s.volume() > kMaxTransformVolume) {
    double worst = 0;
    for (const auto& g : group) {
      std::vector<Site> img;
      for (const auto& x : s.sites()) img.push_back(g.apply(x));
      worst = std::max(worst, hausdorff(s, ScaledSet(SiteSet(d, std::move(img)), s.scale())));
    }
    return worst;
  }
  // hausdorff(s, g s) = max(directed(g s -> s), directed(g^-1 s -> s)); the
  // group is closed under inversion, so one distance field to s suffices.
  to_s.compute(s.sites());
  std::int32_t worst = 0;
  for (const auto& g : group) {
    for (const auto& x : s.sites()) worst = std::max(worst, to_s.at(g.apply(x)));
  }
  return static_cast<double>(worst) / static_cast<double>(s.scale());
}

}  // namespace frog
