#include "ffstab/lattice.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "ffstab/errors.hpp"

namespace ffstab {

Interval::Interval(int a_, int b_) : a(a_), b(b_) {
  if (a > b) {
    throw DomainError("empty interval [" + std::to_string(a) + "," + std::to_string(b) + "]");
  }
}

std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.a << ',' << iv.b << ']';
}

namespace {
void require_site(const Interval& lam, int x) {
  if (!lam.contains(x)) {
    throw DomainError("site " + std::to_string(x) + " outside [" + std::to_string(lam.a) + "," +
                      std::to_string(lam.b) + "]");
  }
}
}  // namespace

BoundaryDistances boundary_distances(const Interval& lam, int x) {
  require_site(lam, x);
  int l = x - lam.a;
  int r = lam.b - x;
  return {std::min(l, r), std::max(l, r)};
}

Interval ball(const Interval& lam, int x, int n) {
  require_site(lam, x);
  if (n < 0) throw DomainError("negative ball radius");
  return {std::max(lam.a, x - n), std::min(lam.b, x + n)};
}

int cutoff(const Interval& lam, int x, int m) {
  if (m < 0) throw DomainError("negative cutoff argument");
  return std::min(m, boundary_distances(lam, x).r);
}

std::optional<Interval> interior(const Interval& lam, int D) {
  if (D < 0) throw DomainError("negative interior depth");
  if (lam.a + D > lam.b - D) return std::nullopt;
  return Interval(lam.a + D, lam.b - D);
}

SiteSet::SiteSet(std::vector<int> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

SiteSet::SiteSet(const Interval& iv) {
  sites_.reserve(iv.size());
  for (int x = iv.a; x <= iv.b; ++x) sites_.push_back(x);
}

bool SiteSet::contains(int x) const { return std::binary_search(sites_.begin(), sites_.end(), x); }

bool SiteSet::subset_of(const SiteSet& o) const {
  return std::includes(o.sites_.begin(), o.sites_.end(), sites_.begin(), sites_.end());
}

bool SiteSet::subset_of(const Interval& iv) const {
  return empty() || (iv.a <= min() && max() <= iv.b);
}

bool SiteSet::is_interval() const { return !empty() && max() - min() + 1 == size(); }

Interval SiteSet::hull() const {
  if (empty()) throw DomainError("hull of empty site set");
  return {min(), max()};
}

int SiteSet::index_of(int x) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), x);
  if (it == sites_.end() || *it != x) return -1;
  return static_cast<int>(it - sites_.begin());
}

SiteSet set_union(const SiteSet& a, const SiteSet& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SiteSet(std::move(out));
}

SiteSet set_intersection(const SiteSet& a, const SiteSet& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SiteSet(std::move(out));
}

SiteSet set_difference(const SiteSet& a, const SiteSet& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SiteSet(std::move(out));
}

std::ostream& operator<<(std::ostream& os, const SiteSet& s) {
  os << '{';
  bool first = true;
  for (int x : s) {
    if (!first) os << ',';
    os << x;
    first = false;
  }
  return os << '}';
}

}  // namespace ffstab
