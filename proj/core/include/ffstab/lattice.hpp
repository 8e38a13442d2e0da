#pragma once

#include <compare>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <vector>

namespace ffstab {

// Nonempty finite interval [a, b] of Z, endpoints included.
struct Interval {
  int a = 0;
  int b = 0;

  Interval() = default;
  Interval(int a_, int b_);

  int diameter() const { return b - a; }
  int size() const { return b - a + 1; }
  bool contains(int x) const { return a <= x && x <= b; }
  bool contains(const Interval& o) const { return a <= o.a && o.b <= b; }

  auto operator<=>(const Interval&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Interval& iv);

struct BoundaryDistances {
  int r = 0;  // distance to the nearer endpoint
  int R = 0;  // distance to the farther endpoint
};

BoundaryDistances boundary_distances(const Interval& lam, int x);
Interval ball(const Interval& lam, int x, int n);
int cutoff(const Interval& lam, int x, int m);
std::optional<Interval> interior(const Interval& lam, int D);

// Finite set of sites, kept sorted and unique. May be empty.
class SiteSet {
 public:
  SiteSet() = default;
  SiteSet(std::vector<int> sites);
  SiteSet(std::initializer_list<int> sites) : SiteSet(std::vector<int>(sites)) {}
  SiteSet(const Interval& iv);

  const std::vector<int>& sites() const { return sites_; }
  bool empty() const { return sites_.empty(); }
  int size() const { return static_cast<int>(sites_.size()); }
  int min() const { return sites_.front(); }
  int max() const { return sites_.back(); }
  int diameter() const { return empty() ? 0 : max() - min(); }
  bool contains(int x) const;
  bool subset_of(const SiteSet& o) const;
  bool subset_of(const Interval& iv) const;
  bool is_interval() const;
  Interval hull() const;
  // Position of a site in the sorted list, -1 if absent.
  int index_of(int x) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }
  auto operator<=>(const SiteSet&) const = default;

 private:
  std::vector<int> sites_;
};

SiteSet set_union(const SiteSet& a, const SiteSet& b);
SiteSet set_intersection(const SiteSet& a, const SiteSet& b);
SiteSet set_difference(const SiteSet& a, const SiteSet& b);

std::ostream& operator<<(std::ostream& os, const SiteSet& s);

}  // namespace ffstab
