#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkconv/metric_space.hpp"

namespace hkconv {

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

struct Atom {
  std::size_t index;
  double mass;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite nonnegative atomic measure on a FiniteMetricSpace.
///
/// Atoms are kept sorted by point index with strictly positive masses; masses
/// below kNegligibleMass are dropped on construction. The empty atom list is
/// the null measure.
class DiscreteMeasure {
 public:
  static constexpr double kNegligibleMass = 1e-15;

  explicit DiscreteMeasure(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("DiscreteMeasure: null space");
  }

  DiscreteMeasure(SpacePtr space, std::vector<Atom> atoms) : DiscreteMeasure(std::move(space)) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.index < b.index; });
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const auto& a = atoms[k];
      if (a.index >= space_->size()) throw std::out_of_range("DiscreteMeasure: atom index out of range");
      if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
        throw std::invalid_argument("DiscreteMeasure: masses must be finite and nonnegative");
      if (k > 0 && atoms[k - 1].index == a.index)
        throw std::invalid_argument("DiscreteMeasure: duplicate atom index");
      if (a.mass >= kNegligibleMass) atoms_.push_back(a);
    }
  }

  static DiscreteMeasure dirac(SpacePtr space, std::size_t index, double mass = 1.0) {
    return {std::move(space), {{index, mass}}};
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t support_size() const noexcept { return atoms_.size(); }
  bool is_null() const noexcept { return atoms_.empty(); }
  const FiniteMetricSpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  bool same_space(const DiscreteMeasure& o) const noexcept { return space_ == o.space_; }

  double total_mass() const noexcept {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.mass;
    return m;
  }

  double mass_at(std::size_t index) const noexcept {
    const auto it = find(index);
    return it == atoms_.end() ? 0.0 : it->mass;
  }

  bool contains(std::size_t index) const noexcept { return find(index) != atoms_.end(); }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    s.reserve(atoms_.size());
    for (const auto& a : atoms_) s.push_back(a.index);
    return s;
  }

  std::vector<double> masses() const {
    std::vector<double> m;
    m.reserve(atoms_.size());
    for (const auto& a : atoms_) m.push_back(a.mass);
    return m;
  }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) noexcept {
    return a.space_ == b.space_ && a.atoms_ == b.atoms_;
  }

  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    require_same_space(a, b, "measure sum");
    std::map<std::size_t, double> acc;
    for (const auto& x : a.atoms_) acc[x.index] += x.mass;
    for (const auto& x : b.atoms_) acc[x.index] += x.mass;
    return from_map(a.space_, acc);
  }

  static DiscreteMeasure from_map(SpacePtr space, const std::map<std::size_t, double>& acc) {
    std::vector<Atom> atoms;
    atoms.reserve(acc.size());
    for (const auto& [i, m] : acc) atoms.push_back({i, m});
    return {std::move(space), std::move(atoms)};
  }

  static void require_same_space(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* what) {
    if (!a.same_space(b)) throw std::invalid_argument(std::string(what) + ": measures live on different spaces");
  }

 private:
  std::vector<Atom>::const_iterator find(std::size_t index) const noexcept {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), index,
                                     [](const Atom& a, std::size_t i) { return a.index < i; });
    return (it != atoms_.end() && it->index == index) ? it : atoms_.end();
  }

  SpacePtr space_;
  std::vector<Atom> atoms_;
};

struct LebesgueDecomposition {
  std::map<std::size_t, double> density;  // on supp(mu)
  DiscreteMeasure singular;
};

/// nu = density * mu + singular, with singular carried by supp(nu) \ supp(mu).
inline LebesgueDecomposition lebesgue_decompose(const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
  DiscreteMeasure::require_same_space(nu, mu, "lebesgue_decompose");
  LebesgueDecomposition out{{}, DiscreteMeasure(nu.space_ptr())};
  for (const auto& a : mu.atoms()) out.density[a.index] = nu.mass_at(a.index) / a.mass;
  std::vector<Atom> singular;
  for (const auto& a : nu.atoms())
    if (!mu.contains(a.index)) singular.push_back(a);
  out.singular = DiscreteMeasure(nu.space_ptr(), std::move(singular));
  return out;
}

/// f_# mu onto target. f maps a point index to an optional target index;
/// std::nullopt for an atom of mu is an error.
template <class Map>
DiscreteMeasure pushforward(const DiscreteMeasure& mu, Map&& f, SpacePtr target) {
  std::map<std::size_t, double> acc;
  for (const auto& a : mu.atoms()) {
    const std::optional<std::size_t> img = f(a.index);
    if (!img) throw std::invalid_argument("pushforward: atom has no image");
    acc[*img] += a.mass;
  }
  return DiscreteMeasure::from_map(std::move(target), acc);
}

template <class Map>
DiscreteMeasure pushforward(const DiscreteMeasure& mu, Map&& f) {
  return pushforward(mu, std::forward<Map>(f), mu.space_ptr());
}

inline DiscreteMeasure scale(const DiscreteMeasure& mu, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("scale: factor must be finite and >= 0");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({a.index, lambda * a.mass});
  return {mu.space_ptr(), std::move(atoms)};
}

}  // namespace hkconv
